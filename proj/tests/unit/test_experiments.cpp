#include <doctest.h>

#include <cmath>
#include <map>

#include "minima/dataset.hpp"
#include "minima/error.hpp"
#include "minima/experiments.hpp"

using namespace minima;

namespace {

StudyConfig tiny(StudyKind kind, Objective fn) {
    StudyConfig c;
    c.kind = kind;
    c.objective = fn;
    c.n_runs = 10;
    c.n_samples = 40;
    c.epochs_budget = 7;
    c.log_epochs = {0, 1, 2, 3, 4, 5, 6, 7};
    c.widths = {2, 8, 8, 1};
    c.sharpness.num_perturbations = 5;
    c.convergence_window = 3;
    return c;
}

}  // namespace

TEST_CASE("epoch-logged study: counts, matched init, epoch 0 loss") {
    const auto cfg = tiny(StudyKind::EpochLogged, Objective::Sphere);
    const auto recs = run_epoch_logged_study(cfg);
    CHECK(recs.size() == 80);
    for (const auto& r : recs) {
        CHECK(r.init_hash == recs.front().init_hash);
        CHECK(r.generalisation_gap >= 0.0);
        CHECK(r.generalisation_gap == std::abs(r.test_loss - r.train_loss));
        if (r.epoch == 0) {
            NetworkParams init(cfg.widths);
            kaiming_uniform_init(init, cfg.base_seed);
            const auto ds = generate_dataset(cfg.objective, cfg.n_samples, r.seed, Split::Train);
            CHECK(r.train_loss == loss(init, ds.view(), LossKind::MSE));
            CHECK(r.train_loss == r.initial_train_loss);
        }
    }
    CHECK(recs[0].train_dataset_id != recs[8].train_dataset_id);
}

TEST_CASE("sphere training loss decreases in the mean across log epochs") {
    auto cfg = tiny(StudyKind::EpochLogged, Objective::Sphere);
    cfg.n_runs = 3;
    cfg.n_samples = 200;
    cfg.epochs_budget = 1000;
    cfg.log_epochs = {0, 1, 10, 100, 1000};
    cfg.widths = {2, 64, 64, 1};
    const auto rows = aggregate(run_epoch_logged_study(cfg));
    std::vector<double> means;
    for (const auto& r : rows) {
        if (r.metric == "train_loss") means.push_back(r.mean);
    }
    REQUIRE(means.size() == 5);
    for (std::size_t i = 1; i < means.size(); ++i) CHECK(means[i] < means[i - 1]);
}

TEST_CASE("target-loss study: monotone epochs and unreachable marking") {
    auto cfg = tiny(StudyKind::TargetLoss, Objective::Sphere);
    cfg.n_runs = 3;
    cfg.n_samples = 200;
    cfg.widths = {2, 64, 64, 1};
    cfg.epochs_budget = 600;
    cfg.target_losses = {300, 10, 1, 1e-9};
    const auto recs = run_target_loss_study(cfg);
    REQUIRE(recs.size() == 12);
    std::map<std::size_t, std::vector<const RunRecord*>> by_run;
    for (const auto& r : recs) by_run[r.run_index].push_back(&r);
    for (const auto& [run, rs] : by_run) {
        REQUIRE(rs.size() == 4);
        for (std::size_t i = 1; i < rs.size(); ++i) CHECK(rs[i]->epoch >= rs[i - 1]->epoch);
        CHECK(rs[0]->reached);
        CHECK(rs[0]->train_loss <= 300);
        CHECK_FALSE(rs[3]->reached);
        CHECK(rs[3]->epoch == cfg.epochs_budget);
    }
    for (const auto& row : aggregate(recs)) {
        if (row.tag == 1e-9) {
            CHECK(row.n == 0);
            CHECK(row.excluded == 3);
        }
    }
}

TEST_CASE("matched controls: counts, shared init, SAM gradient evaluations") {
    auto cfg = tiny(StudyKind::Controls, Objective::Booth);
    cfg.epochs_budget = 20;
    cfg.convergence_tol = -1.0;  // never converge early
    const auto recs = run_matched_controls(cfg);
    CHECK(recs.size() == 40);
    std::map<std::size_t, std::map<Control, const RunRecord*>> by_seed;
    for (const auto& r : recs) by_seed[r.run_index][r.control] = &r;
    for (const auto& [seed, m] : by_seed) {
        REQUIRE(m.size() == 4);
        const auto* base = m.at(Control::Baseline);
        const auto* wd = m.at(Control::WeightDecay);
        const auto* sam = m.at(Control::Sam);
        CHECK(base->init_hash == wd->init_hash);
        CHECK(base->init_hash == sam->init_hash);
        CHECK(base->initial_train_loss == wd->initial_train_loss);
        CHECK(base->train_dataset_id == sam->train_dataset_id);
        CHECK(sam->grad_evals > base->grad_evals);
        CHECK(sam->grad_evals == 2 * base->grad_evals - 1);
        CHECK(base->epoch == 20);
    }
    CHECK(by_seed.at(0).at(Control::Baseline)->init_hash != by_seed.at(1).at(Control::Baseline)->init_hash);
}

TEST_CASE("diverging runs are marked failed and excluded") {
    auto cfg = tiny(StudyKind::EpochLogged, Objective::Rosenbrock);
    cfg.n_runs = 2;
    cfg.epochs_budget = 200;
    cfg.log_epochs = {0, 200};
    cfg.optimizer.kind = OptimizerKind::SgdMomentum;
    cfg.optimizer.learning_rate = 1e3;
    const auto recs = run_epoch_logged_study(cfg);
    REQUIRE(recs.size() == 4);
    for (const auto& r : recs) {
        if (r.epoch == 0 && !r.failed) continue;
        CHECK(r.failed);
        CHECK(std::isnan(r.train_loss));
    }
    const auto csv = runs_csv(recs);
    CHECK(csv.find(",nan,") != std::string::npos);
    for (const auto& row : aggregate(recs)) {
        if (row.tag == 200) {
            CHECK(row.n == 0);
            CHECK(row.excluded == 2);
        }
    }
}

TEST_CASE("aggregate arithmetic") {
    auto a = summarize({1.0, 2.0, 3.0});
    CHECK(a.mean == 2.0);
    REQUIRE(a.sem.has_value());
    CHECK(*a.sem == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
    a = summarize({4.0, 4.0, 4.0, 4.0});
    CHECK(*a.sem == 0.0);
    a = summarize({7.0});
    CHECK(a.mean == 7.0);
    CHECK_FALSE(a.sem.has_value());
    CHECK(summarize({3.0, 1.0, 2.0}).mean == summarize({1.0, 2.0, 3.0}).mean);
}

TEST_CASE("aggregate CSV has one row per control with metric column pairs") {
    auto cfg = tiny(StudyKind::Controls, Objective::Sphere);
    cfg.n_runs = 2;
    const auto csv = aggregate_csv(aggregate(run_matched_controls(cfg)));
    const auto header = csv.substr(0, csv.find('\n'));
    CHECK(header.find("sam_sharpness_mean,sam_sharpness_sem") != std::string::npos);
    CHECK(header.find("relative_flatness_mean") != std::string::npos);
    std::size_t lines = 0;
    for (char ch : csv) lines += ch == '\n';
    CHECK(lines == 5);
}

TEST_CASE("studies are deterministic and independent of job count") {
    auto cfg = tiny(StudyKind::TargetLoss, Objective::Himmelblau);
    cfg.n_runs = 4;
    cfg.epochs_budget = 50;
    const auto a = runs_csv(run_study(cfg));
    const auto b = runs_csv(run_study(cfg));
    CHECK(a == b);
    cfg.jobs = 3;
    CHECK(runs_csv(run_study(cfg)) == a);
}

TEST_CASE("config JSON round trip and validation paths") {
    StudyConfig c;
    c.kind = StudyKind::Controls;
    c.objective = Objective::Beale;
    c.n_runs = 3;
    c.optimizer.learning_rate = 0.01;
    c.sharpness.rho = 0.01;
    const auto back = study_config_from_json(study_config_to_json(c));
    CHECK(study_config_to_json(back) == study_config_to_json(c));
    CHECK_THROWS_WITH_AS(study_config_from_json(R"({"n_runs": "ten"})"), doctest::Contains("study.n_runs"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(study_config_from_json(R"({"optimizer": {"learning_rate": -1}})").validate(),
                         doctest::Contains("optimizer.learning_rate"), ValidationError);
    CHECK_THROWS_WITH_AS(study_config_from_json(R"({"log_epochs": [10, 1]})").validate(),
                         doctest::Contains("study.log_epochs"), ValidationError);
    CHECK_THROWS_WITH_AS(study_config_from_json(R"({"target_losses": [1, 10]})").validate(),
                         doctest::Contains("study.target_losses"), ValidationError);
    CHECK_THROWS_AS(study_config_from_json("{"), ValidationError);
}

TEST_CASE("scale factor shrinks samples and budget") {
    const auto s = apply_scale(StudyConfig{}, 0.2);
    CHECK(s.n_samples == 2000);
    CHECK(s.epochs_budget == 200'000);
    CHECK(s.log_epochs.back() == 200'000);
    CHECK(s.log_epochs[s.log_epochs.size() - 2] == 100'000);
    CHECK_THROWS_AS(apply_scale(StudyConfig{}, 0.0), ValidationError);
}
