#include "minima/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <json.hpp>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "minima/checkpoint.hpp"
#include "minima/dataset.hpp"
#include "minima/error.hpp"
#include "minima/text_io.hpp"

namespace minima {

std::string_view control_name(Control c) noexcept {
    switch (c) {
        case Control::Baseline: return "baseline";
        case Control::Sam: return "sam";
        case Control::WeightDecay: return "weight_decay";
        case Control::SamWeightDecay: return "sam+weight_decay";
    }
    return "unknown";
}

std::optional<Control> parse_control(std::string_view name) {
    if (name == "baseline") return Control::Baseline;
    if (name == "sam") return Control::Sam;
    if (name == "weight_decay" || name == "wd") return Control::WeightDecay;
    if (name == "sam+weight_decay" || name == "sam_weight_decay" || name == "sam+wd") return Control::SamWeightDecay;
    return std::nullopt;
}

std::string_view study_name(StudyKind k) noexcept {
    switch (k) {
        case StudyKind::EpochLogged: return "epoch";
        case StudyKind::TargetLoss: return "target";
        case StudyKind::Controls: return "controls";
    }
    return "unknown";
}

std::optional<StudyKind> parse_study(std::string_view name) {
    if (name == "epoch" || name == "epoch_logged") return StudyKind::EpochLogged;
    if (name == "target" || name == "target_loss") return StudyKind::TargetLoss;
    if (name == "controls" || name == "matched_controls") return StudyKind::Controls;
    return std::nullopt;
}

void StudyConfig::validate() const {
    if (n_runs == 0) throw ValidationError("study.n_runs: must be >= 1");
    if (n_samples == 0) throw ValidationError("study.n_samples: must be >= 1");
    if (!std::is_sorted(log_epochs.begin(), log_epochs.end())) {
        throw ValidationError("study.log_epochs: must be sorted ascending");
    }
    if (!std::is_sorted(target_losses.begin(), target_losses.end(), std::greater<>())) {
        throw ValidationError("study.target_losses: must be sorted descending");
    }
    if (kind == StudyKind::EpochLogged && log_epochs.empty()) throw ValidationError("study.log_epochs: empty");
    if (kind == StudyKind::TargetLoss && target_losses.empty()) throw ValidationError("study.target_losses: empty");
    if (kind == StudyKind::Controls && controls.empty()) throw ValidationError("study.controls: empty");
    if (widths.size() < 2 || widths.front() != 2 || widths.back() != 1) {
        throw ValidationError("study.widths: must start at 2 inputs and end at 1 output");
    }
    if (!(control_rho > 0.0)) throw ValidationError("study.control_rho: must be positive");
    if (!(control_weight_decay >= 0.0)) throw ValidationError("study.control_weight_decay: must be >= 0");
    if (!(sharpness.rho > 0.0)) throw ValidationError("study.sharpness.rho: must be positive");
    if (sharpness.num_perturbations == 0) throw ValidationError("study.sharpness.k: must be >= 1");
    if (jobs == 0) throw ValidationError("study.jobs: must be >= 1");
    try {
        optimizer.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("study.") + e.what());
    }
}

StudyConfig apply_scale(StudyConfig config, double factor) {
    if (!(factor > 0.0)) throw ValidationError("scale: must be positive");
    config.n_samples = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config.n_samples * factor)));
    config.epochs_budget = static_cast<std::uint64_t>(std::llround(static_cast<double>(config.epochs_budget) * factor));
    std::erase_if(config.log_epochs, [&](std::uint64_t e) { return e > config.epochs_budget; });
    if (config.log_epochs.empty() || config.log_epochs.back() != config.epochs_budget) {
        config.log_epochs.push_back(config.epochs_budget);
    }
    return config;
}

namespace {

using json = nlohmann::ordered_json;

template <typename T>
T field(const nlohmann::json& j, const char* key, const T& fallback, const std::string& path) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(path + key + ": wrong type");
    }
}

}  // namespace

StudyConfig study_config_from_json(const std::string& text, StudyConfig c) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config: expected a JSON object");
    const std::string p = "study.";
    if (j.contains("kind")) {
        const auto k = parse_study(field<std::string>(j, "kind", "", p));
        if (!k) throw ValidationError("study.kind: unknown study kind");
        c.kind = *k;
    }
    if (j.contains("objective")) {
        const auto o = parse_objective(field<std::string>(j, "objective", "", p));
        if (!o) throw ValidationError("study.objective: unknown function");
        c.objective = *o;
    }
    c.n_runs = field(j, "n_runs", c.n_runs, p);
    c.n_samples = field(j, "n_samples", c.n_samples, p);
    c.epochs_budget = field(j, "epochs_budget", c.epochs_budget, p);
    c.log_epochs = field(j, "log_epochs", c.log_epochs, p);
    c.target_losses = field(j, "target_losses", c.target_losses, p);
    c.base_seed = field(j, "base_seed", c.base_seed, p);
    c.widths = field(j, "widths", c.widths, p);
    c.control_rho = field(j, "control_rho", c.control_rho, p);
    c.control_weight_decay = field(j, "control_weight_decay", c.control_weight_decay, p);
    c.convergence_tol = field(j, "convergence_tol", c.convergence_tol, p);
    c.convergence_window = field(j, "convergence_window", c.convergence_window, p);
    c.jobs = field(j, "jobs", c.jobs, p);
    if (j.contains("controls")) {
        c.controls.clear();
        for (const auto& name : field<std::vector<std::string>>(j, "controls", {}, p)) {
            const auto ctl = parse_control(name);
            if (!ctl) throw ValidationError("study.controls: unknown control '" + name + "'");
            c.controls.push_back(*ctl);
        }
    }
    if (j.contains("optimizer")) {
        const auto& o = j.at("optimizer");
        const std::string op = "study.optimizer.";
        if (!o.is_object()) throw ValidationError("study.optimizer: expected an object");
        if (o.contains("kind")) {
            const auto k = field<std::string>(o, "kind", "", op);
            if (k == "adam") {
                c.optimizer.kind = OptimizerKind::Adam;
            } else if (k == "sgd" || k == "sgd_momentum") {
                c.optimizer.kind = OptimizerKind::SgdMomentum;
            } else {
                throw ValidationError("study.optimizer.kind: expected adam or sgd");
            }
        }
        c.optimizer.learning_rate = field(o, "learning_rate", c.optimizer.learning_rate, op);
        c.optimizer.momentum = field(o, "momentum", c.optimizer.momentum, op);
        c.optimizer.beta1 = field(o, "beta1", c.optimizer.beta1, op);
        c.optimizer.beta2 = field(o, "beta2", c.optimizer.beta2, op);
        c.optimizer.eps = field(o, "eps", c.optimizer.eps, op);
        c.optimizer.sam = field(o, "sam", c.optimizer.sam, op);
        c.optimizer.rho = field(o, "rho", c.optimizer.rho, op);
        c.optimizer.weight_decay = field(o, "weight_decay", c.optimizer.weight_decay, op);
    }
    if (j.contains("sharpness")) {
        const auto& s = j.at("sharpness");
        const std::string sp = "study.sharpness.";
        if (!s.is_object()) throw ValidationError("study.sharpness: expected an object");
        c.sharpness.rho = field(s, "rho", c.sharpness.rho, sp);
        c.sharpness.num_perturbations = field(s, "k", c.sharpness.num_perturbations, sp);
        c.sharpness.layer_count = field(s, "layer_count", c.sharpness.layer_count, sp);
    }
    return c;
}

std::string study_config_to_json(const StudyConfig& c) {
    json j;
    j["kind"] = std::string(study_name(c.kind));
    j["objective"] = std::string(objective_name(c.objective));
    j["n_runs"] = c.n_runs;
    j["n_samples"] = c.n_samples;
    j["epochs_budget"] = c.epochs_budget;
    j["log_epochs"] = c.log_epochs;
    j["target_losses"] = c.target_losses;
    j["base_seed"] = c.base_seed;
    j["widths"] = c.widths;
    std::vector<std::string> controls;
    for (Control ctl : c.controls) controls.emplace_back(control_name(ctl));
    j["controls"] = controls;
    j["control_rho"] = c.control_rho;
    j["control_weight_decay"] = c.control_weight_decay;
    j["convergence_tol"] = c.convergence_tol;
    j["convergence_window"] = c.convergence_window;
    j["jobs"] = c.jobs;
    j["optimizer"] = {{"kind", c.optimizer.kind == OptimizerKind::Adam ? "adam" : "sgd"},
                      {"learning_rate", c.optimizer.learning_rate},
                      {"momentum", c.optimizer.momentum},
                      {"beta1", c.optimizer.beta1},
                      {"beta2", c.optimizer.beta2},
                      {"eps", c.optimizer.eps},
                      {"sam", c.optimizer.sam},
                      {"rho", c.optimizer.rho},
                      {"weight_decay", c.optimizer.weight_decay}};
    j["sharpness"] = {{"rho", c.sharpness.rho},
                      {"k", c.sharpness.num_perturbations},
                      {"layer_count", c.sharpness.layer_count}};
    return j.dump(2) + "\n";
}

namespace {

// One model being trained full-batch on one dataset. After construction and
// after every step(), train_loss() and the stored gradient refer to the
// current parameters. train_loss() is the data loss without the decay term.
class TrainingRun {
public:
    TrainingRun(NetworkParams init, const RegressionDataset& train, const OptimizerConfig& opt)
        : params_(std::move(init)),
          probe_(params_),
          train_(train),
          ev_(params_.widths()),
          optimizer_(opt, params_.size()),
          weight_decay_(opt.weight_decay),
          grad_(params_.size()) {
        refresh();
    }

    double train_loss() const noexcept { return train_loss_; }
    const NetworkParams& params() const noexcept { return params_; }
    std::uint64_t grad_evals() const noexcept { return grad_evals_; }

    void step() {
        const GradientFn grad_fn = [this](std::span<const double> theta, std::span<double> g) {
            std::copy(theta.begin(), theta.end(), probe_.values().begin());
            const double l = ev_.loss_and_gradient(probe_, train_.view(), LossKind::MSE, 0.0, g);
            add_weight_decay_gradient(theta, weight_decay_, g);
            return l;
        };
        grad_evals_ += static_cast<std::uint64_t>(optimizer_.step(params_.values(), grad_, grad_fn));
        refresh();
    }

private:
    void refresh() {
        train_loss_ = ev_.loss_and_gradient(params_, train_.view(), LossKind::MSE, 0.0, grad_);
        add_weight_decay_gradient(params_.values(), weight_decay_, grad_);
        ++grad_evals_;
    }

    NetworkParams params_;
    NetworkParams probe_;
    const RegressionDataset& train_;
    Evaluator ev_;
    Optimizer optimizer_;
    double weight_decay_;
    std::vector<double> grad_;
    double train_loss_ = 0.0;
    std::uint64_t grad_evals_ = 0;
};

struct RunSetup {
    StudyKind study;
    Objective objective;
    Control control = Control::Baseline;
    std::size_t run_index;
    std::uint64_t seed;  // dataset and sharpness seed
    NetworkParams init;
    OptimizerConfig optimizer;
};

class RunRecorder {
public:
    RunRecorder(const StudyConfig& cfg, const RunSetup& setup, const RegressionDataset& train,
                const RegressionDataset& test)
        : cfg_(cfg),
          setup_(setup),
          train_(train),
          test_(test),
          test_ev_(setup.init.widths()),
          init_hash_(checkpoint_hash(setup.init)),
          train_id_(dataset_id(train)) {}

    RunRecord base(const std::string& tag_kind, double tag) const {
        RunRecord r;
        r.study = setup_.study;
        r.objective = setup_.objective;
        r.control = setup_.control;
        r.run_index = setup_.run_index;
        r.seed = setup_.seed;
        r.tag_kind = tag_kind;
        r.tag = tag;
        r.init_hash = init_hash_;
        r.train_dataset_id = train_id_;
        r.initial_train_loss = initial_train_loss;
        r.sharpness.config = cfg_.sharpness;
        r.sharpness.config.seed = setup_.seed;
        return r;
    }

    RunRecord measure(const TrainingRun& run, std::uint64_t epoch, const std::string& tag_kind, double tag,
                      bool reached) {
        RunRecord r = base(tag_kind, tag);
        r.epoch = epoch;
        r.reached = reached;
        r.train_loss = run.train_loss();
        r.test_loss = test_ev_.loss(run.params(), test_.view(), LossKind::MSE);
        r.generalisation_gap = std::abs(r.test_loss - r.train_loss);
        r.grad_evals = run.grad_evals();
        SharpnessConfig sc = cfg_.sharpness;
        sc.seed = setup_.seed;
        r.sharpness = measure_sharpness(run.params(), train_.view(), LossKind::MSE, sc);
        r.sharpness.checkpoint_hash = checkpoint_hash(run.params());
        r.sharpness.dataset_id = train_id_;
        return r;
    }

    RunRecord failure(const std::string& tag_kind, double tag, std::uint64_t epoch, const std::string& what) const {
        RunRecord r = base(tag_kind, tag);
        r.epoch = epoch;
        r.failed = true;
        r.reached = false;
        r.failure = what;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        r.train_loss = r.test_loss = r.generalisation_gap = nan;
        r.sharpness.sam_sharpness = r.sharpness.fisher_rao_norm = r.sharpness.relative_flatness = nan;
        return r;
    }

    double initial_train_loss = 0.0;

private:
    const StudyConfig& cfg_;
    const RunSetup& setup_;
    const RegressionDataset& train_;
    const RegressionDataset& test_;
    Evaluator test_ev_;
    std::string init_hash_;
    std::string train_id_;
};

NetworkParams initial_params(const StudyConfig& cfg, std::uint64_t seed) {
    NetworkParams p(cfg.widths);
    kaiming_uniform_init(p, seed);
    return p;
}

std::vector<RunRecord> epoch_logged_run(const StudyConfig& cfg, const RunSetup& setup) {
    const auto train = generate_dataset(setup.objective, cfg.n_samples, setup.seed, Split::Train);
    const auto test = generate_dataset(setup.objective, cfg.n_samples, setup.seed, Split::Test);
    RunRecorder rec(cfg, setup, train, test);
    std::vector<RunRecord> out;
    std::size_t next = 0;
    std::uint64_t epoch = 0;
    try {
        TrainingRun run(setup.init, train, setup.optimizer);
        rec.initial_train_loss = run.train_loss();
        const std::uint64_t last = std::min(cfg.log_epochs.back(), cfg.epochs_budget);
        for (;; ++epoch) {
            while (next < cfg.log_epochs.size() && cfg.log_epochs[next] == epoch) {
                out.push_back(rec.measure(run, epoch, "epoch", static_cast<double>(epoch), true));
                ++next;
            }
            if (epoch >= last) break;
            run.step();
        }
    } catch (const NumericError& e) {
        for (; next < cfg.log_epochs.size() && cfg.log_epochs[next] <= cfg.epochs_budget; ++next) {
            out.push_back(rec.failure("epoch", static_cast<double>(cfg.log_epochs[next]), epoch, e.what()));
        }
    }
    return out;
}

std::vector<RunRecord> target_loss_run(const StudyConfig& cfg, const RunSetup& setup) {
    const auto train = generate_dataset(setup.objective, cfg.n_samples, setup.seed, Split::Train);
    const auto test = generate_dataset(setup.objective, cfg.n_samples, setup.seed, Split::Test);
    RunRecorder rec(cfg, setup, train, test);
    std::vector<RunRecord> out;
    std::size_t next = 0;
    std::uint64_t epoch = 0;
    try {
        TrainingRun run(setup.init, train, setup.optimizer);
        rec.initial_train_loss = run.train_loss();
        for (;; ++epoch) {
            while (next < cfg.target_losses.size() && run.train_loss() <= cfg.target_losses[next]) {
                out.push_back(rec.measure(run, epoch, "target", cfg.target_losses[next], true));
                ++next;
            }
            if (next == cfg.target_losses.size() || epoch >= cfg.epochs_budget) break;
            run.step();
        }
        // Budget exhausted: the remaining targets are unreachable for this run.
        for (; next < cfg.target_losses.size(); ++next) {
            out.push_back(rec.measure(run, epoch, "target", cfg.target_losses[next], false));
        }
    } catch (const NumericError& e) {
        for (; next < cfg.target_losses.size(); ++next) {
            out.push_back(rec.failure("target", cfg.target_losses[next], epoch, e.what()));
        }
    }
    return out;
}

std::vector<RunRecord> controls_run(const StudyConfig& cfg, const RunSetup& setup) {
    const auto train = generate_dataset(setup.objective, cfg.n_samples, setup.seed, Split::Train);
    const auto test = generate_dataset(setup.objective, cfg.n_samples, setup.seed, Split::Test);
    RunRecorder rec(cfg, setup, train, test);
    std::uint64_t epoch = 0;
    try {
        TrainingRun run(setup.init, train, setup.optimizer);
        rec.initial_train_loss = run.train_loss();
        const std::size_t window = static_cast<std::size_t>(std::max<std::uint64_t>(cfg.convergence_window, 1));
        std::vector<double> history(window + 1);
        bool converged = false;
        for (;; ++epoch) {
            history[epoch % (window + 1)] = run.train_loss();
            if (epoch >= window) {
                const double before = history[(epoch - window) % (window + 1)];
                if (before - run.train_loss() < cfg.convergence_tol) converged = true;
            }
            if (converged || epoch >= cfg.epochs_budget) break;
            run.step();
        }
        return {rec.measure(run, epoch, "final", static_cast<double>(epoch), true)};
    } catch (const NumericError& e) {
        return {rec.failure("final", 0.0, epoch, e.what())};
    }
}

// Runs tasks [0, n) on `jobs` threads; results are concatenated in task order.
template <typename Fn>
std::vector<RunRecord> run_tasks(std::size_t n, std::size_t jobs, Fn&& fn) {
    std::vector<std::vector<RunRecord>> results(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                results[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min(std::max<std::size_t>(jobs, 1), n);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
    std::vector<RunRecord> out;
    for (auto& r : results) std::move(r.begin(), r.end(), std::back_inserter(out));
    return out;
}

OptimizerConfig control_optimizer(const StudyConfig& cfg, Control c) {
    OptimizerConfig o = cfg.optimizer;
    o.sam = c == Control::Sam || c == Control::SamWeightDecay;
    if (o.sam) o.rho = cfg.control_rho;
    o.weight_decay = (c == Control::WeightDecay || c == Control::SamWeightDecay) ? cfg.control_weight_decay : 0.0;
    return o;
}

}  // namespace

TrainOutcome train_model(NetworkParams init, const RegressionDataset& train, const OptimizerConfig& optimizer,
                         std::uint64_t epochs) {
    optimizer.validate();
    TrainingRun run(std::move(init), train, optimizer);
    for (std::uint64_t e = 0; e < epochs; ++e) run.step();
    return {run.params(), run.train_loss(), epochs, run.grad_evals()};
}

std::vector<RunRecord> run_epoch_logged_study(const StudyConfig& cfg) {
    cfg.validate();
    const NetworkParams init = initial_params(cfg, cfg.base_seed);
    return run_tasks(cfg.n_runs, cfg.jobs, [&](std::size_t i) {
        const RunSetup setup{StudyKind::EpochLogged, cfg.objective, Control::Baseline, i, cfg.base_seed + i, init,
                             cfg.optimizer};
        return epoch_logged_run(cfg, setup);
    });
}

std::vector<RunRecord> run_target_loss_study(const StudyConfig& cfg) {
    cfg.validate();
    const NetworkParams init = initial_params(cfg, cfg.base_seed);
    return run_tasks(cfg.n_runs, cfg.jobs, [&](std::size_t i) {
        const RunSetup setup{StudyKind::TargetLoss, cfg.objective, Control::Baseline, i, cfg.base_seed + i, init,
                             cfg.optimizer};
        return target_loss_run(cfg, setup);
    });
}

std::vector<RunRecord> run_matched_controls(const StudyConfig& cfg) {
    cfg.validate();
    const std::size_t n_controls = cfg.controls.size();
    return run_tasks(n_controls * cfg.n_runs, cfg.jobs, [&](std::size_t task) {
        const std::size_t c = task / cfg.n_runs;
        const std::size_t i = task % cfg.n_runs;
        const std::uint64_t seed = cfg.base_seed + i;
        const RunSetup setup{StudyKind::Controls,
                             cfg.objective,
                             cfg.controls[c],
                             i,
                             seed,
                             initial_params(cfg, seed),
                             control_optimizer(cfg, cfg.controls[c])};
        return controls_run(cfg, setup);
    });
}

std::vector<RunRecord> run_study(const StudyConfig& cfg) {
    switch (cfg.kind) {
        case StudyKind::EpochLogged: return run_epoch_logged_study(cfg);
        case StudyKind::TargetLoss: return run_target_loss_study(cfg);
        case StudyKind::Controls: return run_matched_controls(cfg);
    }
    return {};
}

AggregateRow summarize(std::vector<double> values) {
    AggregateRow row{};
    row.n = values.size();
    if (values.empty()) {
        row.mean = std::numeric_limits<double>::quiet_NaN();
        return row;
    }
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    row.mean = sum / static_cast<double>(values.size());
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - row.mean) * (v - row.mean);
        const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
        row.sem = sd / std::sqrt(static_cast<double>(values.size()));
    }
    return row;
}

namespace {

double metric_value(const RunRecord& r, std::string_view metric) {
    if (metric == "train_loss") return r.train_loss;
    if (metric == "test_loss") return r.test_loss;
    if (metric == "generalisation_gap") return r.generalisation_gap;
    if (metric == "sam_sharpness") return r.sharpness.sam_sharpness;
    if (metric == "fisher_rao_norm") return r.sharpness.fisher_rao_norm;
    if (metric == "relative_flatness") return r.sharpness.relative_flatness;
    if (metric == "epoch") return static_cast<double>(r.epoch);
    return std::numeric_limits<double>::quiet_NaN();
}

using CellKey = std::tuple<int, int, int, std::string, double>;

CellKey cell_key(const RunRecord& r) {
    return {static_cast<int>(r.study), static_cast<int>(r.objective), static_cast<int>(r.control), r.tag_kind, r.tag};
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records) {
    std::map<CellKey, std::vector<const RunRecord*>> cells;
    for (const auto& r : records) cells[cell_key(r)].push_back(&r);
    std::vector<AggregateRow> out;
    for (const auto& [key, members] : cells) {
        std::size_t excluded = 0;
        std::vector<const RunRecord*> kept;
        for (const RunRecord* r : members) {
            if (r->failed || !r->reached) {
                ++excluded;
            } else {
                kept.push_back(r);
            }
        }
        for (const char* metric : kAggregateMetrics) {
            std::vector<double> values;
            for (const RunRecord* r : kept) values.push_back(metric_value(*r, metric));
            AggregateRow row = summarize(std::move(values));
            row.study = members.front()->study;
            row.objective = members.front()->objective;
            row.control = members.front()->control;
            row.tag_kind = members.front()->tag_kind;
            row.tag = members.front()->tag;
            row.metric = metric;
            row.excluded = excluded;
            out.push_back(std::move(row));
        }
    }
    return out;
}

std::string runs_csv(const std::vector<RunRecord>& records) {
    std::string out =
        "study,objective,control,run_index,seed,tag_kind,tag,epoch,reached,failed,train_loss,test_loss,"
        "generalisation_gap,sam_sharpness,fisher_rao_norm,fr_clamped,relative_flatness,rho,k_perturb,layer_count,"
        "grad_evals,initial_train_loss,init_hash,train_dataset_id,checkpoint_hash\n";
    for (const auto& r : records) {
        out += std::string(study_name(r.study)) + ',' + std::string(objective_name(r.objective)) + ',' +
               std::string(control_name(r.control)) + ',' + std::to_string(r.run_index) + ',' +
               std::to_string(r.seed) + ',' + r.tag_kind + ',' + format_double(r.tag) + ',' +
               std::to_string(r.epoch) + ',' + (r.reached ? "1" : "0") + ',' + (r.failed ? "1" : "0") + ',' +
               format_double(r.train_loss) + ',' + format_double(r.test_loss) + ',' +
               format_double(r.generalisation_gap) + ',' + format_double(r.sharpness.sam_sharpness) + ',' +
               format_double(r.sharpness.fisher_rao_norm) + ',' + (r.sharpness.fr_clamped ? "1" : "0") + ',' +
               format_double(r.sharpness.relative_flatness) + ',' + format_double(r.sharpness.config.rho) + ',' +
               std::to_string(r.sharpness.config.num_perturbations) + ',' +
               std::to_string(r.sharpness.config.layer_count) + ',' + std::to_string(r.grad_evals) + ',' +
               format_double(r.initial_train_loss) + ',' + r.init_hash + ',' + r.train_dataset_id + ',' +
               r.sharpness.checkpoint_hash + '\n';
    }
    return out;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
    std::string out = "study,objective,control,tag_kind,tag,n,excluded";
    for (const char* metric : kAggregateMetrics) {
        out += std::string(",") + metric + "_mean," + metric + "_sem";
    }
    out += '\n';
    constexpr std::size_t kMetrics = std::size(kAggregateMetrics);
    for (std::size_t i = 0; i + kMetrics <= rows.size(); i += kMetrics) {
        const AggregateRow& first = rows[i];
        out += std::string(study_name(first.study)) + ',' + std::string(objective_name(first.objective)) + ',' +
               std::string(control_name(first.control)) + ',' + first.tag_kind + ',' + format_double(first.tag) +
               ',' + std::to_string(first.n) + ',' + std::to_string(first.excluded);
        for (std::size_t m = 0; m < kMetrics; ++m) {
            const AggregateRow& row = rows[i + m];
            out += ',' + format_double(row.mean) + ',' + (row.sem ? format_double(*row.sem) : std::string());
        }
        out += '\n';
    }
    return out;
}

}  // namespace minima
