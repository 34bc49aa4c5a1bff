// Acceptance checks. Usage: acceptance_tests <minima-cli> <scratch-dir>
// Prints one [PASS]/[FAIL] line per criterion; exits 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "minima/dataset.hpp"
#include "minima/experiments.hpp"
#include "minima/geometry.hpp"
#include "minima/network.hpp"
#include "minima/objectives.hpp"
#include "minima/optim.hpp"
#include "minima/rng.hpp"
#include "minima/safety.hpp"
#include "minima/sharpness.hpp"
#include "oracles.hpp"

using namespace minima;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

struct Context {
    std::string cli;
    fs::path scratch;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

int run_cli(const std::string& args) {
    const int rc = std::system(args.c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

// ----- 1 ---------------------------------------------------------------------

Outcome golden_geometry(const Context& ctx) {
    Outcome o;
    const auto t0 = Clock::now();
    const int rc = run_cli(ctx.cli + " geometry --check --out " + (ctx.scratch / "c1").string() + " > " +
                           (ctx.scratch / "c1.log").string() + " 2>&1");
    const double dt = seconds_since(t0);
    o.require(rc == 0, "geometry --check exit " + std::to_string(rc));
    o.require(dt < 1.0, "runtime " + fmt(dt) + " s");
    const auto mismatches = check_golden();
    o.require(mismatches.empty(), std::to_string(mismatches.size()) + " golden cells differ");
    const std::size_t cells = 5 * (golden_minima_rows().size() + golden_function_rows().size());
    if (o.pass) o.detail = std::to_string(cells) + " cells match in " + fmt(dt) + " s";
    return o;
}

// ----- 2 ---------------------------------------------------------------------

Outcome hessian_oracle(const Context&) {
    Outcome o;
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::size_t points = 0;
    auto compare = [&](Objective fn, Point2 p) {
        const Mat2 h = hessian(fn, p);
        const Mat2 fd = fd_hessian_oracle(fn, p);
        const double a[4] = {h[0][0], h[0][1], h[1][0], h[1][1]};
        const double b[4] = {fd[0][0], fd[0][1], fd[1][0], fd[1][1]};
        worst = std::max(worst, oracle::max_relative_error(a, b, 1e-8));
        ++points;
    };
    std::size_t minima_count = 0;
    for (Objective fn : kAllObjectives) {
        for (const Point2& m : global_minima(fn)) {
            compare(fn, m);
            ++minima_count;
        }
        Rng rng(200 + static_cast<std::uint64_t>(fn), Stream::Test);
        for (int t = 0; t < 100; ++t) compare(fn, {rng.uniform(-5, 5), rng.uniform(-5, 5)});
    }
    const double dt = seconds_since(t0);
    o.require(minima_count == 10, std::to_string(minima_count) + " catalogued minima");
    o.require(worst < 1e-4, "max relative error " + fmt(worst));
    o.require(dt < 5.0, "runtime " + fmt(dt) + " s");
    if (o.pass) o.detail = std::to_string(points) + " points, max relative error " + fmt(worst);
    return o;
}

// ----- 3 ---------------------------------------------------------------------

Outcome gradient_correctness(const Context&) {
    Outcome o;
    const auto t0 = Clock::now();
    Rng rng(31, Stream::Test);
    double worst = 0.0;
    int tested = 0;
    while (tested < 50) {
        const std::size_t hidden = 2 + rng.next_u64() % 6;
        const std::vector<std::size_t> widths{2, hidden, hidden, 1};
        NetworkParams p(widths);
        for (double& v : p.values()) v = rng.uniform(-1, 1);
        const std::size_t rows = 8;
        std::vector<double> x(2 * rows), y(rows);
        for (double& v : x) v = rng.uniform(-5, 5);
        for (double& v : y) v = rng.uniform(-10, 10);
        // Smooth point: no hidden pre-activation near the ReLU kink.
        if (oracle::naive_forward(widths, p.values(), x, rows).min_abs_preactivation < 1e-3) continue;
        const auto lg = loss_and_gradient(p, {x, y, rows}, LossKind::MSE);
        const auto fd = oracle::central_gradient(
            [&](std::span<const double> th) { return oracle::naive_mse(widths, th, x, y, rows); }, p.values(), 1e-6);
        worst = std::max(worst, oracle::max_relative_error(lg.gradient.values(), fd, 1e-8));
        ++tested;
    }
    const double dt = seconds_since(t0);
    o.require(worst < 1e-5, "max relative error " + fmt(worst));
    o.require(dt < 30.0, "runtime " + fmt(dt) + " s");
    if (o.pass) o.detail = "50 micro-nets, max relative error " + fmt(worst);
    return o;
}

// ----- 4 ---------------------------------------------------------------------

Outcome sam_step_correctness(const Context&) {
    Outcome o;
    Rng rng(41, Stream::Test);
    double closed_err = 0.0;
    double limit_err = 0.0;
    for (int t = 0; t < 100; ++t) {
        const double a00 = rng.uniform(0.1, 5), a11 = rng.uniform(0.1, 5), a01 = rng.uniform(-1, 1);
        const GradientFn quad = [=](std::span<const double> th, std::span<double> g) {
            g[0] = a00 * th[0] + a01 * th[1];
            g[1] = a01 * th[0] + a11 * th[1];
            return 0.5 * (th[0] * g[0] + th[1] * g[1]);
        };
        const std::vector<double> start{rng.uniform(-3, 3), rng.uniform(-3, 3)};

        OptimizerConfig c;
        c.kind = OptimizerKind::SgdMomentum;
        c.momentum = 0.0;
        c.learning_rate = rng.uniform(0.001, 0.1);
        c.sam = true;
        c.rho = rng.uniform(0.01, 0.2);

        std::vector<double> th = start, g(2);
        quad(th, g);
        const double n = std::hypot(g[0], g[1]);
        const double px = th[0] + c.rho * g[0] / n, py = th[1] + c.rho * g[1] / n;
        const double ex = th[0] - c.learning_rate * (a00 * px + a01 * py);
        const double ey = th[1] - c.learning_rate * (a01 * px + a11 * py);
        Optimizer sam(c, 2);
        sam.step(th, g, quad);
        closed_err = std::max({closed_err, std::abs(th[0] - ex), std::abs(th[1] - ey)});

        c.rho = 1e-8;
        std::vector<double> tiny = start, plain = start, g2(2);
        quad(tiny, g2);
        Optimizer sam_tiny(c, 2);
        sam_tiny.step(tiny, g2, quad);
        c.sam = false;
        quad(plain, g2);
        Optimizer sgd(c, 2);
        sgd.step(plain, g2, quad);
        limit_err = std::max({limit_err, std::abs(tiny[0] - plain[0]), std::abs(tiny[1] - plain[1])});
    }
    o.require(closed_err <= 1e-10, "closed-form error " + fmt(closed_err));
    o.require(limit_err <= 1e-6, "rho -> 0 error " + fmt(limit_err));
    if (o.pass) o.detail = "closed-form error " + fmt(closed_err) + ", rho -> 0 error " + fmt(limit_err);
    return o;
}

// ----- 5 ---------------------------------------------------------------------

Outcome sharpness_contracts(const Context&) {
    Outcome o;
    const ScalarLossFn sq = [](std::span<const double> th) { return th[0] * th[0]; };
    const double zero[] = {0.0};
    for (double rho : {0.5, 0.0625, 0.00390625}) {
        const double s = sam_sharpness(zero, sq, rho, 100, 1);
        o.require(s == rho, "theta^2 sharpness " + fmt(s) + " at rho " + fmt(rho));
    }
    // The final division by K rounds once when rho is not binary-exact.
    for (double rho : {0.05, 0.005}) {
        const double s = sam_sharpness(zero, sq, rho, 100, 1);
        o.require(std::abs(s - rho) <= 2 * std::numeric_limits<double>::epsilon() * rho,
                  "theta^2 sharpness " + fmt(s) + " at rho " + fmt(rho));
    }

    const auto ds = generate_dataset(Objective::Booth, 64, 5);
    o.require(fisher_rao_norm(NetworkParams::toy_mlp(), ds.view(), LossKind::MSE).value == 0.0,
              "fisher_rao nonzero at theta = 0");
    NetworkParams p = NetworkParams::toy_mlp();
    kaiming_uniform_init(p, 5);
    auto fit = ds;
    fit.targets = forward(p, ds.inputs, ds.size());
    o.require(fisher_rao_norm(p, fit.view(), LossKind::MSE).value == 0.0,
              "fisher_rao nonzero at a per-example stationary point");

    Rng rng(51, Stream::Test);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t d = 2 + t % 7;
        const std::size_t n = 30 + static_cast<std::size_t>(t);
        NetworkParams lin({d, 1});
        for (double& v : lin.values()) v = rng.uniform(-2, 2);
        std::vector<double> phi(n * d), y(n);
        for (double& v : phi) v = rng.uniform(-3, 3);
        for (double& v : y) v = rng.uniform(-1, 1);
        double feat = 0.0;
        for (double v : phi) feat += v * v;
        double w2 = 0.0;
        for (double v : lin.weights(0)) w2 += v * v;
        const double expected = w2 * 2.0 * feat / static_cast<double>(n);
        const double got = relative_flatness(lin, {phi, y, n}, LossKind::MSE);
        worst = std::max(worst, std::abs(got - expected) / std::abs(expected));
    }
    o.require(worst < 1e-6, "relative flatness error " + fmt(worst));
    if (o.pass) o.detail = "sharpness = rho exactly, FR zero cases, flatness relative error " + fmt(worst);
    return o;
}

// ----- 6 ---------------------------------------------------------------------

StudyConfig scaled_target_study(Objective fn, std::vector<double> targets, std::size_t runs) {
    StudyConfig c;
    c.kind = StudyKind::TargetLoss;
    c.objective = fn;
    c.n_runs = runs;
    c.target_losses = std::move(targets);
    c.jobs = worker_count();
    return apply_scale(c, 0.2);
}

Outcome target_ordering(const Context&) {
    Outcome o;
    const auto t0 = Clock::now();
    std::map<Objective, double> mean;
    std::string report;
    for (Objective fn : kAllObjectives) {
        const auto records = run_study(scaled_target_study(fn, {300}, 10));
        double sum = 0.0;
        std::size_t n = 0, unreached = 0;
        for (const auto& r : records) {
            if (r.failed) continue;
            if (!r.reached) {
                ++unreached;
                continue;
            }
            sum += r.sharpness.sam_sharpness;
            ++n;
        }
        o.require(n > 0, std::string(objective_name(fn)) + " never reached 300");
        if (unreached) o.require(false, std::string(objective_name(fn)) + ": " + std::to_string(unreached) + " runs missed 300");
        mean[fn] = n ? sum / static_cast<double>(n) : NAN;
        report += std::string(objective_name(fn)) + "=" + fmt(mean[fn]) + " ";
        std::cout << "  criterion 6: " << objective_name(fn) << " mean sam_sharpness " << fmt(mean[fn]) << " over " << n
                  << " runs (" << fmt(seconds_since(t0)) << " s elapsed)" << std::endl;
    }
    auto lo = [&](std::initializer_list<Objective> g) {
        double v = INFINITY;
        for (Objective f : g) v = std::min(v, mean[f]);
        return v;
    };
    auto hi = [&](std::initializer_list<Objective> g) {
        double v = -INFINITY;
        for (Objective f : g) v = std::max(v, mean[f]);
        return v;
    };
    const auto sharp = {Objective::Rosenbrock, Objective::Beale};
    const auto middle = {Objective::Rastrigin, Objective::Booth, Objective::Himmelblau};
    const auto flat = {Objective::Sphere, Objective::ThreeHumpCamel};
    o.require(lo(sharp) > hi(middle), "sharp group not above middle group");
    o.require(lo(middle) > hi(flat), "middle group not above flat group");
    const double dt = seconds_since(t0);
    // Budget is 30 min on 4 cores; scale it to the cores available.
    const double budget = 1800.0 * std::max(1.0, 4.0 / static_cast<double>(worker_count()));
    o.require(dt < budget, "runtime " + fmt(dt) + " s over " + fmt(budget) + " s");
    o.detail = (o.detail.empty() ? "" : o.detail + "; ") + report + "in " + fmt(dt) + " s on " +
               std::to_string(worker_count()) + " core(s)";
    return o;
}

// ----- 7 ---------------------------------------------------------------------

Outcome unreachability(const Context&) {
    Outcome o;
    const std::size_t runs = 3;
    std::string report;
    for (auto [fn, target, expect_reached] :
         {std::tuple{Objective::Beale, 100.0, false}, std::tuple{Objective::Sphere, 1.0, true}}) {
        const auto records = run_study(scaled_target_study(fn, {target}, runs));
        std::size_t reached = 0;
        std::uint64_t first_epoch = 0;
        for (const auto& r : records) {
            if (!r.failed && r.reached) {
                if (!reached || r.epoch < first_epoch) first_epoch = r.epoch;
                ++reached;
            }
        }
        const std::string name(objective_name(fn));
        report += name + " reached " + fmt(target) + " in " + std::to_string(reached) + "/" + std::to_string(runs);
        if (reached) report += " (earliest epoch " + std::to_string(first_epoch) + ")";
        report += "; ";
        if (expect_reached) {
            o.require(reached == runs, name + " missed target " + fmt(target));
        } else {
            o.require(reached == 0, name + " reached target " + fmt(target));
        }
    }
    o.detail = (o.detail.empty() ? "" : o.detail + "; ") + report + "budget 200000 epochs, 2000 samples";
    return o;
}

// ----- 8 ---------------------------------------------------------------------

PredictionRecord binary(int label, double conf_class1) { return make_record(label, {1.0 - conf_class1, conf_class1}); }

std::vector<PredictionRecord> predicting(const std::vector<int>& preds) {
    std::vector<PredictionRecord> out;
    for (int p : preds) out.push_back(binary(0, p == 1 ? 0.9 : 0.1));
    return out;
}

std::vector<PredictionRecord> correct_of(int correct, int total) {
    std::vector<PredictionRecord> v;
    for (int i = 0; i < total; ++i) v.push_back(binary(i < correct ? 1 : 0, 0.9));
    return v;
}

Outcome safety_suite(const Context&) {
    Outcome o;
    o.require(expected_calibration_error({make_record(0, {1.0, 0.0}), make_record(1, {0.0, 1.0})}) == 0.0,
              "perfect ECE");
    o.require(std::abs(expected_calibration_error({binary(1, 0.8), binary(0, 0.8)}) - 0.3) < 1e-15, "ECE 0.3 example");

    const auto a = predicting({0, 1, 0, 1, 0, 1, 0, 1, 0, 1});
    const auto b = predicting({1, 0, 1, 0, 1, 0, 1, 0, 1, 0});
    const auto c = predicting({0, 1, 0, 1, 0, 0, 1, 0, 1, 0});
    o.require(prediction_disagreement(a, a) == 0.0, "self disagreement");
    o.require(prediction_disagreement(a, b) == 1.0, "full disagreement");
    o.require(prediction_disagreement(a, c) == 0.5, "half disagreement");

    const auto clean = correct_of(10, 10);
    o.require(corruption_accuracy(clean, {{{"noise", 1}, correct_of(10, 10)}}) == 1.0, "all-correct corruption");
    o.require(std::abs(corruption_accuracy(clean, {{{"blur", 1}, correct_of(4, 10)}, {{"blur", 2}, correct_of(6, 10)}}) -
                       0.5) < 1e-15,
              "two-severity corruption mean");

    Rng rng(81, Stream::Test);
    std::vector<PredictionRecord> pop;
    pop.reserve(100'000);
    for (int i = 0; i < 100'000; ++i) {
        const double conf = rng.uniform(0.5, 1.0);
        pop.push_back(binary(rng.uniform() < conf ? 1 : 0, conf));
    }
    const double ece = expected_calibration_error(pop);
    o.require(ece < 0.01, "calibrated ECE " + fmt(ece));
    if (o.pass) o.detail = "hand cases exact, calibrated ECE " + fmt(ece);
    return o;
}

// ----- 9 ---------------------------------------------------------------------

Outcome determinism(const Context& ctx) {
    Outcome o;
    const fs::path base = ctx.scratch / "c9";
    fs::create_directories(base);
    const fs::path cfg = base / "small.json";
    std::ofstream(cfg) << R"({"objective": "himmelblau", "n_runs": 2, "n_samples": 100, "epochs_budget": 1500,
 "log_epochs": [0, 10, 100, 1000], "target_losses": [300, 100, 10], "convergence_window": 200, "jobs": 1})";
    for (const char* kind : {"epoch", "target", "controls"}) {
        const fs::path first = base / (std::string(kind) + "_a");
        const fs::path second = base / (std::string(kind) + "_b");
        const std::string quiet = " > " + (base / "log.txt").string() + " 2>&1";
        int rc = run_cli(ctx.cli + " study --config " + cfg.string() + " --kind " + kind + " --seed 7 --out " +
                         first.string() + quiet);
        o.require(rc == 0, std::string(kind) + " first run exit " + std::to_string(rc));
        rc = run_cli(ctx.cli + " study --config " + (first / "config.json").string() + " --out " + second.string() +
                     quiet);
        o.require(rc == 0, std::string(kind) + " second run exit " + std::to_string(rc));
        const auto x = slurp(first / "runs.csv");
        const auto y = slurp(second / "runs.csv");
        o.require(!x.empty() && x == y, std::string(kind) + " runs.csv differs");
    }
    if (o.pass) o.detail = "epoch, target and controls runs.csv byte-identical";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: acceptance_tests <minima-cli> <scratch-dir> [criterion...]\n";
        return 2;
    }
    Context ctx{argv[1], argv[2]};
    fs::remove_all(ctx.scratch);
    fs::create_directories(ctx.scratch);

    const std::vector<std::pair<int, std::function<Outcome(const Context&)>>> criteria{
        {1, golden_geometry},    {2, hessian_oracle}, {3, gradient_correctness},
        {4, sam_step_correctness}, {5, sharpness_contracts}, {6, target_ordering},
        {7, unreachability},     {8, safety_suite},   {9, determinism},
    };
    std::vector<int> selected;
    for (int i = 3; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& [id, check] : criteria) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) continue;
        Outcome out;
        try {
            out = check(ctx);
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        failures += out.pass ? 0 : 1;
        std::cout << (out.pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << out.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
