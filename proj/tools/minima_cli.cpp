#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "minima/checkpoint.hpp"
#include "minima/dataset.hpp"
#include "minima/error.hpp"
#include "minima/experiments.hpp"
#include "minima/geometry.hpp"
#include "minima/hashing.hpp"
#include "minima/kernels.hpp"
#include "minima/landscape.hpp"
#include "minima/predictions.hpp"
#include "minima/safety.hpp"
#include "minima/sharpness.hpp"
#include "minima/text_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace minima;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitMismatch = 3;
constexpr int kExitRuntime = 4;

struct Common {
    std::string out;
    std::uint64_t seed = 0;
    int verbosity = 0;
};

// Records inputs and outputs of one invocation for manifest.json.
class Manifest {
public:
    Manifest(std::string command, const Common& common) : command_(std::move(command)), out_(common.out) {
        doc_["command"] = command_;
        doc_["seed"] = common.seed;
        doc_["kernels"] = std::string(kernels::active().name);
    }

    json& config() { return doc_["config"]; }

    void input(const std::string& role, const fs::path& path) {
        doc_["inputs"][role] = {{"path", path.string()}, {"hash", content_hash(read_file(path))}};
    }

    void output(const std::string& name, const std::string& contents) {
        write_file(fs::path(out_) / name, contents);
        doc_["outputs"][name] = content_hash(contents);
    }

    void finish() {
        write_file(fs::path(out_) / "manifest.json", doc_.dump(2) + "\n");
    }

private:
    std::string command_;
    std::string out_;
    json doc_;
};

Objective require_objective(const std::string& name) {
    const auto fn = parse_objective(name);
    if (!fn) throw ValidationError("objective: unknown function '" + name + "'");
    return *fn;
}

DirectionNorm require_norm(const std::string& name) {
    if (name == "per_neuron" || name == "per-neuron" || name == "filter") return DirectionNorm::PerNeuron;
    if (name == "none") return DirectionNorm::None;
    throw ValidationError("norm: expected per_neuron or none");
}

LossKind require_loss(const std::string& name) {
    if (name == "mse") return LossKind::MSE;
    if (name == "ce" || name == "cross_entropy") return LossKind::CrossEntropy;
    throw ValidationError("loss: expected mse or ce");
}

void log(const Common& c, const std::string& msg) {
    if (c.verbosity > 0) std::cerr << msg << '\n';
}

// ----- geometry ------------------------------------------------------------

struct GeometryArgs {
    std::string function;
    bool check = false;
};

int cmd_geometry(const Common& common, const GeometryArgs& args) {
    Manifest manifest("geometry", common);
    manifest.config() = {{"function", args.function}, {"check", args.check}};
    if (!args.function.empty()) {
        const Objective fn = require_objective(args.function);
        const auto rows = minima_table(fn);
        const std::string csv = minima_csv(rows);
        std::cout << csv;
        manifest.output("geometry_" + std::string(objective_name(fn)) + ".csv", csv);
    } else {
        const std::string t1 = minima_csv(minima_table(Objective::Himmelblau));
        std::vector<MinimumRow> per_function;
        for (Objective fn : kAllObjectives) per_function.push_back(minima_table(fn).front());
        const std::string t2 = minima_csv(per_function);
        std::cout << t1 << '\n' << t2;
        manifest.output("table1.csv", t1);
        manifest.output("table2.csv", t2);
    }
    int status = kExitOk;
    if (args.check) {
        const auto mismatches = check_golden();
        json report = json::array();
        for (const auto& m : mismatches) {
            std::cerr << "mismatch: " << objective_name(m.function) << " (" << m.point[0] << ", " << m.point[1]
                      << ") " << m.column << " printed " << m.printed << " computed " << m.computed << '\n';
            report.push_back({{"function", std::string(objective_name(m.function))},
                              {"column", m.column},
                              {"printed", m.printed},
                              {"computed", m.computed}});
        }
        manifest.config()["check_mismatches"] = report;
        const std::size_t cells = 4 * (golden_minima_rows().size() + golden_function_rows().size());
        std::cerr << "geometry check: " << (cells - mismatches.size()) << "/" << cells << " cells match\n";
        if (!mismatches.empty()) status = kExitMismatch;
    }
    manifest.finish();
    return status;
}

// ----- dataset ---------------------------------------------------------------

struct DatasetArgs {
    std::string objective = "sphere";
    std::size_t n = 2'000;
    std::string split = "train";
    std::string file = "dataset.csv";
};

int cmd_dataset(const Common& common, const DatasetArgs& args) {
    const Objective fn = require_objective(args.objective);
    if (args.split != "train" && args.split != "test") throw ValidationError("split: expected train or test");
    const Split split = args.split == "train" ? Split::Train : Split::Test;
    const auto ds = generate_dataset(fn, args.n, common.seed, split);
    Manifest manifest("dataset", common);
    manifest.config() = {{"objective", std::string(objective_name(fn))},
                         {"n", args.n},
                         {"split", args.split},
                         {"dataset_id", dataset_id(ds)}};
    manifest.output(args.file, dataset_csv(ds));
    manifest.finish();
    return kExitOk;
}

// ----- train -----------------------------------------------------------------

struct OptimizerArgs {
    std::string kind = "adam";
    double lr = 1e-3;
    bool sam = false;
    double sam_rho = 0.05;
    double weight_decay = 0.0;
};

OptimizerConfig make_optimizer(const OptimizerArgs& a) {
    OptimizerConfig o;
    if (a.kind == "adam") {
        o.kind = OptimizerKind::Adam;
    } else if (a.kind == "sgd") {
        o.kind = OptimizerKind::SgdMomentum;
    } else {
        throw ValidationError("optimizer: expected adam or sgd");
    }
    o.learning_rate = a.lr;
    o.sam = a.sam;
    o.rho = a.sam_rho;
    o.weight_decay = a.weight_decay;
    o.validate();
    return o;
}

struct TrainArgs {
    std::string objective = "sphere";
    std::size_t n_samples = 2'000;
    std::uint64_t epochs = 1'000;
    OptimizerArgs opt;
};

int cmd_train(const Common& common, const TrainArgs& args) {
    const Objective fn = require_objective(args.objective);
    const OptimizerConfig opt = make_optimizer(args.opt);
    const auto train = generate_dataset(fn, args.n_samples, common.seed, Split::Train);
    const auto test = generate_dataset(fn, args.n_samples, common.seed, Split::Test);
    NetworkParams init = NetworkParams::toy_mlp();
    kaiming_uniform_init(init, common.seed);
    log(common, "training " + std::string(objective_name(fn)) + " for " + std::to_string(args.epochs) + " epochs");
    const auto outcome = train_model(init, train, opt, args.epochs);
    const double test_loss = loss(outcome.params, test.view(), LossKind::MSE);

    Manifest manifest("train", common);
    manifest.config() = {{"objective", std::string(objective_name(fn))},
                         {"n_samples", args.n_samples},
                         {"epochs", args.epochs},
                         {"optimizer", opt.describe()},
                         {"init_hash", checkpoint_hash(init)},
                         {"train_dataset_id", dataset_id(train)},
                         {"test_dataset_id", dataset_id(test)}};
    manifest.output("model.ckpt", encode_checkpoint(outcome.params));
    manifest.output("train.csv", dataset_csv(train));
    manifest.output("test.csv", dataset_csv(test));
    json summary = {{"train_loss", outcome.train_loss},
                    {"test_loss", test_loss},
                    {"generalisation_gap", std::abs(test_loss - outcome.train_loss)},
                    {"epochs", outcome.epochs},
                    {"grad_evals", outcome.grad_evals},
                    {"checkpoint_hash", checkpoint_hash(outcome.params)}};
    manifest.output("summary.json", summary.dump(2) + "\n");
    manifest.finish();
    std::cout << summary.dump(2) << '\n';
    return kExitOk;
}

// ----- study -----------------------------------------------------------------

struct StudyArgs {
    std::string config_path;
    std::optional<std::string> kind;
    std::optional<std::string> objective;
    std::optional<double> scale;
    std::optional<std::size_t> runs;
    std::optional<std::size_t> jobs;
    std::optional<double> rho;
    std::optional<std::size_t> k_perturb;
    bool seed_given = false;
};

int cmd_study(const Common& common, const StudyArgs& args) {
    StudyConfig cfg;
    Manifest manifest("study", common);
    if (!args.config_path.empty()) {
        cfg = study_config_from_json(read_file(args.config_path), cfg);
        manifest.input("config", args.config_path);
    }
    if (args.kind) {
        const auto k = parse_study(*args.kind);
        if (!k) throw ValidationError("kind: expected epoch, target or controls");
        cfg.kind = *k;
    }
    if (args.objective) cfg.objective = require_objective(*args.objective);
    if (args.runs) cfg.n_runs = *args.runs;
    if (args.jobs) cfg.jobs = *args.jobs;
    if (args.rho) cfg.sharpness.rho = *args.rho;
    if (args.k_perturb) cfg.sharpness.num_perturbations = *args.k_perturb;
    if (args.seed_given) cfg.base_seed = common.seed;
    if (args.scale) cfg = apply_scale(cfg, *args.scale);
    cfg.validate();
    log(common, "study " + std::string(study_name(cfg.kind)) + " on " + std::string(objective_name(cfg.objective)));

    const auto records = run_study(cfg);
    manifest.config() = json::parse(study_config_to_json(cfg));
    manifest.output("config.json", study_config_to_json(cfg));
    manifest.output("runs.csv", runs_csv(records));
    manifest.output("aggregate.csv", aggregate_csv(aggregate(records)));
    manifest.finish();
    std::size_t failed = 0;
    for (const auto& r : records) failed += r.failed ? 1 : 0;
    std::cerr << records.size() << " records, " << failed << " failed\n";
    return kExitOk;
}

// ----- sharpness -------------------------------------------------------------

struct SharpnessArgs {
    std::string checkpoint;
    std::string dataset;
    double rho = kDefaultSharpnessRho;
    std::size_t k = kDefaultPerturbations;
    std::string loss = "mse";
};

int cmd_sharpness(const Common& common, const SharpnessArgs& args) {
    const auto params = load_checkpoint(args.checkpoint);
    const auto ds = load_dataset(args.dataset);
    const LossKind kind = require_loss(args.loss);
    if (kind == LossKind::CrossEntropy) throw ValidationError("loss: regression datasets support mse only");
    if (params.in_width(0) != 2 || params.out_width(params.layer_count() - 1) != 1) {
        throw ValidationError("checkpoint: expected a 2-input, 1-output network");
    }
    SharpnessConfig sc;
    sc.rho = args.rho;
    sc.num_perturbations = args.k;
    sc.seed = common.seed;
    if (!(sc.rho > 0.0)) throw ValidationError("rho: must be positive");
    if (sc.num_perturbations == 0) throw ValidationError("k-perturb: must be >= 1");
    auto report = measure_sharpness(params, ds.view(), kind, sc);
    report.checkpoint_hash = checkpoint_hash(params);
    report.dataset_id = dataset_id(ds);

    Manifest manifest("sharpness", common);
    manifest.input("checkpoint", args.checkpoint);
    manifest.input("dataset", args.dataset);
    manifest.config() = {{"rho", sc.rho}, {"k_perturb", sc.num_perturbations}, {"loss", args.loss}};
    const std::string out = sharpness_report_json(report);
    manifest.output("sharpness.json", out);
    manifest.finish();
    std::cout << out;
    return kExitOk;
}

// ----- landscape -------------------------------------------------------------

struct LandscapeArgs {
    std::string checkpoint;
    std::string dataset;
    std::string objective;
    double x = 0.0;
    double y = 0.0;
    std::size_t resolution = kDefaultGridResolution;
    double extent = kDefaultGridExtent;
    std::string norm = "auto";  // per_neuron for networks, none for objectives
};

int cmd_landscape(const Common& common, const LandscapeArgs& args) {
    if (args.resolution < 3 || args.resolution % 2 == 0) throw ValidationError("resolution: must be odd and >= 3");
    if (!(args.extent > 0.0)) throw ValidationError("extent: must be positive");
    Manifest manifest("landscape", common);
    LandscapeGrid grid;
    const bool analytic = !args.objective.empty();
    const DirectionNorm norm =
        args.norm == "auto" ? (analytic ? DirectionNorm::None : DirectionNorm::PerNeuron) : require_norm(args.norm);
    if (analytic) {
        if (!args.checkpoint.empty()) throw ValidationError("landscape: give either --objective or --checkpoint");
        const Objective fn = require_objective(args.objective);
        const Point2 center{args.x, args.y};
        const double theta[2] = {center[0], center[1]};
        const std::vector<Slice> slices{Slice{{0, 1}}};
        const auto dirs = random_directions(theta, slices, common.seed, norm);
        grid = objective_grid(fn, center, dirs, args.resolution, args.extent);
        manifest.config() = {{"objective", std::string(objective_name(fn))}, {"x", args.x}, {"y", args.y}};
    } else {
        if (args.checkpoint.empty() || args.dataset.empty()) {
            throw ValidationError("landscape: --checkpoint and --dataset are required without --objective");
        }
        const auto params = load_checkpoint(args.checkpoint);
        const auto ds = load_dataset(args.dataset);
        manifest.input("checkpoint", args.checkpoint);
        manifest.input("dataset", args.dataset);
        const auto dirs = random_directions(params, common.seed, norm);
        grid = loss_grid(params, ds.view(), LossKind::MSE, dirs, args.resolution, args.extent);
    }
    grid.direction_seed = common.seed;
    grid.normalization = norm;
    manifest.config()["resolution"] = args.resolution;
    manifest.config()["extent"] = args.extent;
    manifest.config()["norm"] = args.norm;
    manifest.output("grid.csv", grid_csv(grid));
    manifest.output("grid.json", grid_metadata_json(grid));
    manifest.finish();
    std::cerr << "grid " << grid.resolution << "x" << grid.resolution << ", center " << format_double(grid.center())
              << ", flagged " << grid.flagged << '\n';
    return kExitOk;
}

// ----- metrics ---------------------------------------------------------------

struct MetricsArgs {
    std::string pred;
    std::string pred_b;
    std::vector<std::string> corrupted;  // name:severity=path
    std::size_t bins = kDefaultEceBins;
};

int cmd_metrics(const Common& common, const MetricsArgs& args) {
    if (args.bins == 0) throw ValidationError("bins: must be >= 1");
    Manifest manifest("metrics", common);
    const auto a = ingest_predictions(args.pred);
    manifest.input("pred", args.pred);
    EvaluationReport report;
    report.n_bins = args.bins;
    report.ece = expected_calibration_error(a, args.bins);
    report.accuracy = accuracy(a);
    report.record_counts["pred"] = a.size();
    if (!args.pred_b.empty()) {
        const auto b = ingest_predictions(args.pred_b);
        manifest.input("pred_b", args.pred_b);
        report.disagreement = prediction_disagreement(a, b);
        report.record_counts["pred_b"] = b.size();
    }
    if (!args.corrupted.empty()) {
        std::map<CorruptionKey, std::vector<PredictionRecord>> sets;
        for (const auto& spec : args.corrupted) {
            const auto eq = spec.find('=');
            const auto colon = spec.find(':');
            if (eq == std::string::npos || colon == std::string::npos || colon > eq) {
                throw ValidationError("corrupted: expected name:severity=path, got '" + spec + "'");
            }
            const std::string name = spec.substr(0, colon);
            int severity = 0;
            try {
                severity = std::stoi(spec.substr(colon + 1, eq - colon - 1));
            } catch (const std::exception&) {
                throw ValidationError("corrupted: bad severity in '" + spec + "'");
            }
            const std::string path = spec.substr(eq + 1);
            sets[{name, severity}] = ingest_predictions(path);
            manifest.input("corrupted:" + name + ":" + std::to_string(severity), path);
            report.record_counts["corrupted:" + name + ":" + std::to_string(severity)] = sets[{name, severity}].size();
        }
        report.corruption_accuracy = corruption_accuracy(a, sets);
    }
    manifest.config() = {{"bins", args.bins}};
    const std::string out = evaluation_report_json(report);
    manifest.output("evaluation.json", out);
    manifest.finish();
    std::cout << out;
    return kExitOk;
}

std::string default_out() {
    if (const char* env = std::getenv("MINIMA_GEOM_OUT"); env && *env) return env;
    return "out";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geometry of minima: objectives, training studies, sharpness and safety metrics"};
    app.require_subcommand(1);
    Common common;
    common.out = default_out();

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", common.out, "Output directory (default $MINIMA_GEOM_OUT or ./out)");
        sub->add_option("--seed", common.seed, "Base seed");
        sub->add_flag("-v,--verbose", common.verbosity, "Progress messages on stderr");
    };

    GeometryArgs geo;
    auto* g = app.add_subcommand("geometry", "Hessian statistics at the catalogued minima");
    g->add_option("function", geo.function, "Single function to tabulate");
    g->add_flag("--check", geo.check, "Compare against the embedded golden tables");
    add_common(g);

    DatasetArgs dsa;
    auto* d = app.add_subcommand("dataset", "Generate a regression dataset CSV");
    d->add_option("--objective", dsa.objective, "Objective function name")->capture_default_str();
    d->add_option("--n", dsa.n, "Number of samples")->capture_default_str();
    d->add_option("--split", dsa.split, "train or test");
    d->add_option("--file", dsa.file, "File name inside --out");
    add_common(d);

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train the toy MLP on one objective");
    t->add_option("--objective", tr.objective, "Objective function name")->capture_default_str();
    t->add_option("--n-samples", tr.n_samples, "Samples per split")->capture_default_str();
    t->add_option("--epochs", tr.epochs, "Full-batch epochs")->capture_default_str();
    t->add_option("--optimizer", tr.opt.kind, "adam or sgd");
    t->add_option("--lr", tr.opt.lr, "Learning rate")->capture_default_str();
    t->add_flag("--sam", tr.opt.sam, "Wrap the optimizer in SAM");
    t->add_option("--sam-rho", tr.opt.sam_rho, "SAM radius")->capture_default_str();
    t->add_option("--weight-decay", tr.opt.weight_decay, "L2 coefficient")->capture_default_str();
    add_common(t);

    StudyArgs st;
    auto* s = app.add_subcommand("study", "Run an epoch-logged, target-loss or matched-controls study");
    s->add_option("--config", st.config_path, "Study config JSON; flags override its fields");
    s->add_option("--kind", st.kind, "epoch, target or controls");
    s->add_option("--objective", st.objective, "Objective function name");
    s->add_option("--scale", st.scale, "Multiply samples and epoch budget");
    s->add_option("--runs", st.runs, "Runs per objective or control");
    s->add_option("--jobs", st.jobs, "Parallel runs (default 1)");
    s->add_option("--rho", st.rho, "Sharpness radius");
    s->add_option("--k-perturb", st.k_perturb, "Sharpness perturbation count");
    add_common(s);

    SharpnessArgs sh;
    auto* h = app.add_subcommand("sharpness", "Sharpness report for a checkpoint on a dataset");
    h->add_option("--checkpoint", sh.checkpoint, "Model checkpoint")->required();
    h->add_option("--dataset", sh.dataset, "Dataset CSV")->required();
    h->add_option("--rho", sh.rho, "Perturbation radius")->capture_default_str();
    h->add_option("--k-perturb", sh.k, "Perturbation count")->capture_default_str();
    h->add_option("--loss", sh.loss, "mse or ce")->capture_default_str();
    add_common(h);

    LandscapeArgs la;
    auto* l = app.add_subcommand("landscape", "Loss surface on a random 2-plane");
    l->add_option("--checkpoint", la.checkpoint, "Model checkpoint");
    l->add_option("--dataset", la.dataset, "Dataset CSV for the network loss");
    l->add_option("--objective", la.objective, "Analytic objective instead of a network");
    l->add_option("--x", la.x, "Grid centre x for --objective")->capture_default_str();
    l->add_option("--y", la.y, "Grid centre y for --objective")->capture_default_str();
    l->add_option("--resolution", la.resolution, "Odd points per axis")->capture_default_str();
    l->add_option("--extent", la.extent, "Half-width in direction units")->capture_default_str();
    l->add_option("--norm", la.norm, "per_neuron, none or auto");
    add_common(l);

    MetricsArgs me;
    auto* m = app.add_subcommand("metrics", "ECE, accuracy, disagreement and corruption accuracy");
    m->add_option("--pred", me.pred, "Prediction records (.csv or .jsonl)")->required();
    m->add_option("--pred-b", me.pred_b, "Second model for disagreement");
    m->add_option("--corrupted", me.corrupted, "name:severity=path, repeatable");
    m->add_option("--bins", me.bins, "ECE bins")->capture_default_str();
    add_common(m);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }
    st.seed_given = s->count("--seed") > 0;

    try {
        if (*g) return cmd_geometry(common, geo);
        if (*d) return cmd_dataset(common, dsa);
        if (*t) return cmd_train(common, tr);
        if (*s) return cmd_study(common, st);
        if (*h) return cmd_sharpness(common, sh);
        if (*l) return cmd_landscape(common, la);
        if (*m) return cmd_metrics(common, me);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}
