#pragma once

// Training protocols on the regression objectives.
//
//   epoch-logged   every run trains for the full budget; metrics are recorded
//                  at the configured log epochs (epoch 0 is the initialization).
//   target-loss    each run trains until its full-batch train loss first drops
//                  to each target in turn; targets never reached within the
//                  budget are recorded as unreachable.
//   controls       baseline / SAM / weight decay / SAM + weight decay trained
//                  from the same per-seed initialization and dataset, recorded
//                  at convergence or when the budget runs out.
//
// Runs in the epoch-logged and target-loss studies share one initialization
// (drawn from base_seed) and differ in their datasets (seed base_seed + run).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "minima/dataset.hpp"
#include "minima/network.hpp"
#include "minima/objectives.hpp"
#include "minima/optim.hpp"
#include "minima/sharpness.hpp"

namespace minima {

enum class Control { Baseline, Sam, WeightDecay, SamWeightDecay };
enum class StudyKind { EpochLogged, TargetLoss, Controls };

std::string_view control_name(Control c) noexcept;
std::optional<Control> parse_control(std::string_view name);
std::string_view study_name(StudyKind k) noexcept;
std::optional<StudyKind> parse_study(std::string_view name);

inline constexpr std::size_t kPaperSamples = 10'000;
inline constexpr std::uint64_t kPaperEpochs = 1'000'000;

struct StudyConfig {
    StudyKind kind = StudyKind::TargetLoss;
    Objective objective = Objective::Sphere;
    std::size_t n_runs = 10;
    std::size_t n_samples = kPaperSamples;  // per split
    std::uint64_t epochs_budget = kPaperEpochs;
    std::vector<std::uint64_t> log_epochs{0, 1, 10, 100, 1'000, 10'000, 100'000, 1'000'000};
    std::vector<double> target_losses{300, 150, 100, 10, 1};
    OptimizerConfig optimizer;  // Adam, lr 1e-3
    std::vector<Control> controls{Control::Baseline, Control::Sam, Control::WeightDecay, Control::SamWeightDecay};
    double control_rho = 0.05;
    double control_weight_decay = 5e-4;
    std::uint64_t base_seed = 0;
    SharpnessConfig sharpness;
    std::vector<std::size_t> widths{2, 64, 64, 1};
    double convergence_tol = 1e-8;
    std::uint64_t convergence_window = 1'000;
    std::size_t jobs = 1;

    /// Throws ValidationError naming the offending field.
    void validate() const;
};

/// Multiplies n_samples and epochs_budget by factor, drops log epochs past the
/// new budget and appends the budget as the last log epoch.
StudyConfig apply_scale(StudyConfig config, double factor);

/// JSON object with the StudyConfig field names; missing fields keep defaults.
StudyConfig study_config_from_json(const std::string& text, StudyConfig base = {});
std::string study_config_to_json(const StudyConfig& config);

struct RunRecord {
    StudyKind study = StudyKind::TargetLoss;
    Objective objective = Objective::Sphere;
    Control control = Control::Baseline;
    std::size_t run_index = 0;
    std::uint64_t seed = 0;
    std::string tag_kind;  // "epoch", "target" or "final"
    double tag = 0.0;
    std::uint64_t epoch = 0;
    bool reached = true;
    bool failed = false;
    std::string failure;
    double train_loss = 0.0;
    double test_loss = 0.0;
    double generalisation_gap = 0.0;  // |test - train|
    double initial_train_loss = 0.0;
    std::uint64_t grad_evals = 0;
    SharpnessReport sharpness;
    std::string init_hash;
    std::string train_dataset_id;
};

struct TrainOutcome {
    NetworkParams params;
    double train_loss = 0.0;  // data loss at the returned parameters
    std::uint64_t epochs = 0;
    std::uint64_t grad_evals = 0;
};

/// Full-batch MSE training for a fixed number of epochs. Throws NumericError
/// on divergence.
TrainOutcome train_model(NetworkParams init, const RegressionDataset& train, const OptimizerConfig& optimizer,
                         std::uint64_t epochs);

std::vector<RunRecord> run_epoch_logged_study(const StudyConfig& config);
std::vector<RunRecord> run_target_loss_study(const StudyConfig& config);
std::vector<RunRecord> run_matched_controls(const StudyConfig& config);
std::vector<RunRecord> run_study(const StudyConfig& config);

struct AggregateRow {
    StudyKind study;
    Objective objective;
    Control control;
    std::string tag_kind;
    double tag;
    std::string metric;
    std::size_t n = 0;         // records included
    std::size_t excluded = 0;  // failed or unreachable records in the cell
    double mean = 0.0;
    std::optional<double> sem;  // sample std / sqrt(n); missing when n < 2
};

/// Mean and SEM per (study, objective, control, tag, metric) over records
/// that reached their tag without failing.
std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records);

/// Mean and SEM of a list of values (values are sorted before reduction).
AggregateRow summarize(std::vector<double> values);

inline constexpr const char* kAggregateMetrics[] = {"train_loss",    "test_loss",       "generalisation_gap",
                                                    "sam_sharpness", "fisher_rao_norm", "relative_flatness",
                                                    "epoch"};

std::string runs_csv(const std::vector<RunRecord>& records);
/// One row per (study, objective, control, tag); <metric>_mean/<metric>_sem
/// column pairs. Missing SEMs are empty cells.
std::string aggregate_csv(const std::vector<AggregateRow>& rows);

}  // namespace minima
