#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "minima/predictions.hpp"

namespace minima {

inline constexpr std::size_t kDefaultEceBins = 15;

/// L1 expected calibration error over top-1 confidences. Equal-width bins
/// [k/n, (k+1)/n) with the last bin closed at 1; empty bins contribute 0.
double expected_calibration_error(const std::vector<PredictionRecord>& records,
                                  std::size_t n_bins = kDefaultEceBins);

double accuracy(const std::vector<PredictionRecord>& records);

/// Fraction of aligned examples whose predicted labels differ.
double prediction_disagreement(const std::vector<PredictionRecord>& a, const std::vector<PredictionRecord>& b);

/// (corruption name, severity level)
using CorruptionKey = std::pair<std::string, int>;

/// Unweighted mean of per-(corruption, severity) accuracies. `clean` only
/// contributes its size to the alignment check.
double corruption_accuracy(const std::vector<PredictionRecord>& clean,
                           const std::map<CorruptionKey, std::vector<PredictionRecord>>& corrupted);

struct EvaluationReport {
    double ece = 0.0;
    double accuracy = 0.0;
    std::size_t n_bins = kDefaultEceBins;
    std::optional<double> disagreement;
    std::optional<double> corruption_accuracy;
    std::map<std::string, std::size_t> record_counts;
};

std::string evaluation_report_json(const EvaluationReport& report);

}  // namespace minima
