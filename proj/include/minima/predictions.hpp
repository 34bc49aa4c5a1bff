#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace minima {

/// Sum deviation tolerated (and renormalized away) in confidence vectors.
inline constexpr double kConfidenceSumTolerance = 1e-6;

struct PredictionRecord {
    int true_label = 0;
    std::vector<double> confidences;  // sums to 1
    int predicted_label = 0;          // argmax, lowest index on ties

    double top_confidence() const { return confidences.at(static_cast<std::size_t>(predicted_label)); }
    bool correct() const noexcept { return predicted_label == true_label; }
};

/// Lowest index among maximal entries.
int argmax_lowest(const std::vector<double>& v);

/// Validates and renormalizes. row is used in error messages (1-based).
/// Throws ValidationError when an entry leaves [0, 1] or the sum is off by more
/// than kConfidenceSumTolerance.
PredictionRecord make_record(int label, std::vector<double> confidences, std::size_t row = 0);

/// JSON lines ({"label": int, "confidences": [...]}) for .jsonl/.json files,
/// otherwise CSV rows `label,c0,c1,...` with an optional non-numeric header.
std::vector<PredictionRecord> ingest_predictions(const std::filesystem::path& path);
std::vector<PredictionRecord> parse_predictions_jsonl(const std::string& text);
std::vector<PredictionRecord> parse_predictions_csv(const std::string& text);

std::string predictions_jsonl(const std::vector<PredictionRecord>& records);

}  // namespace minima
