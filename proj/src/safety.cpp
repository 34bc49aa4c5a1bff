#include "minima/safety.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "minima/error.hpp"

namespace minima {

double expected_calibration_error(const std::vector<PredictionRecord>& records, std::size_t n_bins) {
    if (records.empty()) throw ContractError("expected_calibration_error: no records");
    if (n_bins == 0) throw ContractError("expected_calibration_error: n_bins must be >= 1");
    std::vector<std::vector<double>> confs(n_bins);
    std::vector<std::size_t> correct(n_bins, 0);
    for (const auto& r : records) {
        const double c = r.top_confidence();
        auto bin = static_cast<std::size_t>(c * static_cast<double>(n_bins));
        if (bin >= n_bins) bin = n_bins - 1;
        confs[bin].push_back(c);
        correct[bin] += r.correct() ? 1 : 0;
    }
    // Sorting each bin before summing makes the result independent of record order.
    const double n = static_cast<double>(records.size());
    double ece = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (confs[b].empty()) continue;
        std::sort(confs[b].begin(), confs[b].end());
        double conf_sum = 0.0;
        for (double c : confs[b]) conf_sum += c;
        const double nb = static_cast<double>(confs[b].size());
        const double acc = static_cast<double>(correct[b]) / nb;
        const double conf = conf_sum / nb;
        ece += (nb / n) * std::abs(acc - conf);
    }
    return ece;
}

double accuracy(const std::vector<PredictionRecord>& records) {
    if (records.empty()) throw ContractError("accuracy: no records");
    std::size_t hits = 0;
    for (const auto& r : records) hits += r.correct() ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

double prediction_disagreement(const std::vector<PredictionRecord>& a, const std::vector<PredictionRecord>& b) {
    if (a.size() != b.size()) throw ContractError("prediction_disagreement: record lists differ in length");
    if (a.empty()) throw ContractError("prediction_disagreement: no records");
    std::size_t diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += a[i].predicted_label != b[i].predicted_label ? 1 : 0;
    return static_cast<double>(diff) / static_cast<double>(a.size());
}

double corruption_accuracy(const std::vector<PredictionRecord>& clean,
                           const std::map<CorruptionKey, std::vector<PredictionRecord>>& corrupted) {
    if (corrupted.empty()) throw ContractError("corruption_accuracy: no corrupted sets");
    double total = 0.0;
    for (const auto& [key, records] : corrupted) {
        if (!clean.empty() && records.size() != clean.size()) {
            throw ContractError("corruption_accuracy: set " + key.first + "/" + std::to_string(key.second) +
                                " is not aligned with the clean set");
        }
        total += accuracy(records);
    }
    return total / static_cast<double>(corrupted.size());
}

std::string evaluation_report_json(const EvaluationReport& r) {
    nlohmann::ordered_json j;
    j["ece"] = r.ece;
    j["accuracy"] = r.accuracy;
    j["n_bins"] = r.n_bins;
    j["ece_norm"] = "l1";
    j["bin_scheme"] = "equal_width_last_closed";
    j["disagreement"] = r.disagreement ? nlohmann::ordered_json(*r.disagreement) : nlohmann::ordered_json(nullptr);
    j["corruption_accuracy"] =
        r.corruption_accuracy ? nlohmann::ordered_json(*r.corruption_accuracy) : nlohmann::ordered_json(nullptr);
    j["record_counts"] = r.record_counts;
    return j.dump(2) + "\n";
}

}  // namespace minima
