#include "minima/predictions.hpp"

#include <cmath>
#include <json.hpp>
#include <string>

#include "minima/error.hpp"
#include "minima/text_io.hpp"

namespace minima {

int argmax_lowest(const std::vector<double>& v) {
    int best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    return best;
}

PredictionRecord make_record(int label, std::vector<double> confidences, std::size_t row) {
    const std::string where = row ? " (row " + std::to_string(row) + ")" : "";
    if (confidences.empty()) throw ValidationError("empty confidence vector" + where);
    if (label < 0 || static_cast<std::size_t>(label) >= confidences.size()) {
        throw ValidationError("label " + std::to_string(label) + " outside the confidence vector" + where);
    }
    double sum = 0.0;
    for (double c : confidences) {
        if (!std::isfinite(c) || c < 0.0 || c > 1.0) throw ValidationError("confidence outside [0, 1]" + where);
        sum += c;
    }
    if (std::abs(sum - 1.0) > kConfidenceSumTolerance) {
        throw ValidationError("confidences sum to " + format_double(sum) + ", expected 1" + where);
    }
    if (sum != 1.0) {
        for (double& c : confidences) c /= sum;
    }
    PredictionRecord r;
    r.true_label = label;
    r.predicted_label = argmax_lowest(confidences);
    r.confidences = std::move(confidences);
    return r;
}

std::vector<PredictionRecord> parse_predictions_jsonl(const std::string& text) {
    std::vector<PredictionRecord> out;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string_view line = trim(std::string_view(text).substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(e.what(), line_no);
        }
        if (!j.is_object() || !j.contains("label") || !j.contains("confidences") ||
            !j["label"].is_number_integer() || !j["confidences"].is_array()) {
            throw ParseError("expected {\"label\": int, \"confidences\": [...]}", line_no);
        }
        std::vector<double> conf;
        for (const auto& c : j["confidences"]) {
            if (!c.is_number()) throw ParseError("non-numeric confidence", line_no);
            conf.push_back(c.get<double>());
        }
        out.push_back(make_record(j["label"].get<int>(), std::move(conf), line_no));
    }
    return out;
}

std::vector<PredictionRecord> parse_predictions_csv(const std::string& text) {
    std::vector<PredictionRecord> out;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string_view line = trim(std::string_view(text).substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        double label = 0.0;
        if (!parse_double(cells[0], label)) {
            if (line_no == 1) continue;  // header
            throw ParseError("cannot parse label", line_no);
        }
        if (label != std::floor(label) || cells.size() < 2) throw ParseError("expected label,c0,c1,...", line_no);
        std::vector<double> conf;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            double v = 0.0;
            if (!parse_double(cells[c], v)) throw ParseError("cannot parse confidence", line_no);
            conf.push_back(v);
        }
        out.push_back(make_record(static_cast<int>(label), std::move(conf), line_no));
    }
    return out;
}

std::vector<PredictionRecord> ingest_predictions(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    const auto ext = path.extension().string();
    if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") return parse_predictions_jsonl(text);
    return parse_predictions_csv(text);
}

std::string predictions_jsonl(const std::vector<PredictionRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        nlohmann::json j{{"label", r.true_label}, {"confidences", r.confidences}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace minima
