#include "minima/dataset.hpp"

#include <cmath>
#include <string>

#include "minima/error.hpp"
#include "minima/hashing.hpp"
#include "minima/rng.hpp"
#include "minima/text_io.hpp"

namespace minima {

RegressionDataset generate_dataset(Objective fn, std::size_t n, std::uint64_t seed, Split split) {
    if (n == 0) throw ContractError("generate_dataset: n must be positive");
    RegressionDataset ds;
    ds.source = fn;
    ds.seed = seed;
    ds.split = split;
    ds.inputs.resize(2 * n);
    ds.targets.resize(n);
    Rng rng(seed, split == Split::Train ? Stream::TrainData : Stream::TestData);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.uniform(kInputLow, kInputHigh);
        const double y = rng.uniform(kInputLow, kInputHigh);
        ds.inputs[2 * i] = x;
        ds.inputs[2 * i + 1] = y;
        ds.targets[i] = evaluate(fn, {x, y});
    }
    return ds;
}

std::string dataset_csv(const RegressionDataset& ds) {
    std::string out = "x,y,target\n";
    out.reserve(64 * ds.size() + 16);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out += format_double(ds.inputs[2 * i]);
        out += ',';
        out += format_double(ds.inputs[2 * i + 1]);
        out += ',';
        out += format_double(ds.targets[i]);
        out += '\n';
    }
    return out;
}

RegressionDataset parse_dataset_csv(const std::string& text) {
    RegressionDataset ds;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string_view line = trim(std::string_view(text).substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (!header_seen) {
            if (line != "x,y,target") throw ParseError("expected header 'x,y,target'", line_no);
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != 3) throw ParseError("expected 3 columns, got " + std::to_string(cells.size()), line_no);
        double v[3];
        for (int c = 0; c < 3; ++c) {
            if (!parse_double(cells[c], v[c])) {
                throw ParseError("cannot parse number '" + std::string(trim(cells[c])) + "'", line_no);
            }
            if (!std::isfinite(v[c])) throw ParseError("non-finite value", line_no);
        }
        ds.inputs.push_back(v[0]);
        ds.inputs.push_back(v[1]);
        ds.targets.push_back(v[2]);
    }
    if (!header_seen) throw ParseError("empty dataset file", 0);
    return ds;
}

void save_dataset(const RegressionDataset& ds, const std::filesystem::path& path) {
    write_file(path, dataset_csv(ds));
}

RegressionDataset load_dataset(const std::filesystem::path& path) { return parse_dataset_csv(read_file(path)); }

std::string dataset_id(const RegressionDataset& ds) { return content_hash(dataset_csv(ds)); }

}  // namespace minima
