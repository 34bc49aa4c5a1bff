#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "minima/network.hpp"
#include "minima/objectives.hpp"

namespace minima {

enum class Split { Train, Test };

inline constexpr double kInputLow = -3.5;
inline constexpr double kInputHigh = 3.5;

struct RegressionDataset {
    std::vector<double> inputs;   // rows x 2, row-major
    std::vector<double> targets;  // rows
    std::optional<Objective> source;
    std::uint64_t seed = 0;
    Split split = Split::Train;

    std::size_t size() const noexcept { return targets.size(); }
    BatchView view() const { return {inputs, targets, targets.size()}; }
};

/// n i.i.d. points uniform on [-3.5, 3.5]^2 with targets fn(x, y). Train and
/// test splits draw from disjoint streams of the same seed.
RegressionDataset generate_dataset(Objective fn, std::size_t n, std::uint64_t seed, Split split = Split::Train);

/// `x,y,target` header, one row per sample, 17 significant digits.
std::string dataset_csv(const RegressionDataset& ds);
RegressionDataset parse_dataset_csv(const std::string& text);

void save_dataset(const RegressionDataset& ds, const std::filesystem::path& path);
/// Throws ParseError (with line number) on malformed rows or non-finite values.
RegressionDataset load_dataset(const std::filesystem::path& path);

/// Content hash of the canonical CSV serialization.
std::string dataset_id(const RegressionDataset& ds);

}  // namespace minima
