#pragma once

// Two-dimensional loss surfaces: values[i][j] = L(theta + alpha_i d1 + beta_j d2)
// on a uniform grid over [-extent, extent]^2.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "minima/network.hpp"
#include "minima/objectives.hpp"

namespace minima {

enum class DirectionNorm { None, PerNeuron };

inline constexpr std::size_t kDefaultGridResolution = 51;
inline constexpr double kDefaultGridExtent = 1.0;

/// A contiguous or strided group of coordinates normalized together.
struct Slice {
    std::vector<std::size_t> indices;
};

/// Per-neuron slices of a network: row s of each weight matrix plus bias s.
std::vector<Slice> neuron_slices(const NetworkParams& params);

struct Directions {
    std::vector<double> d1;
    std::vector<double> d2;
};

/// Two independent standard normal vectors. With PerNeuron every slice of each
/// direction is rescaled to the norm of the same slice of theta (zero when the
/// theta slice is zero). Coordinates outside every slice are left unscaled.
Directions random_directions(std::span<const double> theta, std::span<const Slice> slices, std::uint64_t seed,
                             DirectionNorm norm);
Directions random_directions(const NetworkParams& params, std::uint64_t seed, DirectionNorm norm);

struct LandscapeGrid {
    std::size_t resolution = kDefaultGridResolution;
    double extent = kDefaultGridExtent;
    std::vector<double> alphas;
    std::vector<double> betas;
    std::vector<double> values;  // resolution x resolution, row i <-> alpha_i
    std::uint64_t direction_seed = 0;
    DirectionNorm normalization = DirectionNorm::PerNeuron;
    std::size_t flagged = 0;  // non-finite cells (stored as NaN)

    double at(std::size_t i, std::size_t j) const { return values[i * resolution + j]; }
    double center() const { return at(resolution / 2, resolution / 2); }
};

/// alpha_i = extent * (2i - (res - 1)) / (res - 1), so the centre is exactly 0.
std::vector<double> grid_axis(std::size_t resolution, double extent);

using FlatLossFn = std::function<double(std::span<const double>)>;

/// resolution must be odd and >= 3. Non-finite losses (or thrown
/// NumericError/DomainError) are stored as NaN and counted in `flagged`.
LandscapeGrid loss_grid(std::span<const double> theta, const FlatLossFn& loss, const Directions& dirs,
                        std::size_t resolution = kDefaultGridResolution, double extent = kDefaultGridExtent);

LandscapeGrid loss_grid(const NetworkParams& params, const BatchView& data, LossKind kind, const Directions& dirs,
                        std::size_t resolution = kDefaultGridResolution, double extent = kDefaultGridExtent);

LandscapeGrid objective_grid(Objective fn, Point2 center, const Directions& dirs,
                             std::size_t resolution = kDefaultGridResolution, double extent = kDefaultGridExtent);

/// First row: "alpha\beta" then the betas; each following row: alpha_i then
/// the values. Non-finite cells are written as `nan`.
std::string grid_csv(const LandscapeGrid& grid);
LandscapeGrid parse_grid_csv(const std::string& text);
void export_grid(const LandscapeGrid& grid, const std::filesystem::path& path);
LandscapeGrid import_grid(const std::filesystem::path& path);

/// {resolution, extent, seed, normalization, flagged}
std::string grid_metadata_json(const LandscapeGrid& grid);

}  // namespace minima
