#include "minima/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>

#include "minima/error.hpp"
#include "minima/rng.hpp"
#include "minima/text_io.hpp"

namespace minima {

std::vector<Slice> neuron_slices(const NetworkParams& params) {
    std::vector<Slice> out;
    for (std::size_t k = 0; k < params.layer_count(); ++k) {
        const std::size_t in = params.in_width(k);
        for (std::size_t s = 0; s < params.out_width(k); ++s) {
            Slice slice;
            for (std::size_t a = 0; a < in; ++a) slice.indices.push_back(params.weight_offset(k) + s * in + a);
            slice.indices.push_back(params.bias_offset(k) + s);
            out.push_back(std::move(slice));
        }
    }
    return out;
}

Directions random_directions(std::span<const double> theta, std::span<const Slice> slices, std::uint64_t seed,
                             DirectionNorm norm) {
    Directions dirs;
    Rng r1(seed, (static_cast<std::uint64_t>(Stream::Directions) << 32) | 1u);
    Rng r2(seed, (static_cast<std::uint64_t>(Stream::Directions) << 32) | 2u);
    dirs.d1.resize(theta.size());
    dirs.d2.resize(theta.size());
    for (double& x : dirs.d1) x = r1.normal();
    for (double& x : dirs.d2) x = r2.normal();
    if (norm == DirectionNorm::PerNeuron) {
        for (const Slice& slice : slices) {
            double t2 = 0.0;
            double a2 = 0.0;
            double b2 = 0.0;
            for (std::size_t idx : slice.indices) {
                t2 += theta[idx] * theta[idx];
                a2 += dirs.d1[idx] * dirs.d1[idx];
                b2 += dirs.d2[idx] * dirs.d2[idx];
            }
            const double tn = std::sqrt(t2);
            const double sa = (tn == 0.0 || a2 == 0.0) ? 0.0 : tn / std::sqrt(a2);
            const double sb = (tn == 0.0 || b2 == 0.0) ? 0.0 : tn / std::sqrt(b2);
            for (std::size_t idx : slice.indices) {
                dirs.d1[idx] *= sa;
                dirs.d2[idx] *= sb;
            }
        }
    }
    return dirs;
}

Directions random_directions(const NetworkParams& params, std::uint64_t seed, DirectionNorm norm) {
    const auto slices = neuron_slices(params);
    return random_directions(params.values(), slices, seed, norm);
}

std::vector<double> grid_axis(std::size_t resolution, double extent) {
    std::vector<double> axis(resolution);
    const double denom = static_cast<double>(resolution - 1);
    for (std::size_t i = 0; i < resolution; ++i) {
        const double num = 2.0 * static_cast<double>(i) - denom;
        axis[i] = extent * num / denom;
    }
    return axis;
}

LandscapeGrid loss_grid(std::span<const double> theta, const FlatLossFn& loss, const Directions& dirs,
                        std::size_t resolution, double extent) {
    if (resolution < 3 || resolution % 2 == 0) throw ContractError("loss_grid: resolution must be odd and >= 3");
    if (!(extent > 0.0)) throw ContractError("loss_grid: extent must be positive");
    if (dirs.d1.size() != theta.size() || dirs.d2.size() != theta.size()) {
        throw ContractError("loss_grid: direction size does not match parameters");
    }
    LandscapeGrid g;
    g.resolution = resolution;
    g.extent = extent;
    g.alphas = grid_axis(resolution, extent);
    g.betas = g.alphas;
    g.values.resize(resolution * resolution);
    std::vector<double> point(theta.size());
    for (std::size_t i = 0; i < resolution; ++i) {
        for (std::size_t j = 0; j < resolution; ++j) {
            const double a = g.alphas[i];
            const double b = g.betas[j];
            for (std::size_t p = 0; p < theta.size(); ++p) point[p] = theta[p] + a * dirs.d1[p] + b * dirs.d2[p];
            double v;
            try {
                v = loss(point);
            } catch (const NumericError&) {
                v = std::numeric_limits<double>::quiet_NaN();
            } catch (const DomainError&) {
                v = std::numeric_limits<double>::quiet_NaN();
            }
            if (!std::isfinite(v)) {
                v = std::numeric_limits<double>::quiet_NaN();
                ++g.flagged;
            }
            g.values[i * resolution + j] = v;
        }
    }
    return g;
}

LandscapeGrid loss_grid(const NetworkParams& params, const BatchView& data, LossKind kind, const Directions& dirs,
                        std::size_t resolution, double extent) {
    Evaluator ev(params.widths());
    NetworkParams probe = params;
    return loss_grid(
        params.values(),
        [&](std::span<const double> theta) {
            std::copy(theta.begin(), theta.end(), probe.values().begin());
            return ev.loss(probe, data, kind);
        },
        dirs, resolution, extent);
}

LandscapeGrid objective_grid(Objective fn, Point2 center, const Directions& dirs, std::size_t resolution,
                             double extent) {
    const double theta[2] = {center[0], center[1]};
    return loss_grid(
        theta, [fn](std::span<const double> p) { return evaluate(fn, {p[0], p[1]}); }, dirs, resolution, extent);
}

std::string grid_csv(const LandscapeGrid& g) {
    std::string out = "alpha\\beta";
    for (double b : g.betas) {
        out += ',';
        out += format_double(b);
    }
    out += '\n';
    for (std::size_t i = 0; i < g.resolution; ++i) {
        out += format_double(g.alphas[i]);
        for (std::size_t j = 0; j < g.resolution; ++j) {
            out += ',';
            out += format_double(g.at(i, j));
        }
        out += '\n';
    }
    return out;
}

LandscapeGrid parse_grid_csv(const std::string& text) {
    LandscapeGrid g;
    std::vector<std::vector<double>> rows;
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
        std::vector<double> row;
        for (std::size_t c = (line_no == 1 ? 1 : 0); c < cells.size(); ++c) {
            double v = 0.0;
            if (!parse_double(cells[c], v)) throw ParseError("cannot parse grid cell", line_no);
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw ParseError("grid needs an axis row and at least one value row", 0);
    g.betas = rows.front();
    g.resolution = g.betas.size();
    if (rows.size() != g.resolution + 1) throw ParseError("grid is not square", 0);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != g.resolution + 1) throw ParseError("ragged grid row", i + 1);
        g.alphas.push_back(rows[i][0]);
        for (std::size_t j = 1; j < rows[i].size(); ++j) {
            g.values.push_back(rows[i][j]);
            if (!std::isfinite(rows[i][j])) ++g.flagged;
        }
    }
    g.extent = g.alphas.back();
    return g;
}

void export_grid(const LandscapeGrid& grid, const std::filesystem::path& path) { write_file(path, grid_csv(grid)); }

LandscapeGrid import_grid(const std::filesystem::path& path) { return parse_grid_csv(read_file(path)); }

std::string grid_metadata_json(const LandscapeGrid& g) {
    nlohmann::ordered_json j;
    j["resolution"] = g.resolution;
    j["extent"] = g.extent;
    j["seed"] = g.direction_seed;
    j["normalization"] = g.normalization == DirectionNorm::PerNeuron ? "per_neuron" : "none";
    j["flagged"] = g.flagged;
    return j.dump(2) + "\n";
}

}  // namespace minima
