#include "minima/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <json.hpp>

#include "minima/error.hpp"
#include "minima/hashing.hpp"
#include "minima/text_io.hpp"

namespace minima {

std::string encode_checkpoint(const NetworkParams& params) {
    nlohmann::ordered_json header;
    header["format"] = "minima-checkpoint";
    header["version"] = 1;
    header["dtype"] = "f64le";
    header["widths"] = params.widths();
    header["count"] = params.size();
    std::string out = header.dump();
    out += '\n';
    out.reserve(out.size() + 8 * params.size());
    for (double v : params.values()) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
    }
    return out;
}

NetworkParams decode_checkpoint(const std::string& bytes) {
    const std::size_t nl = bytes.find('\n');
    if (nl == std::string::npos) throw ParseError("checkpoint: missing header line", 1);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(0, nl));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("checkpoint header: ") + e.what(), 1);
    }
    if (header.value("format", "") != "minima-checkpoint" || header.value("dtype", "") != "f64le") {
        throw ParseError("checkpoint: unsupported format", 1);
    }
    const auto widths = header.at("widths").get<std::vector<std::size_t>>();
    const auto count = header.at("count").get<std::size_t>();
    NetworkParams params(widths);
    if (params.size() != count) throw ParseError("checkpoint: count does not match widths", 1);
    if (bytes.size() - nl - 1 != 8 * count) throw ParseError("checkpoint: payload size mismatch", 0);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + nl + 1);
    auto values = params.values();
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[8 * i + b]) << (8 * b);
        values[i] = std::bit_cast<double>(bits);
    }
    return params;
}

void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path) {
    write_file(path, encode_checkpoint(params));
}

NetworkParams load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

std::string checkpoint_hash(const NetworkParams& params) { return content_hash(encode_checkpoint(params)); }

}  // namespace minima
