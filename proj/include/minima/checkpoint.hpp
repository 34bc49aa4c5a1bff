#pragma once

// Checkpoint layout:
//   line 1   compact JSON header terminated by '\n':
//            {"format":"minima-checkpoint","version":1,"dtype":"f64le",
//             "widths":[2,64,64,1],"count":4417}
//   then     `count` IEEE-754 binary64 values, little-endian, 8 bytes each, in
//            flat parameter order (per layer: weights row-major, then bias).

#include <filesystem>
#include <string>

#include "minima/network.hpp"

namespace minima {

std::string encode_checkpoint(const NetworkParams& params);
NetworkParams decode_checkpoint(const std::string& bytes);

void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_checkpoint(const std::filesystem::path& path);

/// Content hash of the encoded checkpoint.
std::string checkpoint_hash(const NetworkParams& params);

}  // namespace minima
