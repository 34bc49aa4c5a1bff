#pragma once

#include <span>
#include <string>
#include <string_view>

namespace minima {

/// Git blob object id: hex SHA-1 of "blob <size>\0" followed by the bytes.
std::string content_hash(std::string_view bytes);
std::string content_hash(std::span<const unsigned char> bytes);

}  // namespace minima
