#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace graphletqa::util {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Lowercase hex SHA-256 of a file's contents.
std::string sha256_file(const std::filesystem::path& path);

/// First 64 bits of SHA-256, big-endian. Stable across platforms.
std::uint64_t hash64(std::string_view bytes);

}  // namespace graphletqa::util
