#pragma once

#include <string>
#include <string_view>

namespace dsearch {

// Hex-encoded SHA-256 of a byte string.
std::string sha256_hex(std::string_view data);

// SHA-256 of a file's contents. Throws Error if the file cannot be read.
std::string sha256_file(const std::string& path);

}  // namespace dsearch
