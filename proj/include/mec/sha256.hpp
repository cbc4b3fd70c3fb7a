#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace mec {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

/// SHA-256 of the given bytes (FIPS 180-4).
Digest sha256(const Bytes& data);
Digest sha256(const std::uint8_t* data, std::size_t len);
Digest sha256(const std::string& data);

std::string hex(const std::uint8_t* data, std::size_t len);
std::string hex(const Bytes& data);
std::string hex(const Digest& d);

}  // namespace mec
