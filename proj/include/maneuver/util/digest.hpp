#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace maneuver::util {

// SHA-256 of the input, as 64 lowercase hex chars. Used for cache keys,
// prompt version stamps and deterministic seeding, not for security.
std::string sha256_hex(std::string_view data);

// First 8 bytes of sha256 over the parts joined with a 0x1f separator,
// interpreted big-endian. Gives order-independent, stable RNG seeds.
std::uint64_t stable_seed(std::initializer_list<std::string_view> parts);

// Maps a stable_seed value onto [0, 1). 53 bits of the hash survive.
double unit_interval(std::uint64_t h);

}  // namespace maneuver::util
