#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace fraclap {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

double parse_double(std::string_view text);

/// FNV-1a over raw bytes, chained through `seed`.
std::uint64_t fnv1a(std::span<const unsigned char> bytes,
                    std::uint64_t seed = 14695981039346656037ull);

template <class T>
std::uint64_t fnv1a_of(std::span<const T> values, std::uint64_t seed = 14695981039346656037ull) {
  return fnv1a({reinterpret_cast<const unsigned char*>(values.data()), values.size_bytes()}, seed);
}

}  // namespace fraclap
