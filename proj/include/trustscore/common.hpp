// Shared vocabulary types, error classes and small helpers.
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace trust {

enum class Label : int { untrustworthy = 0, trustworthy = 1 };

inline int to_int(Label l) { return static_cast<int>(l); }

inline std::string_view to_string(Label l) {
  return l == Label::trustworthy ? "trustworthy" : "untrustworthy";
}

// Accepts 1/0, trustworthy/untrustworthy, t/u (case-sensitive lowercase).
inline std::optional<Label> parse_label(std::string_view s) {
  if (s == "1" || s == "trustworthy" || s == "t") return Label::trustworthy;
  if (s == "0" || s == "untrustworthy" || s == "u") return Label::untrustworthy;
  return std::nullopt;
}

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Referential or uniqueness violations while assembling a corpus.
struct corpus_error : error {
  using error::error;
};

// Malformed or truncated persisted files.
struct format_error : error {
  using error::error;
};

struct version_error : format_error {
  using format_error::format_error;
};

// Violated operation preconditions (bad config, wrong label sets, ...).
struct invalid_argument : error {
  using error::error;
};

struct not_found : error {
  using error::error;
};

// A state transition that conflicts with the current state (e.g. relabeling).
struct conflict : error {
  using error::error;
};

// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw error("format_double: conversion failed");
  return std::string(buf, ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Child seed for stream `index` of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 0x51ed270b27ULL));
}

// Small-state generator for short-lived streams.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return UINT64_MAX; }
  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Uniform double in [0,1) from 53 random bits.
inline double unit_uniform(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Portable bounded draw in [0, n); std distributions differ across
// standard libraries, and model training must be bit-reproducible.
template <typename Rng>
std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t bound = n;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return static_cast<std::size_t>(r % bound);
}

// Fisher-Yates with uniform_index.
template <typename It, typename Rng>
void portable_shuffle(It first, It last, Rng& rng) {
  const auto n = static_cast<std::size_t>(last - first);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    using std::swap;
    swap(first[i - 1], first[j]);
  }
}

}  // namespace trust
