#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace joinlab {

// ----- error taxonomy (CLI maps these to exit codes) --------------------

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or rejected configuration / input (exit code 4).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Not enough orbit data to produce an estimate (exit code 3).
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Operation requires a loxodromic isometry.
class NonLoxodromicError : public Error {
 public:
  using Error::Error;
};

// Argument outside the validated domain (e.g. functional not positive on
// the limit cone).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Corrupt or mismatched dataset cache.
class CacheError : public Error {
 public:
  using Error::Error;
};

// Enumeration aborted against the memory budget; carries the last depth
// that was fully materialized.
class EnumerationLimitError : public Error {
 public:
  EnumerationLimitError(const std::string& msg, int completed_depth)
      : Error(msg), completed_depth_(completed_depth) {}
  int completed_depth() const { return completed_depth_; }

 private:
  int completed_depth_;
};

// ----- deterministic RNG -------------------------------------------------
// splitmix64; identical streams on every platform, unlike the
// distribution adaptors in <random>.

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // uniform integer in [0, n)
  uint64_t below(uint64_t n) {
    // 128-bit multiply rejection-free mapping (Lemire)
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    return static_cast<uint64_t>(m >> 64);
  }

 private:
  uint64_t state_;
};

// ----- least squares line fit --------------------------------------------

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  int n = 0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  LineFit f;
  f.n = static_cast<int>(x.size());
  if (f.n < 2) return f;
  double sx = 0, sy = 0;
  for (int i = 0; i < f.n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / f.n, my = sy / f.n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < f.n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (f.n > 2) {
    double rss = 0;
    for (int i = 0; i < f.n; ++i) {
      const double r = y[i] - (f.intercept + f.slope * x[i]);
      rss += r * r;
    }
    f.slope_stderr = std::sqrt(rss / (f.n - 2) / sxx);
  }
  return f;
}

// ----- content fingerprint ------------------------------------------------

inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace joinlab
