#pragma once

// Deterministic sampling helpers. Distributions are implemented here rather
// than through <random> distribution objects so that a seed reproduces the
// same stream on every standard library.

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace sense {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed for an independent stream identified by (seed, stream).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ull));
}

using Rng = std::mt19937_64;

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform integer in [lo, hi].
inline int uniform_int(Rng& rng, int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<int>(uniform01(rng) * static_cast<double>(span));
}

/// Index i (0-based) drawn with probability w(i).
template <typename Derived>
Eigen::Index sample_index(Rng& rng, const Eigen::MatrixBase<Derived>& w) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    acc += w(i);
    if (u < acc) return i;
  }
  for (Eigen::Index i = w.size() - 1; i >= 0; --i) {
    if (w(i) > 0) return i;
  }
  return w.size() - 1;
}

/// Flat Dirichlet sample (normalized exponentials).
inline Eigen::RowVectorXd dirichlet_flat(Rng& rng, Eigen::Index k) {
  Eigen::RowVectorXd x(k);
  for (Eigen::Index i = 0; i < k; ++i) x(i) = -std::log1p(-uniform01(rng));
  return x / x.sum();
}

}  // namespace sense
