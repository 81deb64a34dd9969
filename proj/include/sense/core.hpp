#pragma once

// PMF algebra over a finite ordered state space: stochastic dominance,
// propagation through a transition matrix, and the low/high decomposition.
//
// States and rows are addressed 1-based in the public API (state 1 is the
// worst quality, state K the best); Eigen storage underneath is 0-based.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>

#include "sense/errors.hpp"

namespace sense {

inline constexpr double kDominanceTol = 1e-9;
inline constexpr double kSumTol = 1e-9;
inline constexpr double kNegativeRejectTol = 1e-9;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar>
using ColVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Upper tail sums: out(i) = sum_{j >= i} x(j), 0-based.
template <typename Derived>
RowVector<typename Derived::Scalar> tail_sums(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index k = x.size();
  RowVector<Scalar> out(k);
  Scalar acc(0);
  for (Eigen::Index i = k - 1; i >= 0; --i) {
    acc += x(i);
    out(i) = acc;
  }
  return out;
}

/// Worst slack of x >=st y: min over i = 2..K of tail_x(i) - tail_y(i).
/// Non-negative (up to tolerance) exactly when x dominates y.
template <typename DX, typename DY>
typename DX::Scalar dominance_margin(const Eigen::MatrixBase<DX>& x,
                                     const Eigen::MatrixBase<DY>& y) {
  if (x.size() != y.size()) {
    throw DimensionMismatch("dominance: PMFs of different dimension");
  }
  using Scalar = typename DX::Scalar;
  if (x.size() < 2) return Scalar(0);
  const auto tx = tail_sums(x);
  const auto ty = tail_sums(y);
  return (tx.tail(x.size() - 1) - ty.tail(y.size() - 1)).minCoeff();
}

template <typename DX, typename DY>
bool dominates(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y,
               double tol = kDominanceTol) {
  return dominance_margin(x, y) >= -tol;
}

/// Probability row vector. Construction validates: entries below
/// -kNegativeRejectTol are rejected, smaller negatives are clamped to zero
/// (followed by renormalization), and the sum must be 1 within kSumTol.
template <typename Scalar>
class BasicPmf {
 public:
  using Row = RowVector<Scalar>;

  BasicPmf() = default;

  explicit BasicPmf(Row probs) : probs_(std::move(probs)) {
    if (probs_.size() < 1) throw InvalidArgument("PMF must have at least one state");
    bool clamped = false;
    for (Eigen::Index i = 0; i < probs_.size(); ++i) {
      const Scalar p = probs_(i);
      if (!std::isfinite(static_cast<double>(p))) {
        throw InvalidArgument("PMF entry " + std::to_string(i + 1) + " is not finite");
      }
      if (p < Scalar(0)) {
        if (p < Scalar(-kNegativeRejectTol)) {
          throw InvalidArgument("PMF entry " + std::to_string(i + 1) + " is negative");
        }
        probs_(i) = Scalar(0);
        clamped = true;
      }
    }
    const Scalar total = probs_.sum();
    if (std::abs(static_cast<double>(total) - 1.0) > kSumTol) {
      throw InvalidArgument("PMF entries sum to " + std::to_string(static_cast<double>(total)) +
                            ", expected 1");
    }
    if (clamped) probs_ /= total;
  }

  /// e_i: unit mass on state i (1-based).
  static BasicPmf basis(Eigen::Index k, Eigen::Index i) {
    if (i < 1 || i > k) throw InvalidArgument("basis index out of range");
    Row r = Row::Zero(k);
    r(i - 1) = Scalar(1);
    return BasicPmf(std::move(r));
  }

  const Row& probs() const { return probs_; }
  Eigen::Index size() const { return probs_.size(); }
  /// Probability of state i (1-based).
  Scalar at(Eigen::Index i) const { return probs_(i - 1); }

  /// Expectation of a per-state column vector v.
  template <typename Derived>
  Scalar expect(const Eigen::MatrixBase<Derived>& v) const {
    if (v.size() != probs_.size()) throw DimensionMismatch("expectation: dimension mismatch");
    return probs_.dot(v.transpose());
  }

  friend bool operator==(const BasicPmf& a, const BasicPmf& b) { return a.probs_ == b.probs_; }

 private:
  Row probs_;
};

template <typename Scalar>
bool dominates(const BasicPmf<Scalar>& x, const BasicPmf<Scalar>& y, double tol = kDominanceTol) {
  return dominates(x.probs(), y.probs(), tol);
}

template <typename Scalar>
Scalar dominance_margin(const BasicPmf<Scalar>& x, const BasicPmf<Scalar>& y) {
  return dominance_margin(x.probs(), y.probs());
}

/// Row-stochastic K x K matrix; row i is the next-state PMF from state i.
template <typename Scalar>
class BasicTransitionMatrix {
 public:
  using Matrix = DenseMatrix<Scalar>;

  BasicTransitionMatrix() = default;

  explicit BasicTransitionMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw DimensionMismatch("transition matrix must be square");
    if (m_.rows() < 1) throw InvalidArgument("transition matrix is empty");
    for (Eigen::Index i = 0; i < m_.rows(); ++i) {
      try {
        m_.row(i) = BasicPmf<Scalar>(m_.row(i)).probs();
      } catch (const InvalidArgument& e) {
        throw InvalidArgument("transition row " + std::to_string(i + 1) + ": " + e.what());
      }
    }
  }

  Eigen::Index states() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return m_(i - 1, j - 1); }

  /// Row P_i (1-based): the belief after observing state i.
  BasicPmf<Scalar> row(Eigen::Index i) const {
    if (i < 1 || i > m_.rows()) {
      throw InvalidArgument("state index " + std::to_string(i) + " out of range 1.." +
                            std::to_string(m_.rows()));
    }
    return BasicPmf<Scalar>(m_.row(i - 1));
  }

  static BasicTransitionMatrix identity(Eigen::Index k) {
    return BasicTransitionMatrix(Matrix::Identity(k, k));
  }

 private:
  Matrix m_;
};

/// P^steps by binary exponentiation over successive squares.
template <typename Scalar>
DenseMatrix<Scalar> matrix_power(const BasicTransitionMatrix<Scalar>& p, long steps) {
  if (steps < 0) throw InvalidArgument("negative number of steps");
  const Eigen::Index k = p.states();
  DenseMatrix<Scalar> result = DenseMatrix<Scalar>::Identity(k, k);
  DenseMatrix<Scalar> square = p.matrix();
  while (steps > 0) {
    if (steps & 1) result = result * square;
    steps >>= 1;
    if (steps > 0) square = square * square;
  }
  return result;
}

/// x P^steps; steps = 0 returns x unchanged.
template <typename Scalar>
BasicPmf<Scalar> evolve(const BasicPmf<Scalar>& x, const BasicTransitionMatrix<Scalar>& p,
                        long steps = 1) {
  if (x.size() != p.states()) throw DimensionMismatch("evolve: PMF and matrix dimensions differ");
  if (steps < 0) throw InvalidArgument("evolve: negative number of steps");
  if (steps == 0) return x;
  if (steps == 1) return BasicPmf<Scalar>(x.probs() * p.matrix());
  return BasicPmf<Scalar>(x.probs() * matrix_power(p, steps));
}

template <typename Scalar>
struct BasicDecomposition {
  BasicPmf<Scalar> under;  // mass of states >= L-1 collapsed onto state L-1
  BasicPmf<Scalar> over;   // mass of states <= L collapsed onto state L
  Scalar mass_hi;          // sum_{i >= L} x(i)
};

/// Splits x around threshold L so that
///   x = under + over - e_L + mass_hi (e_L - e_{L-1}).
template <typename Scalar>
BasicDecomposition<Scalar> decompose(const BasicPmf<Scalar>& x, Eigen::Index threshold) {
  const Eigen::Index k = x.size();
  if (threshold < 2 || threshold > k) {
    throw InvalidArgument("threshold L must lie in 2..K");
  }
  const auto& p = x.probs();
  const Eigen::Index l0 = threshold - 1;  // 0-based position of state L
  RowVector<Scalar> under = RowVector<Scalar>::Zero(k);
  under.head(l0 - 1) = p.head(l0 - 1);
  under(l0 - 1) = p.tail(k - l0 + 1).sum();
  RowVector<Scalar> over = RowVector<Scalar>::Zero(k);
  over(l0) = p.head(l0 + 1).sum();
  over.tail(k - l0 - 1) = p.tail(k - l0 - 1);
  const Scalar mass_hi = p.tail(k - l0).sum();
  return {BasicPmf<Scalar>(std::move(under)), BasicPmf<Scalar>(std::move(over)), mass_hi};
}

/// Left-hand side of the decomposition identity, for checking reconstruction.
template <typename Scalar>
RowVector<Scalar> recompose(const BasicDecomposition<Scalar>& d, Eigen::Index threshold) {
  RowVector<Scalar> out = d.under.probs() + d.over.probs();
  out(threshold - 1) += d.mass_hi - Scalar(1);
  out(threshold - 2) -= d.mass_hi;
  return out;
}

/// Per-state rewards, required nondecreasing in state quality.
template <typename Scalar>
class BasicRewardVector {
 public:
  using Vector = ColVector<Scalar>;

  BasicRewardVector() = default;

  explicit BasicRewardVector(Vector r) : r_(std::move(r)) {
    for (Eigen::Index i = 0; i < r_.size(); ++i) {
      if (!std::isfinite(static_cast<double>(r_(i)))) throw InvalidArgument("reward is not finite");
      if (i > 0 && r_(i) < r_(i - 1)) {
        throw InvalidArgument("rewards must be nondecreasing: R_" + std::to_string(i + 1) +
                              " < R_" + std::to_string(i));
      }
    }
  }

  const Vector& values() const { return r_; }
  Eigen::Index size() const { return r_.size(); }
  Scalar at(Eigen::Index i) const { return r_(i - 1); }

 private:
  Vector r_;
};

using Pmf = BasicPmf<double>;
using TransitionMatrix = BasicTransitionMatrix<double>;
using RewardVector = BasicRewardVector<double>;
using Decomposition = BasicDecomposition<double>;
using Eigen::Index;

}  // namespace sense
