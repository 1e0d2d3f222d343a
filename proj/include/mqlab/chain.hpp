#pragma once

#include <span>
#include <vector>

#include "mqlab/permutation.hpp"
#include "mqlab/sparse.hpp"

namespace mqlab {

using DenseVector = std::vector<double>;

/// The chain P = M Q, where M is the permutation matrix of sigma.
///
/// P(x, y) = Q(sigma(x), y): P is Q with its rows relabeled, so it is
/// bistochastic whenever Q is, and no entry value is ever recomputed.
class ComposedChain {
public:
  ComposedChain(Permutation sigma, SparseBistochastic q);

  std::size_t size() const { return q_.size(); }
  const Permutation& sigma() const { return sigma_; }
  const SparseBistochastic& q() const { return q_; }
  /// The row-relabeled matrix P.
  const SparseBistochastic& p() const { return p_; }

  /// out = P v, evaluated as (Q v) read through sigma.
  void apply(std::span<const double> v, std::span<double> out) const;
  DenseVector apply(std::span<const double> v) const;

  /// out = (P - (1/n) 1 1^T) v = P v - mean(v) 1. Maps 1^perp into itself.
  void deflated_apply(std::span<const double> v, std::span<double> out) const;
  DenseVector deflated_apply(std::span<const double> v) const;

  /// out = P^T v, used to push a row distribution forward (pi P).
  void apply_transpose(std::span<const double> v, std::span<double> out) const;

private:
  Permutation sigma_;
  SparseBistochastic q_;
  SparseBistochastic p_;
};

ComposedChain compose(const Permutation& sigma, const SparseBistochastic& q);

} // namespace mqlab
