#include "mqlab/chain.hpp"

#include <numeric>
#include <utility>

#include "mqlab/error.hpp"

namespace mqlab {

namespace {

SparseBistochastic relabel(const Permutation& sigma, const SparseBistochastic& q) {
  if (sigma.size() != q.size()) throw ValidationError("compose: permutation and matrix dimensions differ");
  return SparseBistochastic(q.matrix().permute_rows(sigma));
}

void check_dims(std::size_t n, std::span<const double> v, std::span<double> out) {
  if (v.size() != n || out.size() != n) throw ValidationError("chain: vector dimension mismatch");
}

} // namespace

ComposedChain::ComposedChain(Permutation sigma, SparseBistochastic q)
    : sigma_(std::move(sigma)), q_(std::move(q)), p_(relabel(sigma_, q_)) {}

void ComposedChain::apply(std::span<const double> v, std::span<double> out) const {
  const std::size_t n = size();
  check_dims(n, v, out);
  const auto& a = q_.matrix();
  const auto row_ptr = a.row_ptr();
  const auto cols = a.cols();
  const auto vals = a.values();
  for (std::size_t x = 0; x < n; ++x) {
    const Index src = sigma_(static_cast<Index>(x));
    double sum = 0.0;
    for (std::size_t k = row_ptr[src]; k < row_ptr[src + 1]; ++k) sum += vals[k] * v[cols[k]];
    out[x] = sum;
  }
}

DenseVector ComposedChain::apply(std::span<const double> v) const {
  DenseVector out(size());
  apply(v, out);
  return out;
}

void ComposedChain::deflated_apply(std::span<const double> v, std::span<double> out) const {
  apply(v, out);
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(size());
  for (double& o : out) o -= mean;
}

DenseVector ComposedChain::deflated_apply(std::span<const double> v) const {
  DenseVector out(size());
  deflated_apply(v, out);
  return out;
}

void ComposedChain::apply_transpose(std::span<const double> v, std::span<double> out) const {
  const std::size_t n = size();
  check_dims(n, v, out);
  std::vector<double> relabeled(n);
  for (std::size_t x = 0; x < n; ++x) relabeled[sigma_(static_cast<Index>(x))] = v[x];
  q_.matrix().multiply_transpose(relabeled, out);
}

ComposedChain compose(const Permutation& sigma, const SparseBistochastic& q) {
  return ComposedChain(sigma, q);
}

} // namespace mqlab
