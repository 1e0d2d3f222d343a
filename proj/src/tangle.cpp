#include "mqlab/tangle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <queue>
#include <string>

#include "mqlab/error.hpp"
#include "mqlab/norms.hpp"
#include "mqlab/spectral.hpp"

namespace mqlab {

bool is_valid_path(const Path& path, const SparseMatrix& q) {
  if (path.xs.size() != path.ys.size() + 1) return false;
  for (const Index x : path.xs) {
    if (x >= q.size()) return false;
  }
  for (std::size_t t = 0; t < path.ys.size(); ++t) {
    if (path.ys[t] >= q.size() || q.at(path.ys[t], path.xs[t + 1]) <= 0.0) return false;
  }
  return true;
}

std::size_t default_h(std::size_t n) {
  if (n <= 1) return 1;
  return static_cast<std::size_t>(std::ceil(20.0 * std::sqrt(std::log(static_cast<double>(n)))));
}

TangleParams default_tangle_params(const SparseMatrix& q, double delta, std::size_t ell) {
  TangleParams p;
  p.h = default_h(q.size());
  p.delta = delta;
  p.ell = ell;
  p.E = delta_norm(q, delta).witness;
  return p;
}

namespace {

// Adjacency of the Gram graph: x ~ x' iff some row of q holds both columns.
std::vector<std::vector<Index>> gram_graph(const SparseMatrix& q) {
  const std::size_t n = q.size();
  std::vector<std::vector<Index>> adj(n);
  for (std::size_t y = 0; y < n; ++y) {
    const auto cols = q.row_cols(static_cast<Index>(y));
    for (const Index a : cols) {
      for (const Index b : cols) {
        if (a != b) adj[a].push_back(b);
      }
    }
  }
  for (auto& nb : adj) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  return adj;
}

std::vector<Index> ball(const std::vector<std::vector<Index>>& adj, Index x, std::size_t h) {
  std::vector<std::size_t> dist(adj.size(), static_cast<std::size_t>(-1));
  std::vector<Index> out{x};
  std::queue<Index> q;
  dist[x] = 0;
  q.push(x);
  while (!q.empty()) {
    const Index u = q.front();
    q.pop();
    if (dist[u] == h) continue;
    for (const Index v : adj[u]) {
      if (dist[v] == static_cast<std::size_t>(-1)) {
        dist[v] = dist[u] + 1;
        out.push_back(v);
        q.push(v);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool in_sorted(std::span<const Index> set, Index x) { return std::binary_search(set.begin(), set.end(), x); }

using Arc = std::array<Index, 3>;
using CoincidenceKey = std::vector<Arc>;

enum class WindowKind { plain, coincidence, e_coincidence };

// Classifies the subpath made of the given arcs (indices into the path,
// in walking order).
WindowKind classify(const Path& p, std::span<const std::size_t> arcs, const GramReach& reach,
                    std::span<const Index> E) {
  const Index first = p.xs[arcs.front()];
  const Index head = p.xs[arcs.back() + 1];
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    for (std::size_t b = a + 1; b < arcs.size(); ++b) {
      if (p.xs[arcs[a]] == p.xs[arcs[b]]) return WindowKind::plain;
    }
  }
  if (head == first && in_sorted(E, first)) return WindowKind::e_coincidence;
  if (reach.contains(first, head)) return WindowKind::coincidence;
  return WindowKind::plain;
}

CoincidenceKey key_of(const Path& p, std::span<const std::size_t> arcs) {
  CoincidenceKey key;
  key.reserve(arcs.size());
  for (const std::size_t a : arcs) key.push_back({p.xs[a], p.ys[a], p.xs[a + 1]});
  std::sort(key.begin(), key.end());
  return key;
}

// Running tangle state of a path prefix.
struct TangleState {
  std::vector<CoincidenceKey> keys;
  std::size_t windows = 0;
  std::size_t e_coincidences = 0;

  bool tangled() const { return keys.size() >= 2 || e_coincidences > 0; }

  // Adds every subpath window whose last arc is `t`.
  void add_windows_ending_at(const Path& p, std::size_t t, const GramReach& reach, std::span<const Index> E) {
    std::vector<std::size_t> arcs;
    auto visit = [&]() {
      const auto kind = classify(p, arcs, reach, E);
      if (kind == WindowKind::plain) return;
      ++windows;
      if (kind == WindowKind::e_coincidence) ++e_coincidences;
      auto key = key_of(p, arcs);
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(std::move(key));
    };
    // contiguous windows s..t
    for (std::size_t s = t + 1; s-- > 0;) {
      arcs.clear();
      for (std::size_t a = s; a <= t; ++a) arcs.push_back(a);
      visit();
    }
    // shortcut windows: arcs s..i-1 then j..t, where x_i = x_j, s < i < j <= t
    for (std::size_t j = 1; j <= t; ++j) {
      for (std::size_t i = 1; i < j; ++i) {
        if (p.xs[i] != p.xs[j]) continue;
        for (std::size_t s = 0; s < i; ++s) {
          arcs.clear();
          for (std::size_t a = s; a < i; ++a) arcs.push_back(a);
          for (std::size_t a = j; a <= t; ++a) arcs.push_back(a);
          visit();
        }
      }
    }
  }
};

PathTangleReport report_of(const TangleState& st) {
  PathTangleReport r;
  r.coincidence_windows = st.windows;
  r.coincidences = st.keys.size();
  r.e_coincidences = st.e_coincidences;
  r.tangle_free = !st.tangled();
  return r;
}

} // namespace

std::vector<Index> gram_reach(const SparseMatrix& q, Index x, std::size_t h) {
  if (h < 1) throw ValidationError("gram_reach: h must be at least 1");
  if (x >= q.size()) throw ValidationError("gram_reach: vertex out of range");
  return ball(gram_graph(q), x, h);
}

GramReach::GramReach(const SparseMatrix& q, std::size_t h) : h_(h) {
  if (h < 1) throw ValidationError("gram_reach: h must be at least 1");
  const auto adj = gram_graph(q);
  reach_.reserve(q.size());
  for (std::size_t x = 0; x < q.size(); ++x) reach_.push_back(ball(adj, static_cast<Index>(x), h));
}

bool GramReach::contains(Index x, Index target) const { return in_sorted(reach_[x], target); }

bool is_coincidence(const Path& path, const GramReach& reach) {
  if (path.length() == 0) return false;
  std::vector<Index> tails(path.xs.begin(), path.xs.end() - 1);
  std::sort(tails.begin(), tails.end());
  if (std::adjacent_find(tails.begin(), tails.end()) != tails.end()) return false;
  return reach.contains(path.xs.front(), path.xs.back());
}

bool is_coincidence(const Path& path, const SparseMatrix& q, const TangleParams& params) {
  return is_coincidence(path, GramReach(q, params.h));
}

bool is_E_coincidence(const Path& path, const TangleParams& params) {
  if (path.length() == 0 || path.xs.front() != path.xs.back()) return false;
  std::vector<Index> tails(path.xs.begin(), path.xs.end() - 1);
  std::sort(tails.begin(), tails.end());
  if (std::adjacent_find(tails.begin(), tails.end()) != tails.end()) return false;
  return in_sorted(params.E, path.xs.front());
}

PathTangleReport is_tangle_free_path(const Path& path, const GramReach& reach, const TangleParams& params) {
  TangleState st;
  for (std::size_t t = 0; t < path.length(); ++t) st.add_windows_ending_at(path, t, reach, params.E);
  return report_of(st);
}

PathTangleReport is_tangle_free_path(const Path& path, const SparseMatrix& q, const TangleParams& params) {
  if (!is_valid_path(path, q)) throw ValidationError("is_tangle_free_path: not a path of Q");
  return is_tangle_free_path(path, GramReach(q, params.h), params);
}

PairTangleResult pair_tangle_free(const Permutation& sigma, const SparseMatrix& q, std::size_t ell,
                                  const TangleParams& params) {
  if (sigma.size() != q.size()) throw ValidationError("pair_tangle_free: dimension mismatch");
  if (ell < 1) throw ValidationError("pair_tangle_free: ell must be at least 1");
  const GramReach reach(q, params.h);
  struct Node {
    Path path;
    TangleState state;
  };
  std::vector<Node> frontier;
  frontier.reserve(q.size());
  for (std::size_t x = 0; x < q.size(); ++x) frontier.push_back({Path{{static_cast<Index>(x)}, {}}, {}});

  PairTangleResult result;
  for (std::size_t len = 1; len <= ell; ++len) {
    std::vector<Node> next;
    for (const auto& node : frontier) {
      const Index y = sigma(node.path.xs.back());
      for (const Index x2 : q.row_cols(y)) {
        Node child = node;
        child.path.ys.push_back(y);
        child.path.xs.push_back(x2);
        child.state.add_windows_ending_at(child.path, len - 1, reach, params.E);
        ++result.paths_checked;
        if (child.state.tangled()) {
          result.tangle_free = false;
          result.clause = child.state.e_coincidences > 0 ? "E-coincidence" : "two coincidences";
          result.witness = std::move(child.path);
          return result;
        }
        next.push_back(std::move(child));
      }
    }
    frontier = std::move(next);
  }
  return result;
}

namespace {

void check_desk_scale(const SparseMatrix& q, std::size_t ell, const DeskScaleLimits& limits) {
  if (q.size() > limits.max_n || ell > limits.max_ell || q.max_row_support() > limits.max_row_support) {
    throw ValidationError("path sums are limited to n <= " + std::to_string(limits.max_n) + ", ell <= " +
                          std::to_string(limits.max_ell) + ", row support <= " +
                          std::to_string(limits.max_row_support) + " (got n=" + std::to_string(q.size()) +
                          ", ell=" + std::to_string(ell) + ", row support=" + std::to_string(q.max_row_support()) +
                          ")");
  }
}

} // namespace

PathMatrices path_sum_matrices(const Permutation& sigma, const SparseMatrix& q, std::size_t ell,
                               const TangleParams& params, const DeskScaleLimits& limits) {
  if (sigma.size() != q.size()) throw ValidationError("path_sum_matrices: dimension mismatch");
  if (ell < 1) throw ValidationError("path_sum_matrices: ell must be at least 1");
  check_desk_scale(q, ell, limits);

  const std::size_t n = q.size();
  const auto N = static_cast<Eigen::Index>(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  const GramReach reach(q, params.h);

  PathMatrices out;
  for (std::size_t k = 0; k <= ell; ++k) {
    out.p_free.push_back(Eigen::MatrixXd::Zero(N, N));
    out.p_under.push_back(Eigen::MatrixXd::Zero(N, N));
  }
  out.p_free[0].setIdentity();
  out.p_under[0].setIdentity();
  for (std::size_t k = 1; k <= ell; ++k) out.r_mats.push_back(Eigen::MatrixXd::Zero(N, N));

  // Every step of a path picks a stored entry Q(y, x').
  struct Step {
    Index y, x2;
    double w;
  };
  std::vector<Step> steps;
  steps.reserve(q.nnz());
  for (std::size_t y = 0; y < n; ++y) {
    const auto cols = q.row_cols(static_cast<Index>(y));
    const auto vals = q.row_values(static_cast<Index>(y));
    for (std::size_t e = 0; e < cols.size(); ++e) steps.push_back({static_cast<Index>(y), cols[e], vals[e]});
  }

  auto m_entry = [&](Index x, Index y) { return sigma(x) == y ? 1.0 : 0.0; };
  auto suffix_free = [&](const Path& p, std::size_t from) {
    Path sub;
    sub.xs.assign(p.xs.begin() + static_cast<std::ptrdiff_t>(from), p.xs.end());
    sub.ys.assign(p.ys.begin() + static_cast<std::ptrdiff_t>(from), p.ys.end());
    return is_tangle_free_path(sub, reach, params).tangle_free;
  };

  Path path;
  // prefix_free[k]: the prefix of length k is tangle-free
  std::vector<bool> prefix_free(ell + 1, true);

  std::function<void(std::size_t, const TangleState&, double, double)> grow =
      [&](std::size_t depth, const TangleState& state, double prod_m, double prod_u) {
        const Index x1 = path.xs.front();
        const Index last = path.xs.back();
        const bool free_here = !state.tangled();
        prefix_free[depth] = free_here;
        if (depth > 0 && free_here) {
          out.p_free[depth](x1, last) += prod_m;
          out.p_under[depth](x1, last) += prod_u;
        }
        if (depth == ell) {
          if (free_here) return;
          // tangled path of full length: add to every R_k whose split is
          // tangle-free on both sides
          for (std::size_t k = 1; k <= ell; ++k) {
            if (!prefix_free[k - 1] || !suffix_free(path, k)) continue;
            double w = 1.0;
            for (std::size_t t = 0; t + 1 < k; ++t) {
              w *= (m_entry(path.xs[t], path.ys[t]) - inv_n) * q.at(path.ys[t], path.xs[t + 1]);
            }
            w *= q.at(path.ys[k - 1], path.xs[k]);
            for (std::size_t t = k; t < ell; ++t) w *= m_entry(path.xs[t], path.ys[t]) * q.at(path.ys[t], path.xs[t + 1]);
            out.r_mats[k - 1](x1, last) += w;
          }
          return;
        }
        for (const auto& st : steps) {
          path.ys.push_back(st.y);
          path.xs.push_back(st.x2);
          const double mu = m_entry(last, st.y);
          if (free_here) {
            TangleState child = state;
            child.add_windows_ending_at(path, depth, reach, params.E);
            grow(depth + 1, child, prod_m * mu * st.w, prod_u * (mu - inv_n) * st.w);
          } else {
            grow(depth + 1, state, prod_m * mu * st.w, prod_u * (mu - inv_n) * st.w);
          }
          path.ys.pop_back();
          path.xs.pop_back();
        }
      };

  for (std::size_t x = 0; x < n; ++x) {
    path.xs.assign(1, static_cast<Index>(x));
    path.ys.clear();
    grow(0, TangleState{}, 1.0, 1.0);
  }
  return out;
}

DecompositionReport verify_decomposition(const Permutation& sigma, const SparseMatrix& q, std::size_t ell,
                                         const TangleParams& params, const DeskScaleLimits& limits) {
  const auto mats = path_sum_matrices(sigma, q, ell, params, limits);
  const std::size_t n = q.size();
  const auto N = static_cast<Eigen::Index>(n);
  const double inv_n = 1.0 / static_cast<double>(n);

  DecompositionReport rep;
  rep.n = n;
  rep.ell = ell;
  rep.h = params.h;
  rep.pair_tangle_free = pair_tangle_free(sigma, q, ell, params).tangle_free;

  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(N, N);
  Eigen::MatrixXd rhs = mats.p_under[ell];
  Eigen::MatrixXd r_sum = Eigen::MatrixXd::Zero(N, N);
  double r_norms = 0.0;
  for (std::size_t k = 1; k <= ell; ++k) {
    rhs += inv_n * mats.p_under[k - 1] * ones * mats.p_free[ell - k];
    r_sum += mats.r_mats[k - 1];
    r_norms += operator_norm(mats.r_mats[k - 1]);
  }
  rhs -= inv_n * r_sum;
  rep.telescoping_residual = (mats.p_free[ell] - rhs).cwiseAbs().maxCoeff();

  const Eigen::MatrixXd p = q.permute_rows(sigma).to_dense();
  Eigen::MatrixXd p_pow = Eigen::MatrixXd::Identity(N, N);
  for (std::size_t k = 0; k < ell; ++k) p_pow = p_pow * p;
  const Eigen::MatrixXd projector = Eigen::MatrixXd::Identity(N, N) - inv_n * ones;
  rep.restricted_power_norm = operator_norm(p_pow * projector);
  rep.bound = operator_norm(mats.p_under[ell]) + inv_n * r_norms;
  if (rep.pair_tangle_free) {
    rep.power_identity_residual = (p_pow - mats.p_free[ell]).cwiseAbs().maxCoeff();
    rep.lemma_slack = rep.bound - rep.restricted_power_norm;
  }
  return rep;
}

} // namespace mqlab
