#include "mqlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <queue>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "mqlab/error.hpp"

namespace mqlab {

std::string to_string(SpectralMethod m) { return m == SpectralMethod::dense ? "dense" : "krylov"; }

SpectralMethod parse_spectral_method(const std::string& s) {
  if (s == "dense") return SpectralMethod::dense;
  if (s == "krylov") return SpectralMethod::krylov;
  throw ValidationError("unknown spectral method '" + s + "' (expected dense or krylov)");
}

namespace {

void check_cap(Eigen::Index n, std::size_t cap, const char* what) {
  if (static_cast<std::size_t>(n) > cap) {
    throw ValidationError(std::string(what) + ": n=" + std::to_string(n) + " exceeds dense cap " + std::to_string(cap) +
                          "; use the krylov lambda2 method instead");
  }
}

std::vector<std::complex<double>> schur_eigenvalues(const Eigen::MatrixXd& t) {
  const Eigen::Index n = t.rows();
  std::vector<std::complex<double>> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n;) {
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      const double a = t(i, i), b = t(i, i + 1), c = t(i + 1, i), d = t(i + 1, i + 1);
      const double mid = 0.5 * (a + d);
      const double half = 0.5 * (a - d);
      const double disc = half * half + b * c;
      if (disc < 0.0) {
        const double im = std::sqrt(-disc);
        out.emplace_back(mid, im);
        out.emplace_back(mid, -im);
      } else {
        const double s = std::sqrt(disc);
        out.emplace_back(mid + s, 0.0);
        out.emplace_back(mid - s, 0.0);
      }
      i += 2;
    } else {
      out.emplace_back(t(i, i), 0.0);
      i += 1;
    }
  }
  return out;
}

} // namespace

SpectralReport full_spectrum(const Eigen::MatrixXd& a, std::size_t dense_cap) {
  if (a.rows() != a.cols()) throw ValidationError("full_spectrum: matrix not square");
  check_cap(a.rows(), dense_cap, "full_spectrum");
  SpectralReport report;
  report.method = SpectralMethod::dense;
  if (a.rows() == 0) {
    report.eigenvalues.emplace();
    return report;
  }
  Eigen::RealSchur<Eigen::MatrixXd> schur(a, true);
  if (schur.info() != Eigen::Success) throw ConvergenceError("full_spectrum: QR iteration did not converge");
  const Eigen::MatrixXd& t = schur.matrixT();
  const Eigen::MatrixXd& u = schur.matrixU();
  report.residual = (a * u - u * t).norm();
  report.iterations = 1;
  auto eigs = schur_eigenvalues(t);
  report.lambda2_modulus = second_modulus(eigs);
  report.eigenvalues = std::move(eigs);
  return report;
}

SpectralReport full_spectrum(const SparseMatrix& a, std::size_t dense_cap) {
  check_cap(static_cast<Eigen::Index>(a.size()), dense_cap, "full_spectrum");
  return full_spectrum(a.to_dense(), dense_cap);
}

double second_modulus(std::span<const std::complex<double>> eigenvalues) {
  if (eigenvalues.size() < 2) return 0.0;
  std::size_t perron = 0;
  double best = std::abs(eigenvalues[0] - 1.0);
  for (std::size_t i = 1; i < eigenvalues.size(); ++i) {
    const double dist = std::abs(eigenvalues[i] - 1.0);
    if (dist < best) {
      best = dist;
      perron = i;
    }
  }
  double second = 0.0;
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    if (i != perron) second = std::max(second, std::abs(eigenvalues[i]));
  }
  return second;
}

namespace {

struct RitzPair {
  std::complex<double> value;
  Eigen::VectorXcd vector;  // coordinates in the current basis, unit norm
  double residual;
};

// Ritz pairs of the leading m x m block of g, sorted by decreasing modulus.
std::vector<RitzPair> ritz_pairs(const Eigen::MatrixXd& g, Eigen::Index m, double beta) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(g.topLeftCorner(m, m), true);
  if (es.info() != Eigen::Success) throw ConvergenceError("krylov: projected eigenproblem failed");
  std::vector<RitzPair> pairs;
  pairs.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::VectorXcd y = es.eigenvectors().col(i);
    const double nrm = y.norm();
    if (nrm > 0.0) y /= nrm;
    pairs.push_back({es.eigenvalues()(i), y, std::abs(beta) * std::abs(y(m - 1))});
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const RitzPair& a, const RitzPair& b) {
    const double ma = std::abs(a.value), mb = std::abs(b.value);
    if (ma != mb) return ma > mb;
    return a.value.imag() > b.value.imag();
  });
  return pairs;
}

void center(Eigen::Ref<Eigen::VectorXd> v) { v.array() -= v.mean(); }

SpectralReport krylov_lambda2(const ComposedChain& chain, const KrylovOptions& opts) {
  const auto n = static_cast<Eigen::Index>(chain.size());
  SpectralReport report;
  report.method = SpectralMethod::krylov;
  if (n <= 1) return report;

  // 1^perp has dimension n - 1; the subspace cannot exceed it.
  const Eigen::Index m = std::min<Eigen::Index>(static_cast<Eigen::Index>(opts.subspace), n - 1);
  if (m < 2) throw ValidationError("krylov: subspace dimension must be at least 2");
  const Eigen::Index keep_target = std::min<Eigen::Index>(static_cast<Eigen::Index>(opts.keep), m - 2);

  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(n, m + 1);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m + 1, m);

  Rng rng(opts.seed);
  Eigen::VectorXd start(n);
  for (Eigen::Index i = 0; i < n; ++i) start(i) = rng.uniform01() - 0.5;
  center(start);
  basis.col(0) = start / start.norm();

  const double breakdown = 1e-13;
  Eigen::Index filled = 0;  // columns of basis already holding an orthonormal set beyond col 0
  Eigen::VectorXd w(n);
  std::vector<double> in(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));

  double best_estimate = 0.0;
  double best_residual = std::numeric_limits<double>::infinity();

  for (std::size_t cycle = 0; cycle <= opts.restarts; ++cycle) {
    Eigen::Index active = m;
    double beta = 0.0;
    for (Eigen::Index j = filled; j < m; ++j) {
      Eigen::VectorXd::Map(in.data(), n) = basis.col(j);
      chain.deflated_apply(in, out);
      ++report.iterations;
      w = Eigen::VectorXd::Map(out.data(), n);
      center(w);
      // classical Gram-Schmidt, applied twice
      Eigen::VectorXd h = basis.leftCols(j + 1).transpose() * w;
      w -= basis.leftCols(j + 1) * h;
      const Eigen::VectorXd h2 = basis.leftCols(j + 1).transpose() * w;
      w -= basis.leftCols(j + 1) * h2;
      h += h2;
      center(w);
      g.col(j).head(j + 1) = h;
      beta = w.norm();
      if (beta <= breakdown) {
        // invariant subspace: the Ritz values are exact eigenvalues
        g(j + 1, j) = 0.0;
        active = j + 1;
        beta = 0.0;
        break;
      }
      g(j + 1, j) = beta;
      basis.col(j + 1) = w / beta;
    }

    auto pairs = ritz_pairs(g, active, beta);
    const RitzPair& dom = pairs.front();
    best_estimate = std::abs(dom.value);
    best_residual = dom.residual;
    if (dom.residual <= opts.tolerance || active < m || cycle == opts.restarts) {
      report.lambda2_modulus = best_estimate;
      report.residual = best_residual;
      report.converged = dom.residual <= opts.tolerance || active < m;
      return report;
    }

    // Thick restart: keep a real orthonormal basis of the dominant Ritz
    // vectors. Its span is invariant under the projected matrix, so
    // A V W = V W S + beta v_m (e_m^T W) with S = W^T G W.
    Eigen::Index keep = keep_target;
    if (keep < static_cast<Eigen::Index>(pairs.size()) && pairs[keep - 1].value.imag() != 0.0 &&
        std::abs(pairs[keep].value - std::conj(pairs[keep - 1].value)) <=
            1e-12 * std::max(1.0, std::abs(pairs[keep].value))) {
      ++keep;
    }
    Eigen::MatrixXd cols(m, 2 * keep);
    Eigen::Index ncols = 0;
    for (Eigen::Index i = 0; i < keep; ++i) {
      const auto& y = pairs[static_cast<std::size_t>(i)].vector;
      if (pairs[static_cast<std::size_t>(i)].value.imag() == 0.0) {
        cols.col(ncols++) = y.real();
      } else if (pairs[static_cast<std::size_t>(i)].value.imag() > 0.0 ||
                 i == 0 || std::abs(pairs[static_cast<std::size_t>(i)].value -
                                    std::conj(pairs[static_cast<std::size_t>(i - 1)].value)) > 1e-12) {
        cols.col(ncols++) = y.real();
        cols.col(ncols++) = y.imag();
      }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(cols.leftCols(ncols));
    Eigen::MatrixXd wbasis = qr.householderQ() * Eigen::MatrixXd::Identity(m, ncols);
    const Eigen::Index k = std::min<Eigen::Index>(ncols, m - 1);
    wbasis.conservativeResize(Eigen::NoChange, k);

    const Eigen::MatrixXd s = wbasis.transpose() * g.topLeftCorner(m, m) * wbasis;
    const Eigen::RowVectorXd spike = beta * wbasis.row(m - 1);
    const Eigen::VectorXd next = basis.col(m);
    const Eigen::MatrixXd kept = basis.leftCols(m) * wbasis;

    basis.setZero();
    basis.leftCols(k) = kept;
    basis.col(k) = next;
    g.setZero();
    g.topLeftCorner(k, k) = s;
    g.row(k).head(k) = spike;
    filled = k;
  }
  report.lambda2_modulus = best_estimate;
  report.residual = best_residual;
  report.converged = false;
  return report;
}

} // namespace

SpectralReport lambda2_modulus(const ComposedChain& chain, SpectralMethod method, const KrylovOptions& opts,
                               std::size_t dense_cap) {
  if (method == SpectralMethod::dense) return full_spectrum(chain.p().matrix(), dense_cap);
  return krylov_lambda2(chain, opts);
}

std::vector<double> singular_values(const Eigen::MatrixXd& a, std::size_t dense_cap) {
  check_cap(a.rows(), dense_cap, "singular_values");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const Eigen::VectorXd s = svd.singularValues();
  std::vector<double> out(s.data(), s.data() + s.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

std::vector<double> singular_values(const SparseMatrix& a, std::size_t dense_cap) {
  check_cap(static_cast<Eigen::Index>(a.size()), dense_cap, "singular_values");
  return singular_values(a.to_dense(), dense_cap);
}

double operator_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0);
}

bool is_ergodic(const SparseMatrix& a) {
  const std::size_t n = a.size();
  if (n == 0) return false;
  static constexpr std::size_t unseen = static_cast<std::size_t>(-1);
  auto bfs = [n](const SparseMatrix& m) {
    std::vector<std::size_t> level(n, unseen);
    std::queue<Index> q;
    level[0] = 0;
    q.push(0);
    while (!q.empty()) {
      const Index u = q.front();
      q.pop();
      for (const Index v : m.row_cols(u)) {
        if (level[v] == unseen) {
          level[v] = level[u] + 1;
          q.push(v);
        }
      }
    }
    return level;
  };
  const auto level = bfs(a);
  const auto back = bfs(a.transpose());
  for (std::size_t x = 0; x < n; ++x) {
    if (level[x] == unseen || back[x] == unseen) return false;
  }
  // period = gcd over arcs u -> v of level(u) + 1 - level(v)
  std::size_t period = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (const Index v : a.row_cols(static_cast<Index>(u))) {
      const auto diff = static_cast<long long>(level[u]) + 1 - static_cast<long long>(level[v]);
      period = std::gcd(period, static_cast<std::size_t>(diff < 0 ? -diff : diff));
    }
  }
  return period == 1;
}

MixingTrace mixing_trace(const ComposedChain& chain, std::span<const double> pi0, std::size_t t_max) {
  const std::size_t n = chain.size();
  if (t_max < 4) throw ValidationError("mixing_trace: t_max must be at least 4");
  if (pi0.size() != n) throw ValidationError("mixing_trace: initial distribution has wrong length");
  double mass = 0.0;
  for (const double v : pi0) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("mixing_trace: initial distribution has a negative entry");
    mass += v;
  }
  if (std::abs(mass - 1.0) > 1e-12) throw ValidationError("mixing_trace: initial distribution does not sum to 1");

  MixingTrace trace;
  trace.floor = kMixingFloor;
  trace.ergodic = is_ergodic(chain.p().matrix());
  const double uniform = 1.0 / static_cast<double>(n);
  std::vector<double> cur(pi0.begin(), pi0.end()), next(n);
  for (std::size_t t = 1; t <= t_max; ++t) {
    chain.apply_transpose(cur, next);
    std::swap(cur, next);
    double tv = 0.0;
    for (const double v : cur) tv += std::abs(v - uniform);
    trace.t_values.push_back(t);
    trace.tv_distances.push_back(0.5 * tv);
  }

  std::size_t above = 0;
  while (above < trace.tv_distances.size() && trace.tv_distances[above] >= trace.floor) ++above;
  trace.window_begin = above / 2;
  trace.window_end = above;
  const std::size_t count = trace.window_end - trace.window_begin;
  if (count < 2) {
    trace.fitted_rate = 0.0;
    return trace;
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = trace.window_begin; i < trace.window_end; ++i) {
    const auto x = static_cast<double>(trace.t_values[i]);
    const double y = std::log(trace.tv_distances[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const auto c = static_cast<double>(count);
  const double slope = (c * sxy - sx * sy) / (c * sxx - sx * sx);
  trace.fitted_rate = std::exp(slope);
  return trace;
}

} // namespace mqlab
