#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mqlab/chain.hpp"
#include "mqlab/sparse.hpp"

namespace mqlab {

enum class SpectralMethod { dense, krylov };

std::string to_string(SpectralMethod m);
SpectralMethod parse_spectral_method(const std::string& s);

inline constexpr std::size_t kDefaultDenseCap = 2000;

struct SpectralReport {
  SpectralMethod method = SpectralMethod::dense;
  /// Every eigenvalue, unordered; dense method only.
  std::optional<std::vector<std::complex<double>>> eigenvalues;
  double lambda2_modulus = 0.0;
  /// Dense: Frobenius norm of A U - U T for the computed real Schur form.
  /// Krylov: Ritz residual of the dominant pair.
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
};

/// All eigenvalues of a dense square matrix via Hessenberg reduction and
/// shifted QR (real Schur form). Throws ValidationError when n > dense_cap.
SpectralReport full_spectrum(const Eigen::MatrixXd& a, std::size_t dense_cap = kDefaultDenseCap);
SpectralReport full_spectrum(const SparseMatrix& a, std::size_t dense_cap = kDefaultDenseCap);

/// Second largest eigenvalue modulus of a spectrum containing the Perron
/// eigenvalue. The eigenvalue closest to 1 is dropped (by value, not by
/// position) and the largest remaining modulus returned; 0 for n = 1.
double second_modulus(std::span<const std::complex<double>> eigenvalues);

struct KrylovOptions {
  std::size_t subspace = 40;
  std::size_t restarts = 20;
  double tolerance = 1e-8;
  /// Ritz vectors carried across a restart (a conjugate partner is added
  /// when the cut would split a pair).
  std::size_t keep = 5;
  std::uint64_t seed = 0x5EED;
};

/// |lambda_2| of P = M Q.
///
/// dense: second_modulus of the full spectrum of P.
/// krylov: thick-restarted Arnoldi on the deflated operator restricted to
/// 1^perp; every new basis vector is re-centred to suppress drift toward 1.
/// An unconverged run returns its best estimate with converged = false.
SpectralReport lambda2_modulus(const ComposedChain& chain, SpectralMethod method,
                               const KrylovOptions& opts = {}, std::size_t dense_cap = kDefaultDenseCap);

/// Singular values in nonincreasing order.
std::vector<double> singular_values(const Eigen::MatrixXd& a, std::size_t dense_cap = kDefaultDenseCap);
std::vector<double> singular_values(const SparseMatrix& a, std::size_t dense_cap = kDefaultDenseCap);

/// Largest singular value of a dense matrix (operator 2-norm).
double operator_norm(const Eigen::MatrixXd& a);

struct MixingTrace {
  std::vector<std::size_t> t_values;
  std::vector<double> tv_distances;
  double fitted_rate = 0.0;
  /// [window_begin, window_end) indexes into t_values used by the fit.
  std::size_t window_begin = 0;
  std::size_t window_end = 0;
  /// Distances below this are treated as round-off and excluded from the fit.
  double floor = 0.0;
  /// Support graph of P is strongly connected with period 1.
  bool ergodic = false;
};

inline constexpr double kMixingFloor = 1e-12;

/// Total variation distances ||pi0 P^t - 1/n||_TV for t = 1..t_max, and the
/// geometric rate exp(slope) of a least-squares line through
/// log TV over the second half of the portion of the trace above the floor.
/// A trace that is at the floor from t = 1 has rate 0.
MixingTrace mixing_trace(const ComposedChain& chain, std::span<const double> pi0, std::size_t t_max);

/// True when the support digraph of `a` is strongly connected and aperiodic.
bool is_ergodic(const SparseMatrix& a);

} // namespace mqlab
