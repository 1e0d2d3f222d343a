#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mqlab/model_spec.hpp"
#include "mqlab/norms.hpp"
#include "mqlab/spectral.hpp"
#include "mqlab/tangle.hpp"

namespace mqlab {

inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

/// Stream id reserved for building a model that is shared by all trials.
inline constexpr std::uint64_t kModelStream = ~std::uint64_t{0};

/// epsilon = c1 ln(d) / sqrt(ln n). Requires n >= 2 and d >= 2.
double theorem_epsilon(std::size_t n, double d, double c1);

struct ExperimentConfig {
  ModelSpec model = Figure1Spec{};
  std::size_t trials = 1;
  std::uint64_t seed = kDefaultSeed;
  double delta = 1.0;
  double c0 = 0.5;
  double c1 = 1.0;
  std::optional<std::size_t> ell;
  std::size_t dense_cap = kDefaultDenseCap;
  SpectralMethod method = SpectralMethod::dense;
  KrylovOptions krylov;
  /// Rebuild a random model (e.g. fresh sigma_i of a Birkhoff mix) in every
  /// trial instead of sharing one.
  bool resample_model = false;
  std::size_t threads = 1;
};

/// Throws ValidationError unless 0 < c0 < delta <= 1, trials >= 1, c1 >= 0.
void validate(const ExperimentConfig& config);

ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::ordered_json to_json(const ExperimentConfig& config);

struct TrialReport {
  std::size_t trial = 0;
  std::uint64_t stream = 0;
  double lambda2 = 0.0;
  double rho = 0.0;
  std::size_t d = 0;
  double ratio = 0.0;
  double epsilon = 0.0;
  bool exceeded = false;  ///< lambda2 >= (1 + epsilon) rho
  double residual = 0.0;
  bool converged = true;
  double runtime_ms = 0.0;
};

/// Trial i draws sigma (and, with resample_model, the model) from
/// Rng::stream(seed, i); a shared model comes from stream kModelStream.
/// Results are ordered by trial index and independent of `threads`.
std::vector<TrialReport> run_trials(const ExperimentConfig& config);

struct TailEstimate {
  std::size_t trials = 0;
  std::size_t exceedances = 0;
  double epsilon = 0.0;
  double estimate = 0.0;
  double ci_lower = 0.0;  ///< 95% Clopper-Pearson
  double ci_upper = 0.0;
  std::optional<double> bound;  ///< n^(-c0) when supplied
  std::optional<bool> estimate_within_bound;
};

/// Fraction of trials with ratio >= 1 + epsilon (1e-9 slack) and its 95%
/// Clopper-Pearson interval. With n and c0 given, compares against n^(-c0).
TailEstimate tail_probability(const std::vector<TrialReport>& reports, double epsilon,
                              std::optional<std::size_t> n = std::nullopt, std::optional<double> c0 = std::nullopt);

/// Two-sided Clopper-Pearson interval for k successes in trials draws.
std::pair<double, double> clopper_pearson(std::size_t k, std::size_t trials, double confidence = 0.95);

struct ExactTail {
  std::uint64_t count = 0;
  std::uint64_t total = 0;
  double probability = 0.0;
};

inline constexpr std::size_t kExactEnumerationMaxN = 7;

/// #{sigma : |lambda_2(M_sigma Q)| >= threshold - 1e-9} / n!, all n!
/// permutations enumerated with dense spectra. n <= 7.
ExactTail exact_tail(const SparseBistochastic& q, double threshold);

enum class FoldMode { exhaustive, sampled };

struct FoldStudy {
  std::size_t n = 0;
  std::size_t r = 0;
  FoldMode mode = FoldMode::exhaustive;
  std::size_t samples = 0;
  std::uint64_t seed = kDefaultSeed;
  double min_tau = 0.0;
  double max_tau = 0.0;
  double mean_tau = 0.0;
  double identity_tau = 0.0;
  bool identity_attains_min = false;  ///< within 1e-9
  bool coprime = false;
  std::optional<double> closed_form_max;  ///< sin(r pi / n) / (r sin(pi / n)) when coprime
  std::optional<double> max_error;
  double inv_sqrt_r = 0.0;
};

/// tau(sigma) = |lambda_2| of the shuffle-fold matrix, over every sigma
/// (exhaustive, n <= 7) or `samples` uniform draws.
FoldStudy shuffle_fold_study(std::size_t n, std::size_t r, FoldMode mode, std::size_t samples = 0,
                             std::uint64_t seed = kDefaultSeed);

struct TangleFrequency {
  std::size_t trials = 0;
  std::size_t tangle_free = 0;
  double frequency = 0.0;
  std::size_t h = 0;
  std::size_t d = 0;
  /// ln of ell d^(ell + 2h) n^(-delta), the failure term with constant 1
  double log_failure_term = 0.0;
  bool vacuous = true;  ///< failure term >= 1
  double lower_bound = 0.0;
  /// frequency >= lower_bound - 3 binomial sigma (true when vacuous)
  bool consistent = true;
};

/// Monte Carlo fraction of uniform sigma for which (M, Q) is ell-tangle-free.
/// Trial i uses Rng::stream(seed, i).
TangleFrequency tangle_frequency(const SparseBistochastic& q, std::size_t ell, const TangleParams& params,
                                 std::size_t trials, std::uint64_t seed, std::size_t threads = 1);

struct Figure1Result {
  double radius = 0.0;
  NormReport norms;
  SpectralReport spectrum;
  std::filesystem::path csv_path;
  std::filesystem::path json_path;
};

/// Spectrum of one realization of M Q with Q the Figure-1 pair matrix.
/// Writes `<out>.csv` (re,im) and `<out>.json` (radius, norms, lambda2, meta).
Figure1Result figure1_experiment(std::size_t n, double p, std::uint64_t seed, const std::filesystem::path& out);

} // namespace mqlab
