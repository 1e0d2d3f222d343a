#include "mqlab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include <boost/math/distributions/beta.hpp>

#include "mqlab/chain.hpp"
#include "mqlab/error.hpp"
#include "mqlab/generators.hpp"
#include "mqlab/io.hpp"
#include "mqlab/parallel.hpp"
#include "mqlab/report_json.hpp"

namespace mqlab {

namespace {

constexpr double kThresholdSlack = 1e-9;

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

std::uint64_t parse_seed(const nlohmann::json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    try {
      std::size_t used = 0;
      const auto seed = std::stoull(s, &used, 0);
      if (used == s.size()) return seed;
    } catch (const std::exception&) {
    }
  }
  throw ValidationError("config: seed must be a nonnegative integer or an integer string");
}

Eigen::MatrixXd permuted_dense(const Eigen::MatrixXd& q, const std::vector<Index>& sigma) {
  Eigen::MatrixXd p(q.rows(), q.cols());
  for (Eigen::Index x = 0; x < q.rows(); ++x) p.row(x) = q.row(sigma[static_cast<std::size_t>(x)]);
  return p;
}

double tau_of(const SparseBistochastic& fold) {
  if (fold.size() <= kDefaultDenseCap) return full_spectrum(fold.matrix()).lambda2_modulus;
  return lambda2_modulus(ComposedChain(Permutation::identity(fold.size()), fold), SpectralMethod::krylov)
      .lambda2_modulus;
}

} // namespace

double theorem_epsilon(std::size_t n, double d, double c1) {
  if (n < 2) throw ValidationError("theorem_epsilon: n must be at least 2");
  if (!(d >= 2.0)) throw ValidationError("theorem_epsilon: d must be at least 2");
  if (!(c1 >= 0.0)) throw ValidationError("theorem_epsilon: c1 must be nonnegative");
  return c1 * std::log(d) / std::sqrt(std::log(static_cast<double>(n)));
}

void validate(const ExperimentConfig& config) {
  if (config.trials == 0) throw ValidationError("config: trials must be positive");
  if (!(config.delta > 0.0 && config.delta <= 1.0)) throw ValidationError("config: delta must lie in (0, 1]");
  if (!(config.c0 > 0.0 && config.c0 < config.delta)) throw ValidationError("config: c0 must lie in (0, delta)");
  if (!(config.c1 >= 0.0)) throw ValidationError("config: c1 must be nonnegative");
  if (config.ell && *config.ell == 0) throw ValidationError("config: ell must be at least 1");
  if (config.krylov.subspace < 2) throw ValidationError("config: krylov.subspace must be at least 2");
  if (config.krylov.keep == 0 || config.krylov.keep >= config.krylov.subspace) {
    throw ValidationError("config: krylov.keep must lie in [1, subspace)");
  }
  if (!(config.krylov.tolerance > 0.0)) throw ValidationError("config: krylov.tolerance must be positive");
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  static const std::set<std::string> known = {"model", "n",     "trials", "seed",   "delta",          "c0",
                                              "c1",    "ell",   "dense_cap", "method", "krylov", "resample_model",
                                              "threads"};
  for (const auto& item : j.items()) {
    if (!known.contains(item.key())) throw ValidationError("config: unknown key '" + item.key() + "'");
  }
  if (!j.contains("model")) throw ValidationError("config: missing key 'model'");

  ExperimentConfig c;
  c.model = parse_model_spec(j.at("model"), base_dir);
  if (j.contains("n") && get_or<std::size_t>(j, "n", 0) != model_size(c.model)) {
    throw ValidationError("config: n disagrees with the model size " + std::to_string(model_size(c.model)));
  }
  c.trials = get_or<std::size_t>(j, "trials", c.trials);
  if (j.contains("seed")) c.seed = parse_seed(j.at("seed"));
  c.delta = get_or<double>(j, "delta", c.delta);
  c.c0 = get_or<double>(j, "c0", c.c0);
  c.c1 = get_or<double>(j, "c1", c.c1);
  if (j.contains("ell") && !j.at("ell").is_null()) c.ell = get_or<std::size_t>(j, "ell", 0);
  c.dense_cap = get_or<std::size_t>(j, "dense_cap", c.dense_cap);
  if (j.contains("method")) c.method = parse_spectral_method(get_or<std::string>(j, "method", ""));
  if (j.contains("krylov")) {
    const auto& k = j.at("krylov");
    if (!k.is_object()) throw ValidationError("config: krylov must be an object");
    c.krylov.subspace = get_or<std::size_t>(k, "subspace", c.krylov.subspace);
    c.krylov.restarts = get_or<std::size_t>(k, "restarts", c.krylov.restarts);
    c.krylov.tolerance = get_or<double>(k, "tolerance", c.krylov.tolerance);
    c.krylov.keep = get_or<std::size_t>(k, "keep", c.krylov.keep);
    if (k.contains("seed")) c.krylov.seed = parse_seed(k.at("seed"));
  }
  c.resample_model = get_or<bool>(j, "resample_model", c.resample_model);
  c.threads = get_or<std::size_t>(j, "threads", c.threads);
  validate(c);
  return c;
}

nlohmann::ordered_json to_json(const ExperimentConfig& config) {
  nlohmann::ordered_json j;
  j["model"] = to_json(config.model);
  j["n"] = model_size(config.model);
  j["trials"] = config.trials;
  j["seed"] = config.seed;
  j["delta"] = config.delta;
  j["c0"] = config.c0;
  j["c1"] = config.c1;
  if (config.ell) {
    j["ell"] = *config.ell;
  } else {
    j["ell"] = nullptr;
  }
  j["dense_cap"] = config.dense_cap;
  j["method"] = to_string(config.method);
  j["krylov"] = {{"subspace", config.krylov.subspace},
                 {"restarts", config.krylov.restarts},
                 {"tolerance", config.krylov.tolerance},
                 {"keep", config.krylov.keep},
                 {"seed", config.krylov.seed}};
  j["resample_model"] = config.resample_model;
  return j;
}

std::vector<TrialReport> run_trials(const ExperimentConfig& config) {
  validate(config);
  const std::size_t n = model_size(config.model);
  const bool shared = !(config.resample_model && model_is_random(config.model));

  std::optional<Model> shared_model;
  std::optional<NormReport> shared_norms;
  if (shared) {
    Rng rng = Rng::stream(config.seed, kModelStream);
    shared_model = build_model(config.model, rng);
    shared_norms = rho(shared_model->q.matrix(), config.delta);
  }

  std::vector<TrialReport> reports(config.trials);
  parallel_for(config.trials, config.threads, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    Rng rng = Rng::stream(config.seed, i);
    std::optional<Model> own;
    NormReport norms;
    if (shared) {
      norms = *shared_norms;
    } else {
      own = build_model(config.model, rng);
      norms = rho(own->q.matrix(), config.delta);
    }
    const SparseBistochastic& q = shared ? shared_model->q : own->q;
    Permutation sigma = sample_permutation(n, rng);
    const ComposedChain chain(std::move(sigma), q);
    const SpectralReport spec = lambda2_modulus(chain, config.method, config.krylov, config.dense_cap);

    TrialReport& r = reports[i];
    r.trial = i;
    r.stream = i;
    r.lambda2 = spec.lambda2_modulus;
    r.rho = norms.rho;
    r.d = norms.d;
    r.ratio = r.lambda2 / r.rho;
    r.epsilon = (n >= 2 && norms.d >= 2) ? theorem_epsilon(n, static_cast<double>(norms.d), config.c1) : 0.0;
    r.exceeded = r.ratio >= 1.0 + r.epsilon - kThresholdSlack;
    r.residual = spec.residual;
    r.converged = spec.converged;
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  });
  return reports;
}

std::pair<double, double> clopper_pearson(std::size_t k, std::size_t trials, double confidence) {
  if (trials == 0) throw ValidationError("clopper_pearson: trials must be positive");
  if (k > trials) throw ValidationError("clopper_pearson: successes exceed trials");
  if (!(confidence > 0.0 && confidence < 1.0)) throw ValidationError("clopper_pearson: confidence must lie in (0, 1)");
  const double alpha = 1.0 - confidence;
  const auto kd = static_cast<double>(k);
  const auto nd = static_cast<double>(trials);
  double lower = 0.0;
  double upper = 1.0;
  if (k > 0) lower = boost::math::quantile(boost::math::beta_distribution<double>(kd, nd - kd + 1.0), alpha / 2.0);
  if (k < trials) {
    upper = boost::math::quantile(boost::math::beta_distribution<double>(kd + 1.0, nd - kd), 1.0 - alpha / 2.0);
  }
  return {lower, upper};
}

TailEstimate tail_probability(const std::vector<TrialReport>& reports, double epsilon, std::optional<std::size_t> n,
                              std::optional<double> c0) {
  if (reports.empty()) throw ValidationError("tail_probability: no trial reports");
  TailEstimate t;
  t.trials = reports.size();
  t.epsilon = epsilon;
  t.exceedances = static_cast<std::size_t>(std::count_if(reports.begin(), reports.end(), [&](const TrialReport& r) {
    return r.ratio >= 1.0 + epsilon - kThresholdSlack;
  }));
  t.estimate = static_cast<double>(t.exceedances) / static_cast<double>(t.trials);
  std::tie(t.ci_lower, t.ci_upper) = clopper_pearson(t.exceedances, t.trials);
  if (n && c0) {
    t.bound = std::pow(static_cast<double>(*n), -*c0);
    t.estimate_within_bound = t.estimate <= *t.bound;
  }
  return t;
}

ExactTail exact_tail(const SparseBistochastic& q, double threshold) {
  const std::size_t n = q.size();
  if (n > kExactEnumerationMaxN) {
    throw ValidationError("exact_tail: n = " + std::to_string(n) + " exceeds the enumeration limit " +
                          std::to_string(kExactEnumerationMaxN));
  }
  const Eigen::MatrixXd dense = q.matrix().to_dense();
  std::vector<Index> sigma(n);
  std::iota(sigma.begin(), sigma.end(), Index{0});
  ExactTail out;
  do {
    ++out.total;
    if (full_spectrum(permuted_dense(dense, sigma)).lambda2_modulus >= threshold - kThresholdSlack) ++out.count;
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  out.probability = static_cast<double>(out.count) / static_cast<double>(out.total);
  return out;
}

FoldStudy shuffle_fold_study(std::size_t n, std::size_t r, FoldMode mode, std::size_t samples, std::uint64_t seed) {
  if (r < 2 || n < r) throw ValidationError("shuffle_fold_study: need n >= r >= 2");
  FoldStudy s;
  s.n = n;
  s.r = r;
  s.mode = mode;
  s.seed = seed;
  s.coprime = std::gcd(n, r) == 1;
  s.inv_sqrt_r = 1.0 / std::sqrt(static_cast<double>(r));
  s.identity_tau = tau_of(gen_shuffle_fold(n, r, Permutation::identity(n)));

  std::vector<double> taus;
  if (mode == FoldMode::exhaustive) {
    if (n > kExactEnumerationMaxN) {
      throw ValidationError("shuffle_fold_study: exhaustive mode needs n <= " + std::to_string(kExactEnumerationMaxN));
    }
    std::vector<Index> sigma(n);
    std::iota(sigma.begin(), sigma.end(), Index{0});
    do {
      taus.push_back(tau_of(gen_shuffle_fold(n, r, Permutation(sigma))));
    } while (std::next_permutation(sigma.begin(), sigma.end()));
  } else {
    if (samples == 0) throw ValidationError("shuffle_fold_study: sampled mode needs samples >= 1");
    taus.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) {
      Rng rng = Rng::stream(seed, i);
      taus.push_back(tau_of(gen_shuffle_fold(n, r, sample_permutation(n, rng))));
    }
  }
  s.samples = taus.size();
  s.min_tau = *std::min_element(taus.begin(), taus.end());
  s.max_tau = *std::max_element(taus.begin(), taus.end());
  s.mean_tau = std::accumulate(taus.begin(), taus.end(), 0.0) / static_cast<double>(taus.size());
  s.identity_attains_min = s.identity_tau <= s.min_tau + kThresholdSlack;
  if (s.coprime) {
    const double pi = std::numbers::pi;
    s.closed_form_max = std::sin(static_cast<double>(r) * pi / static_cast<double>(n)) /
                        (static_cast<double>(r) * std::sin(pi / static_cast<double>(n)));
    s.max_error = std::abs(s.max_tau - *s.closed_form_max);
  }
  return s;
}

TangleFrequency tangle_frequency(const SparseBistochastic& q, std::size_t ell, const TangleParams& params,
                                 std::size_t trials, std::uint64_t seed, std::size_t threads) {
  if (trials == 0) throw ValidationError("tangle_frequency: trials must be positive");
  if (ell == 0) throw ValidationError("tangle_frequency: ell must be at least 1");
  const std::size_t n = q.size();
  std::vector<char> free_flags(trials, 0);
  parallel_for(trials, threads, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    const Permutation sigma = sample_permutation(n, rng);
    free_flags[i] = pair_tangle_free(sigma, q.matrix(), ell, params).tangle_free ? 1 : 0;
  });

  TangleFrequency f;
  f.trials = trials;
  f.tangle_free = static_cast<std::size_t>(std::count(free_flags.begin(), free_flags.end(), 1));
  f.frequency = static_cast<double>(f.tangle_free) / static_cast<double>(trials);
  f.h = params.h;
  f.d = gram_support_degree(q.matrix());
  f.log_failure_term = std::log(static_cast<double>(ell)) +
                       static_cast<double>(ell + 2 * params.h) * std::log(static_cast<double>(f.d)) -
                       params.delta * std::log(static_cast<double>(n));
  f.vacuous = f.log_failure_term >= 0.0;
  if (!f.vacuous) {
    f.lower_bound = 1.0 - std::exp(f.log_failure_term);
    const double sd = std::sqrt(f.lower_bound * (1.0 - f.lower_bound) / static_cast<double>(trials));
    f.consistent = f.frequency >= f.lower_bound - 3.0 * sd - kThresholdSlack;
  }
  return f;
}

Figure1Result figure1_experiment(std::size_t n, double p, std::uint64_t seed, const std::filesystem::path& out) {
  const SparseBistochastic q = gen_figure1(n, p);
  Rng rng = Rng::stream(seed, 0);
  const ComposedChain chain(sample_permutation(n, rng), q);

  Figure1Result res;
  res.radius = std::sqrt(p * p + (1.0 - p) * (1.0 - p));
  res.norms = rho(q.matrix(), 1.0);
  res.spectrum = full_spectrum(chain.p().matrix());
  res.csv_path = out;
  res.csv_path += ".csv";
  res.json_path = out;
  res.json_path += ".json";

  io::write_text(res.csv_path, report::eigen_csv(*res.spectrum.eigenvalues));

  report::Json config;
  config["n"] = n;
  config["p"] = p;
  report::Json doc;
  doc["meta"] = report::meta(config, seed);
  doc["radius"] = res.radius;
  doc["norms"] = report::to_json(res.norms);
  doc["spectrum"] = report::to_json(res.spectrum);
  doc["eigenvalues_csv"] = res.csv_path.filename().string();
  io::write_text(res.json_path, report::dump(doc));
  return res;
}

} // namespace mqlab
