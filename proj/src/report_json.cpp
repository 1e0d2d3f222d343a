#include "mqlab/report_json.hpp"

#include <cstdio>

namespace mqlab::report {

Json meta(const Json& config, std::uint64_t seed) {
  Json m;
  m["artifact"] = "mqlab";
  m["version"] = MQLAB_VERSION;
  m["index_base"] = 0;
  m["seed"] = seed;
  m["config"] = config;
  return m;
}

Json to_json(const NormReport& r) {
  Json j;
  j["hs"] = r.hs;
  j["linf"] = r.linf;
  j["delta"] = r.delta;
  j["delta_norm"] = r.delta_norm;
  j["witness_E"] = r.witness_E;
  j["d"] = r.d;
  j["rho"] = r.rho;
  return j;
}

Json to_json(const ValidationReport& r) {
  Json j;
  j["passed"] = r.passed;
  j["max_row_deviation"] = r.max_row_deviation;
  j["max_col_deviation"] = r.max_col_deviation;
  j["nonnegative"] = r.nonnegative;
  j["tolerance"] = r.tolerance;
  return j;
}

Json to_json(const SpectralReport& r) {
  Json j;
  j["method"] = to_string(r.method);
  j["lambda2"] = r.lambda2_modulus;
  j["residual"] = r.residual;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  return j;
}

Json to_json(const MixingTrace& r) {
  Json j;
  j["t_values"] = r.t_values;
  j["tv_distances"] = r.tv_distances;
  j["fitted_rate"] = r.fitted_rate;
  Json w;
  w["rule"] = "second half of the prefix with TV >= floor";
  w["begin_t"] = r.window_begin < r.t_values.size() ? r.t_values[r.window_begin] : 0;
  w["end_t"] = r.window_end > 0 && r.window_end <= r.t_values.size() ? r.t_values[r.window_end - 1] : 0;
  w["floor"] = r.floor;
  j["fit_window"] = std::move(w);
  j["ergodic"] = r.ergodic;
  return j;
}

Json to_json(const Path& p) {
  Json arr = Json::array();
  for (std::size_t t = 0; t < p.ys.size(); ++t) {
    arr.push_back(p.xs[t]);
    arr.push_back(p.ys[t]);
  }
  if (!p.xs.empty()) arr.push_back(p.xs.back());
  return arr;
}

Json to_json(const PathTangleReport& r) {
  Json j;
  j["tangle_free"] = r.tangle_free;
  j["coincidences"] = r.coincidences;
  j["coincidence_windows"] = r.coincidence_windows;
  j["e_coincidences"] = r.e_coincidences;
  return j;
}

Json to_json(const PairTangleResult& r) {
  Json j;
  j["tangle_free"] = r.tangle_free;
  j["paths_checked"] = r.paths_checked;
  if (r.witness) {
    Json w;
    w["path"] = to_json(*r.witness);
    w["length"] = r.witness->length();
    w["clause"] = r.clause;
    j["witness"] = std::move(w);
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

Json to_json(const DecompositionReport& r) {
  Json j;
  j["n"] = r.n;
  j["ell"] = r.ell;
  j["h"] = r.h;
  j["pair_tangle_free"] = r.pair_tangle_free;
  j["telescoping_residual"] = r.telescoping_residual;
  if (r.power_identity_residual) {
    j["power_identity_residual"] = *r.power_identity_residual;
  } else {
    j["power_identity_residual"] = "not applicable";
  }
  j["restricted_power_norm"] = r.restricted_power_norm;
  j["bound"] = r.bound;
  if (r.lemma_slack) {
    j["lemma_slack"] = *r.lemma_slack;
  } else {
    j["lemma_slack"] = "not applicable";
  }
  return j;
}

Json to_json(const TrialReport& r, bool timing) {
  Json j;
  j["trial"] = r.trial;
  j["stream"] = r.stream;
  j["lambda2"] = r.lambda2;
  j["rho"] = r.rho;
  j["d"] = r.d;
  j["ratio"] = r.ratio;
  j["epsilon"] = r.epsilon;
  j["exceeded"] = r.exceeded;
  j["residual"] = r.residual;
  j["converged"] = r.converged;
  if (timing) j["runtime_ms"] = r.runtime_ms;
  return j;
}

Json to_json(const TailEstimate& r) {
  Json j;
  j["trials"] = r.trials;
  j["exceedances"] = r.exceedances;
  j["epsilon"] = r.epsilon;
  j["estimate"] = r.estimate;
  j["ci95"] = {r.ci_lower, r.ci_upper};
  if (r.bound) {
    j["bound"] = *r.bound;
    j["estimate_within_bound"] = *r.estimate_within_bound;
  }
  return j;
}

Json to_json(const ExactTail& r) {
  Json j;
  j["count"] = r.count;
  j["total"] = r.total;
  j["probability"] = r.probability;
  return j;
}

Json to_json(const FoldStudy& r) {
  Json j;
  j["n"] = r.n;
  j["r"] = r.r;
  j["mode"] = r.mode == FoldMode::exhaustive ? "exhaustive" : "sampled";
  j["samples"] = r.samples;
  if (r.mode == FoldMode::sampled) j["seed"] = r.seed;
  j["min_tau"] = r.min_tau;
  j["max_tau"] = r.max_tau;
  j["mean_tau"] = r.mean_tau;
  j["identity_tau"] = r.identity_tau;
  j["identity_attains_min"] = r.identity_attains_min;
  j["coprime"] = r.coprime;
  j["inv_sqrt_r"] = r.inv_sqrt_r;
  if (r.closed_form_max) {
    j["closed_form_max"] = *r.closed_form_max;
    j["max_error"] = *r.max_error;
  }
  return j;
}

Json to_json(const TangleFrequency& r) {
  Json j;
  j["trials"] = r.trials;
  j["tangle_free"] = r.tangle_free;
  j["frequency"] = r.frequency;
  j["h"] = r.h;
  j["d"] = r.d;
  j["log_failure_term"] = r.log_failure_term;
  j["constant_c"] = 1;
  j["vacuous"] = r.vacuous;
  j["lower_bound"] = r.lower_bound;
  j["consistent"] = r.consistent;
  return j;
}

std::string eigen_csv(std::span<const std::complex<double>> eigenvalues) {
  std::string out = "re,im\n";
  char buf[96];
  for (const auto& z : eigenvalues) {
    const int len = std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", z.real(), z.imag());
    out.append(buf, static_cast<std::size_t>(len));
  }
  return out;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

} // namespace mqlab::report
