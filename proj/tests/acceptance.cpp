// Acceptance suite: one PASS/FAIL line per criterion. Each criterion also
// has a wall-clock budget that counts toward its verdict.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "mqlab/chain.hpp"
#include "mqlab/experiments.hpp"
#include "mqlab/generators.hpp"
#include "mqlab/model_spec.hpp"
#include "mqlab/norms.hpp"
#include "mqlab/spectral.hpp"
#include "mqlab/tangle.hpp"
#include "oracles.hpp"

using namespace mqlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// A random model of one of the supported families, size at most max_n.
SparseBistochastic random_model(std::size_t max_n, Rng& rng, std::size_t pick) {
  const std::size_t n = 8 + rng.uniform_below(max_n - 7);
  switch (pick % 5) {
    case 0:
      return gen_figure1(n & ~std::size_t{1}, 0.05 + 0.9 * rng.uniform01());
    case 1:
      return sample_uniform_regular(n, 2 + rng.uniform_below(3), rng);
    case 2:
      return fixtures::random_mix(n, 2 + rng.uniform_below(3), rng);
    case 3: {
      const std::size_t r = 2 + rng.uniform_below(4);
      return gen_shuffle_fold(std::max(n, r), r, sample_permutation(std::max(n, r), rng));
    }
    default: {
      // walk on a circulant digraph with r random distinct shifts
      const std::size_t r = 2 + rng.uniform_below(3);
      std::vector<Index> shifts;
      while (shifts.size() < r) {
        const auto s = static_cast<Index>(rng.uniform_below(n));
        if (std::find(shifts.begin(), shifts.end(), s) == shifts.end()) shifts.push_back(s);
      }
      std::vector<std::vector<Index>> adj(n);
      for (Index x = 0; x < n; ++x) {
        for (const Index s : shifts) adj[x].push_back(static_cast<Index>((x + s) % n));
      }
      return gen_regular_digraph(adj, r);
    }
  }
}

bool same_report(const NormReport& a, const NormReport& b) {
  return a.hs == b.hs && a.linf == b.linf && a.delta_norm == b.delta_norm && a.witness_E == b.witness_E &&
         a.d == b.d && a.rho == b.rho;
}

Outcome composition_invariance() {
  Rng rng(101);
  double worst = 0.0;
  std::size_t identical = 0;
  constexpr std::size_t models = 50;
  for (std::size_t i = 0; i < models; ++i) {
    const auto q = random_model(200, rng, i);
    const ComposedChain chain(sample_permutation(q.size(), rng), q);
    const auto sq = singular_values(q.matrix());
    const auto sp = singular_values(chain.p().matrix());
    for (std::size_t k = 0; k < sq.size(); ++k) worst = std::max(worst, std::abs(sq[k] - sp[k]) / sq.front());
    bool same = true;
    for (const double delta : {1.0, 0.5, 0.3}) {
      same = same && same_report(rho(q.matrix(), delta), rho(chain.p().matrix(), delta));
    }
    identical += same ? 1 : 0;
  }
  return {worst <= 1e-9 && identical == models,
          fmt("%zu models, max relative singular value gap %.2e, %zu/%zu norm reports identical", models, worst,
              identical, models)};
}

Outcome delta_norm_oracle() {
  Rng rng(202);
  std::size_t agree = 0;
  std::size_t checks = 0;
  for (int m = 0; m < 200; ++m) {
    const std::size_t n = 1 + rng.uniform_below(12);
    std::vector<Triplet> t;
    for (Index r = 0; r < n; ++r) {
      for (Index c = 0; c < n; ++c) {
        if (rng.uniform01() < 0.35) t.push_back({r, c, 0.0625 * static_cast<double>(1 + rng.uniform_below(16))});
      }
    }
    if (t.empty()) t.push_back({0, 0, 1.0});
    const auto a = SparseMatrix::from_triplets(n, t);
    const auto dense = a.to_dense();
    for (const double delta : {0.3, 0.5, 0.9, 1.0}) {
      ++checks;
      agree += delta_norm(a, delta).value == oracle::delta_norm(dense, delta) ? 1 : 0;
    }
  }
  return {agree == checks, fmt("%zu/%zu (matrix, delta) cases equal the subset minimum exactly", agree, checks)};
}

struct DeskFixture {
  Permutation sigma;
  SparseBistochastic q;
  std::size_t ell;
  TangleParams params;
};

// Random desk-scale fixtures until `free_wanted` of them are certified
// ell-tangle-free; tangled ones are kept as well.
std::vector<std::pair<DeskFixture, bool>> desk_fixtures(std::size_t free_wanted, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<DeskFixture, bool>> out;
  std::size_t free_count = 0;
  for (std::size_t i = 0; free_count < free_wanted && i < 5000; ++i) {
    const std::size_t n = 4 + rng.uniform_below(7);
    auto q = i % 3 == 0 ? gen_figure1(n & ~std::size_t{1}, 0.5) : fixtures::random_mix(n, 1 + rng.uniform_below(3), rng);
    const std::size_t size = q.size();
    TangleParams params;
    params.h = 1 + rng.uniform_below(2);
    params.ell = 1 + rng.uniform_below(3);
    if (i % 2) params.E = {static_cast<Index>(rng.uniform_below(size))};
    DeskFixture f{sample_permutation(size, rng), std::move(q), params.ell, params};
    const bool free = pair_tangle_free(f.sigma, f.q.matrix(), f.ell, f.params).tangle_free;
    free_count += free ? 1 : 0;
    out.emplace_back(std::move(f), free);
  }
  return out;
}

Outcome path_sum_identity(const std::vector<std::pair<DeskFixture, bool>>& fixtures) {
  double worst = 0.0;
  std::size_t used = 0;
  std::size_t with_e = 0;
  for (const auto& [f, free] : fixtures) {
    if (!free) continue;
    ++used;
    with_e += f.params.E.empty() ? 0 : 1;
    const auto mats = path_sum_matrices(f.sigma, f.q.matrix(), f.ell, f.params);
    const Eigen::MatrixXd p = compose(f.sigma, f.q).p().to_dense();
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(p.rows(), p.cols());
    for (std::size_t k = 0; k < f.ell; ++k) power = power * p;
    worst = std::max(worst, (power - mats.p_free[f.ell]).cwiseAbs().maxCoeff());
  }
  return {used >= 100 && worst <= 1e-10,
          fmt("%zu tangle-free pairs (%zu with E nonempty), max |P^l - P^(l)| = %.2e", used, with_e, worst)};
}

Outcome telescoping(const std::vector<std::pair<DeskFixture, bool>>& fixtures) {
  double worst_res = 0.0;
  double worst_slack = std::numeric_limits<double>::infinity();
  std::size_t tangled = 0;
  for (const auto& [f, free] : fixtures) {
    const auto rep = verify_decomposition(f.sigma, f.q.matrix(), f.ell, f.params);
    worst_res = std::max(worst_res, rep.telescoping_residual);
    if (rep.lemma_slack) worst_slack = std::min(worst_slack, *rep.lemma_slack);
    tangled += free ? 0 : 1;
  }
  return {worst_res <= 1e-10 && worst_slack >= -1e-10,
          fmt("%zu fixtures (%zu tangled), max telescoping residual %.2e, min lemma slack %.2e", fixtures.size(),
              tangled, worst_res, worst_slack)};
}

Outcome tangle_oracle() {
  Rng rng(505);
  std::size_t agree = 0;
  std::size_t tangled = 0;
  constexpr std::size_t count = 100;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n = 3 + rng.uniform_below(6);
    const auto q = fixtures::random_mix(n, 1 + rng.uniform_below(3), rng);
    const auto sigma = sample_permutation(n, rng);
    TangleParams params;
    params.h = 1 + rng.uniform_below(2);
    params.ell = 1 + rng.uniform_below(3);
    if (i % 2) params.E = {static_cast<Index>(rng.uniform_below(n))};
    const auto got = pair_tangle_free(sigma, q.matrix(), params.ell, params);
    const auto want = oracle::pair_tangle_free(sigma, q.to_dense(), params.ell, params);
    const bool witness_ok = got.tangle_free || (got.witness && got.witness->length() == want.min_tangled_length);
    agree += got.tangle_free == want.tangle_free && witness_ok ? 1 : 0;
    tangled += want.tangle_free ? 0 : 1;
  }
  return {agree == count, fmt("%zu/%zu fixtures agree (%zu tangled), witness lengths minimal", agree, count, tangled)};
}

Outcome exact_vs_monte_carlo() {
  const double threshold = std::sqrt(0.5);
  const auto exact = exact_tail(gen_figure1(6, 0.5), threshold);
  ExperimentConfig c;
  c.model = Figure1Spec{6, 0.5};
  c.trials = 1000;
  c.seed = 606;
  std::size_t hits = 0;
  for (const auto& r : run_trials(c)) hits += r.lambda2 >= threshold - 1e-9 ? 1 : 0;
  const double p = exact.probability;
  const double estimate = static_cast<double>(hits) / 1000.0;
  const double band = 3.0 * std::sqrt(p * (1.0 - p) / 1000.0);
  return {std::abs(estimate - p) <= band,
          fmt("exact %llu/%llu = %.4f, Monte Carlo %.4f over 1000 trials, 3-sigma band %.4f",
              static_cast<unsigned long long>(exact.count), static_cast<unsigned long long>(exact.total), p, estimate,
              band)};
}

Outcome figure1_reproduction() {
  bool ok = true;
  std::string detail;
  for (const double p : {0.5, 1.0 / 3.0}) {
    ExperimentConfig c;
    c.model = Figure1Spec{500, p};
    c.trials = 20;
    c.seed = 707;
    const double radius = std::sqrt(p * p + (1 - p) * (1 - p));
    std::size_t inside = 0;
    double worst = 0.0;
    for (const auto& r : run_trials(c)) {
      inside += r.lambda2 <= radius + 0.08 ? 1 : 0;
      worst = std::max(worst, r.lambda2);
    }
    ok = ok && inside >= 18 && worst < 1.0;
    detail += fmt("%sp=%.4f: %zu/20 within %.4f+0.08 (max |l2| %.4f)", detail.empty() ? "" : "; ", p, inside, radius,
                  worst);
  }
  return {ok, detail};
}

Outcome shuffle_fold_closed_form() {
  const auto s = shuffle_fold_study(5, 3, FoldMode::exhaustive);
  return {s.samples == 120 && *s.max_error <= 1e-8 && s.identity_attains_min,
          fmt("max tau %.10f vs closed form %.10f (error %.1e), identity tau %.6f = min %.6f", s.max_tau,
              *s.closed_form_max, *s.max_error, s.identity_tau, s.min_tau)};
}

Outcome anisotropic() {
  ExperimentConfig c;
  c.model = BirkhoffSpec{{1.0 / 3, 1.0 / 3, 1.0 / 3}, std::nullopt, 1000};
  c.trials = 20;
  c.seed = 909;
  c.method = SpectralMethod::krylov;
  c.resample_model = true;
  const double band = 1.2 / std::sqrt(3.0);
  std::size_t inside = 0;
  std::size_t converged = 0;
  double worst = 0.0;
  for (const auto& r : run_trials(c)) {
    inside += r.lambda2 <= band ? 1 : 0;
    converged += r.converged ? 1 : 0;
    worst = std::max(worst, r.lambda2);
  }
  return {inside >= 18, fmt("%zu/20 with |l2| <= %.4f (max %.4f), %zu/20 Krylov runs converged", inside, band, worst,
                            converged)};
}

Outcome structural_invariants() {
  Rng rng(1010);
  std::size_t valid = 0;
  std::size_t lower = 0;
  constexpr std::size_t models = 100;
  for (std::size_t i = 0; i < models; ++i) {
    const auto q = random_model(300, rng, i);
    valid += validate_bistochastic(q.matrix(), 1e-12).passed ? 1 : 0;
    const auto rep = rho(q.matrix(), 1.0);
    lower += 1.0 / std::sqrt(static_cast<double>(rep.d)) <= rep.hs * (1.0 + 1e-12) ? 1 : 0;
  }

  double worst_gap = 0.0;
  std::size_t chains = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    const auto q = i < 4 ? gen_figure1(500, i % 2 ? 1.0 / 3.0 : 0.5) : random_model(500, rng, i);
    const ComposedChain chain(sample_permutation(q.size(), rng), q);
    const double dense = lambda2_modulus(chain, SpectralMethod::dense).lambda2_modulus;
    const double kry = lambda2_modulus(chain, SpectralMethod::krylov).lambda2_modulus;
    worst_gap = std::max(worst_gap, std::abs(dense - kry));
    ++chains;
  }

  // first seed giving an aperiodic irreducible Figure-1 chain
  const auto q = gen_figure1(500, 0.5);
  std::optional<ComposedChain> chain;
  for (std::uint64_t s = 0; !chain; ++s) {
    Rng r = Rng::stream(1010, s);
    ComposedChain c(sample_permutation(500, r), q);
    if (is_ergodic(c.p().matrix())) chain.emplace(std::move(c));
  }
  std::vector<double> pi0(500, 0.0);
  pi0[0] = 1.0;
  const auto trace = mixing_trace(*chain, pi0, 200);
  const double l2 = lambda2_modulus(*chain, SpectralMethod::dense).lambda2_modulus;
  const double rel = std::abs(trace.fitted_rate - l2) / l2;

  return {valid == models && lower == models && worst_gap <= 1e-6 && rel <= 0.05,
          fmt("bistochastic %zu/%zu, 1/sqrt(d) <= hs %zu/%zu, Krylov-dense max gap %.1e over %zu chains, "
              "mixing rate %.4f vs |l2| %.4f (%.1f%%)",
              valid, models, lower, models, worst_gap, chains, trace.fitted_rate, l2, 100.0 * rel)};
}

} // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  std::vector<std::pair<DeskFixture, bool>> desk;
  const std::vector<Criterion> criteria{
      {1, "composition exactness and intrinsic invariance", 60, composition_invariance},
      {2, "delta-norm subset oracle", 10, delta_norm_oracle},
      {3, "path-sum identity on tangle-free pairs", 60,
       [&] {
         desk = desk_fixtures(100, 303);
         return path_sum_identity(desk);
       }},
      {4, "telescoping identity and lemma inequality", 60, [&] { return telescoping(desk); }},
      {5, "tangle certifier against brute force", 30, tangle_oracle},
      {6, "exact vs Monte Carlo tail", 60, exact_vs_monte_carlo},
      {7, "Figure-1 eigenvalue radii", 120, figure1_reproduction},
      {8, "shuffle-fold closed-form maximum", 5, shuffle_fold_closed_form},
      {9, "anisotropic Birkhoff mix", 180, anisotropic},
      {10, "structural property suites", 120, structural_invariants},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("[%s] %2d %s: %s (%.1f s, budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
