#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>

#include "mqlab/error.hpp"
#include "mqlab/experiments.hpp"
#include "mqlab/generators.hpp"
#include "mqlab/report_json.hpp"
#include "oracles.hpp"

using namespace mqlab;

namespace {

SparseBistochastic uniform(std::size_t n) {
  return SparseBistochastic(SparseMatrix::from_dense(
      Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), 1.0 / n)));
}

ExperimentConfig fig1_config(std::size_t n, std::size_t trials) {
  ExperimentConfig c;
  c.model = Figure1Spec{n, 0.5};
  c.trials = trials;
  return c;
}

bool same_reports(const std::vector<TrialReport>& a, const std::vector<TrialReport>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (report::dump(report::to_json(a[i])) != report::dump(report::to_json(b[i]))) return false;
  }
  return true;
}

} // namespace

TEST_CASE("theorem epsilon") {
  CHECK(theorem_epsilon(500, 2.0, 1.0) == doctest::Approx(std::log(2.0) / std::sqrt(std::log(500.0))));
  CHECK(theorem_epsilon(500, 2.0, 1.0) == doctest::Approx(0.27805).epsilon(1e-4));
  CHECK(theorem_epsilon(500, 2.0, 0.0) == 0.0);
  CHECK(theorem_epsilon(static_cast<std::size_t>(std::round(std::exp(4.0))), std::exp(2.0), 1.0) ==
        doctest::Approx(2.0 / std::sqrt(std::log(std::round(std::exp(4.0))))));
  CHECK_THROWS_AS(theorem_epsilon(500, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(theorem_epsilon(1, 2.0, 1.0), ValidationError);
}

TEST_CASE("config validation and parsing") {
  ExperimentConfig c = fig1_config(10, 3);
  c.c0 = 1.0;
  CHECK_THROWS_AS(validate(c), ValidationError);
  c.c0 = 0.5;
  c.trials = 0;
  CHECK_THROWS_AS(validate(c), ValidationError);

  const auto parsed = parse_experiment_config(nlohmann::json::parse(R"({
    "model": {"model": "fig1", "n": 20, "p": 0.25},
    "n": 20, "trials": 4, "seed": "0x10", "delta": 0.9, "c0": 0.3, "c1": 2.0,
    "method": "krylov", "krylov": {"subspace": 12, "keep": 4}, "ell": 2
  })"));
  CHECK(parsed.trials == 4);
  CHECK(parsed.seed == 16);
  CHECK(parsed.method == SpectralMethod::krylov);
  CHECK(parsed.krylov.subspace == 12);
  CHECK(parsed.ell == std::optional<std::size_t>(2));
  const auto echoed = to_json(parsed);
  CHECK(echoed["n"] == 20);
  CHECK(echoed["seed"] == 16);

  CHECK_THROWS_AS(parse_experiment_config(nlohmann::json::parse(R"({"model": {"model": "fig1", "n": 4, "p": 0.5},
                                                                    "bogus": 1})")),
                  ValidationError);
  CHECK_THROWS_AS(parse_experiment_config(nlohmann::json::parse(R"({"model": {"model": "fig1", "n": 4, "p": 0.5},
                                                                    "n": 6})")),
                  ValidationError);
  CHECK_THROWS_AS(parse_experiment_config(nlohmann::json::parse(R"({"trials": 3})")), ValidationError);
}

TEST_CASE("run_trials") {
  SUBCASE("rank-one model gives ratio zero") {
    ExperimentConfig c;
    c.model = CustomSpec{uniform(12).matrix(), "inline"};
    c.trials = 5;
    for (const auto& r : run_trials(c)) {
      CHECK(r.ratio <= 1e-10);
      CHECK(r.rho > 0.0);
      CHECK_FALSE(r.exceeded);
    }
  }
  SUBCASE("reproducible and independent of the thread count") {
    ExperimentConfig c = fig1_config(40, 6);
    const auto a = run_trials(c);
    const auto b = run_trials(c);
    c.threads = 3;
    const auto d = run_trials(c);
    CHECK(same_reports(a, b));
    CHECK(same_reports(a, d));
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].trial == i);
      CHECK(a[i].lambda2 < 1.0 + 1e-9);
      CHECK(a[i].ratio <= 1.0 / a[i].rho + 1e-9);
    }
  }
  SUBCASE("resampled models differ between trials") {
    ExperimentConfig c;
    c.model = UniformRegularSpec{30, 3};
    c.trials = 4;
    c.resample_model = true;
    const auto r = run_trials(c);
    CHECK(r[0].lambda2 != r[1].lambda2);
    CHECK(same_reports(r, run_trials(c)));
  }
}

TEST_CASE("clopper-pearson") {
  SUBCASE("closed forms at the edges") {
    const auto [lo0, hi0] = clopper_pearson(0, 10);
    CHECK(lo0 == 0.0);
    CHECK(hi0 == doctest::Approx(1.0 - std::pow(0.025, 0.1)));
    const auto [lo1, hi1] = clopper_pearson(10, 10);
    CHECK(hi1 == 1.0);
    CHECK(lo1 == doctest::Approx(std::pow(0.025, 0.1)));
  }
  SUBCASE("tail masses equal alpha / 2") {
    for (const auto [k, n] : {std::pair<std::size_t, std::size_t>{3, 20}, {50, 100}, {7, 1000}}) {
      const auto [lo, hi] = clopper_pearson(k, n);
      CHECK(1.0 - oracle::binom_cdf(k - 1, n, lo) == doctest::Approx(0.025).epsilon(1e-6));
      CHECK(oracle::binom_cdf(k, n, hi) == doctest::Approx(0.025).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(clopper_pearson(3, 0), ValidationError);
  CHECK_THROWS_AS(clopper_pearson(4, 3), ValidationError);
}

TEST_CASE("tail probability") {
  std::vector<TrialReport> zero(20);
  for (auto& r : zero) r.rho = 0.5;
  CHECK(tail_probability(zero, 0.1).estimate == 0.0);
  CHECK(tail_probability(zero, -1.0).estimate == 1.0);

  std::vector<TrialReport> mixed(4);
  const double ratios[] = {0.5, 1.2, 1.3, 2.0};
  for (std::size_t i = 0; i < 4; ++i) mixed[i].ratio = ratios[i];
  const auto t = tail_probability(mixed, 0.25, 100, 0.5);
  CHECK(t.exceedances == 2);
  CHECK(t.estimate == 0.5);
  CHECK(*t.bound == doctest::Approx(0.1));
  CHECK_FALSE(*t.estimate_within_bound);
  CHECK(t.ci_lower < 0.5);
  CHECK(t.ci_upper > 0.5);
  CHECK_THROWS_AS(tail_probability({}, 0.1), ValidationError);
}

TEST_CASE("exact tail") {
  SUBCASE("point-mass rows give permutation matrices") {
    const auto id = SparseBistochastic(SparseMatrix::identity(5));
    const auto t = exact_tail(id, 1.0);
    CHECK(t.total == 120);
    CHECK(t.count == 120);
  }
  SUBCASE("uniform matrix never exceeds 0.5") {
    CHECK(exact_tail(uniform(5), 0.5).count == 0);
  }
  SUBCASE("figure-1 n = 4 by hand enumeration") {
    // count by direct construction of every M Q
    const auto q = gen_figure1(4, 0.5);
    std::vector<Index> s{0, 1, 2, 3};
    std::uint64_t count = 0;
    do {
      const Eigen::MatrixXd p = compose(Permutation(s), q).p().to_dense();
      Eigen::EigenSolver<Eigen::MatrixXd> es(p);
      std::vector<double> mods;
      for (Eigen::Index i = 0; i < 4; ++i) mods.push_back(std::abs(es.eigenvalues()(i)));
      std::sort(mods.begin(), mods.end());
      if (mods[2] >= std::sqrt(0.5) - 1e-9) ++count;
    } while (std::next_permutation(s.begin(), s.end()));
    const auto t = exact_tail(q, std::sqrt(0.5));
    CHECK(t.total == 24);
    CHECK(t.count == count);
    CHECK(t.count == 8);
  }
  SUBCASE("n = 6 figure-1") {
    const auto t = exact_tail(gen_figure1(6, 0.5), std::sqrt(0.5));
    CHECK(t.total == 720);
    CHECK(t.count == 144);
  }
  CHECK_THROWS_AS(exact_tail(SparseBistochastic(SparseMatrix::identity(8)), 0.5), ValidationError);
}

TEST_CASE("shuffle-fold study") {
  SUBCASE("n = 5, r = 3 exhaustive") {
    const auto s = shuffle_fold_study(5, 3, FoldMode::exhaustive);
    CHECK(s.samples == 120);
    CHECK(s.coprime);
    CHECK(s.max_tau == doctest::Approx(0.539345).epsilon(1e-6));
    CHECK(std::abs(s.max_tau - std::sin(3 * std::numbers::pi / 5) / (3 * std::sin(std::numbers::pi / 5))) <= 1e-8);
    CHECK(*s.max_error <= 1e-8);
    CHECK(s.identity_attains_min);
  }
  SUBCASE("closed form on every coprime pair up to n = 6") {
    for (std::size_t n = 3; n <= 6; ++n) {
      for (std::size_t r = 2; r <= n; ++r) {
        const auto s = shuffle_fold_study(n, r, FoldMode::exhaustive);
        if (std::gcd(n, r) != 1) {
          CHECK_FALSE(s.closed_form_max);
          continue;
        }
        CHECK(*s.max_error <= 1e-8);
        CHECK(s.identity_attains_min);
      }
    }
  }
  SUBCASE("sampled mean near 1/sqrt(r)") {
    const auto s = shuffle_fold_study(50, 3, FoldMode::sampled, 200, 11);
    CHECK(s.samples == 200);
    CHECK(s.mean_tau >= 0.9 * s.inv_sqrt_r);
    CHECK(s.mean_tau <= 1.1 * s.inv_sqrt_r);
  }
  CHECK_THROWS_AS(shuffle_fold_study(8, 3, FoldMode::exhaustive), ValidationError);
  CHECK_THROWS_AS(shuffle_fold_study(5, 3, FoldMode::sampled, 0), ValidationError);
}

TEST_CASE("tangle frequency") {
  SUBCASE("ell = 1 without exceptional vertices") {
    Rng rng(1);
    const auto q = fixtures::random_mix(20, 3, rng);
    TangleParams p;
    p.h = 2;
    const auto f = tangle_frequency(q, 1, p, 50, 7);
    CHECK(f.frequency == 1.0);
    CHECK(f.consistent);
  }
  SUBCASE("uniform Q on n = 8 matches the exact count over all permutations") {
    const auto q = uniform(8);
    TangleParams p;
    p.h = 1;
    // M Q = Q for every sigma, so one oracle verdict covers all of S_8
    const bool free_at_identity = oracle::pair_tangle_free(Permutation::identity(8), q.to_dense(), 3, p).tangle_free;
    std::vector<Index> s(8);
    std::iota(s.begin(), s.end(), Index{0});
    std::size_t free_count = 0;
    std::size_t total = 0;
    do {
      ++total;
      if (pair_tangle_free(Permutation(s), q.matrix(), 3, p).tangle_free) ++free_count;
    } while (std::next_permutation(s.begin(), s.end()));
    CHECK(total == 40320);
    CHECK(free_count == (free_at_identity ? total : 0));
    const double exact = static_cast<double>(free_count) / static_cast<double>(total);
    const auto f = tangle_frequency(q, 3, p, 200, 3);
    const double sd = std::sqrt(exact * (1 - exact) / 200.0);
    CHECK(std::abs(f.frequency - exact) <= 3 * sd);
    CHECK(f.vacuous);
  }
  SUBCASE("reproducible and parallel-safe") {
    const auto q = gen_figure1(100, 0.5);
    TangleParams p;
    p.h = 2;
    const auto a = tangle_frequency(q, 2, p, 40, 5, 1);
    const auto b = tangle_frequency(q, 2, p, 40, 5, 4);
    CHECK(a.tangle_free == b.tangle_free);
    CHECK(report::dump(report::to_json(a)) == report::dump(report::to_json(b)));
  }
  SUBCASE("non-vacuous bound") {
    // identity Q: d = 1, so the failure term is ell n^(-delta)
    const SparseBistochastic q(SparseMatrix::identity(50));
    TangleParams p;
    p.h = 1;
    const auto f = tangle_frequency(q, 2, p, 100, 1);
    CHECK_FALSE(f.vacuous);
    CHECK(f.lower_bound == doctest::Approx(1.0 - 2.0 / 50.0));
    CHECK(f.consistent);
  }
}

TEST_CASE("figure-1 experiment files") {
  const auto dir = std::filesystem::temp_directory_path() / "mqlab_test_fig1";
  std::filesystem::create_directories(dir);
  const auto res = figure1_experiment(4, 0.5, 3, dir / "small");
  std::ifstream csv(res.csv_path);
  std::string line;
  std::size_t rows = 0;
  std::getline(csv, line);
  CHECK(line == "re,im");
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 4);
  const auto sidecar = nlohmann::json::parse(std::ifstream(res.json_path));
  CHECK(sidecar["radius"].get<double>() == doctest::Approx(std::sqrt(0.5)));
  CHECK(sidecar["meta"]["seed"] == 3);
  CHECK(sidecar["norms"]["hs"].get<double>() == doctest::Approx(std::sqrt(0.5)));

  const auto third = figure1_experiment(10, 1.0 / 3.0, 3, dir / "third");
  CHECK(third.radius == doctest::Approx(std::sqrt(5.0) / 3.0));
  CHECK_THROWS_AS(figure1_experiment(5, 0.5, 3, dir / "odd"), ValidationError);
  CHECK_THROWS_AS(figure1_experiment(4, 0.5, 3, dir / "missing" / "x"), IoError);
  std::filesystem::remove_all(dir);
}
