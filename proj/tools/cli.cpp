#include "cli.hpp"

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mqlab/chain.hpp"
#include "mqlab/error.hpp"
#include "mqlab/experiments.hpp"
#include "mqlab/io.hpp"
#include "mqlab/model_spec.hpp"
#include "mqlab/norms.hpp"
#include "mqlab/report_json.hpp"
#include "mqlab/rng.hpp"
#include "mqlab/spectral.hpp"
#include "mqlab/tangle.hpp"

namespace mqlab::cli {

namespace {

using report::Json;

struct Options {
  std::uint64_t seed = kDefaultSeed;
  std::size_t threads = 1;
  std::string out;

  // gen
  std::string spec_file;
  std::string model;
  std::size_t n = 0;
  double p = 0.5;
  std::size_t r = 0;

  // chain input
  std::string q_file;
  std::string sigma = "id";
  double delta = 1.0;
  std::size_t dense_cap = kDefaultDenseCap;

  // lambda2
  std::string method = "dense";
  KrylovOptions krylov;

  // tangle, decompose
  std::size_t ell = 1;
  std::optional<std::size_t> h;
  std::string e_file;

  // montecarlo
  std::string config_file;
  bool timing = false;

  // foldmix
  std::string mode = "exhaustive";
  std::size_t samples = 200;
};

void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty()) {
    out << text;
  } else {
    io::write_text(o.out, text);
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

SparseBistochastic load_q(const Options& o) { return SparseBistochastic(io::read_matrix_market(o.q_file)); }

Permutation resolve_sigma(const Options& o, std::size_t n) {
  if (o.sigma == "id") return Permutation::identity(n);
  if (o.sigma == "random") {
    Rng rng = Rng::stream(o.seed, 0);
    return sample_permutation(n, rng);
  }
  Permutation sigma = io::read_permutation(o.sigma);
  if (sigma.size() != n) {
    throw ValidationError("permutation in '" + o.sigma + "' has size " + std::to_string(sigma.size()) +
                          ", expected " + std::to_string(n));
  }
  return sigma;
}

TangleParams resolve_tangle_params(const Options& o, const SparseMatrix& q) {
  TangleParams params = default_tangle_params(q, o.delta, o.ell);
  if (o.h) params.h = *o.h;
  if (!o.e_file.empty()) params.E = io::read_index_set(o.e_file, q.size());
  return params;
}

Json chain_config(const Options& o) {
  Json c;
  c["q"] = o.q_file;
  c["sigma"] = o.sigma;
  return c;
}

int cmd_gen(const Options& o, std::ostream& out) {
  Json spec_json;
  if (!o.spec_file.empty()) {
    spec_json = read_json_file(o.spec_file);
  } else {
    if (o.model.empty()) throw ValidationError("gen: give --model or --spec");
    spec_json["model"] = o.model;
    spec_json["n"] = o.n;
    spec_json["p"] = o.p;
    spec_json["r"] = o.r;
  }
  const std::filesystem::path base = o.spec_file.empty() ? std::filesystem::path{}
                                                         : std::filesystem::path(o.spec_file).parent_path();
  const ModelSpec spec = parse_model_spec(spec_json, base);
  Rng rng = Rng::stream(o.seed, kModelStream);
  const Model model = build_model(spec, rng);
  std::ostringstream text;
  io::write_matrix_market(text, model.q.matrix());
  emit(o, out, text.str());
  return kOk;
}

int cmd_norms(const Options& o, std::ostream& out) {
  const SparseMatrix q = io::read_matrix_market(o.q_file);
  Json config;
  config["q"] = o.q_file;
  config["delta"] = o.delta;
  Json doc;
  doc["meta"] = report::meta(config, o.seed);
  doc["bistochastic"] = report::to_json(validate_bistochastic(q));
  doc["norms"] = report::to_json(rho(q, o.delta));
  emit(o, out, report::dump(doc));
  return kOk;
}

int cmd_spectrum(const Options& o, std::ostream& out) {
  const SparseBistochastic q = load_q(o);
  const ComposedChain chain(resolve_sigma(o, q.size()), q);
  const SpectralReport spec = full_spectrum(chain.p().matrix(), o.dense_cap);
  emit(o, out, report::eigen_csv(*spec.eigenvalues));
  return kOk;
}

int cmd_lambda2(const Options& o, std::ostream& out) {
  const SparseBistochastic q = load_q(o);
  const ComposedChain chain(resolve_sigma(o, q.size()), q);
  const SpectralMethod method = parse_spectral_method(o.method);
  const SpectralReport spec = lambda2_modulus(chain, method, o.krylov, o.dense_cap);
  Json config = chain_config(o);
  config["method"] = o.method;
  if (method == SpectralMethod::krylov) {
    config["krylov"] = {{"subspace", o.krylov.subspace},
                        {"restarts", o.krylov.restarts},
                        {"tolerance", o.krylov.tolerance},
                        {"keep", o.krylov.keep}};
  }
  Json doc;
  doc["meta"] = report::meta(config, o.seed);
  const Json body = report::to_json(spec);
  for (const auto& [key, value] : body.items()) doc[key] = value;
  emit(o, out, report::dump(doc));
  return spec.converged ? kOk : kConvergence;
}

int cmd_tangle(const Options& o, std::ostream& out) {
  const SparseBistochastic q = load_q(o);
  const Permutation sigma = resolve_sigma(o, q.size());
  const TangleParams params = resolve_tangle_params(o, q.matrix());
  const PairTangleResult res = pair_tangle_free(sigma, q.matrix(), o.ell, params);
  Json config = chain_config(o);
  config["ell"] = o.ell;
  config["h"] = params.h;
  config["E"] = params.E;
  config["delta"] = params.delta;
  Json doc;
  doc["meta"] = report::meta(config, o.seed);
  doc["certification"] = report::to_json(res);
  emit(o, out, report::dump(doc));
  return kOk;
}

int cmd_decompose(const Options& o, std::ostream& out) {
  const SparseBistochastic q = load_q(o);
  const Permutation sigma = resolve_sigma(o, q.size());
  const TangleParams params = resolve_tangle_params(o, q.matrix());
  const DecompositionReport res = verify_decomposition(sigma, q.matrix(), o.ell, params);
  Json config = chain_config(o);
  config["ell"] = o.ell;
  config["h"] = params.h;
  config["E"] = params.E;
  config["delta"] = params.delta;
  Json doc;
  doc["meta"] = report::meta(config, o.seed);
  doc["decomposition"] = report::to_json(res);
  emit(o, out, report::dump(doc));
  return kOk;
}

int cmd_montecarlo(const Options& o, std::ostream& out, bool threads_given) {
  const Json raw = read_json_file(o.config_file);
  ExperimentConfig config = parse_experiment_config(raw, std::filesystem::path(o.config_file).parent_path());
  if (threads_given) config.threads = o.threads;
  const auto reports = run_trials(config);
  const std::size_t n = model_size(config.model);
  const TailEstimate tail = tail_probability(reports, reports.front().epsilon, n, config.c0);

  Json trials = Json::array();
  std::size_t unconverged = 0;
  for (const auto& r : reports) {
    trials.push_back(report::to_json(r, o.timing));
    if (!r.converged) ++unconverged;
  }
  Json summary = report::to_json(tail);
  summary["unconverged"] = unconverged;
  Json doc;
  doc["meta"] = report::meta(to_json(config), config.seed);
  doc["trials"] = std::move(trials);
  doc["summary"] = std::move(summary);
  emit(o, out, report::dump(doc));
  return kOk;
}

int cmd_foldmix(const Options& o, std::ostream& out) {
  FoldMode mode;
  if (o.mode == "exhaustive") {
    mode = FoldMode::exhaustive;
  } else if (o.mode == "sampled") {
    mode = FoldMode::sampled;
  } else {
    throw ValidationError("foldmix: --mode must be exhaustive or sampled");
  }
  const FoldStudy study = shuffle_fold_study(o.n, o.r, mode, o.samples, o.seed);
  Json config;
  config["n"] = o.n;
  config["r"] = o.r;
  config["mode"] = o.mode;
  if (mode == FoldMode::sampled) config["samples"] = o.samples;
  Json doc;
  doc["meta"] = report::meta(config, o.seed);
  doc["study"] = report::to_json(study);
  emit(o, out, report::dump(doc));
  return kOk;
}

int cmd_fig1(const Options& o, std::ostream& out) {
  const std::string prefix = o.out.empty() ? "fig1" : o.out;
  const Figure1Result res = figure1_experiment(o.n, o.p, o.seed, prefix);
  out << res.csv_path.string() << "\n" << res.json_path.string() << "\n";
  return kOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectra of random bistochastic chains P = M Q"};
  app.require_subcommand(1, 1);
  app.set_help_flag("--help", "Print this help message and exit");
  app.fallthrough();
  app.set_version_flag("--version", MQLAB_VERSION);

  Options o;
  app.add_option("--seed", o.seed, "Master seed")->capture_default_str();
  auto* threads_opt = app.add_option("--threads", o.threads, "Worker thread cap (0 = all cores)");

  auto add_chain = [&](CLI::App* sub) {
    sub->add_option("--q", o.q_file, "Bistochastic matrix (Matrix Market)")->required()->check(CLI::ExistingFile);
    sub->add_option("--sigma", o.sigma, "id, random, or a permutation file")->capture_default_str();
  };
  auto add_out = [&](CLI::App* sub, const char* what) { sub->add_option("--out", o.out, what); };

  auto* gen = app.add_subcommand("gen", "Generate a model matrix Q as Matrix Market");
  gen->add_option("--spec", o.spec_file, "Model spec JSON file")->check(CLI::ExistingFile);
  gen->add_option("--model", o.model, "fig1, shuffle_fold or uniform_regular");
  gen->add_option("--n", o.n, "Size");
  gen->add_option("--p", o.p, "Figure-1 weight")->capture_default_str();
  gen->add_option("--r", o.r, "Degree or fold factor");
  add_out(gen, "Output .mtx (default stdout)");

  auto* norms = app.add_subcommand("norms", "Norms, sparsity degree and rho of a matrix");
  norms->add_option("--q", o.q_file, "Matrix (Matrix Market)")->required()->check(CLI::ExistingFile);
  norms->add_option("--delta", o.delta, "Relaxation exponent in (0, 1]")->capture_default_str();
  add_out(norms, "Output JSON (default stdout)");

  auto* spectrum = app.add_subcommand("spectrum", "Full eigencloud of P = M Q as CSV");
  add_chain(spectrum);
  spectrum->add_option("--dense-cap", o.dense_cap, "Largest n for dense solves")->capture_default_str();
  add_out(spectrum, "Output CSV (default stdout)");

  auto* lambda2 = app.add_subcommand("lambda2", "Second eigenvalue modulus of P = M Q");
  add_chain(lambda2);
  lambda2->add_option("--method", o.method, "dense or krylov")
      ->check(CLI::IsMember({"dense", "krylov"}))
      ->capture_default_str();
  lambda2->add_option("--dense-cap", o.dense_cap, "Largest n for dense solves")->capture_default_str();
  lambda2->add_option("--subspace", o.krylov.subspace, "Krylov subspace size")->capture_default_str();
  lambda2->add_option("--restarts", o.krylov.restarts, "Krylov restart budget")->capture_default_str();
  lambda2->add_option("--tolerance", o.krylov.tolerance, "Krylov Ritz residual tolerance")->capture_default_str();
  add_out(lambda2, "Output JSON (default stdout)");

  auto add_tangle = [&](CLI::App* sub) {
    add_chain(sub);
    sub->add_option("--ell", o.ell, "Path length")->required()->check(CLI::PositiveNumber);
    sub->add_option("--h", o.h, "Gram-graph radius (default ceil(20 sqrt(ln n)))");
    sub->add_option("--E-file", o.e_file, "Exceptional set, 1-based indices")->check(CLI::ExistingFile);
    sub->add_option("--delta", o.delta, "Exponent for the default exceptional set")->capture_default_str();
    add_out(sub, "Output JSON (default stdout)");
  };
  auto* tangle = app.add_subcommand("tangle", "Certify that (M, Q) is ell-tangle-free");
  add_tangle(tangle);
  auto* decompose = app.add_subcommand("decompose", "Check the path-sum decomposition on a small chain");
  add_tangle(decompose);

  auto* montecarlo = app.add_subcommand("montecarlo", "Run the trials described by a config file");
  montecarlo->add_option("--config", o.config_file, "Experiment config JSON")->required()->check(CLI::ExistingFile);
  montecarlo->add_flag("--timing", o.timing, "Include per-trial runtime_ms");
  add_out(montecarlo, "Output JSON (default stdout)");

  auto* foldmix = app.add_subcommand("foldmix", "Mixing of the shuffle-fold chains");
  foldmix->add_option("--n", o.n, "Number of cells")->required();
  foldmix->add_option("--r", o.r, "Fold factor")->required();
  foldmix->add_option("--mode", o.mode, "exhaustive or sampled")
      ->check(CLI::IsMember({"exhaustive", "sampled"}))
      ->capture_default_str();
  foldmix->add_option("--samples", o.samples, "Draws in sampled mode")->capture_default_str();
  add_out(foldmix, "Output JSON (default stdout)");

  auto* fig1 = app.add_subcommand("fig1", "Eigencloud of one Figure-1 chain, CSV plus JSON sidecar");
  fig1->add_option("--n", o.n, "Even size")->required();
  fig1->add_option("--p", o.p, "Weight in (0, 1)")->required();
  add_out(fig1, "Output prefix (default fig1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream cli_out;
    std::ostringstream cli_err;
    const int code = app.exit(e, cli_out, cli_err);
    out << cli_out.str();
    err << cli_err.str();
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*gen) return cmd_gen(o, out);
    if (*norms) return cmd_norms(o, out);
    if (*spectrum) return cmd_spectrum(o, out);
    if (*lambda2) return cmd_lambda2(o, out);
    if (*tangle) return cmd_tangle(o, out);
    if (*decompose) return cmd_decompose(o, out);
    if (*montecarlo) return cmd_montecarlo(o, out, threads_opt->count() > 0);
    if (*foldmix) return cmd_foldmix(o, out);
    if (*fig1) return cmd_fig1(o, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kConvergence;
  }
  return kValidation;
}

} // namespace mqlab::cli
