#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mqlab/permutation.hpp"
#include "mqlab/rng.hpp"
#include "mqlab/sparse.hpp"

namespace mqlab {

struct Figure1Spec {
  std::size_t n = 0;
  double p = 0.5;
};

struct RegularDigraphSpec {
  std::vector<std::vector<Index>> adjacency;
  std::size_t r = 0;
};

/// With `sigmas` absent the r = p.size() permutations on n points are drawn
/// uniformly and independently when the model is built.
struct BirkhoffSpec {
  std::vector<double> p;
  std::optional<std::vector<Permutation>> sigmas;
  std::size_t n = 0;
};

struct ShuffleFoldSpec {
  std::size_t n = 0;
  std::size_t r = 0;
  std::optional<Permutation> sigma;  ///< identity when absent
};

struct UniformRegularSpec {
  std::size_t n = 0;
  std::size_t r = 0;
};

struct CustomSpec {
  SparseMatrix matrix;
  std::string source;  ///< file path or "inline"
};

using ModelSpec =
    std::variant<Figure1Spec, RegularDigraphSpec, BirkhoffSpec, ShuffleFoldSpec, UniformRegularSpec, CustomSpec>;

/// Parses the `model` discriminator and per-variant keys. Indices in JSON
/// are 0-based. Relative matrix paths resolve against `base_dir`.
ModelSpec parse_model_spec(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

nlohmann::ordered_json to_json(const ModelSpec& spec);

std::string model_name(const ModelSpec& spec);
std::size_t model_size(const ModelSpec& spec);

/// True when building the model consumes randomness.
bool model_is_random(const ModelSpec& spec);

struct Model {
  SparseBistochastic q;
  std::string name;
  /// Birkhoff mixes only: whether the permutations had disjoint supports.
  std::optional<bool> disjoint_supports;
};

Model build_model(const ModelSpec& spec, Rng& rng);

} // namespace mqlab
