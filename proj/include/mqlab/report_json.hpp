#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mqlab/experiments.hpp"
#include "mqlab/norms.hpp"
#include "mqlab/sparse.hpp"
#include "mqlab/spectral.hpp"
#include "mqlab/tangle.hpp"

/// JSON shapes of every report. Keys are emitted in a fixed order and
/// doubles in shortest round-trip form, so equal inputs give equal bytes.
/// Vertex indices in JSON are 0-based.
namespace mqlab::report {

using Json = nlohmann::ordered_json;

/// {"artifact": "mqlab", "version": ..., "index_base": 0, "seed": ..., "config": ...}
Json meta(const Json& config, std::uint64_t seed);

Json to_json(const NormReport& r);
Json to_json(const ValidationReport& r);
/// {method, lambda2, residual, iterations, converged}
Json to_json(const SpectralReport& r);
Json to_json(const MixingTrace& r);
/// Alternating [x1, y1, x2, ..., yk, x_{k+1}].
Json to_json(const Path& p);
Json to_json(const PathTangleReport& r);
Json to_json(const PairTangleResult& r);
Json to_json(const DecompositionReport& r);
Json to_json(const TrialReport& r, bool timing = false);
Json to_json(const TailEstimate& r);
Json to_json(const ExactTail& r);
Json to_json(const FoldStudy& r);
Json to_json(const TangleFrequency& r);

/// "re,im" header then one line per eigenvalue, 17 significant digits.
std::string eigen_csv(std::span<const std::complex<double>> eigenvalues);

/// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

} // namespace mqlab::report
