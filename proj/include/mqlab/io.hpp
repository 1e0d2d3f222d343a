#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mqlab/permutation.hpp"
#include "mqlab/sparse.hpp"

namespace mqlab::io {

/// Matrix Market "coordinate real general", 1-based, coordinates sorted
/// row-major, values printed with 17 significant digits so reading back
/// reproduces every double exactly.
void write_matrix_market(std::ostream& out, const SparseMatrix& a);
void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& a);

/// Parses a square coordinate real general matrix. Malformed input throws
/// ValidationError naming the offending line; duplicate coordinates and
/// explicit zeros are rejected.
SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market(const std::filesystem::path& path);

/// Single line: n followed by sigma(1) ... sigma(n), 1-based.
void write_permutation(std::ostream& out, const Permutation& sigma);
void write_permutation(const std::filesystem::path& path, const Permutation& sigma);
Permutation read_permutation(std::istream& in);
Permutation read_permutation(const std::filesystem::path& path);

/// Whitespace separated 1-based indices; returned 0-based and sorted.
std::vector<Index> read_index_set(const std::filesystem::path& path, std::size_t n);

/// Writes `text` to `path`, throwing IoError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace mqlab::io
