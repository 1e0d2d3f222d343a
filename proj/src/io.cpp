#include "mqlab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mqlab/error.hpp"

namespace mqlab::io {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
  throw ValidationError("matrix market line " + std::to_string(line) + ": " + what);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

} // namespace

void write_matrix_market(std::ostream& out, const SparseMatrix& a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.size() << ' ' << a.size() << ' ' << a.nnz() << '\n';
  char buf[64];
  for (std::size_t r = 0; r < a.size(); ++r) {
    const auto cols = a.row_cols(static_cast<Index>(r));
    const auto vals = a.row_values(static_cast<Index>(r));
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const int len = std::snprintf(buf, sizeof buf, "%.17g", vals[k]);
      out << (r + 1) << ' ' << (cols[k] + 1) << ' ' << std::string_view(buf, static_cast<std::size_t>(len)) << '\n';
    }
  }
}

void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& a) {
  auto out = open_out(path);
  write_matrix_market(out, a);
  finish(out, path);
}

SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail_line(1, "empty input");
  ++line_no;
  {
    std::istringstream header(lower(line));
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%matrixmarket" || object != "matrix") fail_line(line_no, "missing %%MatrixMarket matrix banner");
    if (format != "coordinate") fail_line(line_no, "only coordinate format is supported");
    if (field != "real" && field != "double" && field != "integer") fail_line(line_no, "field must be real");
    if (symmetry != "general") fail_line(line_no, "only general symmetry is supported");
  }
  std::size_t rows = 0, cols = 0, nnz = 0;
  bool have_size = false;
  std::vector<Triplet> triplets;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    std::istringstream fields(line);
    if (!have_size) {
      if (!(fields >> rows >> cols >> nnz)) fail_line(line_no, "expected 'rows cols nnz'");
      if (rows != cols || rows == 0) fail_line(line_no, "matrix must be square and non-empty");
      have_size = true;
      triplets.reserve(nnz);
      continue;
    }
    long long i = 0, j = 0;
    double w = 0.0;
    if (!(fields >> i >> j >> w)) fail_line(line_no, "expected 'row col value'");
    std::string extra;
    if (fields >> extra) fail_line(line_no, "trailing characters");
    if (i < 1 || j < 1 || static_cast<std::size_t>(i) > rows || static_cast<std::size_t>(j) > cols) {
      fail_line(line_no, "index out of range");
    }
    if (!std::isfinite(w)) fail_line(line_no, "non-finite value");
    if (w == 0.0) fail_line(line_no, "explicit zero entries are not allowed");
    triplets.push_back({static_cast<Index>(i - 1), static_cast<Index>(j - 1), w});
  }
  if (!have_size) fail_line(line_no, "missing size line");
  if (triplets.size() != nnz) {
    fail_line(line_no, "expected " + std::to_string(nnz) + " entries, found " + std::to_string(triplets.size()));
  }
  std::vector<Triplet> sorted = triplets;
  std::sort(sorted.begin(), sorted.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    if (sorted[k].row == sorted[k - 1].row && sorted[k].col == sorted[k - 1].col) {
      throw ValidationError("matrix market: duplicate entry (" + std::to_string(sorted[k].row + 1) + ", " +
                            std::to_string(sorted[k].col + 1) + ")");
    }
  }
  return SparseMatrix::from_triplets(rows, std::move(sorted));
}

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_matrix_market(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_permutation(std::ostream& out, const Permutation& sigma) {
  out << sigma.size();
  for (const Index y : sigma.map()) out << ' ' << (y + 1);
  out << '\n';
}

void write_permutation(const std::filesystem::path& path, const Permutation& sigma) {
  auto out = open_out(path);
  write_permutation(out, sigma);
  finish(out, path);
}

Permutation read_permutation(std::istream& in) {
  std::size_t n = 0;
  if (!(in >> n) || n == 0) throw ValidationError("permutation file: missing or zero size header");
  std::vector<Index> map(n);
  for (std::size_t x = 0; x < n; ++x) {
    long long y = 0;
    if (!(in >> y)) throw ValidationError("permutation file: expected " + std::to_string(n) + " indices");
    if (y < 1 || static_cast<std::size_t>(y) > n) throw ValidationError("permutation file: index out of range");
    map[x] = static_cast<Index>(y - 1);
  }
  std::string extra;
  if (in >> extra) throw ValidationError("permutation file: trailing data");
  return Permutation(std::move(map));
}

Permutation read_permutation(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_permutation(in);
}

std::vector<Index> read_index_set(const std::filesystem::path& path, std::size_t n) {
  auto in = open_in(path);
  std::vector<Index> out;
  long long v = 0;
  while (in >> v) {
    if (v < 1 || static_cast<std::size_t>(v) > n) throw ValidationError(path.string() + ": index out of range");
    out.push_back(static_cast<Index>(v - 1));
  }
  if (!in.eof()) throw ValidationError(path.string() + ": non-integer token");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

} // namespace mqlab::io
