#pragma once

// Matrix Market I/O: `coordinate real|integer general` sparse matrices and
// `array real general` dense vectors (the format SuiteSparse uses for bundled
// right-hand sides).

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "errest/errors.hpp"
#include "errest/sparse_matrix.hpp"

namespace errest {

namespace detail {

struct MMHeader {
  std::string format;   // coordinate | array
  std::string field;    // real | integer
  std::string symmetry; // general
};

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline MMHeader read_header(std::istream& in, std::size_t& line_no) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty Matrix Market stream", 1);
  ++line_no;
  std::istringstream hs(line);
  std::string banner, object;
  MMHeader h;
  hs >> banner >> object >> h.format >> h.field >> h.symmetry;
  if (banner != "%%MatrixMarket") throw ParseError("missing %%MatrixMarket banner", line_no);
  object = lower(object);
  h.format = lower(h.format);
  h.field = lower(h.field);
  h.symmetry = lower(h.symmetry);
  if (object != "matrix") throw ParseError("unsupported object '" + object + "'", line_no);
  if (h.format != "coordinate" && h.format != "array") {
    throw ParseError("unsupported format '" + h.format + "'", line_no);
  }
  if (h.field != "real" && h.field != "integer") {
    throw ParseError("unsupported field '" + h.field + "' (only real and integer)", line_no);
  }
  if (h.symmetry != "general") {
    throw ParseError("unsupported symmetry '" + h.symmetry + "' (only general)", line_no);
  }
  return h;
}

// Next non-comment, non-blank line.
inline bool next_data_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '%') continue;
    return true;
  }
  return false;
}

inline void write_double(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

} // namespace detail

inline SparseMatrix read_matrix_market(std::istream& in) {
  std::size_t line_no = 0;
  const auto h = detail::read_header(in, line_no);
  if (h.format != "coordinate") throw ParseError("expected coordinate format", line_no);

  std::string line;
  if (!detail::next_data_line(in, line, line_no)) throw ParseError("missing size line", line_no);
  long long rows = -1, cols = -1, nnz = -1;
  {
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
      throw ParseError("malformed size line", line_no);
    }
  }
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  for (long long e = 0; e < nnz; ++e) {
    if (!detail::next_data_line(in, line, line_no)) {
      throw ParseError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(e),
                       line_no);
    }
    std::istringstream ss(line);
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(ss >> i >> j >> v)) throw ParseError("malformed entry", line_no);
    if (i < 1 || i > rows || j < 1 || j > cols) {
      throw ParseError("index (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range",
                       line_no);
    }
    if (!std::isfinite(v)) throw ParseError("non-finite value", line_no);
    entries.push_back({static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1), v});
  }
  return SparseMatrix::from_triplets(static_cast<std::size_t>(rows),
                                     static_cast<std::size_t>(cols), std::move(entries));
}

inline SparseMatrix load_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());
  return read_matrix_market(in);
}

inline void write_matrix_market(std::ostream& out, const SparseMatrix& A) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << ' ' << A.cols() << ' ' << A.nnz() << '\n';
  for (const auto& t : A.to_triplets()) {
    out << t.row + 1 << ' ' << t.col + 1 << ' ';
    detail::write_double(out, t.value);
    out << '\n';
  }
}

inline void save_matrix_market(const std::filesystem::path& path, const SparseMatrix& A) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  write_matrix_market(out, A);
}

/// Reads an `array` (column-major dense) file with a single column, or an n x 1
/// coordinate file, as a vector.
inline Vector read_vector_market(std::istream& in) {
  std::size_t line_no = 0;
  const auto h = detail::read_header(in, line_no);
  std::string line;
  if (!detail::next_data_line(in, line, line_no)) throw ParseError("missing size line", line_no);
  std::istringstream ss(line);
  if (h.format == "coordinate") {
    long long rows = -1, cols = -1, nnz = -1;
    if (!(ss >> rows >> cols >> nnz) || rows < 0 || cols != 1 || nnz < 0) {
      throw ParseError("vector file must have exactly one column", line_no);
    }
    Vector v(static_cast<std::size_t>(rows), 0.0);
    for (long long e = 0; e < nnz; ++e) {
      if (!detail::next_data_line(in, line, line_no)) throw ParseError("truncated file", line_no);
      std::istringstream es(line);
      long long i = 0, j = 0;
      double x = 0.0;
      if (!(es >> i >> j >> x)) throw ParseError("malformed entry", line_no);
      if (i < 1 || i > rows || j != 1) throw ParseError("index out of range", line_no);
      v[static_cast<std::size_t>(i - 1)] += x;
    }
    return v;
  }
  long long rows = -1, cols = -1;
  if (!(ss >> rows >> cols) || rows < 0 || cols != 1) {
    throw ParseError("vector file must have exactly one column", line_no);
  }
  Vector v;
  v.reserve(static_cast<std::size_t>(rows));
  for (long long i = 0; i < rows; ++i) {
    if (!detail::next_data_line(in, line, line_no)) throw ParseError("truncated file", line_no);
    std::istringstream es(line);
    double x = 0.0;
    if (!(es >> x)) throw ParseError("malformed value", line_no);
    if (!std::isfinite(x)) throw ParseError("non-finite value", line_no);
    v.push_back(x);
  }
  return v;
}

inline Vector load_vector_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());
  return read_vector_market(in);
}

inline void write_vector_market(std::ostream& out, std::span<const double> v) {
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  for (double x : v) {
    detail::write_double(out, x);
    out << '\n';
  }
}

inline void save_vector_market(const std::filesystem::path& path, std::span<const double> v) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  write_vector_market(out, v);
}

} // namespace errest
