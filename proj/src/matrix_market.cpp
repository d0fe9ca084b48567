#include "least/matrix_market.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "least/errors.hpp"

namespace least {

namespace {

std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

std::size_t parse_count(std::string_view token, const char* what) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(std::string("matrix market: bad ") + what + " '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view token) {
  // from_chars rejects a leading '+', which some writers emit.
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError("cannot parse number '" + std::string(token) + "'");
  }
  return value;
}

SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("matrix market: empty input");
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate") {
    throw ParseError("matrix market: expected '%%MatrixMarket matrix coordinate' header");
  }
  field = lower(field);
  const bool pattern = field == "pattern";
  if (field != "real" && field != "integer" && !pattern) {
    throw ParseError("matrix market: unsupported field '" + field + "'");
  }
  if (lower(symmetry) != "general") {
    throw ParseError("matrix market: only general symmetry is supported");
  }

  while (std::getline(in, line)) {
    if (!line.empty() && line.front() != '%') break;
    line.clear();
  }
  std::istringstream size_line(line);
  std::string r_tok, c_tok, n_tok, extra;
  if (!(size_line >> r_tok >> c_tok >> n_tok) || (size_line >> extra)) {
    throw ParseError("matrix market: bad size line '" + line + "'");
  }
  const std::size_t rows = parse_count(r_tok, "row count");
  const std::size_t cols = parse_count(c_tok, "column count");
  const std::size_t entries = parse_count(n_tok, "entry count");

  std::vector<Triplet> triplets;
  triplets.reserve(entries);
  while (triplets.size() < entries && std::getline(in, line)) {
    if (line.empty() || line.front() == '%') continue;
    std::istringstream entry(line);
    std::string i_tok, j_tok, v_tok;
    if (!(entry >> i_tok >> j_tok)) throw ParseError("matrix market: bad entry '" + line + "'");
    double value = 1.0;
    if (!pattern) {
      if (!(entry >> v_tok)) throw ParseError("matrix market: missing value in '" + line + "'");
      value = parse_double(v_tok);
    }
    if (entry >> extra) throw ParseError("matrix market: trailing tokens in '" + line + "'");
    const std::size_t i = parse_count(i_tok, "row index");
    const std::size_t j = parse_count(j_tok, "column index");
    if (i < 1 || i > rows || j < 1 || j > cols) {
      throw ParseError("matrix market: index out of range in '" + line + "'");
    }
    triplets.push_back({static_cast<Index>(i - 1), static_cast<Index>(j - 1), value});
  }
  if (triplets.size() != entries) {
    throw ParseError("matrix market: expected " + std::to_string(entries) + " entries, found " +
                     std::to_string(triplets.size()));
  }
  return SparseMatrix::from_triplets(static_cast<Index>(rows), static_cast<Index>(cols),
                                     std::move(triplets));
}

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    const auto c = m.row_cols(i);
    const auto v = m.row_values(i);
    for (std::size_t e = 0; e < c.size(); ++e) {
      out << (i + 1) << ' ' << (c[e] + 1) << ' ' << format_double(v[e]) << '\n';
    }
  }
}

void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_matrix_market(out, m);
}

}  // namespace least
