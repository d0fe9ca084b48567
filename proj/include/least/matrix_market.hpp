#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "least/sparse.hpp"

namespace least {

/// Reads a `%%MatrixMarket matrix coordinate <real|integer|pattern> general` stream.
/// Indices are 1-based; duplicate positions are summed; pattern entries read as 1.
/// Throws ParseError on malformed input.
SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market(const std::filesystem::path& path);

/// Writes real general coordinate format with shortest round-trip decimals,
/// so reading the output back reproduces every value bit for bit.
void write_matrix_market(std::ostream& out, const SparseMatrix& m);
void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& m);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);
/// Parses a full token as a double; throws ParseError otherwise.
double parse_double(std::string_view token);

}  // namespace least
