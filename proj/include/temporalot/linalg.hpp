#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace temporalot {

using Index = Eigen::Index;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using BinaryMatrix =
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

// Parses a full token as a double; throws ParseError with `context` on failure.
double parse_double(std::string_view token, std::string_view context);

// Dense text matrix files: header `MATRIX v1 rows=<R> cols=<C>` followed by
// R lines of C space-separated values.
std::string format_matrix(const Matrix& m);
std::string format_matrix(const BinaryMatrix& m);
Matrix parse_matrix(std::string_view text, std::string_view source = "<memory>");

void write_text_file(const std::filesystem::path& path, std::string_view contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace temporalot
