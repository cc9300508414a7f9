#include "temporalot/linalg.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "temporalot/error.hpp"
#include "text_util.hpp"

namespace temporalot {

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw Error("failed to format double");
  return std::string(buf, end);
}

double parse_double(std::string_view token, std::string_view context) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && token.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw ParseError(std::string(context) + ": invalid number '" + std::string(token) + "'");
  }
  return value;
}

namespace {

template <typename M>
std::string format_any(const M& m) {
  std::string out = "MATRIX v1 rows=" + std::to_string(m.rows()) +
                    " cols=" + std::to_string(m.cols()) + "\n";
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ' ';
      if constexpr (std::is_same_v<typename M::Scalar, double>) {
        out += format_double(m(i, j));
      } else {
        out += std::to_string(static_cast<int>(m(i, j)));
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace

std::string format_matrix(const Matrix& m) { return format_any(m); }
std::string format_matrix(const BinaryMatrix& m) { return format_any(m); }

Matrix parse_matrix(std::string_view text, std::string_view source) {
  auto lines = detail::split_lines(text);
  if (lines.empty()) throw ParseError(std::string(source) + ": empty matrix file");
  auto header = detail::split_ws(lines[0]);
  if (header.size() != 4 || header[0] != "MATRIX" || header[1] != "v1") {
    throw ParseError(std::string(source) + ": line 1: expected 'MATRIX v1 rows=<R> cols=<C>'");
  }
  const long rows = detail::parse_key_int(header[2], "rows", source, 1);
  const long cols = detail::parse_key_int(header[3], "cols", source, 1);
  if (static_cast<long>(lines.size()) != rows + 1) {
    throw ParseError(std::string(source) + ": expected " + std::to_string(rows) +
                     " rows, found " + std::to_string(lines.size() - 1));
  }
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    const std::string ctx = std::string(source) + ": line " + std::to_string(i + 2);
    auto fields = detail::split_ws(lines[i + 1]);
    if (static_cast<long>(fields.size()) != cols) {
      throw ParseError(ctx + ": expected " + std::to_string(cols) + " values");
    }
    for (long j = 0; j < cols; ++j) m(i, j) = parse_double(fields[j], ctx);
  }
  return m;
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return ss.str();
}

}  // namespace temporalot
