#pragma once

// Line-oriented parsing helpers shared by the text formats. Not installed.

#include <charconv>
#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dtm/error.hpp"
#include "dtm/grid.hpp"

namespace dtm::detail {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Returns the next line with any trailing '\r' removed.
  std::optional<std::string> next() {
    std::string line;
    if (!std::getline(in_, line)) return std::nullopt;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  std::size_t line_no() const noexcept { return line_no_; }

  [[noreturn]] void fail(const std::string& msg) const { fail_at(line_no_, msg); }

  [[noreturn]] static void fail_at(std::size_t line, const std::string& msg) {
    throw Error(ErrorKind::kParse, "line " + std::to_string(line) + ": " + msg);
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::optional<std::size_t> parse_size(std::string_view s) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

inline std::optional<double> parse_double(std::string_view s) {
  double value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

// Parses "key=value" header fields after the magic and version tokens.
// Returns nullopt when the token is not of the form key=...
inline std::optional<std::string_view> field_value(std::string_view token, std::string_view key) {
  if (token.size() <= key.size() || token.substr(0, key.size()) != key ||
      token[key.size()] != '=') {
    return std::nullopt;
  }
  return token.substr(key.size() + 1);
}

inline std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  for (std::string_view part : split(s, ' ')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

// Reads the m_rows body lines of a grid whose header has been consumed.
Grid read_grid_body(LineReader& reader, std::size_t n_cols, std::size_t m_rows);

struct Shape {
  std::size_t n_cols = 0;
  std::size_t m_rows = 0;
};

// Parses the "n=<n> m=<m>" tokens at toks[first], toks[first + 1], shared by
// the grid and memory headers.
Shape parse_shape(const std::vector<std::string_view>& toks, std::size_t first,
                  const LineReader& reader);

}  // namespace dtm::detail
