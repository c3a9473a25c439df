#include "dtm/grid_text.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "text_util.hpp"

namespace dtm {

namespace detail {

Shape parse_shape(const std::vector<std::string_view>& toks, std::size_t first,
                  const LineReader& reader) {
  if (toks.size() < first + 2) reader.fail("header is missing n=/m= fields");
  const auto n_text = field_value(toks[first], "n");
  const auto m_text = field_value(toks[first + 1], "m");
  if (!n_text || !m_text) reader.fail("expected n=<cols> m=<rows> in header");
  const auto n = parse_size(*n_text);
  const auto m = parse_size(*m_text);
  if (!n || !m || *n == 0 || *m == 0) reader.fail("n and m must be positive integers");
  return Shape{*n, *m};
}

Grid read_grid_body(LineReader& reader, std::size_t n_cols, std::size_t m_rows) {
  Grid g(n_cols, m_rows);
  for (std::size_t row = m_rows; row >= 1; --row) {
    const auto line = reader.next();
    if (!line) {
      LineReader::fail_at(reader.line_no() + 1,
                          "expected " + std::to_string(m_rows) + " grid rows, input ended");
    }
    if (line->size() != n_cols) {
      reader.fail("expected " + std::to_string(n_cols) + " cells, got " +
                  std::to_string(line->size()));
    }
    for (std::size_t col = 1; col <= n_cols; ++col) {
      const char c = (*line)[col - 1];
      if (c == 'X') {
        g.set(col, row);
      } else if (c != '.') {
        reader.fail(std::string("invalid cell character '") + c + "'");
      }
    }
  }
  return g;
}

}  // namespace detail

void write_grid_body(std::ostream& out, const Grid& g) {
  std::string line(g.n_cols(), '.');
  for (std::size_t row = g.m_rows(); row >= 1; --row) {
    for (std::size_t col = 1; col <= g.n_cols(); ++col) line[col - 1] = g.marked(col, row) ? 'X' : '.';
    out << line << '\n';
  }
}

void write_grid(std::ostream& out, const Grid& g) {
  out << "#dtm-grid v1 n=" << g.n_cols() << " m=" << g.m_rows() << '\n';
  write_grid_body(out, g);
}

Grid read_grid(std::istream& in) {
  detail::LineReader reader(in);
  const auto header = reader.next();
  if (!header) detail::LineReader::fail_at(1, "empty input, expected #dtm-grid header");
  const auto toks = detail::tokens(*header);
  if (toks.empty() || toks[0] != "#dtm-grid") reader.fail("expected #dtm-grid header");
  if (toks.size() < 2 || toks[1] != "v1") reader.fail("unsupported grid format version");
  if (toks.size() != 4) reader.fail("unexpected header fields");
  const auto shape = detail::parse_shape(toks, 2, reader);
  Grid g = detail::read_grid_body(reader, shape.n_cols, shape.m_rows);
  while (const auto extra = reader.next()) {
    if (!extra->empty()) reader.fail("unexpected content after grid body");
  }
  return g;
}

std::string grid_to_text(const Grid& g) {
  std::ostringstream out;
  write_grid(out, g);
  return out.str();
}

Grid grid_from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_grid(in);
}

}  // namespace dtm
