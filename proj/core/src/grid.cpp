#include "dtm/grid.hpp"

#include <bit>
#include <limits>
#include <string>

#include "dtm/error.hpp"

namespace dtm {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kIndex: return "index";
    case ErrorKind::kNotAFunction: return "not-a-function";
    case ErrorKind::kArgument: return "argument";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kRange: return "range";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kStratification: return "stratification";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

namespace {

std::size_t words_for(std::size_t rows) { return (rows + Grid::kWordBits - 1) / Grid::kWordBits; }

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw Error(ErrorKind::kRange, "function count exceeds 64-bit range");
  }
  return a * b;
}

}  // namespace

Grid::Grid(std::size_t n_cols, std::size_t m_rows)
    : n_cols_(n_cols), m_rows_(m_rows), words_per_col_(words_for(m_rows)) {
  if (n_cols == 0 || m_rows == 0) {
    throw Error(ErrorKind::kDimension, "grid needs n >= 1 and m >= 1, got n=" +
                                           std::to_string(n_cols) + " m=" + std::to_string(m_rows));
  }
  bits_.assign(n_cols_ * words_per_col_, 0);
}

void Grid::check_column(std::size_t col) const {
  if (col < 1 || col > n_cols_) {
    throw Error(ErrorKind::kArgument,
                "column " + std::to_string(col) + " outside 1.." + std::to_string(n_cols_));
  }
}

void Grid::check_cell(std::size_t col, std::size_t row) const {
  check_column(col);
  if (row < 1 || row > m_rows_) {
    throw Error(ErrorKind::kArgument,
                "row " + std::to_string(row) + " outside 1.." + std::to_string(m_rows_));
  }
}

bool Grid::marked(std::size_t col, std::size_t row) const {
  check_cell(col, row);
  const std::size_t r = row - 1;
  return (bits_[(col - 1) * words_per_col_ + r / kWordBits] >> (r % kWordBits)) & 1U;
}

void Grid::set(std::size_t col, std::size_t row, bool mark) {
  check_cell(col, row);
  const std::size_t r = row - 1;
  Word& w = bits_[(col - 1) * words_per_col_ + r / kWordBits];
  const Word bit = Word{1} << (r % kWordBits);
  w = mark ? (w | bit) : (w & ~bit);
}

void Grid::clear_column(std::size_t col) {
  for (Word& w : column_words(col)) w = 0;
}

std::span<const Grid::Word> Grid::column_words(std::size_t col) const {
  check_column(col);
  return std::span<const Word>(bits_).subspan((col - 1) * words_per_col_, words_per_col_);
}

std::span<Grid::Word> Grid::column_words(std::size_t col) {
  check_column(col);
  return std::span<Word>(bits_).subspan((col - 1) * words_per_col_, words_per_col_);
}

std::size_t Grid::column_count(std::size_t col) const {
  std::size_t count = 0;
  for (Word w : column_words(col)) count += static_cast<std::size_t>(std::popcount(w));
  return count;
}

std::size_t Grid::mark_count() const {
  std::size_t count = 0;
  for (Word w : bits_) count += static_cast<std::size_t>(std::popcount(w));
  return count;
}

bool Grid::empty() const {
  for (Word w : bits_) {
    if (w != 0) return false;
  }
  return true;
}

Grid empty_grid(std::size_t n_cols, std::size_t m_rows) { return Grid(n_cols, m_rows); }

Grid grid_from_index(const FunctionIndex& idx, std::size_t m_rows) {
  Grid g(idx.digits.size(), m_rows);
  for (std::size_t i = 0; i < idx.digits.size(); ++i) {
    const std::size_t d = idx.digits[i];
    if (d > m_rows) {
      throw Error(ErrorKind::kIndex, "digit " + std::to_string(d) + " at argument " +
                                         std::to_string(i + 1) + " exceeds m=" +
                                         std::to_string(m_rows));
    }
    if (d > 0) g.set(i + 1, d);
  }
  return g;
}

FunctionIndex index_from_grid(const Grid& g) {
  FunctionIndex idx;
  idx.digits.reserve(g.n_cols());
  for (std::size_t col = 1; col <= g.n_cols(); ++col) {
    const auto words = g.column_words(col);
    std::size_t digit = 0;
    std::size_t seen = 0;
    for (std::size_t w = 0; w < words.size(); ++w) {
      if (words[w] == 0) continue;
      seen += static_cast<std::size_t>(std::popcount(words[w]));
      digit = w * Grid::kWordBits + static_cast<std::size_t>(std::countr_zero(words[w])) + 1;
    }
    if (seen > 1) {
      throw Error(ErrorKind::kNotAFunction,
                  "column " + std::to_string(col) + " has " + std::to_string(seen) + " marks");
    }
    idx.digits.push_back(digit);
  }
  return idx;
}

bool is_function(const Grid& g) {
  for (std::size_t col = 1; col <= g.n_cols(); ++col) {
    if (g.column_count(col) > 1) return false;
  }
  return true;
}

bool is_total(const Grid& g) {
  for (std::size_t col = 1; col <= g.n_cols(); ++col) {
    if (g.column_count(col) != 1) return false;
  }
  return true;
}

std::optional<std::size_t> evaluate(const Grid& g, std::size_t arg) {
  if (arg < 1 || arg > g.n_cols()) {
    throw Error(ErrorKind::kArgument,
                "argument " + std::to_string(arg) + " outside 1.." + std::to_string(g.n_cols()));
  }
  if (!is_function(g)) throw Error(ErrorKind::kNotAFunction, "cannot evaluate an abstraction");
  const std::size_t digit = index_from_grid(g).digits[arg - 1];
  if (digit == 0) return std::nullopt;
  return digit;
}

std::vector<ColumnValueSet> value_sets(const Grid& g) {
  std::vector<ColumnValueSet> sets;
  sets.reserve(g.n_cols());
  for (std::size_t col = 1; col <= g.n_cols(); ++col) {
    ColumnValueSet s{col, {}};
    const auto words = g.column_words(col);
    for (std::size_t w = 0; w < words.size(); ++w) {
      Grid::Word bits = words[w];
      while (bits != 0) {
        s.values.push_back(w * Grid::kWordBits + static_cast<std::size_t>(std::countr_zero(bits)) + 1);
        bits &= bits - 1;
      }
    }
    sets.push_back(std::move(s));
  }
  return sets;
}

std::uint64_t contained_total_functions(const Grid& g) {
  std::uint64_t product = 1;
  for (std::size_t col = 1; col <= g.n_cols(); ++col) {
    const std::size_t v = g.column_count(col);
    if (v == 0) return 0;
    product = checked_mul(product, v);
  }
  return product;
}

std::vector<std::size_t> determinate_arguments(const Grid& g) {
  std::vector<std::size_t> cols;
  for (std::size_t col = 1; col <= g.n_cols(); ++col) {
    if (g.column_count(col) == 1) cols.push_back(col);
  }
  return cols;
}

std::uint64_t count_all_functions(std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) throw Error(ErrorKind::kDimension, "n and m must be >= 1");
  std::uint64_t result = 1;
  for (std::size_t i = 0; i < n; ++i) result = checked_mul(result, m + 1);
  return result;
}

bool next_index(FunctionIndex& idx, std::size_t m_rows) {
  for (std::size_t i = idx.digits.size(); i-- > 0;) {
    if (idx.digits[i] < m_rows) {
      ++idx.digits[i];
      return true;
    }
    idx.digits[i] = 0;
  }
  return false;
}

}  // namespace dtm
