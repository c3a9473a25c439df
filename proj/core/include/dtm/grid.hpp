#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dtm {

/// n-digit, base-(m+1) function index. Digit i is the value row of argument
/// i (1-based), 0 meaning the argument is undefined.
struct FunctionIndex {
  std::vector<std::size_t> digits;

  friend bool operator==(const FunctionIndex&, const FunctionIndex&) = default;
};

/// Marked rows of one argument column. Positions are 1-based.
struct ColumnValueSet {
  std::size_t column = 0;
  std::vector<std::size_t> values;

  friend bool operator==(const ColumnValueSet&, const ColumnValueSet&) = default;
};

/// Binary mark matrix of n_cols arguments by m_rows values.
///
/// Columns and rows are addressed 1-based in the public interface. Storage is
/// column-major with each column packed into 64-bit words, so column-wise set
/// operations (union, difference, inclusion) are word-parallel.
class Grid {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  /// All-blank grid. Throws ErrorKind::kDimension when either side is zero.
  Grid(std::size_t n_cols, std::size_t m_rows);

  std::size_t n_cols() const noexcept { return n_cols_; }
  std::size_t m_rows() const noexcept { return m_rows_; }
  std::size_t words_per_column() const noexcept { return words_per_col_; }

  bool marked(std::size_t col, std::size_t row) const;
  void set(std::size_t col, std::size_t row, bool mark = true);
  void clear_column(std::size_t col);

  /// Number of marks in a column (v_i).
  std::size_t column_count(std::size_t col) const;
  std::size_t mark_count() const;
  bool empty() const;

  std::span<const Word> column_words(std::size_t col) const;
  std::span<Word> column_words(std::size_t col);
  std::span<const Word> words() const noexcept { return bits_; }
  std::span<Word> words() noexcept { return bits_; }

  bool same_shape(const Grid& other) const noexcept {
    return n_cols_ == other.n_cols_ && m_rows_ == other.m_rows_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  void check_cell(std::size_t col, std::size_t row) const;
  void check_column(std::size_t col) const;

  std::size_t n_cols_;
  std::size_t m_rows_;
  std::size_t words_per_col_;
  std::vector<Word> bits_;
};

Grid empty_grid(std::size_t n_cols, std::size_t m_rows);

/// Grid whose column i has a single mark at row digits[i], or no mark for 0.
Grid grid_from_index(const FunctionIndex& idx, std::size_t m_rows);

/// Inverse of grid_from_index. Throws kNotAFunction for columns with two or
/// more marks.
FunctionIndex index_from_grid(const Grid& g);

bool is_function(const Grid& g);
bool is_total(const Grid& g);

/// Value row of argument `arg` (1-based), or nullopt where undefined.
std::optional<std::size_t> evaluate(const Grid& g, std::size_t arg);

std::vector<ColumnValueSet> value_sets(const Grid& g);

/// Product of the column cardinalities; 0 when any column is blank.
/// Throws kRange on 64-bit overflow.
std::uint64_t contained_total_functions(const Grid& g);

/// Columns holding exactly one mark.
std::vector<std::size_t> determinate_arguments(const Grid& g);

/// (m+1)^n. Throws kRange on 64-bit overflow.
std::uint64_t count_all_functions(std::size_t n, std::size_t m);

/// Iterates every FunctionIndex of an n x m grid in ascending numeral order
/// (last digit fastest). Returns false after the final index wraps.
bool next_index(FunctionIndex& idx, std::size_t m_rows);

}  // namespace dtm
