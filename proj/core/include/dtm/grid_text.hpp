#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "dtm/grid.hpp"

namespace dtm {

/// Text grid format:
///
///   #dtm-grid v1 n=<n_cols> m=<m_rows>
///   <m_rows lines of n_cols chars from {'.', 'X'}; row m first, row 1 last>
std::string grid_to_text(const Grid& g);
Grid grid_from_text(std::string_view text);

void write_grid(std::ostream& out, const Grid& g);
Grid read_grid(std::istream& in);

/// Body lines only (no header) shared with the memory file writer.
void write_grid_body(std::ostream& out, const Grid& g);

}  // namespace dtm
