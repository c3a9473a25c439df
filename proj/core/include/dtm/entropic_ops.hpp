#pragma once

#include "dtm/grid.hpp"

namespace dtm {

/// Control grid (memory side) and external grid (input/output buffer side).
/// Both must share one shape; operations throw kShape otherwise.
struct GridPair {
  Grid phi;
  Grid psi;

  friend bool operator==(const GridPair&, const GridPair&) = default;
};

/// Computational entropy in bits.
struct Entropy {
  double bits = 0.0;
};

/// Cell-wise OR of psi into phi; psi comes back blank.
GridPair abstraction(const GridPair& pair);

/// phi-side of abstraction, applied in place.
void abstract_into(Grid& phi, const Grid& psi);

/// True iff every mark of psi is also a mark of phi (psi -> phi, cell-wise).
bool inclusion_test(const GridPair& pair);
bool inclusion_test(const Grid& phi, const Grid& psi);

/// Column-wise extraction of psi out of phi. Columns identical in both grids
/// are left untouched; otherwise phi loses the psi marks (set difference) and
/// psi receives the original phi column.
///
/// Assumes the caller already ran inclusion_test; this is not re-checked.
GridPair reduction(const GridPair& pair);

/// Mean over columns of log2(v_i), v_i the column mark count; blank columns
/// contribute 0. Zero for every total or partial function.
Entropy entropy(const Grid& g);

}  // namespace dtm
