#include "dtm/entropic_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dtm/error.hpp"

namespace dtm {

namespace {

void require_same_shape(const Grid& phi, const Grid& psi) {
  if (!phi.same_shape(psi)) {
    throw Error(ErrorKind::kShape, "phi is " + std::to_string(phi.n_cols()) + "x" +
                                       std::to_string(phi.m_rows()) + ", psi is " +
                                       std::to_string(psi.n_cols()) + "x" + std::to_string(psi.m_rows()));
  }
}

void require_same_shape(const GridPair& pair) { require_same_shape(pair.phi, pair.psi); }

}  // namespace

void abstract_into(Grid& phi, const Grid& psi) {
  require_same_shape(phi, psi);
  auto dst = phi.words();
  const auto src = psi.words();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
}

GridPair abstraction(const GridPair& pair) {
  require_same_shape(pair);
  GridPair out{pair.phi, Grid(pair.psi.n_cols(), pair.psi.m_rows())};
  abstract_into(out.phi, pair.psi);
  return out;
}

bool inclusion_test(const Grid& phi, const Grid& psi) {
  require_same_shape(phi, psi);
  const auto phi_words = phi.words();
  const auto psi_words = psi.words();
  for (std::size_t i = 0; i < phi_words.size(); ++i) {
    if ((psi_words[i] & ~phi_words[i]) != 0) return false;
  }
  return true;
}

bool inclusion_test(const GridPair& pair) { return inclusion_test(pair.phi, pair.psi); }

GridPair reduction(const GridPair& pair) {
  require_same_shape(pair);
  GridPair out = pair;
  for (std::size_t col = 1; col <= pair.phi.n_cols(); ++col) {
    const auto phi = pair.phi.column_words(col);
    const auto psi = pair.psi.column_words(col);
    if (std::equal(phi.begin(), phi.end(), psi.begin())) continue;
    auto out_phi = out.phi.column_words(col);
    auto out_psi = out.psi.column_words(col);
    for (std::size_t w = 0; w < phi.size(); ++w) {
      out_phi[w] = phi[w] & ~psi[w];
      out_psi[w] = phi[w];
    }
  }
  return out;
}

Entropy entropy(const Grid& g) {
  double sum = 0.0;
  for (std::size_t col = 1; col <= g.n_cols(); ++col) {
    const std::size_t v = g.column_count(col);
    if (v > 1) sum += std::log2(static_cast<double>(v));
  }
  return Entropy{sum / static_cast<double>(g.n_cols())};
}

}  // namespace dtm
