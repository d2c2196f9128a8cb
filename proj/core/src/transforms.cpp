#include "gcmt/transforms.hpp"

#include <cmath>

namespace gcmt {

void OutcomeLayout::validate() const {
  if (H < 0) throw layout_error("H must be nonnegative");
  for (int k : alt_counts) {
    if (k < 2) throw layout_error("every nominal outcome needs at least 2 alternatives");
  }
}

Matrix build_d(const OutcomeLayout& layout) {
  layout.validate();
  const int ik = layout.total_alternatives();
  const int i = layout.num_nominal();
  Matrix d = Matrix::Zero(ik, ik - i);
  int row = 0, col = 0;
  for (int m = 0; m < i; ++m) {
    const int k = layout.alt_counts[m];
    // first alternative's row stays zero
    d.block(row + 1, col, k - 1, k - 1).setIdentity();
    row += k;
    col += k - 1;
  }
  return d;
}

Matrix build_dm(const OutcomeLayout& layout) {
  layout.validate();
  const int h = layout.H;
  const Matrix d = build_d(layout);
  Matrix dm = Matrix::Zero(h + d.rows(), h + d.cols());
  dm.topLeftCorner(h, h).setIdentity();
  dm.bottomRightCorner(d.rows(), d.cols()) = d;
  return dm;
}

Matrix build_m(const OutcomeLayout& layout, const std::vector<int>& chosen) {
  layout.validate();
  const int i = layout.num_nominal();
  if (static_cast<int>(chosen.size()) != i)
    throw std::out_of_range("chosen must have one entry per nominal outcome");
  const int h = layout.H;
  Matrix m = Matrix::Zero(layout.diff_dim(), layout.joint_dim());
  m.topLeftCorner(h, h).setIdentity();
  int row = h, col = h;
  for (int n = 0; n < i; ++n) {
    const int k = layout.alt_counts[n];
    const int nm = chosen[n];
    if (nm < 1 || nm > k)
      throw std::out_of_range("chosen alternative index out of range");
    // one row per non-chosen alternative: +1 at that alternative, -1 at chosen
    int r = row;
    for (int alt = 1; alt <= k; ++alt) {
      if (alt == nm) continue;
      m(r, col + alt - 1) = 1.0;
      m(r, col + nm - 1) = -1.0;
      ++r;
    }
    row += k - 1;
    col += k;
  }
  return m;
}

std::vector<int> normalized_rows(const OutcomeLayout& layout) {
  std::vector<int> rows;
  int r = layout.H;
  for (int k : layout.alt_counts) {
    rows.push_back(r);
    r += k - 1;
  }
  return rows;
}

Matrix reparam_cholesky(const Matrix& l_raw, const std::vector<int>& rows) {
  Matrix l = l_raw;
  for (int i : rows) {
    double ss = 1.0;
    for (int j = 0; j < i; ++j) ss += l(i, j) * l(i, j);
    const double a = std::sqrt(ss);
    for (int j = 0; j < i; ++j) l(i, j) /= a;
    l(i, i) = 1.0 / a;
  }
  return l;
}

const Matrix& MCache::get(const std::vector<int>& chosen) {
  for (const auto& [key, m] : entries_) {
    if (key == chosen) return m;
  }
  entries_.emplace_back(chosen, build_m(layout_, chosen));
  return entries_.back().second;
}

}  // namespace gcmt
