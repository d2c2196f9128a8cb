#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace gcmt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dimensions of the joint continuous/nominal outcome vector.
/// H continuous outcomes, one utility block of alt_counts[i] alternatives
/// per nominal outcome.
struct OutcomeLayout {
  int H = 0;
  std::vector<int> alt_counts;

  int num_nominal() const { return static_cast<int>(alt_counts.size()); }

  /// Total alternatives across nominal outcomes.
  int total_alternatives() const {
    int s = 0;
    for (int k : alt_counts) s += k;
    return s;
  }

  /// Dimension of the joint undifferenced vector [y; U].
  int joint_dim() const { return H + total_alternatives(); }

  /// Dimension of the joint differenced vector [y; Ubar].
  int diff_dim() const { return joint_dim() - num_nominal(); }

  void validate() const;
};

class layout_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// D maps the differenced utility-error covariance onto the undifferenced
/// one: Lambda = D Lambdabar D^T. Size I_K x (I_K - I); rows at the first
/// alternative of each nominal outcome are zero, the rest carry shifted
/// identity blocks.
Matrix build_d(const OutcomeLayout& layout);

/// D_m = [I_H 0; 0 D], so Sigma = D_m Sigmabar D_m^T covers the continuous
/// block as well. Size (H+I_K) x (H+I_K-I).
Matrix build_dm(const OutcomeLayout& layout);

/// Difference operator against the chosen alternatives. Maps stacked [y; U]
/// to [y; U_k - U_chosen for each non-chosen k]. `chosen` is 1-based per
/// nominal outcome, matching the data convention.
Matrix build_m(const OutcomeLayout& layout, const std::vector<int>& chosen);

/// Row indices (0-based) of the differenced joint vector whose variance is
/// pinned to 1: the first differenced row of each nominal outcome.
std::vector<int> normalized_rows(const OutcomeLayout& layout);

/// Rescales the flagged rows of a raw lower-triangular factor so that the
/// corresponding diagonal of L L^T is exactly 1. Raw diagonals of flagged
/// rows are ignored (implicit free 1). Other rows pass through unchanged.
Matrix reparam_cholesky(const Matrix& l_raw, const std::vector<int>& rows);

/// Cache of M matrices keyed by the chosen-alternative tuple. Warm up
/// single-threaded, then concurrent reads are safe.
class MCache {
 public:
  explicit MCache(OutcomeLayout layout) : layout_(std::move(layout)) {}
  const Matrix& get(const std::vector<int>& chosen);

 private:
  OutcomeLayout layout_;
  std::vector<std::pair<std::vector<int>, Matrix>> entries_;
};

}  // namespace gcmt
