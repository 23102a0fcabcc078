#pragma once

#include <vector>

#include "qmarg/tensor.hpp"

namespace qmarg {

/// Orthogonal Hermitian basis of the d x d matrices with
///   B_1 = 1/d,  Tr(B_m) = delta_{1m},  Tr(B_m B_n) = delta_{mn}/d.
///
/// Elements 2..d^2 are generalized Gell-Mann matrices scaled by 1/sqrt(2d):
/// for each pair j<k the symmetric then the antisymmetric element, followed
/// by the d-1 diagonal elements. For d = 2 this is (1, X, Y, Z)/2.
struct SiteBasis {
  int d = 0;
  std::vector<Matrix> elements;
};

/// Cached per dimension; safe to call concurrently.
const SiteBasis& site_basis(int d);

/// Multi-index (m_1..m_n), each 1 <= m_k <= d_k^2.
using MultiIndex = std::vector<int>;

/// B_m = B_{1,m_1} (x) ... (x) B_{n,m_n}.
HermitianOperator basis_element(const SystemShape& shape, const MultiIndex& m);

/// Systems k with m_k != 1.
Subset support(const MultiIndex& m);

/// m is in I_C iff some component equals 1.
bool in_IC(const MultiIndex& m);
/// m is in I_k iff m_k == 1 (k is 1-based).
bool in_Ik(const MultiIndex& m, int k);

/// Lexicographic enumeration of I with m_1 slowest.
class IndexSets {
 public:
  explicit IndexSets(SystemShape shape);

  const SystemShape& shape() const { return shape_; }
  /// |I| = prod d_k^2.
  std::size_t size() const { return all_.size(); }
  const std::vector<MultiIndex>& all() const { return all_; }
  std::vector<MultiIndex> ic() const;
  std::vector<MultiIndex> ik(int k) const;
  /// I \ I_C: tensor products of traceless factors only.
  std::vector<MultiIndex> complement_of_ic() const;

  std::size_t rank(const MultiIndex& m) const;

 private:
  SystemShape shape_;
  std::vector<MultiIndex> all_;
};

/// Coefficients z_m = D Tr(Z B_m), listed in IndexSets order.
std::vector<double> expand(const HermitianOperator& z);

/// Inverse of expand: sum_m z_m B_m.
HermitianOperator synthesize(const SystemShape& shape, const std::vector<double>& coeffs);

/// Tr(Z B_m) for a single index, computed without forming B_m.
double basis_overlap(const HermitianOperator& z, const MultiIndex& m);

}  // namespace qmarg
