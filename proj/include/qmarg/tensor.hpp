#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qmarg/error.hpp"

namespace qmarg {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// Sorted list of 1-based system labels.
using Subset = std::vector<int>;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kDensityTol = 1e-10;

/// Local dimensions d_1..d_n of a multipartite Hilbert space.
///
/// Every d_i is at least 2. The empty shape (n = 0, D = 1) describes the
/// trivial space left after tracing out every system.
class SystemShape {
 public:
  SystemShape() = default;
  explicit SystemShape(std::vector<int> dims);

  int size() const { return static_cast<int>(dims_.size()); }
  /// Local dimension of system k (1-based).
  int dim(int k) const;
  int total() const { return total_; }
  const std::vector<int>& dims() const { return dims_; }

  /// Dimensions of the systems in `systems`, in that order.
  SystemShape restrict_to(const Subset& systems) const;
  /// Product of local dimensions over `systems`.
  int total_of(const Subset& systems) const;
  /// All labels 1..n.
  Subset all() const;
  Subset complement(const Subset& systems) const;

  friend bool operator==(const SystemShape&, const SystemShape&) = default;

 private:
  std::vector<int> dims_;
  int total_ = 1;
};

/// Dense Hermitian matrix tagged with the shape of the space it acts on.
///
/// Construction symmetrizes M <- (M + M^dagger)/2 when the Hermiticity defect
/// is within `tol` and throws otherwise.
class HermitianOperator {
 public:
  HermitianOperator() = default;
  HermitianOperator(SystemShape shape, Matrix m, double tol = kHermitianTol);

  const SystemShape& shape() const { return shape_; }
  const Matrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  double trace() const { return m_.trace().real(); }

  static HermitianOperator identity(const SystemShape& shape);
  static HermitianOperator zero(const SystemShape& shape);

  HermitianOperator& operator+=(const HermitianOperator& o);
  HermitianOperator& operator-=(const HermitianOperator& o);
  HermitianOperator& operator*=(double s);

  friend HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }
  friend HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) { return a -= b; }
  friend HermitianOperator operator*(double s, HermitianOperator a) { return a *= s; }
  friend HermitianOperator operator*(HermitianOperator a, double s) { return a *= s; }

 private:
  SystemShape shape_;
  Matrix m_ = Matrix::Ones(1, 1);
};

/// Positive semidefinite, unit-trace operator.
class DensityState {
 public:
  DensityState() = default;
  explicit DensityState(HermitianOperator op, double tol = kDensityTol);

  const HermitianOperator& op() const { return op_; }
  const SystemShape& shape() const { return op_.shape(); }
  const Matrix& matrix() const { return op_.matrix(); }
  int dim() const { return op_.dim(); }

  static DensityState maximally_mixed(const SystemShape& shape);

 private:
  HermitianOperator op_;
};

/// Kronecker product in the given order; the shapes are concatenated.
HermitianOperator kron(std::span<const HermitianOperator> ops);
HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b);

/// Trace over the listed systems (labels refer to op.shape()).
HermitianOperator partial_trace(const HermitianOperator& op, const Subset& traced);

/// Reduced operator on `kept`, i.e. the trace over every other system.
HermitianOperator reduce_to(const HermitianOperator& op, const Subset& kept);

/// op (acting on `systems`) tensored with identities on the remaining
/// systems of `shape`, each factor placed at its own position.
HermitianOperator embed(const HermitianOperator& op, const Subset& systems, const SystemShape& shape);

double min_eigenvalue(const HermitianOperator& op);
double max_eigenvalue(const HermitianOperator& op);
Eigen::VectorXd eigenvalues(const HermitianOperator& op);

/// Re Tr(A B) for Hermitian A, B.
double trace_product(const Matrix& a, const Matrix& b);

/// Largest absolute entry.
double max_norm(const Matrix& m);

/// Checks a 1-based subset is sorted, duplicate-free and within 1..n.
void validate_subset(const Subset& s, int n);

}  // namespace qmarg
