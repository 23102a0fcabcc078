#include "qmarg/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace qmarg {

namespace {

// Row-major strides of a multi-index over `dims` (last system fastest).
std::vector<int> strides_of(const std::vector<int>& dims) {
  std::vector<int> s(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k) s[k] = s[k + 1] * dims[k + 1];
  return s;
}

// offsets[a] = sum_k a_k * stride(system_k) for every multi-index a over the
// given systems (enumerated with the first listed system slowest).
std::vector<int> offsets_over(const SystemShape& shape, const Subset& systems) {
  const auto strides = strides_of(shape.dims());
  std::vector<int> out{0};
  for (int sys : systems) {
    const int d = shape.dim(sys);
    const int st = strides[sys - 1];
    std::vector<int> next;
    next.reserve(out.size() * d);
    for (int base : out)
      for (int v = 0; v < d; ++v) next.push_back(base + v * st);
    out = std::move(next);
  }
  return out;
}

}  // namespace

SystemShape::SystemShape(std::vector<int> dims) : dims_(std::move(dims)) {
  for (int d : dims_) {
    if (d < 2) throw InvalidInput("local dimensions must be at least 2");
    total_ *= d;
  }
}

int SystemShape::dim(int k) const {
  if (k < 1 || k > size()) throw InvalidInput("system label out of range");
  return dims_[k - 1];
}

SystemShape SystemShape::restrict_to(const Subset& systems) const {
  std::vector<int> d;
  d.reserve(systems.size());
  for (int s : systems) d.push_back(dim(s));
  return SystemShape(std::move(d));
}

int SystemShape::total_of(const Subset& systems) const {
  int t = 1;
  for (int s : systems) t *= dim(s);
  return t;
}

Subset SystemShape::all() const {
  Subset s(dims_.size());
  for (int k = 0; k < size(); ++k) s[k] = k + 1;
  return s;
}

Subset SystemShape::complement(const Subset& systems) const {
  Subset out;
  for (int k = 1; k <= size(); ++k)
    if (!std::binary_search(systems.begin(), systems.end(), k)) out.push_back(k);
  return out;
}

void validate_subset(const Subset& s, int n) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 1 || s[i] > n) throw InvalidInput("system label out of range");
    if (i > 0 && s[i] <= s[i - 1]) throw InvalidInput("system labels must be sorted and distinct");
  }
}

HermitianOperator::HermitianOperator(SystemShape shape, Matrix m, double tol)
    : shape_(std::move(shape)), m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw InvalidInput("operator matrix must be square");
  if (m_.rows() != shape_.total()) {
    std::ostringstream os;
    os << "matrix dimension " << m_.rows() << " does not match shape dimension " << shape_.total();
    throw InvalidInput(os.str());
  }
  const Matrix adj = m_.adjoint();
  if (max_norm(m_ - adj) > tol) throw InvalidInput("matrix is not Hermitian within tolerance");
  m_ = (m_ + adj) * 0.5;
}

HermitianOperator HermitianOperator::identity(const SystemShape& shape) {
  return HermitianOperator(shape, Matrix::Identity(shape.total(), shape.total()));
}

HermitianOperator HermitianOperator::zero(const SystemShape& shape) {
  return HermitianOperator(shape, Matrix::Zero(shape.total(), shape.total()));
}

HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& o) {
  if (!(shape_ == o.shape_)) throw InvalidInput("shape mismatch in operator sum");
  m_ += o.m_;
  return *this;
}

HermitianOperator& HermitianOperator::operator-=(const HermitianOperator& o) {
  if (!(shape_ == o.shape_)) throw InvalidInput("shape mismatch in operator difference");
  m_ -= o.m_;
  return *this;
}

HermitianOperator& HermitianOperator::operator*=(double s) {
  m_ *= s;
  return *this;
}

DensityState::DensityState(HermitianOperator op, double tol) : op_(std::move(op)) {
  if (std::abs(op_.trace() - 1.0) > tol) throw InvalidInput("density state must have unit trace");
  if (min_eigenvalue(op_) < -tol) throw InvalidInput("density state must be positive semidefinite");
}

DensityState DensityState::maximally_mixed(const SystemShape& shape) {
  return DensityState(HermitianOperator::identity(shape) * (1.0 / shape.total()));
}

HermitianOperator kron(std::span<const HermitianOperator> ops) {
  std::vector<int> dims;
  Matrix acc = Matrix::Ones(1, 1);
  for (const auto& op : ops) {
    const auto& b = op.matrix();
    Matrix next(acc.rows() * b.rows(), acc.cols() * b.cols());
    for (Eigen::Index i = 0; i < acc.rows(); ++i)
      for (Eigen::Index j = 0; j < acc.cols(); ++j)
        next.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = acc(i, j) * b;
    acc = std::move(next);
    dims.insert(dims.end(), op.shape().dims().begin(), op.shape().dims().end());
  }
  return HermitianOperator(SystemShape(std::move(dims)), std::move(acc));
}

HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b) {
  const HermitianOperator ops[] = {a, b};
  return kron(std::span<const HermitianOperator>(ops));
}

HermitianOperator partial_trace(const HermitianOperator& op, const Subset& traced) {
  const auto& shape = op.shape();
  validate_subset(traced, shape.size());
  const Subset kept = shape.complement(traced);
  const auto keep_off = offsets_over(shape, kept);
  const auto trace_off = offsets_over(shape, traced);
  const auto& m = op.matrix();
  const int k = static_cast<int>(keep_off.size());
  Matrix out = Matrix::Zero(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      Complex s = 0.0;
      for (int t : trace_off) s += m(keep_off[a] + t, keep_off[b] + t);
      out(a, b) = s;
    }
  return HermitianOperator(shape.restrict_to(kept), std::move(out));
}

HermitianOperator reduce_to(const HermitianOperator& op, const Subset& kept) {
  validate_subset(kept, op.shape().size());
  return partial_trace(op, op.shape().complement(kept));
}

HermitianOperator embed(const HermitianOperator& op, const Subset& systems, const SystemShape& shape) {
  validate_subset(systems, shape.size());
  if (!(op.shape() == shape.restrict_to(systems)))
    throw InvalidInput("operator dimensions do not match the embedding subset");
  const auto in_off = offsets_over(shape, systems);
  const auto pad_off = offsets_over(shape, shape.complement(systems));
  const auto& m = op.matrix();
  Matrix out = Matrix::Zero(shape.total(), shape.total());
  const int k = static_cast<int>(in_off.size());
  for (int r : pad_off)
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) out(in_off[a] + r, in_off[b] + r) = m(a, b);
  return HermitianOperator(shape, std::move(out));
}

Eigen::VectorXd eigenvalues(const HermitianOperator& op) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(op.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double min_eigenvalue(const HermitianOperator& op) { return eigenvalues(op).minCoeff(); }

double max_eigenvalue(const HermitianOperator& op) { return eigenvalues(op).maxCoeff(); }

double trace_product(const Matrix& a, const Matrix& b) {
  // Tr(AB) = sum_ij A_ij B_ji
  return (a.array() * b.transpose().array()).sum().real();
}

double max_norm(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace qmarg
