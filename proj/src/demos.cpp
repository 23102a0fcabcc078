#include "qmarg/demos.hpp"

#include <cmath>

namespace qmarg::demos {

namespace {

const SystemShape& qubits(int n) {
  static const SystemShape two({2, 2});
  static const SystemShape three({2, 2, 2});
  return n == 2 ? two : three;
}

Matrix projector_onto(const Eigen::VectorXcd& v) { return v * v.adjoint(); }

Eigen::VectorXcd two_qubit(double a00, double a01, double a10, double a11) {
  Eigen::VectorXcd v(4);
  v << a00, a01, a10, a11;
  return v / std::sqrt(2.0);
}

constexpr int kZ[8][8] = {
    {2959, 0, 0, -102, 0, -1715, -1715, 0},
    {0, 24865, 1005, 0, 766, 0, 0, -1715},
    {0, 1005, 24865, 0, 766, 0, 0, -1715},
    {-102, 0, 0, 45033, 0, 766, 766, 0},
    {0, 766, 766, 0, 46, 0, 0, -102},
    {-1715, 0, 0, 766, 0, 1006, 1005, 0},
    {-1715, 0, 0, 766, 0, 1005, 1006, 0},
    {0, -1715, -1715, 0, -102, 0, 0, 228},
};

}  // namespace

MarginalSet bell_triple() {
  const DensityState psi_plus(HermitianOperator(qubits(2), projector_onto(two_qubit(1, 0, 0, 1))));
  return MarginalSet::from_omitted(qubits(3), {psi_plus, psi_plus, psi_plus});
}

Witness bell_witness() {
  Matrix w = -Matrix::Identity(4, 4) / 12.0;
  w += 0.25 * (projector_onto(two_qubit(1, 0, 0, -1)) + projector_onto(two_qubit(0, 1, 1, 0)));
  const HermitianOperator part(qubits(2), w);
  return Witness::from_omitted(qubits(3), {part, part, part});
}

MarginalSet butterley_marginals(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("butterley parameter p must lie in [0, 1]");
  Matrix one = Matrix::Zero(2, 2);
  one(1, 1) = 1.0;
  const HermitianOperator excited(SystemShape({2}), one);
  const HermitianOperator half_id = 0.5 * HermitianOperator::identity(SystemShape({2}));
  const auto sigma = kron(kron(excited, half_id), half_id);
  const HermitianOperator bell(qubits(2), projector_onto(two_qubit(1, 0, 0, 1)));
  std::vector<DensityState> states;
  for (int k = 1; k <= 3; ++k) states.emplace_back((1.0 - p) * partial_trace(sigma, {k}) + p * bell);
  return MarginalSet::from_omitted(qubits(3), std::move(states));
}

const int (&published_z_numerators())[8][8] { return kZ; }

HermitianOperator published_z() {
  Matrix z(8, 8);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) z(r, c) = kZ[r][c] / 100000.0;
  return HermitianOperator(qubits(3), z);
}

HermitianOperator published_z_prime(double alpha, double scale) {
  static constexpr int kDiag[8] = {0, 0, 0, 0, 2913, 23859, 23859, 44805};
  Matrix z = alpha * Matrix::Identity(8, 8);
  for (int k = 0; k < 8; ++k) z(k, k) += kDiag[k] * scale;
  return HermitianOperator(qubits(3), z);
}

}  // namespace qmarg::demos
