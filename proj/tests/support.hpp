#pragma once

#include <string>
#include <vector>

#include "qmarg/tensor.hpp"

namespace testing {

using qmarg::Complex;
using qmarg::HermitianOperator;
using qmarg::Matrix;
using qmarg::SystemShape;

inline Matrix pauli(char which) {
  Matrix m = Matrix::Zero(2, 2);
  switch (which) {
    case 'x': m(0, 1) = m(1, 0) = 1.0; break;
    case 'y': m(0, 1) = Complex(0, -1); m(1, 0) = Complex(0, 1); break;
    case 'z': m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    default: m = Matrix::Identity(2, 2);
  }
  return m;
}

inline HermitianOperator qubit_op(char which) { return HermitianOperator(SystemShape({2}), pauli(which)); }

inline Matrix outer(const Eigen::VectorXcd& v) { return v * v.adjoint(); }

inline Eigen::VectorXcd ket(std::vector<Complex> amps) {
  Eigen::VectorXcd v(static_cast<int>(amps.size()));
  for (std::size_t k = 0; k < amps.size(); ++k) v(static_cast<int>(k)) = amps[k];
  return v.normalized();
}

// Reduced operator by summing matrix elements over every index pair of the
// traced systems. Deliberately written without any of the library's
// reshaping code.
inline Matrix loop_partial_trace(const Matrix& m, const std::vector<int>& dims, const std::vector<int>& traced) {
  const int n = static_cast<int>(dims.size());
  std::vector<bool> gone(n, false);
  for (int t : traced) gone[t - 1] = true;
  int kept_dim = 1;
  for (int k = 0; k < n; ++k)
    if (!gone[k]) kept_dim *= dims[k];
  Matrix out = Matrix::Zero(kept_dim, kept_dim);
  const int dim = static_cast<int>(m.rows());
  auto digits = [&](int a) {
    std::vector<int> x(n);
    for (int k = n - 1; k >= 0; --k) {
      x[k] = a % dims[k];
      a /= dims[k];
    }
    return x;
  };
  for (int a = 0; a < dim; ++a) {
    const auto xa = digits(a);
    for (int b = 0; b < dim; ++b) {
      const auto xb = digits(b);
      bool diag = true;
      int ra = 0, rb = 0;
      for (int k = 0; k < n; ++k) {
        if (gone[k]) {
          diag = diag && xa[k] == xb[k];
        } else {
          ra = ra * dims[k] + xa[k];
          rb = rb * dims[k] + xb[k];
        }
      }
      if (diag) out(ra, rb) += m(a, b);
    }
  }
  return out;
}

inline std::string data_path(const std::string& name) { return std::string(QMARG_DATA_DIR) + "/" + name; }

}  // namespace testing
