#include "qmarg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace qmarg::oracle {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

Matrix ginibre(int rows, int cols, Rng& rng) {
  Matrix g(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) g(r, c) = rng.complex_normal();
  return g;
}

DensityState random_density(const SystemShape& shape, Rng& rng) {
  const Matrix g = ginibre(shape.total(), shape.total(), rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityState(HermitianOperator(shape, rho, 1e-8));
}

DensityState random_density(const SystemShape& shape, std::uint64_t seed) {
  Rng rng(seed);
  return random_density(shape, rng);
}

Matrix random_unitary(int dim, Rng& rng) {
  const Eigen::HouseholderQR<Matrix> qr(ginibre(dim, dim, rng));
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR();
  for (int k = 0; k < dim; ++k) {
    const Complex diag = r(k, k);
    const double mag = std::abs(diag);
    if (mag > 0.0) q.col(k) *= diag / mag;
  }
  return q;
}

HermitianOperator random_hermitian(const SystemShape& shape, Rng& rng) {
  const Matrix g = ginibre(shape.total(), shape.total(), rng);
  return HermitianOperator(shape, 0.5 * (g + g.adjoint()));
}

MarginalSet marginals_of(const DensityState& rho) {
  const int n = rho.shape().size();
  std::vector<DensityState> states;
  for (int i = 1; i <= n; ++i) states.emplace_back(partial_trace(rho.op(), {i}), 1e-9);
  return MarginalSet::from_omitted(rho.shape(), std::move(states));
}

MarginalSet marginals_of(const DensityState& rho, const std::vector<Subset>& subsets) {
  std::vector<MarginalEntry> entries;
  for (const auto& s : subsets) entries.push_back({s, DensityState(reduce_to(rho.op(), s), 1e-9)});
  return MarginalSet(rho.shape(), std::move(entries));
}

namespace {

// Permutation operator sending |x_1 ... x_n> to |x_{perm(1)} ... x_{perm(n)}>.
Matrix permutation_operator(const std::vector<int>& perm, int d) {
  const int n = static_cast<int>(perm.size());
  int dim = 1;
  for (int k = 0; k < n; ++k) dim *= d;
  Matrix u = Matrix::Zero(dim, dim);
  std::vector<int> x(n);
  for (int a = 0; a < dim; ++a) {
    int rest = a;
    for (int k = n - 1; k >= 0; --k) {
      x[k] = rest % d;
      rest /= d;
    }
    int b = 0;
    for (int k = 0; k < n; ++k) b = b * d + x[perm[k]];
    u(b, a) = 1.0;
  }
  return u;
}

int sign_of(const std::vector<int>& perm) {
  int s = 1;
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t j = i + 1; j < perm.size(); ++j)
      if (perm[i] > perm[j]) s = -s;
  return s;
}

}  // namespace

double exact_ground_energy(const TwoBodyHamiltonian& h, const ParticleSystem& ps) {
  const int d = ps.d();
  const int n = ps.n();
  const SystemShape shape = ps.shape();
  const int dim = shape.total();

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Matrix avg = Matrix::Zero(dim, dim);
  int count = 0;
  do {
    const double w = ps.statistics() == Statistics::fermi ? sign_of(perm) : 1.0;
    avg += w * permutation_operator(perm, d);
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  avg /= static_cast<double>(count);

  const Eigen::SelfAdjointEigenSolver<Matrix> proj(avg);
  std::vector<int> cols;
  for (int k = 0; k < dim; ++k)
    if (proj.eigenvalues()(k) > 0.5) cols.push_back(k);
  if (cols.empty()) throw InvalidInput("the (anti)symmetric subspace is empty");
  Matrix q(dim, static_cast<int>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) q.col(static_cast<int>(k)) = proj.eigenvectors().col(cols[k]);

  Matrix total = Matrix::Zero(dim, dim);
  int pairs = 0;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      total += embed(h.op(), {i, j}, shape).matrix();
      ++pairs;
    }
  total /= static_cast<double>(pairs);
  const Matrix reduced = q.adjoint() * total * q;
  const Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (reduced + reduced.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

HermitianOperator minimal_fiber_point(const MarginalSet& ms) {
  const SystemShape& shape = ms.shape();
  const int dim = shape.total();

  // Frobenius-orthonormal real basis of the Hermitian dim x dim matrices.
  std::vector<Matrix> herm;
  herm.reserve(dim * dim);
  const double r = 1.0 / std::numbers::sqrt2;
  for (int i = 0; i < dim; ++i) {
    Matrix e = Matrix::Zero(dim, dim);
    e(i, i) = 1.0;
    herm.push_back(e);
    for (int j = i + 1; j < dim; ++j) {
      Matrix s = Matrix::Zero(dim, dim);
      s(i, j) = s(j, i) = r;
      herm.push_back(s);
      Matrix a = Matrix::Zero(dim, dim);
      a(i, j) = Complex(0.0, r);
      a(j, i) = Complex(0.0, -r);
      herm.push_back(a);
    }
  }

  int rows = 0;
  for (const auto& e : ms.entries()) rows += 2 * e.state.dim() * e.state.dim();
  Eigen::MatrixXd a(rows, static_cast<int>(herm.size()));
  Eigen::VectorXd b(rows);
  for (std::size_t k = 0; k < herm.size(); ++k) {
    const HermitianOperator hk(shape, herm[k]);
    int row = 0;
    for (const auto& e : ms.entries()) {
      const Matrix red = reduce_to(hk, e.systems).matrix();
      for (int c = 0; c < red.cols(); ++c)
        for (int rr = 0; rr < red.rows(); ++rr) {
          a(row++, static_cast<int>(k)) = red(rr, c).real();
          a(row++, static_cast<int>(k)) = red(rr, c).imag();
        }
    }
  }
  int row = 0;
  for (const auto& e : ms.entries()) {
    const Matrix& m = e.state.matrix();
    for (int c = 0; c < m.cols(); ++c)
      for (int rr = 0; rr < m.rows(); ++rr) {
        b(row++) = m(rr, c).real();
        b(row++) = m(rr, c).imag();
      }
  }

  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  const Eigen::VectorXd y = cod.solve(b);
  if ((a * y - b).lpNorm<Eigen::Infinity>() > 1e-8) throw InvalidInput("marginals admit no common operator");
  Matrix x = Matrix::Zero(dim, dim);
  for (std::size_t k = 0; k < herm.size(); ++k) x += y(static_cast<int>(k)) * herm[k];
  return HermitianOperator(shape, x, 1e-9);
}

FiberGridResult fiber_grid_min_eig(const MarginalSet& ms, const std::vector<MultiIndex>& directions,
                                   const Grid& grid) {
  if (directions.empty() || directions.size() > 2) throw InvalidInput("grid search supports one or two directions");
  if (grid.points < 2 || !(grid.hi > grid.lo)) throw InvalidInput("degenerate grid");
  const Matrix x0 = minimal_fiber_point(ms).matrix();
  std::vector<Matrix> dirs;
  for (const auto& m : directions) dirs.push_back(basis_element(ms.shape(), m).matrix());

  FiberGridResult out;
  out.step = (grid.hi - grid.lo) / (grid.points - 1);
  out.best = -std::numeric_limits<double>::infinity();
  const int second = directions.size() == 2 ? grid.points : 1;
  for (int i = 0; i < grid.points; ++i) {
    const double xi = grid.lo + i * out.step;
    for (int j = 0; j < second; ++j) {
      const double xj = grid.lo + j * out.step;
      Matrix m = x0 + xi * dirs[0];
      if (dirs.size() == 2) m += xj * dirs[1];
      const Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
      const double lmin = es.eigenvalues()(0);
      if (lmin > out.best) {
        out.best = lmin;
        out.argmax = dirs.size() == 2 ? std::vector<double>{xi, xj} : std::vector<double>{xi};
      }
    }
  }
  return out;
}

}  // namespace qmarg::oracle
