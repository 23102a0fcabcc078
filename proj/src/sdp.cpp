#include "qmarg/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qmarg::sdp {

namespace {

struct Entry {
  int row;
  int col;
  Complex value;
};

// Nonzero pattern of every F_i (i >= 1), block by block. The basis
// matrices fed in by the compatibility pipeline are very sparse.
using Pattern = std::vector<std::vector<std::vector<Entry>>>;

Pattern pattern_of(const Problem& p) {
  Pattern out(p.f.size());
  for (std::size_t i = 1; i < p.f.size(); ++i) {
    out[i].resize(p.blocks.size());
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
      const Matrix& m = p.f[i][b];
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r)
          if (m(r, c) != Complex(0.0)) out[i][b].push_back({static_cast<int>(r), static_cast<int>(c), m(r, c)});
    }
  }
  return out;
}

Matrix hermitize(const Matrix& m) { return (m + m.adjoint()) * 0.5; }

double re_trace(const BlockMatrix& a, const BlockMatrix& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += trace_product(a[k], b[k]);
  return s;
}

// Re Tr(F_i X) using the sparse pattern of F_i.
double re_trace_sparse(const std::vector<std::vector<Entry>>& fi, const BlockMatrix& x) {
  double s = 0.0;
  for (std::size_t b = 0; b < fi.size(); ++b)
    for (const auto& e : fi[b]) s += (e.value * x[b](e.col, e.row)).real();
  return s;
}

// Largest alpha in [0, inf) with X + alpha dX >= 0, given X > 0.
// Returns a negative value when X is not positive definite.
double max_step(const BlockMatrix& x, const BlockMatrix& dx) {
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < x.size(); ++b) {
    Eigen::LLT<Matrix> llt(x[b]);
    if (llt.info() != Eigen::Success) return -1.0;
    const Matrix l_inv_dx = llt.matrixL().solve(dx[b]);
    const Matrix w = llt.matrixL().solve(l_inv_dx.adjoint()).adjoint();
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(w), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
  }
  return alpha;
}

double min_eig(const BlockMatrix& x) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : x) {
    if (b.size() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(b), Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues().minCoeff());
  }
  return m;
}

double block_max_norm(const BlockMatrix& x) {
  double m = 0.0;
  for (const auto& b : x) m = std::max(m, max_norm(b));
  return m;
}

struct Direction {
  Eigen::VectorXd dx;
  BlockMatrix ds;
  BlockMatrix dz;
};

class NewtonSystem {
 public:
  NewtonSystem(const Problem& p, const Pattern& pat, const BlockMatrix& s, const BlockMatrix& z)
      : p_(p), pat_(pat), z_(z) {
    const int m = p.num_vars();
    const std::size_t nb = p.blocks.size();
    s_inv_.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      Eigen::LLT<Matrix> llt(s[b]);
      if (llt.info() != Eigen::Success) {
        ok_ = false;
        return;
      }
      s_inv_[b] = llt.solve(Matrix::Identity(s[b].rows(), s[b].cols()));
    }
    // M_ij = Re Tr(F_i Z F_j S^-1), symmetric positive definite for
    // linearly independent F_i.
    Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(m, m);
    BlockMatrix h(nb);
    for (int j = 0; j < m; ++j) {
      for (std::size_t b = 0; b < nb; ++b) {
        const int n = p.blocks[b];
        Matrix zf = Matrix::Zero(n, n);
        for (const auto& e : pat_[j + 1][b]) zf.col(e.col) += e.value * z_[b].col(e.row);
        h[b] = zf * s_inv_[b];
      }
      for (int i = 0; i <= j; ++i) {
        const double v = re_trace_sparse(pat_[i + 1], h);
        schur(i, j) = v;
        schur(j, i) = v;
      }
    }
    chol_.compute(schur);
    ok_ = chol_.info() == Eigen::Success;
    // Near the optimum M becomes badly conditioned; a non-positive pivot
    // means LDLT lost definiteness, so switch to a rank-revealing solve.
    if (ok_ && m > 0 && !(chol_.vectorD().minCoeff() > 0.0)) {
      qr_.compute(schur);
      use_qr_ = true;
    }
  }

  bool ok() const { return ok_; }

  // Solves for the direction given primal residual rp = F(x) - S, dual
  // residual rd = c - Tr(F_i Z) and complementarity target rc.
  Direction solve(const BlockMatrix& rp, const Eigen::VectorXd& rd, const BlockMatrix& rc) const {
    const std::size_t nb = p_.blocks.size();
    const int m = p_.num_vars();
    BlockMatrix g(nb);
    for (std::size_t b = 0; b < nb; ++b) g[b] = (rc[b] - z_[b] * rp[b]) * s_inv_[b];
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) rhs(i) = re_trace_sparse(pat_[i + 1], g) - rd(i);
    Direction d;
    if (m == 0)
      d.dx = Eigen::VectorXd();
    else
      d.dx = use_qr_ ? Eigen::VectorXd(qr_.solve(rhs)) : Eigen::VectorXd(chol_.solve(rhs));
    d.ds = rp;
    for (int i = 0; i < m; ++i)
      for (std::size_t b = 0; b < nb; ++b)
        for (const auto& e : pat_[i + 1][b]) d.ds[b](e.row, e.col) += d.dx(i) * e.value;
    d.dz.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) d.dz[b] = hermitize((rc[b] - z_[b] * d.ds[b]) * s_inv_[b]);
    return d;
  }

 private:
  const Problem& p_;
  const Pattern& pat_;
  const BlockMatrix& z_;
  BlockMatrix s_inv_;
  Eigen::LDLT<Eigen::MatrixXd> chol_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  bool use_qr_ = false;
  bool ok_ = true;
};

}  // namespace

std::string to_string(Status s) {
  switch (s) {
    case Status::optimal:
      return "optimal";
    case Status::primal_infeasible:
      return "primal-infeasible-detected";
    case Status::max_iterations:
      return "max-iterations";
    case Status::numerical_failure:
      return "numerical-failure";
  }
  return "unknown";
}

int Problem::dim() const {
  int d = 0;
  for (int b : blocks) d += b;
  return d;
}

Problem Problem::monolithic(Eigen::VectorXd c, std::vector<Matrix> f) {
  Problem p;
  p.c = std::move(c);
  if (!f.empty()) p.blocks = {static_cast<int>(f[0].rows())};
  for (auto& m : f) p.f.push_back({std::move(m)});
  return p;
}

Problem Problem::concatenated() const {
  Problem out;
  out.c = c;
  const int n = dim();
  out.blocks = {n};
  for (const auto& fi : f) {
    Matrix m = Matrix::Zero(n, n);
    int off = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      m.block(off, off, blocks[b], blocks[b]) = fi[b];
      off += blocks[b];
    }
    out.f.push_back({std::move(m)});
  }
  return out;
}

BlockMatrix Problem::evaluate(const Eigen::VectorXd& x) const {
  BlockMatrix out = f.at(0);
  for (int i = 0; i < num_vars(); ++i)
    for (std::size_t b = 0; b < blocks.size(); ++b) out[b] += x(i) * f[i + 1][b];
  return out;
}

void Problem::validate() const {
  if (f.size() != static_cast<std::size_t>(num_vars()) + 1) throw InvalidInput("SDP needs F_0..F_m with m = len(c)");
  for (int b : blocks)
    if (b < 1) throw InvalidInput("SDP block sizes must be positive");
  for (const auto& fi : f) {
    if (fi.size() != blocks.size()) throw InvalidInput("SDP matrices must share the block structure");
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (fi[b].rows() != blocks[b] || fi[b].cols() != blocks[b]) throw InvalidInput("SDP block has the wrong size");
      if (max_norm(fi[b] - fi[b].adjoint()) > kHermitianTol) throw InvalidInput("SDP matrices must be Hermitian");
    }
  }
}

Residuals residuals(const Problem& p, const Eigen::VectorXd& x, const BlockMatrix& z) {
  Residuals r;
  const BlockMatrix fx = p.evaluate(x);
  r.primal_value = p.c.dot(x);
  r.dual_value = -re_trace(p.f[0], z);
  r.gap = r.primal_value - r.dual_value;
  for (int i = 0; i < p.num_vars(); ++i)
    r.dual_infeasibility = std::max(r.dual_infeasibility, std::abs(re_trace(p.f[i + 1], z) - p.c(i)));
  r.primal_min_eig = min_eig(fx);
  r.dual_min_eig = min_eig(z);
  for (std::size_t b = 0; b < fx.size(); ++b) r.complementarity = std::max(r.complementarity, max_norm(fx[b] * z[b]));
  return r;
}

Residuals residuals(const Problem& p, const Solution& s) { return residuals(p, s.x, s.z); }

namespace {

// Real coordinates of an r x r Hermitian matrix, orthonormal under Re Tr(AB).
std::vector<Matrix> hermitian_coordinates(int r) {
  std::vector<Matrix> out;
  const double h = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < r; ++j) {
    out.push_back(Matrix::Zero(r, r));
    out.back()(j, j) = 1.0;
    for (int k = j + 1; k < r; ++k) {
      Matrix re = Matrix::Zero(r, r);
      re(j, k) = re(k, j) = h;
      Matrix im = Matrix::Zero(r, r);
      im(j, k) = Complex(0.0, -h);
      im(k, j) = Complex(0.0, h);
      out.push_back(std::move(re));
      out.push_back(std::move(im));
    }
  }
  return out;
}

// Coordinates of a Hermitian matrix in the basis of hermitian_coordinates.
void hermitian_coords_of(const Matrix& h, Eigen::Ref<Eigen::VectorXd> out) {
  const double r2 = std::sqrt(2.0);
  int k = 0;
  for (Eigen::Index j = 0; j < h.rows(); ++j) {
    out(k++) = h(j, j).real();
    for (Eigen::Index l = j + 1; l < h.rows(); ++l) {
      out(k++) = r2 * h(j, l).real();
      out(k++) = -r2 * h(j, l).imag();
    }
  }
}

// Pure Newton steps on sym(F(x) Z) = 0, Tr(F_i Z) = c_i. The Jacobian is
// nonsingular at strictly complementary nondegenerate solutions, where the
// iteration converges quadratically from the interior-point output.
bool polish(const Problem& p, Eigen::VectorXd& x, BlockMatrix& z) {
  const int m = p.num_vars();
  const std::size_t nb = p.blocks.size();
  std::vector<std::vector<Matrix>> coords(nb);
  std::vector<int> offset(nb);
  int nz = 0;
  for (std::size_t b = 0; b < nb; ++b) {
    coords[b] = hermitian_coordinates(p.blocks[b]);
    offset[b] = nz;
    nz += p.blocks[b] * p.blocks[b];
  }
  const int n = m + nz;
  auto sym = [](const Matrix& a) { return hermitize(a); };

  for (int step = 0; step < 4; ++step) {
    const BlockMatrix fx = p.evaluate(x);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < m; ++i) {
      rhs(i) = p.c(i) - re_trace(p.f[i + 1], z);
      for (std::size_t b = 0; b < nb; ++b) {
        Eigen::VectorXd fc(coords[b].size());
        hermitian_coords_of(p.f[i + 1][b], fc);
        jac.block(i, m + offset[b], 1, fc.size()) = fc.transpose();
        hermitian_coords_of(sym(p.f[i + 1][b] * z[b]), jac.block(m + offset[b], i, fc.size(), 1).col(0));
      }
    }
    for (std::size_t b = 0; b < nb; ++b) {
      const int nb2 = static_cast<int>(coords[b].size());
      hermitian_coords_of(-sym(fx[b] * z[b]), rhs.segment(m + offset[b], nb2));
      for (int j = 0; j < nb2; ++j)
        hermitian_coords_of(sym(fx[b] * coords[b][j]), jac.block(m + offset[b], m + offset[b] + j, nb2, 1).col(0));
    }
    if (rhs.cwiseAbs().maxCoeff() < 1e-15) break;
    // Without a unique optimum the Jacobian is (nearly) singular; the
    // minimum-norm step stays on the face instead of sliding along it.
    const Eigen::VectorXd d = jac.completeOrthogonalDecomposition().solve(rhs);
    if (!d.allFinite()) return false;
    x += d.head(m);
    for (std::size_t b = 0; b < nb; ++b) {
      Matrix dz = Matrix::Zero(p.blocks[b], p.blocks[b]);
      for (std::size_t j = 0; j < coords[b].size(); ++j) dz += d(m + offset[b] + static_cast<int>(j)) * coords[b][j];
      z[b] = hermitize(z[b] + dz);
    }
  }
  return x.allFinite();
}

}  // namespace

Solution solve(const Problem& p, const Settings& settings) {
  p.validate();
  const int m = p.num_vars();
  const std::size_t nb = p.blocks.size();
  const int dim = p.dim();
  const Pattern pat = pattern_of(p);

  Solution sol;
  sol.x = Eigen::VectorXd::Zero(m);

  const double shift = 1.0 + std::abs(std::min(0.0, min_eig(p.f[0])));
  BlockMatrix s = p.f[0];
  BlockMatrix z(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    s[b] += shift * Matrix::Identity(p.blocks[b], p.blocks[b]);
    z[b] = Matrix::Identity(p.blocks[b], p.blocks[b]) / static_cast<double>(dim);
  }
  const double f0_scale = 1.0 + block_max_norm(p.f[0]);
  const double c_scale = 1.0 + (m > 0 ? p.c.cwiseAbs().maxCoeff() : 0.0);
  const double start_trace = 1.0;

  auto finish = [&](Status st) {
    sol.status = st;
    sol.z = z;
    sol.residuals = residuals(p, sol.x, z);
    sol.primal_value = sol.residuals.primal_value;
    sol.dual_value = sol.residuals.dual_value;
    sol.gap = sol.residuals.gap;
    return sol;
  };

  // Replaces (x, Z) by its polished version when the recomputed residuals
  // certify optimality. Without a certified starting point (`rescue`), the
  // PSD bounds are absolute rather than relative to the current pair.
  auto try_polish = [&](bool rescue) {
    Eigen::VectorXd px = sol.x;
    BlockMatrix pz = z;
    if (!polish(p, px, pz)) return false;
    const Residuals before = residuals(p, sol.x, z);
    const Residuals after = residuals(p, px, pz);
    const double pmin = rescue ? 0.0 : std::min(before.primal_min_eig, 0.0);
    const double dmin = rescue ? 0.0 : std::min(before.dual_min_eig, 0.0);
    if (!(std::abs(after.gap) <= settings.gap_tol && after.dual_infeasibility <= settings.feas_tol * c_scale &&
          after.primal_min_eig >= pmin - settings.feas_tol && after.dual_min_eig >= dmin - settings.feas_tol &&
          (rescue || after.complementarity < before.complementarity)))
      return false;
    sol.x = px;
    z = pz;
    sol.polished = true;
    return true;
  };
  auto fail = [&]() {
    if (settings.polish && try_polish(true)) return finish(Status::optimal);
    return finish(Status::numerical_failure);
  };

  for (int it = 0;; ++it) {
    const BlockMatrix fx = p.evaluate(sol.x);
    BlockMatrix rp(nb);
    for (std::size_t b = 0; b < nb; ++b) rp[b] = fx[b] - s[b];
    Eigen::VectorXd rd(m);
    for (int i = 0; i < m; ++i) rd(i) = p.c(i) - re_trace_sparse(pat[i + 1], z);

    Iterate rec;
    rec.iteration = it;
    rec.primal_value = p.c.dot(sol.x);
    rec.dual_value = -re_trace(p.f[0], z);
    rec.mu = re_trace(s, z) / dim;
    rec.primal_infeasibility = block_max_norm(rp);
    rec.dual_infeasibility = m > 0 ? rd.cwiseAbs().maxCoeff() : 0.0;
    if (!sol.history.empty()) {
      rec.step_primal = sol.history.back().step_primal;
      rec.step_dual = sol.history.back().step_dual;
    }
    sol.history.push_back(rec);
    sol.iterations = it;

    const bool primal_ok = rec.primal_infeasibility <= settings.feas_tol * f0_scale;
    const bool dual_ok = rec.dual_infeasibility <= settings.feas_tol * c_scale;
    if (primal_ok && dual_ok && std::abs(rec.primal_value - rec.dual_value) <= settings.gap_tol &&
        rec.mu * dim <= settings.gap_tol) {
      if (settings.polish) try_polish(false);
      return finish(Status::optimal);
    }

    // A dual ray: Z growing without bound along Tr(F_i Z) = 0, Tr(F_0 Z) < 0.
    double tr_z = 0.0;
    for (const auto& b : z) tr_z += b.trace().real();
    if (tr_z > 1e8 * start_trace) {
      const double ray_obj = rec.dual_value / tr_z;
      double ray_feas = 0.0;
      for (int i = 0; i < m; ++i) ray_feas = std::max(ray_feas, std::abs(re_trace_sparse(pat[i + 1], z)) / tr_z);
      if (ray_obj > 0.0 && ray_feas <= 1e-6 * ray_obj) return finish(Status::primal_infeasible);
    }

    if (it >= settings.max_iter) return finish(Status::max_iterations);

    NewtonSystem newton(p, pat, s, z);
    if (!newton.ok()) return fail();

    // Predictor: pure Newton step towards mu = 0.
    BlockMatrix rc(nb);
    for (std::size_t b = 0; b < nb; ++b) rc[b] = -z[b] * s[b];
    const Direction pred = newton.solve(rp, rd, rc);
    const double ap_max = max_step(s, pred.ds);
    const double ad_max = max_step(z, pred.dz);
    if (ap_max < 0.0 || ad_max < 0.0) return fail();
    const double ap = std::min(1.0, ap_max);
    const double ad = std::min(1.0, ad_max);
    double mu_aff = 0.0;
    for (std::size_t b = 0; b < nb; ++b)
      mu_aff += trace_product(s[b] + ap * pred.ds[b], z[b] + ad * pred.dz[b]);
    mu_aff /= dim;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / rec.mu, 3.0), 0.0, 1.0);

    // Corrector with the second-order term of the predictor.
    for (std::size_t b = 0; b < nb; ++b) {
      rc[b] = sigma * rec.mu * Matrix::Identity(p.blocks[b], p.blocks[b]) - z[b] * s[b] - pred.dz[b] * pred.ds[b];
    }
    const Direction corr = newton.solve(rp, rd, rc);
    const double cp_max = max_step(s, corr.ds);
    const double cd_max = max_step(z, corr.dz);
    if (!std::isfinite(corr.dx.sum()) || cp_max < 0.0 || cd_max < 0.0) return fail();
    const double gamma = 0.9 + 0.09 * std::min({1.0, cp_max, cd_max});
    const double alpha_p = std::min(1.0, gamma * cp_max);
    const double alpha_d = std::min(1.0, gamma * cd_max);

    sol.x += alpha_p * corr.dx;
    for (std::size_t b = 0; b < nb; ++b) {
      s[b] = hermitize(s[b] + alpha_p * corr.ds[b]);
      z[b] = hermitize(z[b] + alpha_d * corr.dz[b]);
    }
    sol.history.back().step_primal = alpha_p;
    sol.history.back().step_dual = alpha_d;
  }
}

}  // namespace qmarg::sdp
