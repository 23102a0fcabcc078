#include "qmarg/identical.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace qmarg {

namespace {

int ipow(int b, int e) {
  int r = 1;
  while (e-- > 0) r *= b;
  return r;
}

std::vector<int> digits_of(int index, int d, int n) {
  std::vector<int> x(n);
  for (int k = n - 1; k >= 0; --k) {
    x[k] = index % d;
    index /= d;
  }
  return x;
}

int index_of(const std::vector<int>& x, int d) {
  int r = 0;
  for (int v : x) r = r * d + v;
  return r;
}

// Basis-state map of the permutation that moves the particle in slot
// perm[k] to slot k.
std::vector<int> permutation_map(const std::vector<int>& perm, int d) {
  const int n = static_cast<int>(perm.size());
  const int dim = ipow(d, n);
  std::vector<int> out(dim);
  std::vector<int> y(n);
  for (int a = 0; a < dim; ++a) {
    const auto x = digits_of(a, d, n);
    for (int k = 0; k < n; ++k) y[k] = x[perm[k]];
    out[a] = index_of(y, d);
  }
  return out;
}

int parity(const std::vector<int>& seq) {
  int inv = 0;
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t j = i + 1; j < seq.size(); ++j)
      if (seq[i] > seq[j]) ++inv;
  return inv % 2 == 0 ? 1 : -1;
}

// Sorted tuples over {lo..hi} of length n, nondecreasing or strictly increasing.
std::vector<std::vector<int>> sorted_tuples(int lo, int hi, int n, bool strict) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == n) {
      out.push_back(cur);
      return;
    }
    for (int v = start; v <= hi; ++v) {
      cur.push_back(v);
      self(self, strict ? v + 1 : v);
      cur.pop_back();
    }
  };
  rec(rec, lo);
  return out;
}

HermitianOperator build_projector(int d, int n, Statistics s) {
  const int dim = ipow(d, n);
  Matrix p = Matrix::Zero(dim, dim);
  const bool fermi = s == Statistics::fermi;
  for (auto x : sorted_tuples(0, d - 1, n, fermi)) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    do {
      v(index_of(x, d)) += fermi ? static_cast<double>(parity(x)) : 1.0;
    } while (std::next_permutation(x.begin(), x.end()));
    v.normalize();
    p += v * v.adjoint();
  }
  return HermitianOperator(SystemShape(std::vector<int>(n, d)), std::move(p));
}

const HermitianOperator& cached_projector(int d, int n, Statistics s) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::unique_ptr<HermitianOperator>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{d, n, static_cast<int>(s)}];
  if (!slot) slot = std::make_unique<HermitianOperator>(build_projector(d, n, s));
  return *slot;
}

bool is_symmetric_entry(const DensityState& state, int d) {
  const int k = state.shape().size();
  return max_norm(twirl(state.op(), d, k).matrix() - state.matrix()) <= 1e-10;
}

}  // namespace

const char* to_string(Statistics s) { return s == Statistics::bose ? "bose" : "fermi"; }

Statistics parse_statistics(const std::string& s) {
  if (s == "bose") return Statistics::bose;
  if (s == "fermi") return Statistics::fermi;
  throw InvalidInput("statistics must be \"bose\" or \"fermi\"");
}

ParticleSystem::ParticleSystem(int d, int n, Statistics statistics) : d_(d), n_(n), statistics_(statistics) {
  if (d < 2) throw InvalidInput("single-particle dimension must be at least 2");
  if (n < 1) throw InvalidInput("particle count must be positive");
  if (statistics == Statistics::fermi && n > d)
    throw InvalidInput("antisymmetric space is empty: more fermions than single-particle states");
}

const HermitianOperator& sym_projector(int d, int n) {
  (void)ParticleSystem(d, n, Statistics::bose);
  return cached_projector(d, n, Statistics::bose);
}

const HermitianOperator& antisym_projector(int d, int n) {
  (void)ParticleSystem(d, n, Statistics::fermi);
  return cached_projector(d, n, Statistics::fermi);
}

const HermitianOperator& projector(const ParticleSystem& ps) {
  return cached_projector(ps.d(), ps.n(), ps.statistics());
}

HermitianOperator swap_operator(int d, int n, int i, int j) {
  if (i < 1 || j < 1 || i > n || j > n) throw InvalidInput("particle label out of range");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::swap(perm[i - 1], perm[j - 1]);
  const auto map = permutation_map(perm, d);
  const int dim = ipow(d, n);
  Matrix s = Matrix::Zero(dim, dim);
  for (int a = 0; a < dim; ++a) s(map[a], a) = 1.0;
  return HermitianOperator(SystemShape(std::vector<int>(n, d)), std::move(s));
}

HermitianOperator twirl(const HermitianOperator& op, int d, int n) {
  const int dim = ipow(d, n);
  if (op.dim() != dim) throw InvalidInput("operator dimension does not match d^n");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Matrix acc = Matrix::Zero(dim, dim);
  int count = 0;
  const auto& m = op.matrix();
  do {
    const auto map = permutation_map(perm, d);
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) acc(map[a], map[b]) += m(a, b);
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return HermitianOperator(op.shape(), acc / static_cast<double>(count));
}

std::vector<SymmetrizedElement> symmetrized_basis(int d, int n) {
  if (d < 2 || n < 1) throw InvalidInput("symmetrized basis needs d >= 2 and n >= 1");
  const SystemShape shape(std::vector<int>(n, d));
  std::vector<SymmetrizedElement> out;
  for (const auto& mu : sorted_tuples(1, d * d, n, false)) {
    auto arrangement = mu;
    auto op = HermitianOperator::zero(shape);
    do {
      op += basis_element(shape, arrangement);
    } while (std::next_permutation(arrangement.begin(), arrangement.end()));
    out.push_back({mu, std::move(op)});
  }
  return out;
}

MarginalSet expand_identical(const MarginalSet& ms) {
  const auto& shape = ms.shape();
  const int n = shape.size();
  std::map<int, const DensityState*> by_size;
  for (const auto& e : ms.entries()) {
    const int k = static_cast<int>(e.systems.size());
    auto [it, inserted] = by_size.emplace(k, &e.state);
    if (!inserted && max_norm(it->second->matrix() - e.state.matrix()) > kConsistencyTol)
      throw InvalidInput("marginals of identical particles must agree across subsets of equal size");
  }
  std::vector<MarginalEntry> entries;
  for (const auto& [k, state] : by_size)
    for (const auto& s : sorted_tuples(1, n, k, true)) entries.push_back({s, *state});
  return MarginalSet(shape, std::move(entries));
}

IdenticalVerdict check_identical(const MarginalSet& ms, const ParticleSystem& ps, const IdenticalSettings& settings) {
  if (!(ms.shape() == ps.shape())) throw InvalidInput("marginal shape does not match the particle system");
  const int d = ps.d();
  const int n = ps.n();
  const auto& shape = ms.shape();
  const int dim = shape.total();

  IdenticalVerdict out;
  out.expanded = expand_identical(ms);
  const auto& exp = *out.expanded;
  const FixedPart fp = fixed_part(exp, settings.compat.consistency_tol);

  out.symmetrized = !settings.force_full_basis;
  for (const auto& e : ms.entries()) out.symmetrized = out.symmetrized && is_symmetric_entry(e.state, d);

  std::vector<MultiIndex> labels;
  std::vector<HermitianOperator> vars;
  if (out.symmetrized) {
    const std::set<MultiIndex> free(fp.free_indices.begin(), fp.free_indices.end());
    for (auto& el : symmetrized_basis(d, n))
      if (free.count(el.multiset) != 0) {
        labels.push_back(el.multiset);
        vars.push_back(std::move(el.op));
      }
  } else {
    labels = fp.free_indices;
    for (const auto& m : labels) vars.push_back(basis_element(shape, m));
  }

  const auto& p = projector(ps);
  const int nv = static_cast<int>(vars.size());
  sdp::Problem prob;
  prob.blocks = {dim, 1};
  prob.c = Eigen::VectorXd::Zero(nv + 1);
  prob.c(nv) = 1.0;
  auto scalar = [](double v) { return Matrix::Constant(1, 1, Complex(v)); };
  prob.f.push_back({fp.b0.matrix(), scalar(trace_product(fp.b0.matrix(), p.matrix()) - 1.0)});
  for (const auto& v : vars) prob.f.push_back({v.matrix(), scalar(trace_product(v.matrix(), p.matrix()))});
  prob.f.push_back({Matrix::Identity(dim, dim), scalar(1.0)});

  const auto sol = sdp::solve(prob, settings.compat.solver);
  if (sol.status != sdp::Status::optimal) {
    std::ostringstream os;
    os << "identical-particle SDP ended with status " << sdp::to_string(sol.status);
    throw SolverFailure(os.str());
  }

  Verdict& v = out.verdict;
  v.variables = labels;
  v.x = sol.x.head(nv);
  v.t_star = sol.primal_value;
  v.gap = sol.gap;
  v.residuals = sol.residuals;
  v.iterations = sol.iterations;
  v.dual = HermitianOperator(shape, sol.z[0], 1e-8);
  v.boundary = v.t_star > -settings.compat.decision_tol && v.t_star <= settings.compat.decision_tol;

  if (v.t_star <= settings.compat.decision_tol) {
    v.kind = VerdictKind::compatible;
    auto b = fp.b0;
    for (int k = 0; k < nv; ++k) b += v.x(k) * vars[k];
    try {
      v.state = DensityState(std::move(b), 1e-8);
    } catch (const InvalidInput&) {
    }
    return out;
  }

  v.kind = VerdictKind::incompatible;
  // Y = Z_1 + z_2 P has vanishing free coefficients; Tr(rho Y) >= z_2 for
  // every admissible rho while Tr(B_0 Y) = z_2 - t* < z_2.
  const double z2 = std::max(0.0, sol.z[1](0, 0).real());
  auto y = twirl(v.dual, d, n) + z2 * p;
  {
    const IndexSets idx(shape);
    auto coeffs = expand(y);
    for (const auto& m : fp.free_indices) coeffs[idx.rank(m)] = 0.0;
    y = synthesize(shape, coeffs);
    const double lmin = min_eigenvalue(y - z2 * p);
    if (lmin < 0.0) y += (-lmin) * HermitianOperator::identity(shape);
  }
  std::vector<Subset> systems;
  for (const auto& e : exp.entries()) systems.push_back(e.systems);
  v.witness = extract_witness_on(y, systems);
  out.witness_offset = z2;
  v.pairing_value = pairing(*v.witness, exp) - z2;
  if (!(*v.pairing_value < 0.0)) throw SolverFailure("identical-particle certificate does not separate the marginals");
  return out;
}

bool coleman_check(const DensityState& rho1, int n) {
  if (n < 1) throw InvalidInput("particle count must be positive");
  return max_eigenvalue(rho1.op()) <= 1.0 / n + 1e-10;
}

TwoBodyHamiltonian::TwoBodyHamiltonian(const HermitianOperator& h2) {
  const auto& shape = h2.shape();
  if (shape.size() != 2 || shape.dim(1) != shape.dim(2))
    throw InvalidInput("two-body Hamiltonian must act on two copies of the same space");
  const auto s = swap_operator(shape.dim(1), 2, 1, 2).matrix();
  h2_ = HermitianOperator(shape, (h2.matrix() + s * h2.matrix() * s) * 0.5);
}

GroundStateResult ground_state(const TwoBodyHamiltonian& h, const ParticleSystem& ps,
                               const GroundStateSettings& settings) {
  if (h.d() != ps.d()) throw InvalidInput("Hamiltonian dimension does not match the particle system");
  if (ps.n() < 2) throw InvalidInput("a two-body energy needs at least two particles");
  const int d = ps.d();
  const int n = ps.n();
  const auto shape = ps.shape();
  const int dim = shape.total();
  const auto& p = projector(ps);
  const Matrix& h2 = h.op().matrix();

  auto basis = symmetrized_basis(d, n);
  basis.erase(basis.begin());  // the identity multiset is fixed by Tr(rho) = 1
  const int nb = static_cast<int>(basis.size());
  const Matrix mixed = Matrix::Identity(dim, dim) / static_cast<double>(dim);

  Eigen::VectorXd cost(nb);
  for (int k = 0; k < nb; ++k) cost(k) = trace_product(h2, reduce_to(basis[k].op, {1, 2}).matrix());
  const double offset = h2.trace().real() / (d * d);

  GroundStateResult out;
  // x = x0 + N y; without the reduction N is the identity.
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(nb);
  Eigen::MatrixXd null_basis = Eigen::MatrixXd::Identity(nb, nb);
  sdp::Problem prob;
  auto scalar = [](double v) { return Matrix::Constant(1, 1, Complex(v)); };

  if (settings.reduce_to_face) {
    // (1 - P) rho(x) = 0, split into real and imaginary parts.
    const Matrix q = Matrix::Identity(dim, dim) - p.matrix();
    const int rows = 2 * dim * dim;
    Eigen::MatrixXd a(rows, nb);
    auto flatten = [&](const Matrix& m, Eigen::Ref<Eigen::VectorXd> col) {
      for (int i = 0; i < dim * dim; ++i) {
        col(i) = m.data()[i].real();
        col(dim * dim + i) = m.data()[i].imag();
      }
    };
    for (int k = 0; k < nb; ++k) flatten(q * basis[k].op.matrix(), a.col(k));
    Eigen::VectorXd b(rows);
    flatten(-q * mixed, b);
    Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(
        a, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    int rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-8 * sv(0)) ++rank;
    x0 = svd.matrixV().leftCols(rank) *
         (svd.matrixU().leftCols(rank).transpose() * b).cwiseQuotient(sv.head(rank));
    if ((a * x0 - b).cwiseAbs().maxCoeff() > 1e-9) throw SolverFailure("face equations have no solution");
    null_basis = svd.matrixV().rightCols(nb - rank);

    // Compress onto the range of P.
    Eigen::SelfAdjointEigenSolver<Matrix> es(p.matrix());
    std::vector<int> keep;
    for (int i = 0; i < dim; ++i)
      if (es.eigenvalues()(i) > 0.5) keep.push_back(i);
    Matrix v(dim, static_cast<int>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) v.col(j) = es.eigenvectors().col(keep[j]);

    Matrix f0 = mixed;
    for (int k = 0; k < nb; ++k) f0 += x0(k) * basis[k].op.matrix();
    prob.blocks = {static_cast<int>(v.cols())};
    prob.f.push_back({v.adjoint() * f0 * v});
    for (int j = 0; j < null_basis.cols(); ++j) {
      Matrix fj = Matrix::Zero(dim, dim);
      for (int k = 0; k < nb; ++k) fj += null_basis(k, j) * basis[k].op.matrix();
      prob.f.push_back({v.adjoint() * fj * v});
    }
    prob.c = null_basis.transpose() * cost;
  } else {
    prob.blocks = {dim, 1};
    prob.c = cost;
    prob.f.push_back({mixed, scalar(trace_product(mixed, p.matrix()) - 1.0)});
    for (int k = 0; k < nb; ++k) {
      const auto& s = basis[k].op.matrix();
      prob.f.push_back({s, scalar(trace_product(s, p.matrix()))});
    }
  }

  out.variables = prob.num_vars();
  out.solution = sdp::solve(prob, settings.solver);
  if (out.solution.status != sdp::Status::optimal) {
    std::ostringstream os;
    os << "ground-state SDP ended with status " << sdp::to_string(out.solution.status) << " (gap " << out.solution.gap
       << ")";
    throw SolverFailure(os.str());
  }
  const Eigen::VectorXd x = x0 + null_basis * out.solution.x;
  out.energy = offset + cost.dot(x);
  out.rho = HermitianOperator(shape, mixed);
  for (int k = 0; k < nb; ++k) out.rho += x(k) * basis[k].op;
  out.rho2 = reduce_to(out.rho, {1, 2});
  return out;
}

double ground_state_energy(const TwoBodyHamiltonian& h, const ParticleSystem& ps,
                           const GroundStateSettings& settings) {
  return ground_state(h, ps, settings).energy;
}

}  // namespace qmarg
