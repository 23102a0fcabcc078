#include "qmarg/compat.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qmarg {

const char* to_string(VerdictKind k) { return k == VerdictKind::compatible ? "compatible" : "incompatible"; }

HermitianOperator repair_certificate(const HermitianOperator& z, const std::vector<MultiIndex>& keep_out) {
  const auto& shape = z.shape();
  const IndexSets idx(shape);
  auto coeffs = expand(z);
  for (const auto& m : keep_out) coeffs[idx.rank(m)] = 0.0;
  auto out = synthesize(shape, coeffs);
  const double lmin = min_eigenvalue(out);
  if (lmin < 0.0) out += (-lmin) * HermitianOperator::identity(shape);
  return out;
}

Verdict check_compatibility(const MarginalSet& ms, const CompatSettings& settings) {
  const auto& shape = ms.shape();
  const int dim = shape.total();
  const FixedPart fp = fixed_part(ms, settings.consistency_tol);

  Verdict v;
  v.variables = fp.free_indices;
  for (const auto& m : fp.free_indices)
    if (in_IC(m)) v.released.push_back(m);

  const int nv = static_cast<int>(v.variables.size());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(nv + 1);
  c(nv) = 1.0;
  std::vector<Matrix> f;
  f.reserve(nv + 2);
  f.push_back(fp.b0.matrix());
  for (const auto& m : v.variables) f.push_back(basis_element(shape, m).matrix());
  f.push_back(Matrix::Identity(dim, dim));
  const auto problem = sdp::Problem::monolithic(std::move(c), std::move(f));

  const auto sol = sdp::solve(problem, settings.solver);
  if (sol.status != sdp::Status::optimal) {
    std::ostringstream os;
    os << "compatibility SDP ended with status " << sdp::to_string(sol.status) << " after " << sol.iterations
       << " iterations (gap " << sol.gap << ")";
    throw SolverFailure(os.str());
  }
  v.x = sol.x.head(nv);
  v.t_star = sol.primal_value;
  v.gap = sol.gap;
  v.residuals = sol.residuals;
  v.iterations = sol.iterations;
  v.dual = HermitianOperator(shape, sol.z[0], 1e-8);
  v.boundary = v.t_star > -settings.decision_tol && v.t_star <= settings.decision_tol;

  if (v.t_star <= settings.decision_tol) {
    v.kind = VerdictKind::compatible;
    try {
      v.state = reconstruct_state(ms, v);
    } catch (const InvalidInput&) {
      // Boundary solutions may miss the PSD tolerance by a hair.
    }
    return v;
  }

  v.kind = VerdictKind::incompatible;
  const auto z = repair_certificate(v.dual, v.variables);
  for (const auto& m : v.released) v.released_residuals.push_back(std::abs(basis_overlap(z, m)));
  if (ms.full()) {
    v.witness = extract_witness(z);
  } else {
    std::vector<Subset> systems;
    for (const auto& e : ms.entries()) systems.push_back(e.systems);
    v.witness = extract_witness_on(z, systems);
  }
  v.pairing_value = pairing(*v.witness, ms);
  if (!(*v.pairing_value < 0.0)) {
    std::ostringstream os;
    os << "dual certificate does not separate the marginals (pairing " << *v.pairing_value << ")";
    throw SolverFailure(os.str());
  }
  return v;
}

DensityState reconstruct_state(const MarginalSet& ms, const Verdict& v) {
  if (v.kind != VerdictKind::compatible) throw InvalidInput("no state to reconstruct: marginals are incompatible");
  if (static_cast<std::size_t>(v.x.size()) != v.variables.size()) throw InvalidInput("verdict variables and x differ in length");
  auto b = fixed_part(ms).b0;
  for (std::size_t k = 0; k < v.variables.size(); ++k) b += v.x(k) * basis_element(ms.shape(), v.variables[k]);
  return DensityState(std::move(b), 1e-8);
}

MixingResult mixing_threshold(const MarginalSet& ms, const CompatSettings& settings, double width) {
  MixingResult out;
  auto probe = [&](double x) {
    const auto v = check_compatibility(mix_with_identity(ms, x), settings);
    const bool ok = v.kind == VerdictKind::compatible;
    out.probes.push_back({x, v.t_star, ok});
    return ok;
  };
  if (probe(1.0)) {
    out.x_star = 1.0;
    out.upper = 1.0;
    return out;
  }
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    (probe(mid) ? lo : hi) = mid;
  }
  out.x_star = lo;
  out.upper = hi;
  return out;
}

}  // namespace qmarg
