#pragma once

#include <string>
#include <vector>

#include "qmarg/basis.hpp"
#include "qmarg/compat.hpp"
#include "qmarg/marginals.hpp"
#include "qmarg/sdp.hpp"
#include "qmarg/tensor.hpp"

namespace qmarg {

enum class Statistics { bose, fermi };

const char* to_string(Statistics s);
/// "bose" or "fermi"; throws InvalidInput otherwise.
Statistics parse_statistics(const std::string& s);

/// n identical particles with single-particle dimension d.
class ParticleSystem {
 public:
  /// Throws InvalidInput for d < 2, n < 1, or fermions with n > d.
  ParticleSystem(int d, int n, Statistics statistics);

  int d() const { return d_; }
  int n() const { return n_; }
  Statistics statistics() const { return statistics_; }
  /// (d, ..., d), n times.
  SystemShape shape() const { return SystemShape(std::vector<int>(n_, d_)); }

 private:
  int d_;
  int n_;
  Statistics statistics_;
};

/// Projector onto the symmetric subspace, sum over sorted x of |S_x><S_x|
/// with |S_x> the normalized sum of the distinct arrangements of x.
const HermitianOperator& sym_projector(int d, int n);
/// Projector onto the antisymmetric subspace (n <= d).
const HermitianOperator& antisym_projector(int d, int n);
/// The projector matching the system's statistics.
const HermitianOperator& projector(const ParticleSystem& ps);

/// Exchange of particles i and j (1-based) on (C^d)^{(x) n}.
HermitianOperator swap_operator(int d, int n, int i, int j);

/// Averages an operator over all particle permutations.
HermitianOperator twirl(const HermitianOperator& op, int d, int n);

struct SymmetrizedElement {
  /// Sorted multiset 1 <= m_1 <= ... <= m_n <= d^2.
  MultiIndex multiset;
  /// Sum of B_m over the distinct arrangements m of the multiset.
  HermitianOperator op;
};

/// One element per multiset, in lexicographic order.
std::vector<SymmetrizedElement> symmetrized_basis(int d, int n);

struct IdenticalSettings {
  CompatSettings compat;
  /// Use the full operator basis even when the symmetrized one applies.
  bool force_full_basis = false;
};

struct IdenticalVerdict {
  Verdict verdict;
  /// True when the symmetrized basis was used.
  bool symmetrized = false;
  /// Certificate offset: Tr(p(W) rho) >= offset for every (anti)symmetric
  /// state rho, while pairing(W, expanded marginals) < offset.
  double witness_offset = 0.0;
  /// Marginal set after copying each given marginal to every subset of
  /// the same size.
  std::optional<MarginalSet> expanded;
};

/// Copies each given marginal to all subsets of the same size. Throws
/// InvalidInput if two given marginals of the same size differ.
MarginalSet expand_identical(const MarginalSet& ms);

/// Existence of an (anti)symmetric global state with the given marginals:
/// minimize t subject to B(x) + t 1 >= 0 and Tr(B(x) P) - 1 + t >= 0.
/// The optimum is 0 exactly when such a state exists.
IdenticalVerdict check_identical(const MarginalSet& ms, const ParticleSystem& ps,
                                 const IdenticalSettings& settings = {});

/// Every eigenvalue of rho1 is at most 1/n (within 1e-10).
bool coleman_check(const DensityState& rho1, int n);

/// Effective two-body Hamiltonian on C^d (x) C^d, symmetrized under the
/// exchange of its two factors at construction.
class TwoBodyHamiltonian {
 public:
  explicit TwoBodyHamiltonian(const HermitianOperator& h2);
  const HermitianOperator& op() const { return h2_; }
  int d() const { return h2_.shape().dim(1); }

 private:
  HermitianOperator h2_;
};

struct GroundStateSettings {
  sdp::Settings solver;
  /// Solve on the face rho = P rho P. Unit trace, rho >= 0 and
  /// Tr(rho P) >= 1 already force this, but imposing it explicitly keeps the
  /// linear matrix inequality strictly feasible. When false the constraint
  /// Tr(rho P) >= 1 is passed to the solver as a separate 1x1 block.
  bool reduce_to_face = true;
};

struct GroundStateResult {
  double energy = 0.0;
  /// Two-particle reduced state at the optimum.
  HermitianOperator rho2;
  /// Global state at the optimum.
  HermitianOperator rho;
  /// Number of SDP variables after eliminating the face equations.
  int variables = 0;
  sdp::Solution solution;
};

/// minimize Tr(H2 rho_12) over rho = 1/D + sum_mu x_mu S_mu >= 0 with
/// Tr(rho P) >= 1. Throws SolverFailure if the solve is not optimal.
GroundStateResult ground_state(const TwoBodyHamiltonian& h, const ParticleSystem& ps,
                               const GroundStateSettings& settings = {});
double ground_state_energy(const TwoBodyHamiltonian& h, const ParticleSystem& ps,
                           const GroundStateSettings& settings = {});

}  // namespace qmarg
