#pragma once

#include <optional>
#include <vector>

#include "qmarg/marginals.hpp"
#include "qmarg/sdp.hpp"
#include "qmarg/witness.hpp"

namespace qmarg {

inline constexpr double kDecisionTol = 1e-7;

struct CompatSettings {
  sdp::Settings solver;
  /// t* <= decision_tol is classified compatible.
  double decision_tol = kDecisionTol;
  double consistency_tol = kConsistencyTol;
};

enum class VerdictKind { compatible, incompatible };

const char* to_string(VerdictKind k);

struct Verdict {
  VerdictKind kind = VerdictKind::compatible;
  /// Optimum of: minimize t subject to B(x) + t 1 >= 0.
  double t_star = 0.0;
  /// t* within (-decision_tol, decision_tol].
  bool boundary = false;

  /// B(x*) when compatible (absent if it misses the 1e-8 PSD tolerance at
  /// the boundary).
  std::optional<DensityState> state;
  /// Certificate when incompatible.
  std::optional<Witness> witness;
  /// pairing(witness, marginals), recomputed from the witness parts.
  std::optional<double> pairing_value;

  /// Basis indices of the SDP variables x (t is not listed).
  std::vector<MultiIndex> variables;
  Eigen::VectorXd x;
  /// Optimal dual matrix of the solver.
  HermitianOperator dual;
  /// Indices in I_C whose coefficients were not fixed by partial knowledge.
  std::vector<MultiIndex> released;
  /// |Tr(Z B_m)| for each released index, after certificate repair.
  std::vector<double> released_residuals;

  double gap = 0.0;
  sdp::Residuals residuals;
  int iterations = 0;
};

/// Solves the compatibility SDP for full or partial marginal knowledge.
/// Throws InvalidInput for inconsistent marginals and SolverFailure when the
/// interior-point method does not reach an optimal status.
Verdict check_compatibility(const MarginalSet& ms, const CompatSettings& settings = {});

/// B_0 + sum_m x_m B_m over the verdict's variables. Throws InvalidInput
/// for an incompatible verdict or when the result is not a state within 1e-8.
DensityState reconstruct_state(const MarginalSet& ms, const Verdict& v);

/// Repairs a numerically computed dual matrix into an exact p-form witness
/// generator: components outside the supplied index set are dropped and a
/// multiple of the identity is added if the result has a negative eigenvalue.
HermitianOperator repair_certificate(const HermitianOperator& z, const std::vector<MultiIndex>& keep_out);

struct MixingProbe {
  double x = 0.0;
  double t_star = 0.0;
  bool compatible = false;
};

struct MixingResult {
  /// Largest tested weight known to be compatible.
  double x_star = 1.0;
  /// Smallest tested weight known to be incompatible (1 when none).
  double upper = 1.0;
  std::vector<MixingProbe> probes;
};

/// Bisection on x for (1 - x) I + x ms, stopping at width `width`.
MixingResult mixing_threshold(const MarginalSet& ms, const CompatSettings& settings = {}, double width = 1e-4);

}  // namespace qmarg
