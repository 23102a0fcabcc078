#pragma once

#include <optional>
#include <vector>

#include "qmarg/basis.hpp"
#include "qmarg/tensor.hpp"

namespace qmarg {

inline constexpr double kConsistencyTol = 1e-8;

struct MarginalEntry {
  Subset systems;
  DensityState state;
};

/// Reduced states labelled by the (proper, nonempty) subsets they describe.
///
/// The set is in *full* mode when it holds exactly the n subsets of size
/// n-1; any other collection is *partial* knowledge.
class MarginalSet {
 public:
  MarginalSet(SystemShape shape, std::vector<MarginalEntry> entries);

  /// Full-mode set from the n states omitting system 1, 2, ..., n in turn.
  static MarginalSet from_omitted(const SystemShape& shape, std::vector<DensityState> omitting);

  const SystemShape& shape() const { return shape_; }
  const std::vector<MarginalEntry>& entries() const { return entries_; }
  bool full() const { return full_; }

  /// Entry for exactly `systems`, if present.
  const DensityState* find(const Subset& systems) const;
  /// The state omitting system i (full mode only).
  const DensityState& omitting(int i) const;

 private:
  SystemShape shape_;
  std::vector<MarginalEntry> entries_;
  bool full_ = false;
};

struct OverlapViolation {
  Subset first;
  Subset second;
  Subset overlap;
  double deviation = 0.0;
};

struct ConsistencyReport {
  bool consistent = true;
  double max_deviation = 0.0;
  std::vector<OverlapViolation> violations;
};

/// Compares, for every pair of entries, their reductions to the common
/// systems (max-norm). Violations are reported, never thrown.
ConsistencyReport check_consistency(const MarginalSet& ms, double tol = kConsistencyTol);

/// Reduced state on `systems`, taken from the first entry containing it.
DensityState derive_submarginal(const MarginalSet& ms, const Subset& systems);

/// Operator part fixed by the known marginals together with the multi-indices
/// whose coefficients remain free.
struct FixedPart {
  HermitianOperator b0;
  std::vector<MultiIndex> free_indices;
};

/// Basis-coefficient construction of B_0. A coefficient z_m is fixed when
/// support(m) lies inside some known subset; it is read off from the first
/// such entry. In full mode the free indices are exactly I \ I_C.
/// Throws InvalidInput when the entries are not mutually consistent.
FixedPart fixed_part(const MarginalSet& ms, double consistency_tol = kConsistencyTol);

/// B_0 from basis coefficients (full mode only).
HermitianOperator build_b0(const MarginalSet& ms, double consistency_tol = kConsistencyTol);

/// B_0 = -sum_{A nonempty} (-1)^{|A|} / d_A  rho_{N\A} (x) 1_A  (full mode only).
HermitianOperator build_b0_inclusion_exclusion(const MarginalSet& ms,
                                               double consistency_tol = kConsistencyTol);

struct DeltaReport {
  HermitianOperator delta;
  double min_eig = 0.0;
  double max_eig = 0.0;
  bool lower_applicable = false;  // n odd
  bool lower_satisfied = false;
  bool upper_applicable = false;  // all systems are qubits
  bool upper_satisfied = false;

  /// True when every applicable bound holds.
  bool passes() const {
    return (!lower_applicable || lower_satisfied) && (!upper_applicable || upper_satisfied);
  }
};

/// Alternating sum over proper subsets A (including the empty set, whose
/// term is the full identity) of the padded reduced states.
DeltaReport delta(const MarginalSet& ms, double tol = 1e-9);

/// The same alternating sum applied to an arbitrary full-shape operator:
/// Delta(Z) = sum_{A proper} (-1)^{|A|} Z_A (x) 1_{N\A}, with Z_{empty} = Tr(Z).
HermitianOperator delta_map(const HermitianOperator& z);

/// Reduced states of the maximally mixed state in full mode.
MarginalSet maximally_mixed_marginals(const SystemShape& shape);

/// (1 - x) * maximally-mixed + x * ms, entry by entry.
MarginalSet mix_with_identity(const MarginalSet& ms, double x);

/// a * ms1 + (1 - a) * ms2 for sets over identical subsets.
MarginalSet convex_mix(const MarginalSet& ms1, const MarginalSet& ms2, double a);

/// All nonempty proper subsets of {1..n}, ordered by size then lexicographically.
std::vector<Subset> proper_subsets(int n, bool include_empty = false);

}  // namespace qmarg
