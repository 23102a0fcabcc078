#pragma once

#include <vector>

#include "qmarg/basis.hpp"
#include "qmarg/marginals.hpp"
#include "qmarg/tensor.hpp"

namespace qmarg {

inline constexpr double kWitnessTol = 1e-9;

/// Operators W_A, one per subset A, acting on the systems in A.
///
/// The usual case has one part per omitted system i, i.e. A = N \ {i}
/// listed for i = 1..n. Partial-knowledge certificates use the subsets of
/// the known marginals instead.
class Witness {
 public:
  Witness(SystemShape shape, std::vector<Subset> systems, std::vector<HermitianOperator> parts);

  /// Parts W_1..W_n with W_i acting on every system except i.
  static Witness from_omitted(SystemShape shape, std::vector<HermitianOperator> parts);

  const SystemShape& shape() const { return shape_; }
  const std::vector<Subset>& systems() const { return systems_; }
  const std::vector<HermitianOperator>& parts() const { return parts_; }
  std::size_t size() const { return parts_.size(); }
  /// True when the parts are exactly W_1..W_n in the omitted-system layout.
  bool omitted_layout() const;
  /// W_i for the omitted-system layout (1-based).
  const HermitianOperator& omitting(int i) const;

  Witness& operator*=(double s);
  Witness& operator+=(const Witness& o);
  friend Witness operator*(double s, Witness w) { return w *= s; }
  friend Witness operator+(Witness a, const Witness& b) { return a += b; }

 private:
  SystemShape shape_;
  std::vector<Subset> systems_;
  std::vector<HermitianOperator> parts_;
};

/// sum_A Tr(W_A rho_A), where rho_A is read off (or derived from) the
/// marginal set.
double pairing(const Witness& w, const MarginalSet& ms);

/// sum_A Tr(W_A O_A) for two witnesses over the same subsets.
double inner(const Witness& a, const Witness& b);

/// p(W) = sum_A W_A (x) 1_{N \ A}.
HermitianOperator p_of(const Witness& w);

/// p(W) >= -tol.
bool is_witness(const Witness& w, double tol = kWitnessTol);

struct PFormReport {
  bool is_p_form = false;
  /// max |Tr(Z B_m)| over m outside I_C
  double max_violation = 0.0;
  MultiIndex worst;
};

/// Z = p(W) for some W iff Tr(Z B_m) vanishes for every m outside I_C.
PFormReport certify_p_form(const HermitianOperator& z, double tol = kWitnessTol);

/// Inclusion-exclusion decomposition of a p-form Z into W_1..W_n.
///
/// A runs over the traced-out sets. The term Tr_A Z of a proper nonempty A
/// goes to W_i for the first i in A whose cyclic successor (i mod n) + 1 is
/// not in A; for n = 3 this gives W_1 <- Tr_1 Z, Tr_13 Z; W_2 <- Tr_2 Z,
/// Tr_12 Z; W_3 <- Tr_3 Z, Tr_23 Z. The A = N term is a multiple of the
/// identity and is shared equally.
/// Throws InvalidInput when Z is not of p-form within `tol`.
Witness extract_witness(const HermitianOperator& z, double tol = kWitnessTol);

/// Decomposition of a Z whose basis coefficients are supported on the
/// given subsets: each coefficient goes to the first subset containing its
/// support. Throws InvalidInput when a coefficient above `tol` is not covered.
Witness extract_witness_on(const HermitianOperator& z, const std::vector<Subset>& systems,
                           double tol = kWitnessTol);

/// Rescales so that Tr(p(W)) = 1. Throws when Tr(p(W)) <= 0.
Witness normalize(const Witness& w);

struct Tangency {
  double lambda_min = 0.0;
  bool tangential = false;
};

/// Smallest eigenvalue of p(W); tangential when it vanishes within tol.
/// Throws InvalidInput when W is not a witness.
Tangency tangency(const Witness& w, double tol = 1e-8);

/// W' = W - (lambda_min(p(W)) / lambda_max(p(P))) P.
///
/// P must have every part positive semidefinite, so that it pairs
/// nonnegatively with every marginal vector. W must be a non-tangential
/// witness.
Witness refine(const Witness& w, const Witness& p);

/// Witness with p(W) = Delta(Z) for Z >= 0 (n odd).
Witness delta_witness(const HermitianOperator& z);

/// The marginal vector of the maximally mixed state, (1/D)(d_1 1, ..., d_n 1).
Witness identity_witness(const SystemShape& shape);

/// Witness with every part equal to the identity on its subsystems.
Witness unit_parts_witness(const SystemShape& shape);

}  // namespace qmarg
