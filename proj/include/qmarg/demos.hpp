#pragma once

#include "qmarg/marginals.hpp"
#include "qmarg/witness.hpp"

namespace qmarg::demos {

/// Three qubits, every two-qubit marginal equal to |Psi+><Psi+| with
/// |Psi+> = (|00> + |11>)/sqrt(2).
MarginalSet bell_triple();

/// Closed-form witness for the Bell triple:
/// W_i = -1/12 + (|Psi-><Psi-| + |Phi+><Phi+|)/4 with
/// |Psi-> = (|00> - |11>)/sqrt(2), |Phi+> = (|01> + |10>)/sqrt(2).
Witness bell_witness();

/// rho_k(p) = (1 - p) Tr_k sigma + p |Psi+><Psi+|, sigma = |1><1| (x) 1 (x) 1 / 4.
/// Throws InvalidInput unless 0 <= p <= 1.
MarginalSet butterley_marginals(double p);

/// The published 8x8 certificate for p = 1/4 (integer numerators over 1e5).
HermitianOperator published_z();
/// Integer numerators of published_z(), row major.
const int (&published_z_numerators())[8][8];

/// diag(0,0,0,0,2913,23859,23859,44805) * scale + alpha * 1. The published
/// scale is 1e-6; with 1e-5 the diagonal of Z + Z' no longer depends on the
/// first qubit.
HermitianOperator published_z_prime(double alpha, double scale = 1e-6);

}  // namespace qmarg::demos
