#pragma once

// Reference implementations for cross-checking the main pipeline. Nothing
// here calls the marginal-model, SDP or witness code; only the tensor
// primitives and the basis elements are shared.

#include <cstdint>
#include <random>
#include <vector>

#include "qmarg/basis.hpp"
#include "qmarg/identical.hpp"
#include "qmarg/marginals.hpp"
#include "qmarg/tensor.hpp"

namespace qmarg::oracle {

/// Seeded stream with portable uniform and normal variates (the standard
/// distributions are implementation-defined, so they are not used).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Box-Muller).
  double normal();
  /// Real and imaginary parts independent N(0, 1/2).
  Complex complex_normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Complex Ginibre matrix with N(0, 1/2) real and imaginary parts.
Matrix ginibre(int rows, int cols, Rng& rng);

/// G G^dagger / Tr(G G^dagger) with G square Ginibre.
DensityState random_density(const SystemShape& shape, Rng& rng);
DensityState random_density(const SystemShape& shape, std::uint64_t seed);

/// Haar-random unitary (QR of a Ginibre matrix with phases fixed).
Matrix random_unitary(int dim, Rng& rng);

/// (G + G^dagger)/2 for Ginibre G.
HermitianOperator random_hermitian(const SystemShape& shape, Rng& rng);

/// The n reduced states omitting one system each.
MarginalSet marginals_of(const DensityState& rho);
/// Reduced states on the listed subsets.
MarginalSet marginals_of(const DensityState& rho, const std::vector<Subset>& subsets);

/// Minimum of sum_{i<j} H2_(ij) / C(n,2) over the (anti)symmetric subspace,
/// built by averaging the n! permutation operators.
double exact_ground_energy(const TwoBodyHamiltonian& h, const ParticleSystem& ps);

struct Grid {
  double lo = -1.0;
  double hi = 1.0;
  int points = 101;
};

struct FiberGridResult {
  /// Largest minimum eigenvalue found on the grid.
  double best = 0.0;
  /// Grid point attaining it, one coordinate per direction.
  std::vector<double> argmax;
  /// Spacing of the grid.
  double step = 0.0;
};

/// Grid search of max lambda_min(X0 + sum_k x_k B_{m_k}) where X0 is the
/// Frobenius-minimal operator with the given marginals (a least-squares
/// solution of the partial-trace equations). Every grid point is a member of
/// the fiber, so the result bounds -t* from below.
/// Throws InvalidInput for more than two directions or a degenerate grid.
FiberGridResult fiber_grid_min_eig(const MarginalSet& ms, const std::vector<MultiIndex>& directions,
                                   const Grid& grid = {});

/// The least-squares base point used by fiber_grid_min_eig.
HermitianOperator minimal_fiber_point(const MarginalSet& ms);

}  // namespace qmarg::oracle
