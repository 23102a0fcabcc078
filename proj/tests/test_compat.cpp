#include "doctest.h"
#include "qmarg/basis.hpp"
#include "qmarg/compat.hpp"
#include "qmarg/demos.hpp"
#include "qmarg/oracle.hpp"
#include "support.hpp"

using namespace qmarg;

namespace {

const SystemShape kQubits3({2, 2, 2});

// Bounds every solve in this file has to meet.
void check_solve(const Verdict& v) {
  CHECK(std::abs(v.gap) <= 1e-8);
  CHECK(v.residuals.complementarity <= 1e-7);
  CHECK(v.residuals.dual_min_eig >= -1e-9);
  CHECK(v.residuals.dual_infeasibility <= 1e-8);
}

void check_reproduces(const DensityState& rho, const MarginalSet& ms) {
  CHECK(rho.op().trace() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(min_eigenvalue(rho.op()) >= -1e-8);
  for (const auto& e : ms.entries())
    CHECK(max_norm(reduce_to(rho.op(), e.systems).matrix() - e.state.matrix()) <= 1e-8);
}

void check_certificate(const Verdict& v, const MarginalSet& ms) {
  REQUIRE(v.kind == VerdictKind::incompatible);
  REQUIRE(v.witness.has_value());
  REQUIRE(v.pairing_value.has_value());
  CHECK(*v.pairing_value < 0.0);
  CHECK(is_witness(*v.witness));
  // Recomputed from the parts alone.
  CHECK(pairing(*v.witness, ms) == doctest::Approx(*v.pairing_value).epsilon(1e-12));
}

// Qubit site-basis position of sigma_z / 2 and sigma_x / 2.
int pauli_slot(char c) {
  const auto& b = site_basis(2);
  for (int k = 1; k < 4; ++k)
    if (max_norm(b.elements[k] - 0.5 * testing::pauli(c)) < 1e-15) return k + 1;
  return -1;
}

MarginalSet diagonal_pair(double a0, double b0) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = a0;
  a(1, 1) = 1.0 - a0;
  Matrix b = Matrix::Zero(2, 2);
  b(0, 0) = b0;
  b(1, 1) = 1.0 - b0;
  const SystemShape one({2});
  return MarginalSet::from_omitted(SystemShape({2, 2}), {DensityState(HermitianOperator(one, b)),
                                                          DensityState(HermitianOperator(one, a))});
}

}  // namespace

TEST_CASE("bell triple is incompatible") {
  const auto ms = demos::bell_triple();
  const auto v = check_compatibility(ms);
  check_solve(v);
  CHECK(v.t_star > 0.0);
  CHECK(v.t_star == doctest::Approx(0.25).epsilon(1e-9));
  CHECK_FALSE(v.boundary);
  CHECK_FALSE(v.state.has_value());
  check_certificate(v, ms);
  CHECK(*v.pairing_value <= -1e-3);
  CHECK_THROWS_AS(reconstruct_state(ms, v), InvalidInput);
}

TEST_CASE("maximally mixed marginals sit in the interior") {
  const auto ms = maximally_mixed_marginals(kQubits3);
  const auto v = check_compatibility(ms);
  check_solve(v);
  REQUIRE(v.kind == VerdictKind::compatible);
  CHECK(v.t_star <= -1.0 / 8.0 + 1e-8);
  REQUIRE(v.state.has_value());
  CHECK(max_norm(v.state->matrix() - Matrix::Identity(8, 8) / 8.0) <= 1e-8);

  Verdict zero = v;
  zero.x.setZero();
  CHECK(max_norm(reconstruct_state(ms, zero).matrix() - Matrix::Identity(8, 8) / 8.0) <= 1e-15);
}

TEST_CASE("marginals of random states are compatible") {
  oracle::Rng rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ms = oracle::marginals_of(oracle::random_density(kQubits3, rng));
    const auto v = check_compatibility(ms);
    check_solve(v);
    REQUIRE(v.kind == VerdictKind::compatible);
    CHECK(v.t_star <= 1e-7);
    REQUIRE(v.state.has_value());
    check_reproduces(*v.state, ms);
  }
  for (const auto& shape : {SystemShape({2, 3, 2}), SystemShape({2, 2, 2, 2})}) {
    const auto ms = oracle::marginals_of(oracle::random_density(shape, rng));
    const auto v = check_compatibility(ms);
    check_solve(v);
    REQUIRE(v.kind == VerdictKind::compatible);
    check_reproduces(reconstruct_state(ms, v), ms);
  }
}

TEST_CASE("butterley family") {
  const auto quarter = demos::butterley_marginals(0.25);
  CHECK(delta(quarter).passes());
  const auto v = check_compatibility(quarter);
  check_solve(v);
  check_certificate(v, quarter);
  CHECK(v.t_star == doctest::Approx(5.6537579e-4).epsilon(1e-6));
  CHECK(*v.pairing_value == doctest::Approx(trace_product(build_b0(quarter).matrix(), p_of(*v.witness).matrix())));
  CHECK(tangency(*v.witness).lambda_min <= 1e-6);

  const auto zero = demos::butterley_marginals(0.0);
  const auto v0 = check_compatibility(zero);
  check_solve(v0);
  REQUIRE(v0.kind == VerdictKind::compatible);
  REQUIRE(v0.state.has_value());
  check_reproduces(*v0.state, zero);
}

TEST_CASE("dual witnesses are tangential and pair to Tr(B0 Z)") {
  oracle::Rng rng(52);
  for (int trial = 0; trial < 10; ++trial) {
    // Push random marginals out of the compatible set by mixing in Bell pairs.
    const auto ms = convex_mix(demos::bell_triple(), oracle::marginals_of(oracle::random_density(kQubits3, rng)), 0.8);
    const auto v = check_compatibility(ms);
    check_solve(v);
    if (v.kind != VerdictKind::incompatible) continue;
    check_certificate(v, ms);
    CHECK(tangency(*v.witness).tangential);
    CHECK(std::abs(*v.pairing_value - trace_product(build_b0(ms).matrix(), p_of(*v.witness).matrix())) <= 1e-10);
  }
}

TEST_CASE("partial knowledge") {
  const auto psi = *demos::bell_triple().find({1, 2});
  const MarginalSet chain(kQubits3, {{{1, 2}, psi}, {{2, 3}, psi}});
  const auto v = check_compatibility(chain);
  check_solve(v);
  check_certificate(v, chain);
  CHECK(v.t_star == doctest::Approx(1.0 / 16.0).epsilon(1e-9));
  CHECK(v.witness->systems() == std::vector<Subset>{{1, 2}, {2, 3}});
  CHECK(v.released.size() == 9);
  REQUIRE(v.released_residuals.size() == v.released.size());
  for (double r : v.released_residuals) CHECK(r <= 1e-9);

  oracle::Rng rng(53);
  const auto rho = oracle::random_density(kQubits3, rng);
  const auto ms = oracle::marginals_of(rho, {{1, 2}, {2, 3}});
  const auto w = check_compatibility(ms);
  check_solve(w);
  REQUIRE(w.kind == VerdictKind::compatible);
  check_reproduces(reconstruct_state(ms, w), ms);
}

TEST_CASE("inconsistent input is rejected") {
  const SystemShape two({2, 2});
  Matrix up = Matrix::Zero(4, 4);
  up(0, 0) = 1.0;
  const DensityState a(HermitianOperator(two, up));
  const DensityState b(HermitianOperator(two, testing::outer(testing::ket({1, 0, 0, 1}))));
  CHECK_THROWS_AS(check_compatibility(MarginalSet(kQubits3, {{{1, 2}, a}, {{2, 3}, b}})), InvalidInput);
}

TEST_CASE("mixing threshold") {
  const auto compatible = oracle::marginals_of(oracle::random_density(kQubits3, 54));
  const auto one = mixing_threshold(compatible);
  CHECK(one.x_star == 1.0);
  CHECK(one.probes.size() == 1);

  const auto bell = demos::bell_triple();
  const auto r = mixing_threshold(bell);
  CHECK(r.x_star > 0.0);
  CHECK(r.x_star < 1.0);
  CHECK(r.upper - r.x_star <= 1e-4);
  CHECK(r.x_star == doctest::Approx(0.33331299).epsilon(1e-8));
  for (const auto& pr : r.probes) CHECK(pr.compatible == (pr.x <= r.x_star));
  for (double x : {0.05, 0.2, r.x_star - 1e-3, r.upper + 1e-3, 0.5, 0.9}) {
    const bool ok = check_compatibility(mix_with_identity(bell, x)).kind == VerdictKind::compatible;
    CHECK(ok == (x < r.x_star));
  }

  const auto full = mixing_threshold(demos::butterley_marginals(1.0));
  CHECK(full.x_star > 0.0);
}

TEST_CASE("compatibility survives mixing with the identity") {
  oracle::Rng rng(55);
  for (int trial = 0; trial < 5; ++trial) {
    const auto ms = oracle::marginals_of(oracle::random_density(kQubits3, rng));
    for (double x : {0.0, 0.3, 0.7, 1.0})
      CHECK(check_compatibility(mix_with_identity(ms, x)).kind == VerdictKind::compatible);
  }
}

TEST_CASE("two qubit fiber: grid search against the SDP") {
  const int z = pauli_slot('z');
  const int x = pauli_slot('x');
  REQUIRE(z > 0);
  REQUIRE(x > 0);
  const auto ms = diagonal_pair(0.7, 0.6);
  const auto v = check_compatibility(ms);
  check_solve(v);
  // Diagonal entries 0.42 + c, 0.18 - c, 0.28 - c, 0.12 + c balance at c = 0.03.
  CHECK(v.t_star == doctest::Approx(-0.15).epsilon(1e-9));

  // One direction: closed-form optimum along the ZZ line.
  const oracle::Grid line{-1.0, 1.0, 101};
  const auto g1 = oracle::fiber_grid_min_eig(ms, {{z, z}}, line);
  CHECK(std::abs(g1.best - 0.15) <= g1.step);

  const auto g2 = oracle::fiber_grid_min_eig(ms, {{z, z}, {x, x}}, line);
  CHECK(g2.best <= -v.t_star + 1e-12);
  CHECK(-v.t_star - g2.best <= 1e-2);

  // The base point is a (x) b - (a - 1/2) (x) (b - 1/2), so the optimum sits
  // at x_zz = 0.2; these grids miss it.
  const auto coarse = oracle::fiber_grid_min_eig(ms, {{z, z}, {x, x}}, {-0.9, 0.9, 11});
  const auto fine = oracle::fiber_grid_min_eig(ms, {{z, z}, {x, x}}, {-0.9, 0.9, 101});
  CHECK(-v.t_star - coarse.best > 1e-3);
  CHECK(-v.t_star - fine.best <= 0.5 * (-v.t_star - coarse.best));

  // Every grid point is a member of the fiber.
  CHECK(max_norm(reduce_to(oracle::minimal_fiber_point(ms), {1}).matrix() - ms.find({1})->matrix()) <= 1e-12);
}

TEST_CASE("off-diagonal two qubit fibers") {
  oracle::Rng rng(56);
  const int z = pauli_slot('z');
  const int x = pauli_slot('x');
  for (int trial = 0; trial < 3; ++trial) {
    const auto ms = oracle::marginals_of(oracle::random_density(SystemShape({2, 2}), rng));
    const auto v = check_compatibility(ms);
    check_solve(v);
    const auto g = oracle::fiber_grid_min_eig(ms, {{z, z}, {x, x}}, {-1.0, 1.0, 41});
    // A two-variable slice can only bound the full optimum from below.
    CHECK(g.best <= -v.t_star + 1e-9);
  }
}
