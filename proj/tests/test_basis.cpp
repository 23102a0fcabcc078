#include <set>

#include "doctest.h"
#include "qmarg/basis.hpp"
#include "qmarg/demos.hpp"
#include "qmarg/oracle.hpp"
#include "support.hpp"

using namespace qmarg;

namespace {

Eigen::MatrixXd gram(const SiteBasis& b) {
  const int m = static_cast<int>(b.elements.size());
  Eigen::MatrixXd g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = trace_product(b.elements[i], b.elements[j]);
  return g;
}

}  // namespace

TEST_CASE("qubit site basis is identity and Paulis over two") {
  const auto& b = site_basis(2);
  REQUIRE(b.elements.size() == 4);
  CHECK(max_norm(b.elements[0] - 0.5 * Matrix::Identity(2, 2)) < 1e-15);
  int matched = 0;
  for (char c : {'x', 'y', 'z'})
    for (int k = 1; k < 4; ++k)
      if (max_norm(b.elements[k] - 0.5 * testing::pauli(c)) < 1e-15 ||
          max_norm(b.elements[k] + 0.5 * testing::pauli(c)) < 1e-15)
        ++matched;
  CHECK(matched == 3);
  CHECK((gram(b) - 0.5 * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("site basis trace conditions for several dimensions") {
  for (int d : {2, 3, 4, 5}) {
    const auto& b = site_basis(d);
    REQUIRE(static_cast<int>(b.elements.size()) == d * d);
    CHECK((gram(b) - Eigen::MatrixXd::Identity(d * d, d * d) / d).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(b.elements[0].trace() - Complex(1.0)) < 1e-12);
    for (int k = 1; k < d * d; ++k) CHECK(std::abs(b.elements[k].trace()) < 1e-12);
    for (const auto& e : b.elements) CHECK(max_norm(e - e.adjoint()) == 0.0);
  }
  CHECK_THROWS_AS(site_basis(1), InvalidInput);
}

TEST_CASE("tensor basis elements") {
  const SystemShape shape({2, 2, 2});
  CHECK(max_norm(basis_element(shape, {1, 1, 1}).matrix() - Matrix::Identity(8, 8) / 8.0) < 1e-15);

  oracle::Rng rng(21);
  const IndexSets idx(shape);
  for (int trial = 0; trial < 20; ++trial) {
    const auto& m = idx.all()[static_cast<std::size_t>(rng.uniform() * idx.size())];
    const auto& n = idx.all()[static_cast<std::size_t>(rng.uniform() * idx.size())];
    const double expect = (m == n) ? 1.0 / 8.0 : 0.0;
    CHECK(std::abs(trace_product(basis_element(shape, m).matrix(), basis_element(shape, n).matrix()) - expect) <
          1e-12);
  }

  const auto t = basis_element(shape, {2, 3, 4});
  for (int k = 1; k <= 3; ++k) CHECK(max_norm(partial_trace(t, {k}).matrix()) < 1e-15);
  CHECK_THROWS_AS(basis_element(shape, {1, 5, 1}), InvalidInput);
  CHECK_THROWS_AS(basis_element(shape, {1, 1}), InvalidInput);
}

TEST_CASE("index set counts") {
  const IndexSets q3(SystemShape({2, 2, 2}));
  CHECK(q3.size() == 64);
  CHECK(q3.complement_of_ic().size() == 27);
  CHECK(q3.ic().size() == 37);

  const IndexSets q1(SystemShape({2}));
  CHECK(q1.ic() == std::vector<MultiIndex>{{1}});
  CHECK(q1.complement_of_ic().size() == 3);

  CHECK(IndexSets(SystemShape({3, 3})).complement_of_ic().size() == 64);

  std::set<MultiIndex> uni;
  for (int k = 1; k <= 3; ++k)
    for (const auto& m : q3.ik(k)) uni.insert(m);
  const auto ic = q3.ic();
  CHECK(uni == std::set<MultiIndex>(ic.begin(), ic.end()));
}

TEST_CASE("enumeration order is lexicographic with the first index slowest") {
  const IndexSets idx(SystemShape({2, 3}));
  CHECK(idx.all().front() == MultiIndex{1, 1});
  CHECK(idx.all()[1] == MultiIndex{1, 2});
  CHECK(idx.all()[9] == MultiIndex{2, 1});
  CHECK(idx.all().back() == MultiIndex{4, 9});
  for (std::size_t k = 0; k < idx.size(); ++k) CHECK(idx.rank(idx.all()[k]) == k);
  CHECK(std::is_sorted(idx.all().begin(), idx.all().end()));
}

TEST_CASE("expand and synthesize") {
  const SystemShape shape({2, 3});
  const auto coeffs = expand(DensityState::maximally_mixed(shape).op());
  CHECK(coeffs[0] == doctest::Approx(1.0));
  for (std::size_t k = 1; k < coeffs.size(); ++k) CHECK(std::abs(coeffs[k]) < 1e-14);

  oracle::Rng rng(22);
  for (int trial = 0; trial < 5; ++trial) {
    const auto z = oracle::random_hermitian(shape, rng);
    CHECK(max_norm(synthesize(shape, expand(z)).matrix() - z.matrix()) < 1e-10);
    const IndexSets idx(shape);
    const auto c = expand(z);
    for (std::size_t k = 0; k < idx.size(); k += 7)
      CHECK(std::abs(basis_overlap(z, idx.all()[k]) * shape.total() - c[k]) < 1e-12);
  }

  const auto pz = expand(demos::published_z());
  const IndexSets q3(SystemShape({2, 2, 2}));
  for (const auto& m : q3.complement_of_ic()) CHECK(std::abs(pz[q3.rank(m)]) < 1e-9);
}

TEST_CASE("partial trace over k of basis elements in I_k") {
  const SystemShape shape({2, 2, 2});
  const IndexSets idx(shape);
  for (int k = 1; k <= 3; ++k) {
    const auto reduced_shape = shape.restrict_to(shape.complement({k}));
    for (const auto& m : idx.ik(k)) {
      MultiIndex rest;
      for (int j = 1; j <= 3; ++j)
        if (j != k) rest.push_back(m[j - 1]);
      // Tracing B_{k,1} = 1/d leaves the remaining factors unchanged.
      CHECK(max_norm(partial_trace(basis_element(shape, m), {k}).matrix() -
                     basis_element(reduced_shape, rest).matrix()) < 1e-15);
    }
  }
}
