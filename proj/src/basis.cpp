#include "qmarg/basis.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace qmarg {

namespace {

SiteBasis make_site_basis(int d) {
  SiteBasis b;
  b.d = d;
  const double scale = 1.0 / std::sqrt(2.0 * d);
  b.elements.push_back(Matrix::Identity(d, d) / static_cast<double>(d));
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      Matrix s = Matrix::Zero(d, d);
      s(j, k) = s(k, j) = 1.0;
      b.elements.push_back(s * scale);
      Matrix a = Matrix::Zero(d, d);
      a(j, k) = Complex(0.0, -1.0);
      a(k, j) = Complex(0.0, 1.0);
      b.elements.push_back(a * scale);
    }
  for (int l = 1; l < d; ++l) {
    Matrix g = Matrix::Zero(d, d);
    const double c = std::sqrt(2.0 / (l * (l + 1.0)));
    for (int j = 0; j < l; ++j) g(j, j) = c;
    g(l, l) = -c * l;
    b.elements.push_back(g * scale);
  }
  return b;
}

// Applies a linear map to one "paired" leg of a tensor whose legs are the
// (row, column) index pairs of each subsystem. `legs[k]` is the current size
// of leg k; `map` is new_size x old_size.
std::vector<Complex> mode_product(const std::vector<Complex>& in, const std::vector<int>& legs, int k,
                                  const Matrix& map) {
  int inner = 1;
  for (std::size_t j = k + 1; j < legs.size(); ++j) inner *= legs[j];
  int outer = 1;
  for (int j = 0; j < k; ++j) outer *= legs[j];
  const int old_size = legs[k];
  const int new_size = static_cast<int>(map.rows());
  std::vector<Complex> out(static_cast<std::size_t>(outer) * new_size * inner, 0.0);
  for (int o = 0; o < outer; ++o)
    for (int m = 0; m < new_size; ++m)
      for (int p = 0; p < old_size; ++p) {
        const Complex w = map(m, p);
        if (w == Complex(0.0)) continue;
        const Complex* src = &in[(static_cast<std::size_t>(o) * old_size + p) * inner];
        Complex* dst = &out[(static_cast<std::size_t>(o) * new_size + m) * inner];
        for (int i = 0; i < inner; ++i) dst[i] += w * src[i];
      }
  return out;
}

// Reorders a D x D matrix into the paired-leg layout (i_1 j_1)(i_2 j_2)...
std::vector<Complex> to_paired(const Matrix& m, const SystemShape& shape) {
  const int n = shape.size();
  const int dim = shape.total();
  std::vector<Complex> out(static_cast<std::size_t>(dim) * dim);
  std::vector<int> ri(n), ci(n);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      int rr = r, cc = c;
      for (int k = n - 1; k >= 0; --k) {
        const int d = shape.dims()[k];
        ri[k] = rr % d;
        ci[k] = cc % d;
        rr /= d;
        cc /= d;
      }
      std::size_t idx = 0;
      for (int k = 0; k < n; ++k) {
        const int d = shape.dims()[k];
        idx = idx * d * d + ri[k] * d + ci[k];
      }
      out[idx] = m(r, c);
    }
  }
  return out;
}

Matrix from_paired(const std::vector<Complex>& t, const SystemShape& shape) {
  const int n = shape.size();
  const int dim = shape.total();
  Matrix m(dim, dim);
  std::vector<int> ri(n), ci(n);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      int rr = r, cc = c;
      for (int k = n - 1; k >= 0; --k) {
        const int d = shape.dims()[k];
        ri[k] = rr % d;
        ci[k] = cc % d;
        rr /= d;
        cc /= d;
      }
      std::size_t idx = 0;
      for (int k = 0; k < n; ++k) {
        const int d = shape.dims()[k];
        idx = idx * d * d + ri[k] * d + ci[k];
      }
      m(r, c) = t[idx];
    }
  return m;
}

// analysis[m][(i,j)] = d * B_m(j, i), so that coefficient_m = d Tr(X B_m).
Matrix analysis_map(int d) {
  const auto& b = site_basis(d);
  Matrix a(d * d, d * d);
  for (int m = 0; m < d * d; ++m)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(m, i * d + j) = static_cast<double>(d) * b.elements[m](j, i);
  return a;
}

// synthesis[(i,j)][m] = B_m(i, j).
Matrix synthesis_map(int d) {
  const auto& b = site_basis(d);
  Matrix s(d * d, d * d);
  for (int m = 0; m < d * d; ++m)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) s(i * d + j, m) = b.elements[m](i, j);
  return s;
}

}  // namespace

const SiteBasis& site_basis(int d) {
  if (d < 2) throw InvalidInput("site basis requires d >= 2");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<SiteBasis>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[d];
  if (!slot) slot = std::make_unique<SiteBasis>(make_site_basis(d));
  return *slot;
}

HermitianOperator basis_element(const SystemShape& shape, const MultiIndex& m) {
  if (static_cast<int>(m.size()) != shape.size()) throw InvalidInput("multi-index length does not match shape");
  std::vector<HermitianOperator> factors;
  factors.reserve(m.size());
  for (int k = 0; k < shape.size(); ++k) {
    const int d = shape.dims()[k];
    if (m[k] < 1 || m[k] > d * d) throw InvalidInput("multi-index component out of range");
    factors.emplace_back(SystemShape({d}), site_basis(d).elements[m[k] - 1]);
  }
  if (factors.empty()) return HermitianOperator(SystemShape(), Matrix::Ones(1, 1));
  return kron(std::span<const HermitianOperator>(factors));
}

Subset support(const MultiIndex& m) {
  Subset s;
  for (std::size_t k = 0; k < m.size(); ++k)
    if (m[k] != 1) s.push_back(static_cast<int>(k) + 1);
  return s;
}

bool in_IC(const MultiIndex& m) {
  for (int v : m)
    if (v == 1) return true;
  return false;
}

bool in_Ik(const MultiIndex& m, int k) { return m.at(k - 1) == 1; }

IndexSets::IndexSets(SystemShape shape) : shape_(std::move(shape)) {
  const int n = shape_.size();
  MultiIndex cur(n, 1);
  std::size_t count = 1;
  for (int d : shape_.dims()) count *= static_cast<std::size_t>(d) * d;
  all_.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    all_.push_back(cur);
    for (int k = n - 1; k >= 0; --k) {
      const int dd = shape_.dims()[k] * shape_.dims()[k];
      if (++cur[k] <= dd) break;
      cur[k] = 1;
    }
  }
}

std::vector<MultiIndex> IndexSets::ic() const {
  std::vector<MultiIndex> out;
  for (const auto& m : all_)
    if (in_IC(m)) out.push_back(m);
  return out;
}

std::vector<MultiIndex> IndexSets::ik(int k) const {
  std::vector<MultiIndex> out;
  for (const auto& m : all_)
    if (in_Ik(m, k)) out.push_back(m);
  return out;
}

std::vector<MultiIndex> IndexSets::complement_of_ic() const {
  std::vector<MultiIndex> out;
  for (const auto& m : all_)
    if (!in_IC(m)) out.push_back(m);
  return out;
}

std::size_t IndexSets::rank(const MultiIndex& m) const {
  std::size_t r = 0;
  for (int k = 0; k < shape_.size(); ++k) {
    const int dd = shape_.dims()[k] * shape_.dims()[k];
    r = r * dd + static_cast<std::size_t>(m.at(k) - 1);
  }
  return r;
}

std::vector<double> expand(const HermitianOperator& z) {
  const auto& shape = z.shape();
  std::vector<int> legs;
  for (int d : shape.dims()) legs.push_back(d * d);
  auto t = to_paired(z.matrix(), shape);
  for (int k = 0; k < shape.size(); ++k) t = mode_product(t, legs, k, analysis_map(shape.dims()[k]));
  // Each leg contributed a factor d_k; together they give D Tr(Z B_m).
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[i].real();
  return out;
}

HermitianOperator synthesize(const SystemShape& shape, const std::vector<double>& coeffs) {
  std::vector<int> legs;
  std::size_t count = 1;
  for (int d : shape.dims()) {
    legs.push_back(d * d);
    count *= static_cast<std::size_t>(d) * d;
  }
  if (coeffs.size() != count) throw InvalidInput("coefficient vector has the wrong length");
  std::vector<Complex> t(coeffs.begin(), coeffs.end());
  for (int k = 0; k < shape.size(); ++k) t = mode_product(t, legs, k, synthesis_map(shape.dims()[k]));
  return HermitianOperator(shape, from_paired(t, shape));
}

double basis_overlap(const HermitianOperator& z, const MultiIndex& m) {
  const auto& shape = z.shape();
  if (static_cast<int>(m.size()) != shape.size()) throw InvalidInput("multi-index length does not match shape");
  // Contract one leg at a time: the leg k block (i_k, j_k) is paired with B(j_k, i_k).
  std::vector<int> legs;
  for (int d : shape.dims()) legs.push_back(d * d);
  auto t = to_paired(z.matrix(), shape);
  for (int k = 0; k < shape.size(); ++k) {
    const int d = shape.dims()[k];
    if (m[k] < 1 || m[k] > d * d) throw InvalidInput("multi-index component out of range");
    const auto& b = site_basis(d).elements[m[k] - 1];
    Matrix row(1, d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) row(0, i * d + j) = b(j, i);
    t = mode_product(t, legs, k, row);
    legs[k] = 1;
  }
  return t[0].real();
}

}  // namespace qmarg
