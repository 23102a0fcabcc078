#include "qmarg/witness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qmarg {

namespace {

Subset local_labels(const Subset& outer, const Subset& inner) {
  Subset out;
  for (int g : inner) {
    auto it = std::lower_bound(outer.begin(), outer.end(), g);
    out.push_back(static_cast<int>(it - outer.begin()) + 1);
  }
  return out;
}

bool contains(const Subset& outer, const Subset& inner) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

// Owner of the inclusion-exclusion term for a proper nonempty subset A.
int owner_of(const Subset& a, int n) {
  for (int i : a) {
    const int next = i % n + 1;
    if (!std::binary_search(a.begin(), a.end(), next)) return i;
  }
  throw InvalidInput("no owner for the full set");
}

}  // namespace

Witness::Witness(SystemShape shape, std::vector<Subset> systems, std::vector<HermitianOperator> parts)
    : shape_(std::move(shape)), systems_(std::move(systems)), parts_(std::move(parts)) {
  if (systems_.size() != parts_.size()) throw InvalidInput("witness needs one subset per part");
  if (parts_.empty()) throw InvalidInput("witness needs at least one part");
  for (std::size_t k = 0; k < parts_.size(); ++k) {
    validate_subset(systems_[k], shape_.size());
    if (!(parts_[k].shape() == shape_.restrict_to(systems_[k])))
      throw InvalidInput("witness part dimension does not match its subsystems");
  }
}

Witness Witness::from_omitted(SystemShape shape, std::vector<HermitianOperator> parts) {
  std::vector<Subset> systems;
  for (int i = 1; i <= shape.size(); ++i) systems.push_back(shape.complement({i}));
  if (parts.size() != systems.size()) throw InvalidInput("need one witness part per omitted system");
  return Witness(std::move(shape), std::move(systems), std::move(parts));
}

bool Witness::omitted_layout() const {
  if (static_cast<int>(systems_.size()) != shape_.size()) return false;
  for (int i = 1; i <= shape_.size(); ++i)
    if (systems_[i - 1] != shape_.complement({i})) return false;
  return true;
}

const HermitianOperator& Witness::omitting(int i) const {
  if (!omitted_layout()) throw InvalidInput("witness is not in the omitted-system layout");
  if (i < 1 || i > shape_.size()) throw InvalidInput("system label out of range");
  return parts_[i - 1];
}

Witness& Witness::operator*=(double s) {
  for (auto& p : parts_) p *= s;
  return *this;
}

Witness& Witness::operator+=(const Witness& o) {
  if (!(shape_ == o.shape_) || systems_ != o.systems_) throw InvalidInput("witness layouts differ");
  for (std::size_t k = 0; k < parts_.size(); ++k) parts_[k] += o.parts_[k];
  return *this;
}

double pairing(const Witness& w, const MarginalSet& ms) {
  if (!(w.shape() == ms.shape())) throw InvalidInput("witness and marginals have different shapes");
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const auto* known = ms.find(w.systems()[k]);
    const Matrix rho = known != nullptr ? known->matrix() : derive_submarginal(ms, w.systems()[k]).matrix();
    s += trace_product(w.parts()[k].matrix(), rho);
  }
  return s;
}

double inner(const Witness& a, const Witness& b) {
  if (!(a.shape() == b.shape()) || a.systems() != b.systems()) throw InvalidInput("witness layouts differ");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += trace_product(a.parts()[k].matrix(), b.parts()[k].matrix());
  return s;
}

HermitianOperator p_of(const Witness& w) {
  auto out = HermitianOperator::zero(w.shape());
  for (std::size_t k = 0; k < w.size(); ++k) out += embed(w.parts()[k], w.systems()[k], w.shape());
  return out;
}

bool is_witness(const Witness& w, double tol) { return min_eigenvalue(p_of(w)) >= -tol; }

PFormReport certify_p_form(const HermitianOperator& z, double tol) {
  const auto coeffs = expand(z);
  const IndexSets idx(z.shape());
  const double dim = z.shape().total();
  PFormReport rep;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto& m = idx.all()[k];
    if (in_IC(m)) continue;
    const double v = std::abs(coeffs[k]) / dim;
    if (rep.worst.empty() || v > rep.max_violation) {
      rep.max_violation = v;
      rep.worst = m;
    }
  }
  rep.is_p_form = rep.max_violation <= tol;
  return rep;
}

Witness extract_witness(const HermitianOperator& z, double tol) {
  const auto& shape = z.shape();
  const int n = shape.size();
  if (n < 2) throw InvalidInput("witness extraction needs at least two systems");
  const auto rep = certify_p_form(z, tol);
  if (!rep.is_p_form) {
    std::ostringstream os;
    os << "operator is not of p-form (max |Tr(Z B_m)| outside I_C = " << rep.max_violation << ")";
    throw InvalidInput(os.str());
  }
  std::vector<HermitianOperator> parts;
  std::vector<Subset> omitted;
  for (int i = 1; i <= n; ++i) {
    omitted.push_back(shape.complement({i}));
    parts.push_back(HermitianOperator::zero(shape.restrict_to(omitted.back())));
  }
  const double full_sign = (n % 2 == 0) ? 1.0 : -1.0;
  const double identity_share = -full_sign * z.trace() / (static_cast<double>(n) * shape.total());
  for (int i = 1; i <= n; ++i)
    parts[i - 1] += identity_share * HermitianOperator::identity(parts[i - 1].shape());

  for (const auto& a : proper_subsets(n)) {
    const int i = owner_of(a, n);
    const Subset rest = shape.complement(a);
    const double sign = (a.size() % 2 == 0) ? 1.0 : -1.0;
    const double w = -sign / shape.total_of(a);
    const auto& host = omitted[i - 1];
    parts[i - 1] += w * embed(reduce_to(z, rest), local_labels(host, rest), parts[i - 1].shape());
  }
  return Witness(shape, std::move(omitted), std::move(parts));
}

Witness extract_witness_on(const HermitianOperator& z, const std::vector<Subset>& systems, double tol) {
  const auto& shape = z.shape();
  if (systems.empty()) throw InvalidInput("need at least one subset");
  const auto coeffs = expand(z);
  const IndexSets idx(shape);
  const double dim = shape.total();
  std::vector<std::vector<double>> local(systems.size());
  std::vector<IndexSets> local_idx;
  for (std::size_t k = 0; k < systems.size(); ++k) {
    validate_subset(systems[k], shape.size());
    local_idx.emplace_back(shape.restrict_to(systems[k]));
    local[k].assign(local_idx.back().size(), 0.0);
  }
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto& m = idx.all()[r];
    const Subset s = support(m);
    std::size_t owner = systems.size();
    for (std::size_t k = 0; k < systems.size() && owner == systems.size(); ++k)
      if (contains(systems[k], s)) owner = k;
    if (owner == systems.size()) {
      if (std::abs(coeffs[r]) / dim > tol)
        throw InvalidInput("operator has a component outside the given subsets");
      continue;
    }
    MultiIndex lm;
    for (int sys : systems[owner]) lm.push_back(m[sys - 1]);
    const double pad = shape.total() / static_cast<double>(shape.total_of(systems[owner]));
    local[owner][local_idx[owner].rank(lm)] = coeffs[r] / pad;
  }
  std::vector<HermitianOperator> parts;
  for (std::size_t k = 0; k < systems.size(); ++k) parts.push_back(synthesize(shape.restrict_to(systems[k]), local[k]));
  return Witness(shape, systems, std::move(parts));
}

Witness normalize(const Witness& w) {
  const double tr = p_of(w).trace();
  if (!(tr > 0.0)) throw InvalidInput("cannot normalize: Tr(p(W)) is not positive");
  return (1.0 / tr) * w;
}

Tangency tangency(const Witness& w, double tol) {
  Tangency t;
  t.lambda_min = min_eigenvalue(p_of(w));
  if (t.lambda_min < -kWitnessTol) throw InvalidInput("not a compatibility witness: p(W) has a negative eigenvalue");
  t.tangential = std::abs(t.lambda_min) <= tol;
  return t;
}

Witness refine(const Witness& w, const Witness& p) {
  if (!(w.shape() == p.shape()) || w.systems() != p.systems()) throw InvalidInput("witness layouts differ");
  const auto t = tangency(w);
  if (t.tangential) throw InvalidInput("witness is already tangential");
  for (const auto& part : p.parts())
    if (min_eigenvalue(part) < -kWitnessTol) throw InvalidInput("every part of P must be positive semidefinite");
  const double p_max = max_eigenvalue(p_of(p));
  if (!(p_max > 0.0)) throw InvalidInput("p(P) has no positive eigenvalue");
  return w + (-t.lambda_min / p_max) * p;
}

Witness delta_witness(const HermitianOperator& z) {
  const int n = z.shape().size();
  if (n % 2 == 0) throw InvalidInput("Delta witnesses require an odd number of systems");
  if (min_eigenvalue(z) < -kWitnessTol) throw InvalidInput("Delta witnesses require Z >= 0");
  return extract_witness(delta_map(z));
}

Witness identity_witness(const SystemShape& shape) {
  std::vector<HermitianOperator> parts;
  for (int i = 1; i <= shape.size(); ++i) {
    const auto sub = shape.restrict_to(shape.complement({i}));
    parts.push_back((static_cast<double>(shape.dim(i)) / shape.total()) * HermitianOperator::identity(sub));
  }
  return Witness::from_omitted(shape, std::move(parts));
}

Witness unit_parts_witness(const SystemShape& shape) {
  std::vector<HermitianOperator> parts;
  for (int i = 1; i <= shape.size(); ++i)
    parts.push_back(HermitianOperator::identity(shape.restrict_to(shape.complement({i}))));
  return Witness::from_omitted(shape, std::move(parts));
}

}  // namespace qmarg
