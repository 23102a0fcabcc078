#include "qmarg/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qmarg {

namespace {

bool contains(const Subset& outer, const Subset& inner) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

Subset intersect(const Subset& a, const Subset& b) {
  Subset out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Positions (1-based) of the global labels `inner` within the entry `outer`.
Subset local_labels(const Subset& outer, const Subset& inner) {
  Subset out;
  for (int g : inner) {
    auto it = std::lower_bound(outer.begin(), outer.end(), g);
    out.push_back(static_cast<int>(it - outer.begin()) + 1);
  }
  return out;
}

HermitianOperator reduce_entry(const MarginalEntry& e, const Subset& target) {
  return reduce_to(e.state.op(), local_labels(e.systems, target));
}

void require_consistent(const MarginalSet& ms, double tol) {
  const auto rep = check_consistency(ms, tol);
  if (!rep.consistent) {
    std::ostringstream os;
    os << "marginals are inconsistent on overlapping systems (max deviation " << rep.max_deviation << ")";
    throw InvalidInput(os.str());
  }
}

}  // namespace

std::vector<Subset> proper_subsets(int n, bool include_empty) {
  std::vector<Subset> out;
  if (include_empty) out.push_back({});
  for (int size = 1; size < n; ++size) {
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + size, true);
    do {
      Subset s;
      for (int k = 0; k < n; ++k)
        if (pick[k]) s.push_back(k + 1);
      out.push_back(std::move(s));
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  return out;
}

MarginalSet::MarginalSet(SystemShape shape, std::vector<MarginalEntry> entries)
    : shape_(std::move(shape)), entries_(std::move(entries)) {
  const int n = shape_.size();
  if (n < 2) throw InvalidInput("a marginal set needs at least two systems");
  if (entries_.empty()) throw InvalidInput("a marginal set needs at least one entry");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    validate_subset(e.systems, n);
    if (e.systems.empty() || static_cast<int>(e.systems.size()) == n)
      throw InvalidInput("marginal subsets must be proper and nonempty");
    if (!(e.state.shape() == shape_.restrict_to(e.systems)))
      throw InvalidInput("marginal state dimension does not match its subsystems");
    for (std::size_t j = 0; j < i; ++j)
      if (entries_[j].systems == e.systems) throw InvalidInput("duplicate marginal subset");
  }
  full_ = static_cast<int>(entries_.size()) == n;
  for (const auto& e : entries_) full_ = full_ && static_cast<int>(e.systems.size()) == n - 1;
}

MarginalSet MarginalSet::from_omitted(const SystemShape& shape, std::vector<DensityState> omitting) {
  if (static_cast<int>(omitting.size()) != shape.size())
    throw InvalidInput("need one state per omitted system");
  std::vector<MarginalEntry> entries;
  for (int i = 1; i <= shape.size(); ++i) entries.push_back({shape.complement({i}), std::move(omitting[i - 1])});
  return MarginalSet(shape, std::move(entries));
}

const DensityState* MarginalSet::find(const Subset& systems) const {
  for (const auto& e : entries_)
    if (e.systems == systems) return &e.state;
  return nullptr;
}

const DensityState& MarginalSet::omitting(int i) const {
  if (!full_) throw InvalidInput("omitted-system access requires a full marginal set");
  const auto* s = find(shape_.complement({i}));
  if (s == nullptr) throw InvalidInput("system label out of range");
  return *s;
}

ConsistencyReport check_consistency(const MarginalSet& ms, double tol) {
  ConsistencyReport rep;
  const auto& es = ms.entries();
  for (std::size_t i = 0; i < es.size(); ++i)
    for (std::size_t j = i + 1; j < es.size(); ++j) {
      const Subset overlap = intersect(es[i].systems, es[j].systems);
      if (overlap.empty()) continue;
      const auto a = reduce_entry(es[i], overlap);
      const auto b = reduce_entry(es[j], overlap);
      const double dev = max_norm(a.matrix() - b.matrix());
      rep.max_deviation = std::max(rep.max_deviation, dev);
      if (dev > tol) {
        rep.consistent = false;
        rep.violations.push_back({es[i].systems, es[j].systems, overlap, dev});
      }
    }
  return rep;
}

DensityState derive_submarginal(const MarginalSet& ms, const Subset& systems) {
  validate_subset(systems, ms.shape().size());
  if (systems.empty()) throw InvalidInput("cannot derive a marginal on the empty subset");
  for (const auto& e : ms.entries())
    if (contains(e.systems, systems)) {
      if (e.systems == systems) return e.state;
      return DensityState(reduce_entry(e, systems));
    }
  throw InvalidInput("requested subsystems are not covered by any marginal");
}

FixedPart fixed_part(const MarginalSet& ms, double consistency_tol) {
  require_consistent(ms, consistency_tol);
  const auto& shape = ms.shape();
  const IndexSets idx(shape);
  const auto& es = ms.entries();

  std::vector<std::vector<double>> entry_coeffs;
  std::vector<IndexSets> entry_idx;
  for (const auto& e : es) {
    entry_coeffs.push_back(expand(e.state.op()));
    entry_idx.emplace_back(e.state.shape());
  }

  std::vector<double> coeffs(idx.size(), 0.0);
  FixedPart out;
  for (const auto& m : idx.all()) {
    const Subset s = support(m);
    if (s.empty()) {
      coeffs[idx.rank(m)] = 1.0;
      continue;
    }
    int source = -1;
    if (ms.full()) {
      // Attribute to the entry omitting the first system whose component is 1.
      const auto it = std::find(m.begin(), m.end(), 1);
      if (it != m.end()) {
        const Subset want = shape.complement({static_cast<int>(it - m.begin()) + 1});
        for (std::size_t e = 0; e < es.size(); ++e)
          if (es[e].systems == want) source = static_cast<int>(e);
      }
    } else {
      for (std::size_t e = 0; e < es.size() && source < 0; ++e)
        if (contains(es[e].systems, s)) source = static_cast<int>(e);
    }
    if (source < 0) {
      out.free_indices.push_back(m);
      continue;
    }
    MultiIndex local;
    for (int sys : es[source].systems) local.push_back(m[sys - 1]);
    coeffs[idx.rank(m)] = entry_coeffs[source][entry_idx[source].rank(local)];
  }
  out.b0 = synthesize(shape, coeffs);
  return out;
}

HermitianOperator build_b0(const MarginalSet& ms, double consistency_tol) {
  if (!ms.full()) throw InvalidInput("B0 requires the full set of (n-1)-party marginals");
  return fixed_part(ms, consistency_tol).b0;
}

HermitianOperator build_b0_inclusion_exclusion(const MarginalSet& ms, double consistency_tol) {
  if (!ms.full()) throw InvalidInput("B0 requires the full set of (n-1)-party marginals");
  require_consistent(ms, consistency_tol);
  const auto& shape = ms.shape();
  const int n = shape.size();
  auto b0 = HermitianOperator::zero(shape);
  // A ranges over nonempty subsets; the term is indexed by its complement.
  for (const auto& rest : proper_subsets(n, /*include_empty=*/true)) {
    const Subset a = shape.complement(rest);
    const double sign = (a.size() % 2 == 0) ? 1.0 : -1.0;
    const double w = -sign / shape.total_of(a);
    if (rest.empty())
      b0 += w * HermitianOperator::identity(shape);
    else
      b0 += w * embed(derive_submarginal(ms, rest).op(), rest, shape);
  }
  return b0;
}

HermitianOperator delta_map(const HermitianOperator& z) {
  const auto& shape = z.shape();
  auto out = z.trace() * HermitianOperator::identity(shape);
  for (const auto& a : proper_subsets(shape.size())) {
    const double sign = (a.size() % 2 == 0) ? 1.0 : -1.0;
    out += sign * embed(reduce_to(z, a), a, shape);
  }
  return out;
}

DeltaReport delta(const MarginalSet& ms, double tol) {
  if (!ms.full()) throw InvalidInput("Delta requires the full set of (n-1)-party marginals");
  require_consistent(ms, kConsistencyTol);
  const auto& shape = ms.shape();
  DeltaReport rep;
  rep.delta = HermitianOperator::identity(shape);
  for (const auto& a : proper_subsets(shape.size())) {
    const double sign = (a.size() % 2 == 0) ? 1.0 : -1.0;
    rep.delta += sign * embed(derive_submarginal(ms, a).op(), a, shape);
  }
  const auto ev = eigenvalues(rep.delta);
  rep.min_eig = ev.minCoeff();
  rep.max_eig = ev.maxCoeff();
  rep.lower_applicable = shape.size() % 2 == 1;
  rep.lower_satisfied = rep.min_eig >= -tol;
  rep.upper_applicable = std::all_of(shape.dims().begin(), shape.dims().end(), [](int d) { return d == 2; });
  rep.upper_satisfied = rep.max_eig <= 1.0 + tol;
  return rep;
}

MarginalSet maximally_mixed_marginals(const SystemShape& shape) {
  std::vector<DensityState> states;
  for (int i = 1; i <= shape.size(); ++i)
    states.push_back(DensityState::maximally_mixed(shape.restrict_to(shape.complement({i}))));
  return MarginalSet::from_omitted(shape, std::move(states));
}

MarginalSet mix_with_identity(const MarginalSet& ms, double x) {
  std::vector<MarginalEntry> entries;
  for (const auto& e : ms.entries()) {
    const auto mixed = DensityState::maximally_mixed(e.state.shape());
    entries.push_back({e.systems, DensityState((1.0 - x) * mixed.op() + x * e.state.op())});
  }
  return MarginalSet(ms.shape(), std::move(entries));
}

MarginalSet convex_mix(const MarginalSet& ms1, const MarginalSet& ms2, double a) {
  if (!(ms1.shape() == ms2.shape()) || ms1.entries().size() != ms2.entries().size())
    throw InvalidInput("convex mixing requires marginal sets over the same subsets");
  std::vector<MarginalEntry> entries;
  for (const auto& e : ms1.entries()) {
    const auto* other = ms2.find(e.systems);
    if (other == nullptr) throw InvalidInput("convex mixing requires marginal sets over the same subsets");
    entries.push_back({e.systems, DensityState(a * e.state.op() + (1.0 - a) * other->op())});
  }
  return MarginalSet(ms1.shape(), std::move(entries));
}

}  // namespace qmarg
