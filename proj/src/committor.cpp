#include "ajc/committor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ajc/errors.hpp"

namespace ajc {

SpaceTimeSet SpaceTimeSet::from_cells(SpaceTimeIndexer idx,
                                      const std::vector<std::pair<std::size_t, std::size_t>>& cells) {
  SpaceTimeSet s(idx);
  for (const auto& [state, block] : cells) s.insert(state, block);
  return s;
}

SpaceTimeSet SpaceTimeSet::rectangle(SpaceTimeIndexer idx, const std::vector<std::size_t>& states,
                                     std::size_t first_block, std::size_t last_block) {
  if (first_block > last_block) throw std::invalid_argument("empty block range");
  SpaceTimeSet s(idx);
  for (std::size_t k = first_block; k <= last_block; ++k)
    for (std::size_t i : states) s.insert(i, k);
  return s;
}

SpaceTimeSet SpaceTimeSet::everything(SpaceTimeIndexer idx) {
  SpaceTimeSet s(idx);
  std::fill(s.member_.begin(), s.member_.end(), 1);
  return s;
}

void SpaceTimeSet::insert(std::size_t state, std::size_t block) {
  if (state >= idx_.states() || block >= idx_.blocks()) throw std::out_of_range("space-time set cell out of range");
  member_[idx_.flat(state, block)] = 1;
}

SpaceTimeSet& SpaceTimeSet::operator|=(const SpaceTimeSet& other) {
  if (!(other.idx_ == idx_)) throw std::invalid_argument("space-time sets on different grids");
  for (std::size_t a = 0; a < member_.size(); ++a) member_[a] = member_[a] || other.member_[a];
  return *this;
}

bool SpaceTimeSet::empty() const { return std::none_of(member_.begin(), member_.end(), [](char c) { return c; }); }

std::size_t SpaceTimeSet::count() const {
  return static_cast<std::size_t>(std::count(member_.begin(), member_.end(), 1));
}

bool SpaceTimeSet::intersects(const SpaceTimeSet& other) const {
  for (std::size_t a = 0; a < member_.size(); ++a)
    if (member_[a] && other.member_[a]) return true;
  return false;
}

TailPolicy TailPolicy::fixed(double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("tail value must lie in [0, 1]");
  return {Kind::value, v};
}

double TailPolicy::tail_value() const {
  switch (kind) {
    case Kind::absorb_to_b: return 0.0;
    case Kind::absorb_to_a: return 1.0;
    case Kind::value: return v;
  }
  return 0.0;
}

SpaceTimeVector committor_solve(const JumpMatrix& j, const SpaceTimeSet& a, const SpaceTimeSet& b, TailPolicy tail,
                                SolverOptions opts) {
  const auto& idx = j.indexer();
  if (!(a.indexer() == idx) || !(b.indexer() == idx)) throw std::invalid_argument("set grid does not match the jump matrix");
  if (a.empty()) throw EmptyTarget("committor target set A is empty");
  if (a.intersects(b)) throw std::invalid_argument("committor sets A and B must be disjoint");
  const double tail_value = tail.tail_value();
  const std::size_t n = j.states(), m = j.blocks();
  std::vector<std::size_t> cutoff(idx.size());
  std::vector<double> terminal(idx.size());
  // first observed set cell along each state fibre, scanning blocks backwards
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t next = m;  // none
    double value = tail_value;
    for (std::size_t k = m; k-- > 0;) {
      if (a.contains(i, k)) {
        next = k;
        value = 1.0;
      } else if (b.contains(i, k)) {
        next = k;
        value = 0.0;
      }
      const std::size_t cell = idx.flat(i, k);
      cutoff[cell] = next == m ? m - 1 : next;
      terminal[cell] = value;
    }
  }
  return edge_hitting_solve(j, cutoff, terminal, opts);
}

CoherenceDefect coherence_defect(const JumpMatrix& j, const SpaceTimeSet& c, bool count_survival) {
  if (!(c.indexer() == j.indexer())) throw std::invalid_argument("set grid does not match the jump matrix");
  if (c.empty()) throw EmptyTarget("coherence set is empty");
  constexpr double snap = 1e-12;
  SpaceTimeVector ind(j.indexer(), VectorKind::observable);
  for (std::size_t a = 0; a < ind.values.size(); ++a) ind.values[a] = c.contains_flat(a) ? 1.0 : 0.0;
  const auto pulled = apply_adjoint(j, ind);
  CoherenceDefect out{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t a = 0; a < ind.values.size(); ++a) {
    if (!c.contains_flat(a)) continue;
    double stay = pulled.values[a];
    if (count_survival) stay += j.survival_mass(a);
    double slack = stay - 1.0;
    if (std::abs(slack) <= snap) slack = 0.0;
    out.min_slack = std::min(out.min_slack, slack);
    out.violation_mass += std::max(0.0, -slack);
  }
  return out;
}

}  // namespace ajc
