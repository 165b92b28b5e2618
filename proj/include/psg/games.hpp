#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "psg/core_model.hpp"
#include "psg/random.hpp"
#include "psg/rules.hpp"

namespace psg {

/// u_i = total cost of proposer i's funded projects.
using UtilityVector = std::vector<Money>;

struct SearchLimits {
  /// Largest cell whose 2^k - 1 subsets are enumerated in PSG mode.
  std::size_t max_cell_size = 20;
  /// Largest profile space brute force will walk (one rule run per profile).
  std::uint64_t max_profiles = 10'000'000;
  RuleOptions rule;
};

struct BestResponseResult {
  Money best_utility = 0;
  /// All maximizers, in canonical strategy order.
  std::vector<Strategy> best_strategies;
};

enum class DynamicsStatus { kConverged, kCycle, kIterationLimit };

inline std::string_view to_string(DynamicsStatus s) {
  switch (s) {
    case DynamicsStatus::kConverged: return "CONVERGED";
    case DynamicsStatus::kCycle: return "CYCLE";
    case DynamicsStatus::kIterationLimit: return "ITERATION_LIMIT";
  }
  return "?";
}

struct DynamicsResult {
  DynamicsStatus status = DynamicsStatus::kIterationLimit;
  std::vector<StrategyProfile> trajectory;  // starts with the start profile
  StrategyProfile final;
  std::size_t iterations = 0;
  /// Number of updates between the two visits of the repeated profile.
  std::size_t cycle_length = 0;
};

enum class SearchStatus { kFound, kNone };

struct NESearchResult {
  SearchStatus status = SearchStatus::kNone;
  std::optional<StrategyProfile> witness;
  std::uint64_t profiles = 0;  // size of the profile space
  std::uint64_t evaluations = 0;
};

// --- utilities -------------------------------------------------------------

/// Runs the rule on the election induced by the given submitted sets and
/// maps the funded projects back to election indices.
inline std::vector<ProjectIndex> funded_projects(const Game& g, const RuleSpec& spec,
                                                 const StrategyProfile& s, const RuleOptions& opt = {}) {
  const auto keep = g.submitted(s);
  const auto induced = g.ballots().restrict(keep);
  auto outcome = run_rule(induced, spec, opt);
  std::vector<ProjectIndex> funded;
  funded.reserve(outcome.funded.size());
  for (auto p : outcome.funded) funded.push_back(keep[p]);
  return funded;
}

namespace detail {

inline UtilityVector utilities_unchecked(const Game& g, const RuleSpec& spec, const StrategyProfile& s,
                                         const RuleOptions& opt) {
  UtilityVector u(g.proposer_count(), 0);
  for (auto p : funded_projects(g, spec, s, opt)) u[g.owner(p)] += g.election().projects[p].cost;
  return u;
}

}  // namespace detail

inline UtilityVector utilities(const Game& g, const RuleSpec& spec, const StrategyProfile& s,
                               const SearchLimits& limits = {}) {
  g.check_profile(s);
  return detail::utilities_unchecked(g, spec, s, limits.rule);
}

// --- strategy spaces -------------------------------------------------------

/// Every legal strategy of proposer i in canonical order.
inline std::vector<Strategy> strategies(const Game& g, std::size_t i, const SearchLimits& limits = {}) {
  const auto cell = g.cell(i);
  std::vector<Strategy> out;
  if (g.mode() == Mode::kPsg1) {
    for (auto p : cell) out.push_back({p});
    return out;
  }
  if (cell.size() > limits.max_cell_size || cell.size() >= 63) {
    throw CapExceeded("max_cell_size", "proposer " + std::to_string(i) + " owns " +
                                           std::to_string(cell.size()) +
                                           " projects; subset enumeration cap is " +
                                           std::to_string(limits.max_cell_size));
  }
  const std::uint64_t count = (std::uint64_t{1} << cell.size()) - 1;
  out.reserve(count);
  for (std::uint64_t mask = 1; mask <= count; ++mask) {
    Strategy s;
    for (std::size_t k = 0; k < cell.size(); ++k) {
      if (mask >> k & 1U) s.push_back(cell[k]);
    }
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [&g](const Strategy& a, const Strategy& b) { return g.strategy_less(a, b); });
  return out;
}

inline StrategyProfile full_profile(const Game& g) {
  if (g.mode() != Mode::kPsg) throw InvalidInput("the full profile is defined only for PSG mode");
  StrategyProfile s;
  for (std::size_t i = 0; i < g.proposer_count(); ++i) {
    s.strategies.emplace_back(g.cell(i).begin(), g.cell(i).end());
  }
  return s;
}

// --- best responses and equilibria -----------------------------------------

/// Best response of proposer i against the other strategies of `s`
/// (s[i] itself is ignored).
inline BestResponseResult best_response(const Game& g, const RuleSpec& spec, const StrategyProfile& s,
                                        std::size_t i, const SearchLimits& limits = {}) {
  if (i >= g.proposer_count()) throw InvalidInput("proposer index out of range");
  if (s.size() != g.proposer_count()) throw InvalidInput("profile size does not match proposer count");
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (j != i) g.check_strategy(j, s[j]);
  }
  BestResponseResult result;
  bool first = true;
  StrategyProfile trial = s;
  for (auto& option : strategies(g, i, limits)) {
    trial[i] = option;
    const Money u = detail::utilities_unchecked(g, spec, trial, limits.rule)[i];
    if (first || u > result.best_utility) {
      result.best_utility = u;
      result.best_strategies.clear();
      first = false;
    }
    if (u == result.best_utility) result.best_strategies.push_back(std::move(option));
  }
  return result;
}

inline bool best_response_decision(const Game& g, const RuleSpec& spec, const StrategyProfile& s,
                                   std::size_t i, Money x, const SearchLimits& limits = {}) {
  return best_response(g, spec, s, i, limits).best_utility >= x;
}

inline bool is_nash(const Game& g, const RuleSpec& spec, const StrategyProfile& s,
                    const SearchLimits& limits = {}) {
  const auto u = utilities(g, spec, s, limits);
  for (std::size_t i = 0; i < g.proposer_count(); ++i) {
    if (best_response(g, spec, s, i, limits).best_utility > u[i]) return false;
  }
  return true;
}

namespace detail {

/// Profile space as mixed-radix numbers, proposer 0 most significant, so
/// increasing index order equals canonical profile order.
class ProfileSpace {
 public:
  ProfileSpace(const Game& g, const SearchLimits& limits) {
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < g.proposer_count(); ++i) {
      lists_.push_back(strategies(g, i, limits));
      const std::uint64_t k = lists_.back().size();
      total = total > limits.max_profiles / k ? limits.max_profiles + 1 : total * k;
    }
    if (total > limits.max_profiles) {
      throw CapExceeded("max_profiles", "profile space exceeds the brute-force cap of " +
                                            std::to_string(limits.max_profiles));
    }
    size_ = total;
    stride_.assign(lists_.size(), 1);
    for (std::size_t i = lists_.size(); i-- > 1;) stride_[i - 1] = stride_[i] * lists_[i].size();
  }

  std::uint64_t size() const { return size_; }
  std::size_t proposers() const { return lists_.size(); }
  std::size_t options(std::size_t i) const { return lists_[i].size(); }
  std::size_t digit(std::uint64_t index, std::size_t i) const { return index / stride_[i] % lists_[i].size(); }
  std::uint64_t with_digit(std::uint64_t index, std::size_t i, std::size_t d) const {
    return index - digit(index, i) * stride_[i] + d * stride_[i];
  }
  StrategyProfile profile(std::uint64_t index) const {
    StrategyProfile s;
    for (std::size_t i = 0; i < lists_.size(); ++i) s.strategies.push_back(lists_[i][digit(index, i)]);
    return s;
  }

 private:
  std::vector<std::vector<Strategy>> lists_;
  std::vector<std::uint64_t> stride_;
  std::uint64_t size_ = 0;
};

}  // namespace detail

/// Walks the whole profile space in canonical order and returns the first
/// NE. Each profile's utilities are computed at most once.
inline NESearchResult ne_exists_bruteforce(const Game& g, const RuleSpec& spec, const SearchLimits& limits = {}) {
  const detail::ProfileSpace space(g, limits);
  const std::size_t n = space.proposers();
  std::vector<Money> table(space.size() * n, -1);
  NESearchResult result;
  result.profiles = space.size();
  auto util = [&](std::uint64_t index) -> const Money* {
    Money* row = &table[index * n];
    if (row[0] < 0) {
      const auto u = detail::utilities_unchecked(g, spec, space.profile(index), limits.rule);
      std::copy(u.begin(), u.end(), row);
      ++result.evaluations;
    }
    return row;
  };
  for (std::uint64_t index = 0; index < space.size(); ++index) {
    bool stable = true;
    for (std::size_t i = 0; i < n && stable; ++i) {
      const Money current = util(index)[i];
      for (std::size_t d = 0; d < space.options(i) && stable; ++d) {
        if (d == space.digit(index, i)) continue;
        if (util(space.with_digit(index, i, d))[i] > current) stable = false;
      }
    }
    if (stable) {
      result.status = SearchStatus::kFound;
      result.witness = space.profile(index);
      return result;
    }
  }
  return result;
}

/// Simultaneous best-response dynamics. Each proposer keeps its strategy if
/// it is among its maximizers, otherwise moves to the canonically first one.
inline DynamicsResult br_dynamics(const Game& g, const RuleSpec& spec, const StrategyProfile& start,
                                  std::size_t max_iter = 10, const SearchLimits& limits = {}) {
  g.check_profile(start);
  DynamicsResult result;
  result.trajectory.push_back(start);
  std::set<StrategyProfile> visited{start};
  StrategyProfile current = start;
  while (true) {
    const auto u = detail::utilities_unchecked(g, spec, current, limits.rule);
    StrategyProfile next = current;
    bool stable = true;
    for (std::size_t i = 0; i < g.proposer_count(); ++i) {
      auto br = best_response(g, spec, current, i, limits);
      if (br.best_utility > u[i]) stable = false;
      const bool keep = std::find(br.best_strategies.begin(), br.best_strategies.end(), current[i]) !=
                        br.best_strategies.end();
      if (!keep) next[i] = br.best_strategies.front();
    }
    if (stable) {
      result.status = DynamicsStatus::kConverged;
      break;
    }
    if (result.iterations == max_iter) {
      result.status = DynamicsStatus::kIterationLimit;
      break;
    }
    ++result.iterations;
    result.trajectory.push_back(next);
    if (!visited.insert(next).second) {
      result.status = DynamicsStatus::kCycle;
      const auto first = std::find(result.trajectory.begin(), result.trajectory.end(), next);
      result.cycle_length = static_cast<std::size_t>(result.trajectory.end() - 1 - first);
      current = std::move(next);
      break;
    }
    current = std::move(next);
  }
  result.final = current;
  return result;
}

// --- constructive equilibria -----------------------------------------------

/// With unit costs BasicAV funds the B best-supported projects, so
/// submitting everything is dominant.
inline StrategyProfile constructive_ne_basicav_multiwinner(const Game& g) {
  if (g.mode() != Mode::kPsg) throw InvalidInput("constructive BasicAV equilibrium needs PSG mode");
  if (!g.ballots().unit_costs()) throw InvalidInput("constructive BasicAV equilibrium needs unit costs");
  return full_profile(g);
}

/// Party-list multiwinner games: the full profile is an equilibrium under
/// Phragmen, MES and sequential/global Thiele rules.
inline StrategyProfile constructive_ne_partylist(const Game& g, const RuleSpec& spec) {
  if (g.mode() != Mode::kPsg) throw InvalidInput("constructive party-list equilibrium needs PSG mode");
  if (!g.ballots().unit_costs()) throw InvalidInput("constructive party-list equilibrium needs unit costs");
  if (spec.kind == RuleKind::kBasicAv) {
    throw InvalidInput("use constructive_ne_basicav_multiwinner for BasicAV");
  }
  if (g.ballots().structure() != StructureClass::kPartyList) {
    throw InvalidInput("constructive party-list equilibrium needs party-list preferences");
  }
  return full_profile(g);
}

/// Single-project multiwinner games under a sequential rule: repeatedly run
/// the rule with every unfixed proposer submitting all projects and fix the
/// owner of the earliest funded unfixed project to that project.
inline StrategyProfile constructive_ne_psg1_sequential(const Game& g, const RuleSpec& spec,
                                                       const SearchLimits& limits = {}) {
  if (g.mode() != Mode::kPsg1) throw InvalidInput("sequential constructive equilibrium needs PSG1 mode");
  if (!g.ballots().unit_costs()) throw InvalidInput("sequential constructive equilibrium needs unit costs");
  if (spec.kind == RuleKind::kGlobalThiele) {
    throw InvalidInput("global Thiele is not sequential; use constructive_ne_psg1_global_thiele");
  }
  const std::size_t n = g.proposer_count();
  std::vector<std::optional<ProjectIndex>> fixed(n);
  while (true) {
    StrategyProfile submitted;
    for (std::size_t i = 0; i < n; ++i) {
      if (fixed[i]) {
        submitted.strategies.push_back({*fixed[i]});
      } else {
        submitted.strategies.emplace_back(g.cell(i).begin(), g.cell(i).end());
      }
    }
    bool progressed = false;
    for (auto p : funded_projects(g, spec, submitted, limits.rule)) {
      if (!fixed[g.owner(p)]) {
        fixed[g.owner(p)] = p;
        progressed = true;
        break;
      }
    }
    if (!progressed) break;
  }
  StrategyProfile out;
  for (std::size_t i = 0; i < n; ++i) out.strategies.push_back({fixed[i].value_or(g.cell(i).front())});
  return out;
}

namespace detail {

/// True iff committee a beats b in the tie-breaking order extended to sets:
/// the best project in their symmetric difference belongs to a.
inline bool lexicographically_preferred(const BallotProfile& bp, std::vector<ProjectIndex> a,
                                        std::vector<ProjectIndex> b) {
  auto by_rank = [&](ProjectIndex x, ProjectIndex y) { return bp.rank(x) < bp.rank(y); };
  std::sort(a.begin(), a.end(), by_rank);
  std::sort(b.begin(), b.end(), by_rank);
  std::optional<ProjectIndex> best_a, best_b;
  for (auto x : a) {
    if (std::find(b.begin(), b.end(), x) == b.end()) {
      best_a = x;
      break;
    }
  }
  for (auto x : b) {
    if (std::find(a.begin(), a.end(), x) == a.end()) {
      best_b = x;
      break;
    }
  }
  if (!best_a) return false;
  if (!best_b) return true;
  return bp.rank(*best_a) < bp.rank(*best_b);
}

}  // namespace detail

/// Single-project multiwinner games under global w-Thiele: the profile whose
/// induced outcome has the highest w-score (ties by the set order) is an NE.
inline StrategyProfile constructive_ne_psg1_global_thiele(const Game& g, const WeightFunction& w,
                                                          const SearchLimits& limits = {}) {
  if (g.mode() != Mode::kPsg1) throw InvalidInput("global Thiele constructive equilibrium needs PSG1 mode");
  if (!g.ballots().unit_costs()) throw InvalidInput("global Thiele constructive equilibrium needs unit costs");
  const detail::ProfileSpace space(g, limits);
  const auto spec = RuleSpec::global_thiele(w);
  std::optional<std::uint64_t> best;
  Rational best_score;
  std::vector<ProjectIndex> best_outcome;
  for (std::uint64_t index = 0; index < space.size(); ++index) {
    auto funded = funded_projects(g, spec, space.profile(index), limits.rule);
    Rational score = thiele_score(g.ballots(), w, funded);
    if (!best || score > best_score ||
        (score == best_score && detail::lexicographically_preferred(g.ballots(), funded, best_outcome))) {
      best = index;
      best_score = std::move(score);
      best_outcome = std::move(funded);
    }
  }
  return space.profile(*best);
}

// --- experiment protocol ---------------------------------------------------

enum class Classification { kFullNe, kBrNe, kBfNe, kNoNe, kUndecided };

inline std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::kFullNe: return "FULL_NE";
    case Classification::kBrNe: return "BR_NE";
    case Classification::kBfNe: return "BF_NE";
    case Classification::kNoNe: return "NO_NE";
    case Classification::kUndecided: return "UNDECIDED";
  }
  return "?";
}

struct ExperimentOptions {
  std::size_t max_iter = 10;
  /// Seed for the uniformly random PSG1 start profile.
  std::uint64_t seed = 0;
  SearchLimits limits;
};

struct ExperimentResult {
  Classification kind = Classification::kUndecided;
  std::optional<StrategyProfile> witness;
  std::optional<DynamicsResult> dynamics;
  std::optional<StrategyProfile> start;
  /// Names the cap that was hit when kind is UNDECIDED.
  std::string undecided_reason;
};

inline StrategyProfile random_profile(const Game& g, std::uint64_t seed) {
  Rng rng(seed);
  StrategyProfile s;
  for (std::size_t i = 0; i < g.proposer_count(); ++i) {
    const auto cell = g.cell(i);
    if (g.mode() == Mode::kPsg1) {
      s.strategies.push_back({cell[uniform_index(rng, cell.size())]});
    } else {
      // uniform over nonempty subsets
      Strategy st;
      while (st.empty()) {
        st.clear();
        for (auto p : cell) {
          if (rng() & 1U) st.push_back(p);
        }
      }
      s.strategies.push_back(std::move(st));
    }
  }
  return s;
}

/// Full profile check, then best-response dynamics, then brute force.
/// PSG1 skips the first step and starts the dynamics from a random profile.
inline ExperimentResult experiment_classify(const Game& g, const RuleSpec& spec, const ExperimentOptions& opt = {}) {
  ExperimentResult result;
  try {
    StrategyProfile start;
    if (g.mode() == Mode::kPsg) {
      start = full_profile(g);
      if (is_nash(g, spec, start, opt.limits)) {
        result.kind = Classification::kFullNe;
        result.witness = start;
        result.start = start;
        return result;
      }
    } else {
      start = random_profile(g, opt.seed);
    }
    result.start = start;
    result.dynamics = br_dynamics(g, spec, start, opt.max_iter, opt.limits);
    if (result.dynamics->status == DynamicsStatus::kConverged) {
      result.kind = Classification::kBrNe;
      result.witness = result.dynamics->final;
      return result;
    }
    auto search = ne_exists_bruteforce(g, spec, opt.limits);
    if (search.status == SearchStatus::kFound) {
      result.kind = Classification::kBfNe;
      result.witness = search.witness;
    } else {
      result.kind = Classification::kNoNe;
    }
  } catch (const CapExceeded& e) {
    result.kind = Classification::kUndecided;
    result.witness.reset();
    result.undecided_reason = e.parameter() + ": " + e.what();
  }
  return result;
}

}  // namespace psg
