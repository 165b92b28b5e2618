#pragma once

// Independent reference implementations used to cross-check the library.
// They work per individual voter on the plain Election, never touch
// BallotProfile, and favour obviousness over speed.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "psg/core_model.hpp"
#include "psg/rules.hpp"

namespace oracle {

using psg::Election;
using psg::Money;
using psg::Rational;
using IdSet = std::set<std::string>;

inline std::size_t tie_rank(const Election& e, const std::string& id) {
  return static_cast<std::size_t>(std::find(e.tie_break.begin(), e.tie_break.end(), id) - e.tie_break.begin());
}

inline std::vector<std::vector<std::size_t>> supporters(const Election& e) {
  std::vector<std::vector<std::size_t>> s(e.projects.size());
  for (std::size_t v = 0; v < e.voters.size(); ++v) {
    for (const auto& a : e.voters[v].approvals) s[*e.index_of(a)].push_back(v);
  }
  return s;
}

/// Sort by (score desc, tie rank asc) and fund whatever fits.
inline std::vector<std::string> basicav(const Election& e) {
  const auto sup = supporters(e);
  std::vector<std::size_t> order(e.projects.size());
  for (std::size_t p = 0; p < order.size(); ++p) order[p] = p;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sup[a].size() != sup[b].size()) return sup[a].size() > sup[b].size();
    return tie_rank(e, e.projects[a].id) < tie_rank(e, e.projects[b].id);
  });
  std::vector<std::string> out;
  Money left = e.budget;
  for (auto p : order) {
    if (e.projects[p].cost <= left) {
      left -= e.projects[p].cost;
      out.push_back(e.projects[p].id);
    }
  }
  return out;
}

/// Phragmen as explicit per-voter balances that grow by the elapsed time.
/// Each step advances the clock by the smallest waiting time
/// (cost - sum of supporter balances) / |S(c)|.
inline std::vector<std::string> phragmen(const Election& e, std::vector<std::vector<Rational>>* snapshots = nullptr) {
  const auto sup = supporters(e);
  std::vector<Rational> bal(e.voters.size());
  std::vector<bool> done(e.projects.size(), false);
  std::vector<std::string> out;
  Money spent = 0;
  while (true) {
    std::optional<std::size_t> best;
    Rational best_wait;
    for (std::size_t c = 0; c < e.projects.size(); ++c) {
      if (done[c] || sup[c].empty()) continue;
      Rational have;
      for (auto v : sup[c]) have += bal[v];
      Rational wait = (Rational(e.projects[c].cost) - have) / Rational(static_cast<std::int64_t>(sup[c].size()));
      if (wait < 0) wait = 0;
      const bool better = !best || wait < best_wait ||
                          (wait == best_wait && tie_rank(e, e.projects[c].id) < tie_rank(e, e.projects[*best].id));
      if (better) {
        best = c;
        best_wait = wait;
      }
    }
    if (!best) break;
    for (auto& b : bal) b += best_wait;
    done[*best] = true;
    if (spent + e.projects[*best].cost <= e.budget) {
      spent += e.projects[*best].cost;
      out.push_back(e.projects[*best].id);
      for (auto v : sup[*best]) bal[v] = 0;
    }
    if (snapshots) snapshots->push_back(bal);
  }
  return out;
}

/// Smallest rho with sum_v min(b_v, rho * scale) >= cost, found by walking
/// the breakpoints of the piecewise linear left-hand side.
inline std::optional<Rational> min_rho(const std::vector<Rational>& balances, Money cost, Rational scale) {
  Rational total;
  for (const auto& b : balances) total += b;
  if (total < cost) return std::nullopt;
  std::vector<Rational> points;
  for (const auto& b : balances) points.push_back(b / scale);
  std::sort(points.begin(), points.end());
  auto f = [&](const Rational& rho) {
    Rational s;
    for (const auto& b : balances) s += std::min(b, Rational(rho * scale));
    return s;
  };
  Rational lo = 0;
  for (const auto& hi : points) {
    if (f(hi) >= cost) {
      // f is linear on [lo, hi]
      const Rational flo = f(lo);
      return lo + (Rational(cost) - flo) * (hi - lo) / (f(hi) - flo);
    }
    lo = hi;
  }
  return std::nullopt;
}

inline std::vector<std::string> mes(const Election& e, bool binary) {
  const auto sup = supporters(e);
  const auto n = static_cast<std::int64_t>(e.voters.size());
  std::vector<Rational> bal(e.voters.size(), Rational(e.budget) / Rational(n));
  std::vector<bool> done(e.projects.size(), false);
  std::vector<std::string> out;
  while (true) {
    std::optional<std::size_t> best;
    Rational best_rho;
    for (std::size_t c = 0; c < e.projects.size(); ++c) {
      if (done[c] || sup[c].empty()) continue;
      std::vector<Rational> b;
      for (auto v : sup[c]) b.push_back(bal[v]);
      const Rational scale = binary ? Rational(1) : Rational(e.projects[c].cost);
      auto rho = min_rho(b, e.projects[c].cost, scale);
      if (!rho) continue;
      if (!best || *rho < best_rho ||
          (*rho == best_rho && tie_rank(e, e.projects[c].id) < tie_rank(e, e.projects[*best].id))) {
        best = c;
        best_rho = *rho;
      }
    }
    if (!best) break;
    const Rational scale = binary ? Rational(1) : Rational(e.projects[*best].cost);
    for (auto v : sup[*best]) bal[v] -= std::min(bal[v], Rational(best_rho * scale));
    done[*best] = true;
    out.push_back(e.projects[*best].id);
  }
  return out;
}

inline Rational weight(const std::vector<Rational>& w, std::size_t k) {
  return k <= w.size() ? w[k - 1] : w.back();
}

inline Rational score(const Election& e, const std::vector<Rational>& w, const IdSet& committee) {
  Rational s;
  for (const auto& v : e.voters) {
    std::size_t k = 0;
    for (const auto& a : v.approvals) k += committee.count(a);
    for (std::size_t l = 1; l <= k; ++l) s += weight(w, l);
  }
  return s;
}

inline std::vector<std::string> seq_thiele(const Election& e, const std::vector<Rational>& w) {
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(e.budget), e.projects.size());
  IdSet chosen;
  std::vector<std::string> out;
  for (std::size_t round = 0; round < k; ++round) {
    const Rational base = score(e, w, chosen);
    std::optional<std::string> best;
    Rational best_gain;
    for (const auto& id : e.tie_break) {
      if (chosen.count(id)) continue;
      IdSet next = chosen;
      next.insert(id);
      const Rational gain = score(e, w, next) - base;
      if (!best || gain > best_gain) {
        best = id;
        best_gain = gain;
      }
    }
    chosen.insert(*best);
    out.push_back(*best);
  }
  return out;
}

/// True if committee a beats b on ties: the best-ranked project in their
/// symmetric difference belongs to a.
inline bool tie_prefers(const Election& e, const IdSet& a, const IdSet& b) {
  for (const auto& id : e.tie_break) {
    const bool in_a = a.count(id), in_b = b.count(id);
    if (in_a != in_b) return in_a;
  }
  return false;
}

inline IdSet global_thiele(const Election& e, const std::vector<Rational>& w) {
  const std::size_t m = e.projects.size();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(e.budget), m);
  std::optional<IdSet> best;
  Rational best_score;
  for (std::uint32_t mask = 0; mask < (1U << m); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
    IdSet c;
    for (std::size_t p = 0; p < m; ++p) {
      if (mask >> p & 1U) c.insert(e.projects[p].id);
    }
    const Rational s = score(e, w, c);
    if (!best || s > best_score || (s == best_score && tie_prefers(e, c, *best))) {
      best = c;
      best_score = s;
    }
  }
  return best.value_or(IdSet{});
}

/// Funded ids of any supported rule, computed by the functions above.
inline IdSet run(const Election& e, const psg::RuleSpec& spec) {
  std::vector<std::string> v;
  switch (spec.kind) {
    case psg::RuleKind::kBasicAv: v = basicav(e); break;
    case psg::RuleKind::kPhragmen: v = phragmen(e); break;
    case psg::RuleKind::kMes: v = mes(e, spec.mes_utility == psg::MesUtility::kBinary); break;
    case psg::RuleKind::kSeqThiele: v = seq_thiele(e, spec.weights->values()); break;
    case psg::RuleKind::kGlobalThiele: return global_thiele(e, spec.weights->values());
  }
  return IdSet(v.begin(), v.end());
}

// --- games -----------------------------------------------------------------

using IdProfile = std::vector<IdSet>;

inline std::vector<Money> utilities(const psg::Game& g, const psg::RuleSpec& spec, const IdProfile& s) {
  std::vector<std::vector<std::string>> ids;
  for (const auto& st : s) ids.emplace_back(st.begin(), st.end());
  const Election induced = psg::induced_election(g, g.profile_from_ids(ids));
  const IdSet funded = run(induced, spec);
  std::vector<Money> u(g.proposer_count(), 0);
  for (const auto& id : funded) {
    const auto p = *g.election().index_of(id);
    u[g.owner(p)] += g.election().projects[p].cost;
  }
  return u;
}

/// All legal strategies of proposer i, by bitmask over its cell.
inline std::vector<IdSet> strategies(const psg::Game& g, std::size_t i) {
  const auto cell = g.cell(i);
  std::vector<IdSet> out;
  for (std::uint32_t mask = 1; mask < (1U << cell.size()); ++mask) {
    if (g.mode() == psg::Mode::kPsg1 && __builtin_popcount(mask) != 1) continue;
    IdSet s;
    for (std::size_t k = 0; k < cell.size(); ++k) {
      if (mask >> k & 1U) s.insert(g.id(cell[k]));
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline bool is_nash(const psg::Game& g, const psg::RuleSpec& spec, const IdProfile& s) {
  const auto base = utilities(g, spec, s);
  for (std::size_t i = 0; i < g.proposer_count(); ++i) {
    for (const auto& alt : strategies(g, i)) {
      IdProfile t = s;
      t[i] = alt;
      if (utilities(g, spec, t)[i] > base[i]) return false;
    }
  }
  return true;
}

/// Whether any pure NE exists, by walking the whole product space.
inline bool ne_exists(const psg::Game& g, const psg::RuleSpec& spec) {
  std::vector<std::vector<IdSet>> lists;
  for (std::size_t i = 0; i < g.proposer_count(); ++i) lists.push_back(strategies(g, i));
  std::vector<std::size_t> digit(lists.size(), 0);
  while (true) {
    IdProfile s;
    for (std::size_t i = 0; i < lists.size(); ++i) s.push_back(lists[i][digit[i]]);
    if (is_nash(g, spec, s)) return true;
    std::size_t i = 0;
    while (i < digit.size() && ++digit[i] == lists[i].size()) digit[i++] = 0;
    if (i == digit.size()) return false;
  }
}

inline IdProfile to_ids(const psg::Game& g, const psg::StrategyProfile& s) {
  IdProfile out;
  for (const auto& st : s.strategies) {
    IdSet ids;
    for (auto p : st) ids.insert(g.id(p));
    out.push_back(std::move(ids));
  }
  return out;
}

}  // namespace oracle
