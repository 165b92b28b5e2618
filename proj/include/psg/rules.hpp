#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psg/ballots.hpp"
#include "psg/election.hpp"
#include "psg/errors.hpp"
#include "psg/rational.hpp"

namespace psg {

enum class RuleKind { kBasicAv, kPhragmen, kMes, kSeqThiele, kGlobalThiele };
enum class MesUtility { kCost, kBinary };

/// Non-increasing Thiele weight sequence with w(1) = 1. Positions past the
/// stored values repeat the last one.
class WeightFunction {
 public:
  explicit WeightFunction(std::vector<Rational> values, std::string name = "custom")
      : values_(std::move(values)), name_(std::move(name)) {
    if (values_.empty() || values_.front() != 1) {
      throw InvalidInput("weight function must start with w(1) = 1");
    }
    for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
      if (values_[i + 1] > values_[i]) throw InvalidInput("weight function must be non-increasing");
    }
    if (values_.back() < 0) throw InvalidInput("weight function must be non-negative");
  }

  static WeightFunction av() { return WeightFunction({Rational(1)}, "av"); }
  static WeightFunction cc() { return WeightFunction({Rational(1), Rational(0)}, "cc"); }
  /// Harmonic weights (1, 1/2, ..., 1/length); the tail repeats 1/length.
  static WeightFunction pav(std::size_t length = 8) {
    std::vector<Rational> v;
    for (std::size_t i = 1; i <= std::max<std::size_t>(length, 1); ++i) {
      v.push_back(make_rational(1, static_cast<std::int64_t>(i)));
    }
    return WeightFunction(std::move(v), "pav");
  }

  /// w(k) for k >= 1.
  const Rational& at(std::size_t k) const {
    return k <= values_.size() ? values_[k - 1] : values_.back();
  }
  const std::vector<Rational>& values() const { return values_; }
  const std::string& name() const { return name_; }

  friend bool operator==(const WeightFunction& a, const WeightFunction& b) {
    return a.values_ == b.values_;
  }

 private:
  std::vector<Rational> values_;
  std::string name_;
};

struct RuleSpec {
  RuleKind kind = RuleKind::kBasicAv;
  std::optional<MesUtility> mes_utility;
  std::optional<WeightFunction> weights;

  static RuleSpec basic_av() { return {RuleKind::kBasicAv, std::nullopt, std::nullopt}; }
  static RuleSpec phragmen() { return {RuleKind::kPhragmen, std::nullopt, std::nullopt}; }
  static RuleSpec mes(MesUtility u = MesUtility::kCost) { return {RuleKind::kMes, u, std::nullopt}; }
  static RuleSpec seq_thiele(WeightFunction w) { return {RuleKind::kSeqThiele, std::nullopt, std::move(w)}; }
  static RuleSpec global_thiele(WeightFunction w) {
    return {RuleKind::kGlobalThiele, std::nullopt, std::move(w)};
  }

  bool is_thiele() const { return kind == RuleKind::kSeqThiele || kind == RuleKind::kGlobalThiele; }

  /// Stable textual name, accepted back by parse_rule().
  std::string name() const {
    switch (kind) {
      case RuleKind::kBasicAv: return "basicav";
      case RuleKind::kPhragmen: return "phragmen";
      case RuleKind::kMes: return mes_utility == MesUtility::kBinary ? "mes-binary" : "mes";
      case RuleKind::kSeqThiele: return "seq-" + weights->name();
      case RuleKind::kGlobalThiele: return "global-" + weights->name();
    }
    return "?";
  }

  friend bool operator==(const RuleSpec&, const RuleSpec&) = default;
};

/// Accepts basicav, phragmen, mes, mes-binary, seq-{av,cc,pav}, global-{av,cc,pav}.
inline RuleSpec parse_rule(std::string_view name) {
  if (name == "basicav") return RuleSpec::basic_av();
  if (name == "phragmen") return RuleSpec::phragmen();
  if (name == "mes") return RuleSpec::mes(MesUtility::kCost);
  if (name == "mes-binary") return RuleSpec::mes(MesUtility::kBinary);
  auto weights = [&](std::string_view w) -> std::optional<WeightFunction> {
    if (w == "av") return WeightFunction::av();
    if (w == "cc") return WeightFunction::cc();
    if (w == "pav") return WeightFunction::pav();
    return std::nullopt;
  };
  if (name.starts_with("seq-")) {
    if (auto w = weights(name.substr(4))) return RuleSpec::seq_thiele(*w);
  }
  if (name.starts_with("global-")) {
    if (auto w = weights(name.substr(7))) return RuleSpec::global_thiele(*w);
  }
  throw InvalidInput("unknown rule '" + std::string(name) +
                     "' (expected basicav, phragmen, mes, mes-binary, seq-{av,cc,pav}, global-{av,cc,pav})");
}

enum class RoundAction { kFunded, kDropped };

/// One iteration of a rule. `value` is the approval score (BasicAV), the
/// clock time (Phragmen), rho (MES) or the score gain (Thiele).
struct RoundRecord {
  std::size_t round = 0;
  ProjectIndex project = 0;
  RoundAction action = RoundAction::kFunded;
  Rational value;
  /// Per-ballot-group balances after the round; filled on request.
  std::vector<Rational> balances;
};

struct Outcome {
  /// Funded projects in the order they were funded.
  std::vector<ProjectIndex> funded;
  std::vector<RoundRecord> trace;
  Money spent = 0;
};

struct RuleOptions {
  bool trace = false;
  bool balances = false;
  std::size_t global_max_projects = 20;
  std::uint64_t global_max_subsets = 2'000'000;
};

namespace detail {

inline bool better_rank(const BallotProfile& bp, ProjectIndex a, ProjectIndex b) {
  return bp.rank(a) < bp.rank(b);
}

inline void require_unit_costs(const BallotProfile& bp, std::string_view rule) {
  if (!bp.unit_costs()) {
    throw InvalidInput(std::string(rule) + " requires unit costs (multiwinner election)");
  }
}

inline std::size_t overlap(const Ballot& b, const std::vector<bool>& chosen) {
  std::size_t k = 0;
  for (auto p : b.approvals) k += chosen[p] ? 1 : 0;
  return k;
}

}  // namespace detail

/// Greedy by approval score (descending, ties by tie-breaking order); a
/// project is funded iff it still fits. Every project is considered once.
inline Outcome run_basicav(const BallotProfile& bp, const RuleOptions& opt = {}) {
  std::vector<ProjectIndex> order = bp.by_rank();
  std::stable_sort(order.begin(), order.end(), [&](ProjectIndex a, ProjectIndex b) {
    return bp.support(a) > bp.support(b);
  });
  Outcome out;
  std::size_t round = 0;
  for (auto c : order) {
    const bool fits = out.spent + bp.cost(c) <= bp.budget();
    if (fits) {
      out.funded.push_back(c);
      out.spent += bp.cost(c);
    }
    if (opt.trace) {
      out.trace.push_back({++round, c, fits ? RoundAction::kFunded : RoundAction::kDropped,
                           Rational(bp.support(c)), {}});
    }
  }
  return out;
}

/// Continuous-time Phragmen with exact rational clock. A voter's balance is
/// the time elapsed since its last purchase; supporters of a funded project
/// reset to zero, dropped projects leave balances untouched.
inline Outcome run_phragmen(const BallotProfile& bp, const RuleOptions& opt = {}) {
  const std::size_t m = bp.project_count();
  const auto ballots = bp.ballots();
  std::vector<Rational> reset(ballots.size());
  std::vector<bool> pending(m, false);
  for (ProjectIndex c = 0; c < m; ++c) pending[c] = bp.support(c) > 0;

  Outcome out;
  std::size_t round = 0;
  Rational now;
  while (true) {
    std::optional<ProjectIndex> next;
    Rational next_time;
    for (ProjectIndex c = 0; c < m; ++c) {
      if (!pending[c]) continue;
      // sum over supporters of (t - reset) = cost, solved for t.
      Rational acc = Rational(bp.cost(c));
      for (auto g : bp.supporters(c)) acc += reset[g] * ballots[g].weight;
      Rational t = acc / bp.support(c);
      if (!next || t < next_time || (t == next_time && detail::better_rank(bp, c, *next))) {
        next = c;
        next_time = std::move(t);
      }
    }
    if (!next) break;
    const ProjectIndex c = *next;
    pending[c] = false;
    now = next_time;
    const bool fits = out.spent + bp.cost(c) <= bp.budget();
    if (fits) {
      out.funded.push_back(c);
      out.spent += bp.cost(c);
      for (auto g : bp.supporters(c)) reset[g] = now;
    }
    if (opt.trace) {
      RoundRecord rec{++round, c, fits ? RoundAction::kFunded : RoundAction::kDropped, now, {}};
      if (opt.balances) {
        for (const auto& r : reset) rec.balances.push_back(now - r);
      }
      out.trace.push_back(std::move(rec));
    }
  }
  return out;
}

namespace detail {

/// Smallest per-voter payment cap x with sum_v min(b(v), x) = cost over
/// supporters of c, or nullopt when their total balance is short.
inline std::optional<Rational> mes_payment_cap(const BallotProfile& bp, ProjectIndex c,
                                               const std::vector<Rational>& balance) {
  const auto ballots = bp.ballots();
  std::vector<std::size_t> groups(bp.supporters(c).begin(), bp.supporters(c).end());
  if (groups.empty()) return std::nullopt;
  std::sort(groups.begin(), groups.end(),
            [&](std::size_t a, std::size_t b) { return balance[a] < balance[b]; });
  Rational total;
  for (auto g : groups) total += balance[g] * ballots[g].weight;
  const Rational cost(bp.cost(c));
  if (total < cost) return std::nullopt;

  Rational paid_in_full;
  std::int64_t remaining = bp.support(c);
  for (auto g : groups) {
    Rational x = (cost - paid_in_full) / remaining;
    if (x <= balance[g]) return x;
    paid_in_full += balance[g] * ballots[g].weight;
    remaining -= ballots[g].weight;
  }
  return std::nullopt;  // unreachable when total >= cost
}

}  // namespace detail

/// Method of Equal Shares without completion. Each voter starts with
/// budget/|V|; the project affordable for the lowest rho is bought, each
/// supporter paying min(b(v), rho * cost) (cost utilities) or min(b(v), rho)
/// (binary utilities).
inline Outcome run_mes(const BallotProfile& bp, MesUtility utility = MesUtility::kCost,
                       const RuleOptions& opt = {}) {
  if (bp.voter_count() == 0) throw InvalidInput("MES is undefined for an election without voters");
  const std::size_t m = bp.project_count();
  const auto ballots = bp.ballots();
  std::vector<Rational> balance(ballots.size(), make_rational(bp.budget(), bp.voter_count()));
  std::vector<bool> funded(m, false);

  Outcome out;
  std::size_t round = 0;
  while (true) {
    std::optional<ProjectIndex> best;
    Rational best_rho;
    Rational best_cap;
    for (ProjectIndex c = 0; c < m; ++c) {
      if (funded[c]) continue;
      auto cap = detail::mes_payment_cap(bp, c, balance);
      if (!cap) continue;
      Rational rho = utility == MesUtility::kCost ? *cap / bp.cost(c) : *cap;
      if (!best || rho < best_rho || (rho == best_rho && detail::better_rank(bp, c, *best))) {
        best = c;
        best_rho = std::move(rho);
        best_cap = *cap;
      }
    }
    if (!best) break;
    const ProjectIndex c = *best;
    Rational charged;
    for (auto g : bp.supporters(c)) {
      Rational pay = std::min(balance[g], best_cap);
      balance[g] -= pay;
      charged += pay * ballots[g].weight;
    }
    if (charged != bp.cost(c)) throw std::logic_error("MES charges do not sum to the project cost");
    funded[c] = true;
    out.funded.push_back(c);
    out.spent += bp.cost(c);
    if (opt.trace) {
      RoundRecord rec{++round, c, RoundAction::kFunded, best_rho, {}};
      if (opt.balances) rec.balances = balance;
      out.trace.push_back(std::move(rec));
    }
  }
  return out;
}

/// w-score of a committee: sum over voters of w(1) + ... + w(|A(v) cap W|).
inline Rational thiele_score(const BallotProfile& bp, const WeightFunction& w,
                             std::span<const ProjectIndex> committee) {
  std::vector<bool> chosen(bp.project_count(), false);
  for (auto p : committee) chosen[p] = true;
  Rational score;
  for (const auto& b : bp.ballots()) {
    const std::size_t k = detail::overlap(b, chosen);
    Rational per_voter;
    for (std::size_t l = 1; l <= k; ++l) per_voter += w.at(l);
    score += per_voter * b.weight;
  }
  return score;
}

/// Sequential w-Thiele: min(B, m) greedy rounds, each adding the project
/// with the largest marginal w-score (ties by tie-breaking order).
inline Outcome run_seq_thiele(const BallotProfile& bp, const WeightFunction& w,
                              const RuleOptions& opt = {}) {
  detail::require_unit_costs(bp, "sequential Thiele");
  const std::size_t m = bp.project_count();
  const auto ballots = bp.ballots();
  const std::size_t rounds = std::min<std::size_t>(static_cast<std::size_t>(std::max<Money>(bp.budget(), 0)), m);
  std::vector<std::size_t> covered(ballots.size(), 0);
  std::vector<bool> chosen(m, false);
  const auto order = bp.by_rank();

  Outcome out;
  for (std::size_t round = 1; round <= rounds; ++round) {
    std::optional<ProjectIndex> best;
    Rational best_gain;
    for (auto c : order) {
      if (chosen[c]) continue;
      Rational gain;
      for (auto g : bp.supporters(c)) gain += w.at(covered[g] + 1) * ballots[g].weight;
      if (!best || gain > best_gain) {
        best = c;
        best_gain = std::move(gain);
      }
    }
    chosen[*best] = true;
    for (auto g : bp.supporters(*best)) ++covered[g];
    out.funded.push_back(*best);
    out.spent += 1;
    if (opt.trace) out.trace.push_back({round, *best, RoundAction::kFunded, best_gain, {}});
  }
  return out;
}

namespace detail {

inline std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > static_cast<unsigned __int128>(UINT64_MAX)) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(r);
}

}  // namespace detail

/// Global w-Thiele by exhaustive enumeration of all size-min(B, m)
/// committees. Equal scores go to the committee whose best differing
/// project ranks highest in the tie-breaking order.
inline Outcome run_global_thiele(const BallotProfile& bp, const WeightFunction& w,
                                 const RuleOptions& opt = {}) {
  detail::require_unit_costs(bp, "global Thiele");
  const std::size_t m = bp.project_count();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max<Money>(bp.budget(), 0)), m);
  if (m > opt.global_max_projects) {
    throw CapExceeded("global_max_projects", "global Thiele enumeration refused: " + std::to_string(m) +
                                                 " projects exceed the cap of " +
                                                 std::to_string(opt.global_max_projects));
  }
  const auto subsets = detail::binomial_saturating(m, k);
  if (subsets > opt.global_max_subsets) {
    throw CapExceeded("global_max_subsets", "global Thiele enumeration refused: " +
                                                std::to_string(subsets) + " committees exceed the cap of " +
                                                std::to_string(opt.global_max_subsets));
  }

  // Integer-scaled cumulative weights: cum[j] = D * (w(1) + ... + w(j)).
  BigInt scale = 1;
  for (std::size_t l = 1; l <= k; ++l) {
    scale = boost::multiprecision::lcm(scale, boost::multiprecision::denominator(w.at(l)));
  }
  std::vector<BigInt> cum(k + 1);
  Rational running;
  for (std::size_t l = 1; l <= k; ++l) {
    running += w.at(l);
    cum[l] = boost::multiprecision::numerator(Rational(running * scale));
  }

  const auto order = bp.by_rank();
  const auto ballots = bp.ballots();
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  std::vector<bool> chosen(m, false);
  std::vector<std::size_t> best_pick = pick;
  std::optional<BigInt> best_score;

  // Combinations over rank positions in lexicographic order; the first
  // maximum found is the tie-breaking winner.
  while (true) {
    std::fill(chosen.begin(), chosen.end(), false);
    for (auto i : pick) chosen[order[i]] = true;
    BigInt score = 0;
    for (const auto& b : ballots) score += cum[detail::overlap(b, chosen)] * b.weight;
    if (!best_score || score > *best_score) {
      best_score = std::move(score);
      best_pick = pick;
    }
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == m - k + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }

  Outcome out;
  for (auto i : best_pick) out.funded.push_back(order[i]);
  out.spent = static_cast<Money>(out.funded.size());
  if (opt.trace) {
    const Rational total = best_score ? Rational(*best_score) / Rational(scale) : Rational(0);
    std::size_t round = 0;
    for (auto c : out.funded) out.trace.push_back({++round, c, RoundAction::kFunded, total, {}});
  }
  return out;
}

inline Outcome run_rule(const BallotProfile& bp, const RuleSpec& spec, const RuleOptions& opt = {}) {
  switch (spec.kind) {
    case RuleKind::kBasicAv: return run_basicav(bp, opt);
    case RuleKind::kPhragmen: return run_phragmen(bp, opt);
    case RuleKind::kMes: return run_mes(bp, spec.mes_utility.value_or(MesUtility::kCost), opt);
    case RuleKind::kSeqThiele:
      if (!spec.weights) throw InvalidInput("Thiele rule without weight function");
      return run_seq_thiele(bp, *spec.weights, opt);
    case RuleKind::kGlobalThiele:
      if (!spec.weights) throw InvalidInput("Thiele rule without weight function");
      return run_global_thiele(bp, *spec.weights, opt);
  }
  throw InvalidInput("unknown rule kind");
}

// Election-level entry points. Project indices in the outcome refer to
// e.projects.

inline Outcome run_basicav(const Election& e, const RuleOptions& opt = {}) {
  return run_basicav(BallotProfile::compile(e), opt);
}
inline Outcome run_phragmen(const Election& e, const RuleOptions& opt = {}) {
  return run_phragmen(BallotProfile::compile(e), opt);
}
inline Outcome run_mes(const Election& e, MesUtility u = MesUtility::kCost, const RuleOptions& opt = {}) {
  return run_mes(BallotProfile::compile(e), u, opt);
}
inline Outcome run_seq_thiele(const Election& e, const WeightFunction& w, const RuleOptions& opt = {}) {
  return run_seq_thiele(BallotProfile::compile(e), w, opt);
}
inline Outcome run_global_thiele(const Election& e, const WeightFunction& w, const RuleOptions& opt = {}) {
  return run_global_thiele(BallotProfile::compile(e), w, opt);
}
inline Outcome run_rule(const Election& e, const RuleSpec& spec, const RuleOptions& opt = {}) {
  return run_rule(BallotProfile::compile(e), spec, opt);
}

inline std::vector<std::string> funded_ids(const Election& e, const Outcome& o) {
  std::vector<std::string> out;
  for (auto p : o.funded) out.push_back(e.projects[p].id);
  return out;
}

}  // namespace psg
