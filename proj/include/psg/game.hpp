#pragma once

#include <algorithm>
#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psg/ballots.hpp"
#include "psg/election.hpp"
#include "psg/errors.hpp"

namespace psg {

enum class Mode { kPsg, kPsg1 };

inline std::string_view to_string(Mode m) { return m == Mode::kPsg ? "PSG" : "PSG1"; }

/// Projects submitted by one proposer, sorted by project id.
using Strategy = std::vector<ProjectIndex>;

/// One strategy per proposer, indexed like Game::cell().
struct StrategyProfile {
  std::vector<Strategy> strategies;

  std::size_t size() const { return strategies.size(); }
  const Strategy& operator[](std::size_t i) const { return strategies[i]; }
  Strategy& operator[](std::size_t i) { return strategies[i]; }

  friend bool operator==(const StrategyProfile&, const StrategyProfile&) = default;
  friend auto operator<=>(const StrategyProfile&, const StrategyProfile&) = default;
};

/// A project submission game: an election whose projects are partitioned
/// among proposers. Immutable after construction.
class Game {
 public:
  Game(Election election, const std::vector<std::vector<std::string>>& proposers, Mode mode)
      : election_(std::move(election)),
        ballots_(BallotProfile::compile(election_)),
        mode_(mode) {
    if (proposers.empty()) throw InvalidInput("a game needs at least one proposer");
    const auto index = election_.id_index();
    owner_.assign(election_.projects.size(), kNoOwner);
    for (std::size_t i = 0; i < proposers.size(); ++i) {
      if (proposers[i].empty()) {
        throw InvalidInput("proposer " + std::to_string(i) + " owns no projects");
      }
      std::vector<ProjectIndex> cell;
      for (const auto& id : proposers[i]) {
        auto it = index.find(id);
        if (it == index.end()) throw InvalidInput("proposer cell names unknown project '" + id + "'");
        if (owner_[it->second] != kNoOwner) {
          throw InvalidInput("project '" + id + "' is owned by more than one proposer");
        }
        owner_[it->second] = i;
        cell.push_back(it->second);
      }
      std::sort(cell.begin(), cell.end(), [this](ProjectIndex a, ProjectIndex b) {
        return election_.projects[a].id < election_.projects[b].id;
      });
      cells_.push_back(std::move(cell));
    }
    for (ProjectIndex p = 0; p < owner_.size(); ++p) {
      if (owner_[p] == kNoOwner) {
        throw InvalidInput("project '" + election_.projects[p].id + "' has no proposer");
      }
    }
  }

  const Election& election() const { return election_; }
  const BallotProfile& ballots() const { return ballots_; }
  Mode mode() const { return mode_; }
  std::size_t proposer_count() const { return cells_.size(); }
  std::span<const ProjectIndex> cell(std::size_t i) const { return cells_[i]; }
  std::size_t owner(ProjectIndex p) const { return owner_[p]; }
  const std::string& id(ProjectIndex p) const { return election_.projects[p].id; }

  std::vector<std::vector<std::string>> proposer_ids() const {
    std::vector<std::vector<std::string>> out;
    for (const auto& c : cells_) {
      auto& row = out.emplace_back();
      for (auto p : c) row.push_back(id(p));
    }
    return out;
  }

  /// Canonical strategy order: lexicographic over the sorted id tuples.
  bool strategy_less(const Strategy& a, const Strategy& b) const {
    return std::lexicographical_compare(
        a.begin(), a.end(), b.begin(), b.end(),
        [this](ProjectIndex x, ProjectIndex y) { return id(x) < id(y); });
  }

  /// Canonical profile order: proposer 0 is the most significant position.
  bool profile_less(const StrategyProfile& a, const StrategyProfile& b) const {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (strategy_less(a[i], b[i])) return true;
      if (strategy_less(b[i], a[i])) return false;
    }
    return false;
  }

  /// Throws InvalidInput unless s is a legal strategy of proposer i.
  void check_strategy(std::size_t i, const Strategy& s) const {
    if (s.empty()) throw InvalidInput("proposer " + std::to_string(i) + " submits an empty strategy");
    if (mode_ == Mode::kPsg1 && s.size() != 1) {
      throw InvalidInput("proposer " + std::to_string(i) + " must submit exactly one project");
    }
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k] >= owner_.size() || owner_[s[k]] != i) {
        throw InvalidInput("proposer " + std::to_string(i) + " submits a project it does not own");
      }
      if (k > 0 && !(id(s[k - 1]) < id(s[k]))) {
        throw InvalidInput("strategy of proposer " + std::to_string(i) +
                           " is not a sorted set of distinct projects");
      }
    }
  }

  void check_profile(const StrategyProfile& s) const {
    if (s.size() != cells_.size()) {
      throw InvalidInput("profile has " + std::to_string(s.size()) + " strategies, game has " +
                         std::to_string(cells_.size()) + " proposers");
    }
    for (std::size_t i = 0; i < s.size(); ++i) check_strategy(i, s[i]);
  }

  Strategy strategy_from_ids(std::size_t i, const std::vector<std::string>& ids) const {
    Strategy s;
    for (const auto& x : ids) {
      auto p = election_.index_of(x);
      if (!p) throw InvalidInput("unknown project '" + x + "' in strategy");
      s.push_back(*p);
    }
    std::sort(s.begin(), s.end(), [this](ProjectIndex a, ProjectIndex b) { return id(a) < id(b); });
    check_strategy(i, s);
    return s;
  }

  StrategyProfile profile_from_ids(const std::vector<std::vector<std::string>>& ids) const {
    if (ids.size() != cells_.size()) throw InvalidInput("profile size does not match proposer count");
    StrategyProfile out;
    for (std::size_t i = 0; i < ids.size(); ++i) out.strategies.push_back(strategy_from_ids(i, ids[i]));
    return out;
  }

  std::vector<std::vector<std::string>> profile_ids(const StrategyProfile& s) const {
    std::vector<std::vector<std::string>> out;
    for (const auto& st : s.strategies) {
      auto& row = out.emplace_back();
      for (auto p : st) row.push_back(id(p));
    }
    return out;
  }

  /// Human-readable form, e.g. "({T2,T3},{B2,B3})".
  std::string describe(const StrategyProfile& s) const {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out += ",";
      out += "{";
      for (std::size_t k = 0; k < s[i].size(); ++k) {
        if (k) out += ",";
        out += id(s[i][k]);
      }
      out += "}";
    }
    return out + ")";
  }

  /// Union of the submitted projects, ascending by election index.
  std::vector<ProjectIndex> submitted(const StrategyProfile& s) const {
    std::vector<ProjectIndex> out;
    for (const auto& st : s.strategies) out.insert(out.end(), st.begin(), st.end());
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  static constexpr std::size_t kNoOwner = static_cast<std::size_t>(-1);

  Election election_;
  BallotProfile ballots_;
  Mode mode_;
  std::vector<std::vector<ProjectIndex>> cells_;
  std::vector<std::size_t> owner_;
};

/// The election restricted to the submitted projects: approvals and the
/// tie-breaking order are filtered, everything else is unchanged.
inline Election induced_election(const Game& g, const StrategyProfile& s) {
  g.check_profile(s);
  const auto& e = g.election();
  std::vector<bool> keep(e.projects.size(), false);
  for (auto p : g.submitted(s)) keep[p] = true;
  const auto index = e.id_index();
  auto kept = [&](const std::string& id) { return keep[index.at(id)]; };

  Election out;
  out.budget = e.budget;
  for (ProjectIndex p = 0; p < e.projects.size(); ++p) {
    if (keep[p]) out.projects.push_back(e.projects[p]);
  }
  for (const auto& v : e.voters) {
    Voter nv{v.id, {}};
    for (const auto& a : v.approvals) {
      if (kept(a)) nv.approvals.push_back(a);
    }
    out.voters.push_back(std::move(nv));
  }
  for (const auto& id : e.tie_break) {
    if (kept(id)) out.tie_break.push_back(id);
  }
  return out;
}

}  // namespace psg
