#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psg/core_model.hpp"
#include "psg/games.hpp"
#include "psg/random.hpp"
#include "psg/rules.hpp"

namespace psg {

/// A labelled profile and the utilities the tracked proposers get in it.
struct ExpectedCell {
  std::string label;
  StrategyProfile profile;
  UtilityVector utilities;  // one entry per Fixture::tracked proposer
};

/// A named worked example: the game, the rules it is meant for, and the
/// expected outcomes.
struct Fixture {
  std::string name;
  Game game;
  std::vector<RuleSpec> rules;
  /// Proposers whose utilities `expected` records.
  std::vector<std::size_t> tracked;
  std::vector<ExpectedCell> expected;
  /// nullopt means the game has no pure equilibrium.
  std::optional<StrategyProfile> expected_ne;
};

namespace detail {

inline void add_block(Election& e, int count, const std::vector<std::string>& approvals) {
  for (int k = 0; k < count; ++k) {
    e.voters.push_back({"v" + std::to_string(e.voters.size() + 1), approvals});
  }
}

inline void add_cell(Fixture& f, std::string label, const std::vector<std::vector<std::string>>& ids,
                     UtilityVector u) {
  f.expected.push_back({std::move(label), f.game.profile_from_ids(ids), std::move(u)});
}

}  // namespace detail

/// Two groups (TREE and BIKE) with three projects each, one voter block per
/// project, budget 75'000, BasicAV.
inline Fixture intro_example() {
  Election e;
  e.projects = {{"T1", 50'000}, {"T2", 30'000}, {"T3", 30'000},
                {"B1", 10'000}, {"B2", 7'000},  {"B3", 7'000}};
  e.budget = 75'000;
  e.tie_break = {"T1", "T2", "B1", "T3", "B2", "B3"};
  detail::add_block(e, 6'000, {"T1"});
  detail::add_block(e, 5'000, {"T2"});
  detail::add_block(e, 3'000, {"T3"});
  detail::add_block(e, 4'000, {"B1"});
  detail::add_block(e, 2'000, {"B2"});
  detail::add_block(e, 1'000, {"B3"});
  Fixture f{"intro_example", Game(std::move(e), {{"T1", "T2", "T3"}, {"B1", "B2", "B3"}}, Mode::kPsg),
            {RuleSpec::basic_av()}, {0, 1}, {}, std::nullopt};
  detail::add_cell(f, "(T1 in, B1 in)", {{"T1", "T2", "T3"}, {"B1", "B2", "B3"}}, {50'000, 24'000});
  detail::add_cell(f, "(T1 out, B1 in)", {{"T2", "T3"}, {"B1", "B2", "B3"}}, {60'000, 10'000});
  detail::add_cell(f, "(T1 in, B1 out)", {{"T1", "T2", "T3"}, {"B2", "B3"}}, {50'000, 14'000});
  detail::add_cell(f, "(T1 out, B1 out)", {{"T2", "T3"}, {"B2", "B3"}}, {60'000, 14'000});
  f.expected_ne = f.game.profile_from_ids({{"T2", "T3"}, {"B2", "B3"}});
  return f;
}

enum class PenniesVariant { kSingleVoter, kPlurality };

/// Two proposers whose only real choice is whether to submit their most
/// preferred project; best responses cycle as in matching pennies.
/// Single voter: BasicAV and MES. Plurality (cost(c) dedicated voters per
/// project): Phragmen.
inline Fixture matching_pennies_game(PenniesVariant variant) {
  Election e;
  e.projects = {{"a1", 5}, {"a2", 4}, {"a3", 2}, {"b1", 6}, {"b2", 4}, {"b3", 4}};
  e.budget = 14;
  e.tie_break = {"a1", "b1", "b2", "b3", "a2", "a3"};
  std::vector<RuleSpec> rules;
  std::string name;
  if (variant == PenniesVariant::kSingleVoter) {
    detail::add_block(e, 1, {"a1", "a2", "a3", "b1", "b2", "b3"});
    rules = {RuleSpec::basic_av(), RuleSpec::mes()};
    name = "matching_pennies_single_voter";
  } else {
    for (const auto& p : e.projects) detail::add_block(e, static_cast<int>(p.cost), {p.id});
    rules = {RuleSpec::phragmen()};
    name = "matching_pennies_plurality";
  }
  Fixture f{name, Game(std::move(e), {{"a1", "a2", "a3"}, {"b1", "b2", "b3"}}, Mode::kPsg),
            std::move(rules), {0, 1}, {}, std::nullopt};
  detail::add_cell(f, "(a1 in, b1 in)", {{"a1", "a2", "a3"}, {"b1", "b2", "b3"}}, {7, 6});
  detail::add_cell(f, "(a1 out, b1 in)", {{"a2", "a3"}, {"b1", "b2", "b3"}}, {0, 14});
  detail::add_cell(f, "(a1 in, b1 out)", {{"a1", "a2", "a3"}, {"b2", "b3"}}, {5, 8});
  detail::add_cell(f, "(a1 out, b1 out)", {{"a2", "a3"}, {"b2", "b3"}}, {6, 8});
  return f;
}

/// Laminar multiwinner game without an equilibrium under Phragmen (B = 4)
/// or MES (B = 8). Projects r1, r2 are last in the tie-breaking order.
inline Fixture laminar_gadget(RuleKind rule) {
  if (rule != RuleKind::kPhragmen && rule != RuleKind::kMes) {
    throw InvalidInput("the laminar gadget is defined for Phragmen and MES");
  }
  Election e;
  for (const char* id : {"p1", "p2", "p3", "q1", "q2", "q3", "r1", "r2"}) e.projects.push_back({id, 1});
  e.budget = rule == RuleKind::kPhragmen ? 4 : 8;
  e.tie_break = {"p1", "q1", "p2", "p3", "q2", "q3", "r1", "r2"};
  detail::add_block(e, 6, {"p1"});
  detail::add_block(e, 9, {"p1", "q1", "q2"});
  detail::add_block(e, 9, {"p1", "q1", "q3"});
  detail::add_block(e, 6, {"p1", "q1", "p2"});
  detail::add_block(e, 6, {"p1", "q1", "p3"});
  detail::add_block(e, 6, {"r1"});
  detail::add_block(e, 6, {"r2"});
  const bool phragmen = rule == RuleKind::kPhragmen;
  Fixture f{phragmen ? "laminar_gadget_phragmen" : "laminar_gadget_mes",
            Game(std::move(e), {{"p1", "p2", "p3"}, {"q1", "q2", "q3"}, {"r1", "r2"}}, Mode::kPsg),
            {phragmen ? RuleSpec::phragmen() : RuleSpec::mes()},
            {0, 1},
            {},
            std::nullopt};
  detail::add_cell(f, "(-, -)", {{"p2", "p3"}, {"q2", "q3"}, {"r1", "r2"}}, {2, 2});
  detail::add_cell(f, "(p1, -)", {{"p1", "p2", "p3"}, {"q2", "q3"}, {"r1", "r2"}}, {1, 2});
  detail::add_cell(f, "(-, q1)", {{"p2", "p3"}, {"q1", "q2", "q3"}, {"r1", "r2"}}, {0, 3});
  detail::add_cell(f, "(p1, q1)", {{"p1", "p2", "p3"}, {"q1", "q2", "q3"}, {"r1", "r2"}}, {1, 1});
  return f;
}

/// Single-project game with one voter and no equilibrium (BasicAV, MES).
inline Fixture single_project_no_ne_game() {
  Election e;
  e.projects = {{"a1", 1}, {"a2", 3}, {"b1", 4}, {"b2", 5}};
  e.budget = 6;
  e.tie_break = {"a1", "b1", "a2", "b2"};
  detail::add_block(e, 1, {"a1", "a2", "b1", "b2"});
  Fixture f{"single_project_no_ne", Game(std::move(e), {{"a1", "a2"}, {"b1", "b2"}}, Mode::kPsg1),
            {RuleSpec::basic_av(), RuleSpec::mes()}, {0, 1}, {}, std::nullopt};
  detail::add_cell(f, "(a1, b1)", {{"a1"}, {"b1"}}, {1, 4});
  detail::add_cell(f, "(a2, b1)", {{"a2"}, {"b1"}}, {0, 4});
  detail::add_cell(f, "(a1, b2)", {{"a1"}, {"b2"}}, {1, 5});
  detail::add_cell(f, "(a2, b2)", {{"a2"}, {"b2"}}, {3, 0});
  return f;
}

/// Sequential Chamberlin-Courant game without an equilibrium: six blocks of
/// six voters, committee size 4.
inline Fixture seqcc_gadget() {
  Election e;
  for (const char* id : {"p1", "p2", "p3", "p4", "q1", "q2", "q3", "q4"}) e.projects.push_back({id, 1});
  e.budget = 4;
  e.tie_break = {"p1", "q1", "q4", "p3", "q2", "q3", "p2", "p4"};
  detail::add_block(e, 6, {"p2"});
  detail::add_block(e, 6, {"p1", "p3"});
  detail::add_block(e, 6, {"p1", "p4"});
  detail::add_block(e, 6, {"p1", "q1", "q2"});
  detail::add_block(e, 6, {"p1", "q1", "q3"});
  detail::add_block(e, 6, {"q1", "q4"});
  Fixture f{"seqcc_gadget",
            Game(std::move(e), {{"p1", "p2", "p3", "p4"}, {"q1", "q2", "q3", "q4"}}, Mode::kPsg),
            {RuleSpec::seq_thiele(WeightFunction::cc())}, {0, 1}, {}, std::nullopt};
  detail::add_cell(f, "(-, -)", {{"p2", "p3", "p4"}, {"q2", "q3", "q4"}}, {1, 3});
  detail::add_cell(f, "(p1, -)", {{"p1", "p2", "p3", "p4"}, {"q2", "q3", "q4"}}, {3, 1});
  detail::add_cell(f, "(-, q1)", {{"p2", "p3", "p4"}, {"q1", "q2", "q3", "q4"}}, {3, 1});
  detail::add_cell(f, "(p1, q1)", {{"p1", "p2", "p3", "p4"}, {"q1", "q2", "q3", "q4"}}, {2, 2});
  return f;
}

struct NamedFixture {
  std::string_view name;
  std::function<Fixture()> make;
};

inline const std::vector<NamedFixture>& fixture_catalog() {
  static const std::vector<NamedFixture> catalog = {
      {"intro_example", [] { return intro_example(); }},
      {"matching_pennies_single_voter", [] { return matching_pennies_game(PenniesVariant::kSingleVoter); }},
      {"matching_pennies_plurality", [] { return matching_pennies_game(PenniesVariant::kPlurality); }},
      {"laminar_gadget_phragmen", [] { return laminar_gadget(RuleKind::kPhragmen); }},
      {"laminar_gadget_mes", [] { return laminar_gadget(RuleKind::kMes); }},
      {"single_project_no_ne", [] { return single_project_no_ne_game(); }},
      {"seqcc_gadget", [] { return seqcc_gadget(); }},
  };
  return catalog;
}

inline std::optional<Fixture> fixture_by_name(std::string_view name) {
  for (const auto& f : fixture_catalog()) {
    if (f.name == name) return f.make();
  }
  return std::nullopt;
}

// --- random instances ------------------------------------------------------

enum class CostModel { kUnit, kUniform };

struct RandomGameConfig {
  std::size_t projects = 6;
  std::size_t proposers = 2;
  std::size_t voters = 8;
  CostModel costs = CostModel::kUnit;
  Money max_cost = 10;
  StructureClass structure = StructureClass::kGeneral;
  Mode mode = Mode::kPsg;
  std::uint64_t seed = 0;
};

/// Seeded random game. PARTY_LIST gives every voter one party (or none);
/// LAMINAR draws a random forest over projects and lets each voter approve a
/// root path, so supporter sets are subtrees.
inline Game random_game(const RandomGameConfig& cfg) {
  if (cfg.projects < cfg.proposers) throw InvalidInput("random_game needs at least as many projects as proposers");
  if (cfg.proposers == 0) throw InvalidInput("random_game needs at least one proposer");
  Rng rng(cfg.seed);
  const std::size_t m = cfg.projects;
  Election e;
  Money total = 0;
  for (std::size_t p = 0; p < m; ++p) {
    const Money cost = cfg.costs == CostModel::kUnit
                           ? 1
                           : 1 + static_cast<Money>(uniform_index(rng, static_cast<std::uint64_t>(cfg.max_cost)));
    e.projects.push_back({"c" + std::to_string(p + 1), cost});
    total += cost;
  }
  if (cfg.costs == CostModel::kUnit) {
    e.budget = 1 + static_cast<Money>(uniform_index(rng, m));
  } else {
    e.budget = cfg.max_cost + static_cast<Money>(uniform_index(rng, static_cast<std::uint64_t>(total)));
  }

  auto id = [&](std::size_t p) { return e.projects[p].id; };
  std::vector<std::vector<std::size_t>> ballots(cfg.voters);
  switch (cfg.structure) {
    case StructureClass::kGeneral:
      for (auto& b : ballots) {
        for (std::size_t p = 0; p < m; ++p) {
          if (uniform_index(rng, 5) < 2) b.push_back(p);
        }
      }
      break;
    case StructureClass::kPartyList: {
      const std::size_t parties = 1 + uniform_index(rng, m);
      std::vector<std::size_t> party(m);
      for (auto& x : party) x = uniform_index(rng, parties);
      for (auto& b : ballots) {
        const std::size_t choice = uniform_index(rng, parties + 1);  // == parties: abstain
        for (std::size_t p = 0; p < m; ++p) {
          if (party[p] == choice) b.push_back(p);
        }
      }
      break;
    }
    case StructureClass::kLaminar: {
      std::vector<std::ptrdiff_t> parent(m, -1);
      for (std::size_t p = 1; p < m; ++p) {
        const std::size_t pick = uniform_index(rng, p + 1);  // == p: new root
        if (pick < p) parent[p] = static_cast<std::ptrdiff_t>(pick);
      }
      for (auto& b : ballots) {
        const std::size_t node = uniform_index(rng, m + 1);  // == m: abstain
        if (node == m) continue;
        for (auto x = static_cast<std::ptrdiff_t>(node); x >= 0; x = parent[static_cast<std::size_t>(x)]) {
          b.push_back(static_cast<std::size_t>(x));
        }
      }
      break;
    }
  }
  for (std::size_t v = 0; v < ballots.size(); ++v) {
    Voter voter{"v" + std::to_string(v + 1), {}};
    std::sort(ballots[v].begin(), ballots[v].end());
    for (auto p : ballots[v]) voter.approvals.push_back(id(p));
    e.voters.push_back(std::move(voter));
  }

  std::vector<std::size_t> order(m);
  for (std::size_t p = 0; p < m; ++p) order[p] = p;
  fisher_yates(rng, order);
  for (auto p : order) e.tie_break.push_back(id(p));

  std::vector<std::size_t> deal(m);
  for (std::size_t p = 0; p < m; ++p) deal[p] = p;
  fisher_yates(rng, deal);
  std::vector<std::vector<std::string>> cells(cfg.proposers);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t owner = k < cfg.proposers ? k : uniform_index(rng, cfg.proposers);
    cells[owner].push_back(id(deal[k]));
  }
  return Game(std::move(e), cells, cfg.mode);
}

}  // namespace psg
