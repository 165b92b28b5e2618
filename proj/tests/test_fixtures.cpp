#include <gtest/gtest.h>

#include "oracle.hpp"
#include "psg/fixtures.hpp"
#include "psg/json_io.hpp"

using namespace psg;

class EveryFixture : public ::testing::TestWithParam<std::string> {};

TEST_P(EveryFixture, ExpectedCellsMatchUtilities) {
  const auto f = *fixture_by_name(GetParam());
  for (const auto& rule : f.rules) {
    for (const auto& cell : f.expected) {
      const auto u = utilities(f.game, rule, cell.profile);
      UtilityVector tracked;
      for (auto i : f.tracked) tracked.push_back(u[i]);
      EXPECT_EQ(tracked, cell.utilities) << rule.name() << " " << cell.label;
      // the reference implementation agrees on every cell
      const auto ref = oracle::utilities(f.game, rule, oracle::to_ids(f.game, cell.profile));
      EXPECT_EQ(ref, u) << rule.name() << " " << cell.label;
    }
  }
}

TEST_P(EveryFixture, ExpectedEquilibriumMatchesBruteForce) {
  const auto f = *fixture_by_name(GetParam());
  for (const auto& rule : f.rules) {
    const auto res = ne_exists_bruteforce(f.game, rule);
    if (f.expected_ne) {
      ASSERT_EQ(res.status, SearchStatus::kFound) << rule.name();
      EXPECT_TRUE(is_nash(f.game, rule, *f.expected_ne));
    } else {
      EXPECT_EQ(res.status, SearchStatus::kNone) << rule.name();
    }
  }
}

TEST_P(EveryFixture, SidecarRoundTrip) {
  const auto f = *fixture_by_name(GetParam());
  const Game g = game_from_json(json::parse(to_json(f.game).dump()));
  const auto side = sidecar_from_json(g, json::parse(fixture_sidecar(f).dump()));
  EXPECT_EQ(side.name, f.name);
  EXPECT_EQ(side.rules, f.rules);
  EXPECT_EQ(side.tracked, f.tracked);
  ASSERT_EQ(side.expected.size(), f.expected.size());
  for (std::size_t k = 0; k < f.expected.size(); ++k) {
    EXPECT_EQ(side.expected[k].label, f.expected[k].label);
    EXPECT_EQ(side.expected[k].profile, f.expected[k].profile);
    EXPECT_EQ(side.expected[k].utilities, f.expected[k].utilities);
  }
  EXPECT_EQ(side.expected_ne, f.expected_ne);
}

INSTANTIATE_TEST_SUITE_P(Catalog, EveryFixture, ::testing::ValuesIn([] {
                           std::vector<std::string> names;
                           for (const auto& f : fixture_catalog()) names.emplace_back(f.name);
                           return names;
                         }()));

TEST(Intro, EquilibriumFoundByDynamicsAndNash) {
  const auto f = intro_example();
  ASSERT_TRUE(f.expected_ne.has_value());
  EXPECT_EQ(f.game.describe(*f.expected_ne), "({T2,T3},{B2,B3})");
  EXPECT_TRUE(is_nash(f.game, RuleSpec::basic_av(), *f.expected_ne));
  const auto d = br_dynamics(f.game, RuleSpec::basic_av(), full_profile(f.game));
  EXPECT_EQ(d.final, *f.expected_ne);
}

TEST(LaminarGadget, PhragmenCellsFundTheRecomputedSets) {
  const auto f = laminar_gadget(RuleKind::kPhragmen);
  const auto spec = RuleSpec::phragmen();
  auto funded = [&](const std::vector<std::vector<std::string>>& ids) {
    std::set<std::string> out;
    for (auto p : funded_projects(f.game, spec, f.game.profile_from_ids(ids))) out.insert(f.game.id(p));
    return out;
  };
  EXPECT_EQ(funded({{"p2", "p3"}, {"q2", "q3"}, {"r1", "r2"}}), (std::set<std::string>{"q2", "q3", "p2", "p3"}));
  EXPECT_EQ(funded({{"p1", "p2", "p3"}, {"q1", "q2", "q3"}, {"r1", "r2"}}),
            (std::set<std::string>{"p1", "q1", "r1", "r2"}));
}

TEST(LaminarGadget, BudgetsAndStructure) {
  EXPECT_EQ(laminar_gadget(RuleKind::kPhragmen).game.election().budget, 4);
  EXPECT_EQ(laminar_gadget(RuleKind::kMes).game.election().budget, 8);
  EXPECT_EQ(laminar_gadget(RuleKind::kMes).game.election().voters.size(), 48U);
  EXPECT_THROW(laminar_gadget(RuleKind::kBasicAv), InvalidInput);
}

TEST(SingleProjectNoNe, BestResponsesCycle) {
  const auto f = single_project_no_ne_game();
  const auto& g = f.game;
  const auto r = RuleSpec::basic_av();
  auto br = [&](std::size_t i, const std::vector<std::vector<std::string>>& ids) {
    return g.id(best_response(g, r, g.profile_from_ids(ids), i).best_strategies.front().front());
  };
  EXPECT_EQ(br(0, {{"a1"}, {"b2"}}), "a2");
  EXPECT_EQ(br(1, {{"a2"}, {"b2"}}), "b1");
  EXPECT_EQ(br(0, {{"a2"}, {"b1"}}), "a1");
  EXPECT_EQ(br(1, {{"a1"}, {"b1"}}), "b2");
  EXPECT_EQ(experiment_classify(g, RuleSpec::mes()).kind, Classification::kNoNe);
}

TEST(Catalog, UnknownNameIsNullopt) { EXPECT_FALSE(fixture_by_name("nope").has_value()); }

TEST(RandomGame, SameSeedSameGame) {
  RandomGameConfig cfg;
  cfg.projects = 7;
  cfg.proposers = 3;
  cfg.costs = CostModel::kUniform;
  cfg.seed = 42;
  const Game a = random_game(cfg), b = random_game(cfg);
  EXPECT_EQ(a.election(), b.election());
  EXPECT_EQ(a.proposer_ids(), b.proposer_ids());
  cfg.seed = 43;
  EXPECT_FALSE(random_game(cfg).election() == a.election());
}

TEST(RandomGame, StructureIsAsRequested) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RandomGameConfig cfg;
    cfg.projects = 2 + seed % 7;
    cfg.proposers = 1 + seed % 2;
    cfg.voters = 1 + seed % 12;
    cfg.seed = seed;
    cfg.structure = StructureClass::kPartyList;
    EXPECT_EQ(classify_structure(random_game(cfg).election()), StructureClass::kPartyList);
    cfg.structure = StructureClass::kLaminar;
    EXPECT_NE(classify_structure(random_game(cfg).election()), StructureClass::kGeneral);
  }
}

TEST(RandomGame, RejectsTooFewProjects) {
  RandomGameConfig cfg;
  cfg.projects = 2;
  cfg.proposers = 3;
  EXPECT_THROW(random_game(cfg), InvalidInput);
}
