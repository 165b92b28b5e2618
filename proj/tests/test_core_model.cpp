#include <gtest/gtest.h>

#include "psg/core_model.hpp"
#include "psg/fixtures.hpp"
#include "psg/json_io.hpp"

using namespace psg;

namespace {

Election tiny() {
  Election e;
  e.projects = {{"a", 1}, {"b", 2}, {"c", 3}};
  e.voters = {{"v1", {"a", "b"}}, {"v2", {"b"}}, {"v3", {}}};
  e.budget = 3;
  e.tie_break = {"c", "a", "b"};
  return e;
}

std::size_t count_kind(const ValidationReport& r, ViolationKind k) {
  return static_cast<std::size_t>(
      std::count_if(r.begin(), r.end(), [k](const Violation& v) { return v.kind == k; }));
}

}  // namespace

TEST(Validate, IntroElectionIsWellFormed) {
  EXPECT_TRUE(validate_election(intro_example().game.election()).empty());
}

TEST(Validate, DanglingApprovalIsOneViolation) {
  auto e = tiny();
  e.voters[0].approvals.push_back("zz");
  const auto r = validate_election(e);
  ASSERT_EQ(r.size(), 1U);
  EXPECT_EQ(r[0].kind, ViolationKind::kDanglingApproval);
}

TEST(Validate, TieBreakMissingProjectIsOnePermutationViolation) {
  auto e = tiny();
  e.tie_break.pop_back();
  const auto r = validate_election(e);
  ASSERT_EQ(r.size(), 1U);
  EXPECT_EQ(r[0].kind, ViolationKind::kTieBreakMismatch);
}

TEST(Validate, ListsEveryViolation) {
  auto e = tiny();
  e.projects.push_back({"a", 0});
  e.budget = -1;
  e.voters[1].approvals.push_back("b");
  const auto r = validate_election(e);
  EXPECT_EQ(count_kind(r, ViolationKind::kDuplicateProjectId), 1U);
  EXPECT_EQ(count_kind(r, ViolationKind::kNonPositiveCost), 1U);
  EXPECT_EQ(count_kind(r, ViolationKind::kNegativeBudget), 1U);
  EXPECT_EQ(count_kind(r, ViolationKind::kDuplicateApproval), 1U);
}

TEST(Validate, EmptyApprovalsAndExpensiveProjectsAreLegal) {
  auto e = tiny();
  e.projects[2].cost = 100;
  EXPECT_TRUE(validate_election(e).empty());
}

TEST(Structure, SingleVoterApprovingEverythingIsPartyList) {
  Election e;
  e.projects = {{"a", 1}, {"b", 1}, {"c", 1}};
  e.voters = {{"v", {"a", "b", "c"}}};
  e.budget = 1;
  e.tie_break = {"a", "b", "c"};
  EXPECT_EQ(classify_structure(e), StructureClass::kPartyList);
}

TEST(Structure, OverlappingNonNestedIsGeneral) {
  Election e;
  e.projects = {{"a", 1}, {"b", 1}};
  e.voters = {{"v1", {"a"}}, {"v2", {"a", "b"}}, {"v3", {"b"}}};
  e.budget = 1;
  e.tie_break = {"a", "b"};
  EXPECT_EQ(classify_structure(e), StructureClass::kGeneral);
}

TEST(Structure, LaminarGadgetIsLaminar) {
  EXPECT_EQ(classify_structure(laminar_gadget(RuleKind::kPhragmen).game.election()), StructureClass::kLaminar);
}

TEST(Structure, NoVotersIsPartyList) {
  auto e = tiny();
  e.voters.clear();
  EXPECT_EQ(classify_structure(e), StructureClass::kPartyList);
}

TEST(Structure, NestedSupportIsLaminarNotPartyList) {
  Election e;
  e.projects = {{"a", 1}, {"b", 1}};
  e.voters = {{"v1", {"a", "b"}}, {"v2", {"a"}}};
  e.budget = 1;
  e.tie_break = {"a", "b"};
  EXPECT_EQ(classify_structure(e), StructureClass::kLaminar);
}

TEST(Ballots, IdenticalVotersMerge) {
  const auto bp = BallotProfile::compile(intro_example().game.election());
  EXPECT_EQ(bp.ballots().size(), 6U);
  EXPECT_EQ(bp.voter_count(), 21'000);
  EXPECT_EQ(bp.support(0), 6'000);
}

TEST(Ballots, CompileRejectsMalformedElection) {
  auto e = tiny();
  e.tie_break = {"a"};
  EXPECT_THROW(BallotProfile::compile(e), InvalidInput);
}

TEST(Game, RejectsBadPartitions) {
  const auto e = tiny();
  EXPECT_THROW(Game(e, {{"a", "b"}}, Mode::kPsg), InvalidInput);                 // c unowned
  EXPECT_THROW(Game(e, {{"a", "b"}, {"b", "c"}}, Mode::kPsg), InvalidInput);     // b twice
  EXPECT_THROW(Game(e, {{"a", "b", "c"}, {}}, Mode::kPsg), InvalidInput);        // empty cell
  EXPECT_THROW(Game(e, {{"a", "b", "x"}, {"c"}}, Mode::kPsg), InvalidInput);     // unknown id
  EXPECT_THROW(Game(e, {}, Mode::kPsg), InvalidInput);
  EXPECT_NO_THROW(Game(e, {{"b", "a"}, {"c"}}, Mode::kPsg));
}

TEST(Game, StrategyInvariants) {
  const Game g(tiny(), {{"a", "b"}, {"c"}}, Mode::kPsg1);
  EXPECT_THROW(g.profile_from_ids({{"a", "b"}, {"c"}}), InvalidInput);  // PSG1 needs singletons
  EXPECT_THROW(g.profile_from_ids({{}, {"c"}}), InvalidInput);          // nonempty
  EXPECT_THROW(g.profile_from_ids({{"c"}, {"c"}}), InvalidInput);       // not owned
  EXPECT_NO_THROW(g.profile_from_ids({{"b"}, {"c"}}));
}

TEST(Game, CanonicalOrderIsLexicographicOnIds) {
  const Game g(tiny(), {{"a", "b"}, {"c"}}, Mode::kPsg);
  const auto a = g.strategy_from_ids(0, {"a"});
  const auto ab = g.strategy_from_ids(0, {"b", "a"});
  const auto b = g.strategy_from_ids(0, {"b"});
  EXPECT_TRUE(g.strategy_less(a, ab));
  EXPECT_TRUE(g.strategy_less(ab, b));
  EXPECT_EQ(g.describe(g.profile_from_ids({{"b", "a"}, {"c"}})), "({a,b},{c})");
}

TEST(Induced, FullProfileKeepsAllSixIntroProjects) {
  const auto f = intro_example();
  const auto e = induced_election(f.game, full_profile(f.game));
  EXPECT_EQ(e, f.game.election());
}

TEST(Induced, IntroEquilibriumKeepsFourProjectsAndBudget) {
  const auto f = intro_example();
  const auto e = induced_election(f.game, f.game.profile_from_ids({{"T2", "T3"}, {"B2", "B3"}}));
  ASSERT_EQ(e.projects.size(), 4U);
  EXPECT_EQ(e.budget, 75'000);
  EXPECT_EQ(e.voters.size(), 21'000U);
  EXPECT_EQ(e.tie_break, (std::vector<std::string>{"T2", "T3", "B2", "B3"}));
  EXPECT_TRUE(validate_election(e).empty());
}

TEST(Induced, SingleProjectProfileGivesTwoProjects) {
  const auto f = single_project_no_ne_game();
  const auto e = induced_election(f.game, f.game.profile_from_ids({{"a1"}, {"b1"}}));
  EXPECT_EQ(e.projects.size(), 2U);
}

TEST(Induced, TieBreakIsSubsequence) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    RandomGameConfig cfg;
    cfg.projects = 6;
    cfg.proposers = 3;
    cfg.seed = seed;
    const Game g = random_game(cfg);
    const auto s = random_profile(g, seed);
    const auto e = induced_election(g, s);
    std::size_t k = 0;
    for (const auto& id : g.election().tie_break) {
      if (k < e.tie_break.size() && e.tie_break[k] == id) ++k;
    }
    EXPECT_EQ(k, e.tie_break.size());
  }
}

TEST(Induced, RejectsInvalidProfile) {
  const auto f = intro_example();
  StrategyProfile s = full_profile(f.game);
  s.strategies[0].clear();
  EXPECT_THROW(induced_election(f.game, s), InvalidInput);
}

TEST(Json, GameRoundTrip) {
  for (const auto& named : fixture_catalog()) {
    const auto f = named.make();
    const auto j = to_json(f.game);
    const Game back = game_from_json(json::parse(j.dump()));
    EXPECT_EQ(back.election(), f.game.election()) << named.name;
    EXPECT_EQ(back.proposer_ids(), f.game.proposer_ids());
    EXPECT_EQ(back.mode(), f.game.mode());
  }
}

TEST(Json, ProfileRoundTrip) {
  const auto f = intro_example();
  const auto s = f.game.profile_from_ids({{"T2", "T3"}, {"B2", "B3"}});
  EXPECT_EQ(profile_from_json(f.game, profile_to_json(f.game, s)), s);
  EXPECT_EQ(profile_to_json(f.game, s).dump(), R"([["T2","T3"],["B2","B3"]])");
}

TEST(Json, MalformedElectionNamesTheProblem) {
  auto j = to_json(tiny());
  j["voters"][0]["approvals"].push_back("nope");
  try {
    election_from_json(j);
    FAIL();
  } catch (const InvalidInput& ex) {
    EXPECT_NE(std::string(ex.what()).find("nope"), std::string::npos);
  }
  j.erase("budget");
  EXPECT_THROW(election_from_json(j), InvalidInput);
}
