#pragma once

#include <optional>
#include <string>
#include <vector>

#include "psg/core_model.hpp"
#include "psg/fixtures.hpp"
#include "psg/games.hpp"
#include "psg/rules.hpp"
#include "json.hpp"

// Canonical JSON forms. Field names follow the domain types:
//   election: {"projects":[{"id","cost"}], "voters":[{"id","approvals"}], "budget", "tie_break"}
//   game:     {"election", "proposers":[[ids]], "mode":"PSG"|"PSG1"}
//   profile:  [[ids], ...] in proposer order

namespace psg {

/// Insertion-ordered so every document lists fields in a fixed, readable order.
using json = nlohmann::ordered_json;

inline json to_json(const Election& e) {
  json projects = json::array();
  for (const auto& p : e.projects) projects.push_back({{"id", p.id}, {"cost", p.cost}});
  json voters = json::array();
  for (const auto& v : e.voters) voters.push_back({{"id", v.id}, {"approvals", v.approvals}});
  return {{"projects", projects}, {"voters", voters}, {"budget", e.budget}, {"tie_break", e.tie_break}};
}

namespace detail {

template <typename T>
T field(const json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key)) {
    throw InvalidInput(std::string(where) + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& ex) {
    throw InvalidInput(std::string(where) + ": bad field '" + key + "': " + ex.what());
  }
}

}  // namespace detail

/// Parses and validates an election; malformed input throws InvalidInput
/// listing every violation.
inline Election election_from_json(const json& j) {
  Election e;
  for (const auto& p : detail::field<json>(j, "projects", "election")) {
    e.projects.push_back({detail::field<std::string>(p, "id", "project"), detail::field<Money>(p, "cost", "project")});
  }
  for (const auto& v : detail::field<json>(j, "voters", "election")) {
    e.voters.push_back({detail::field<std::string>(v, "id", "voter"),
                        detail::field<std::vector<std::string>>(v, "approvals", "voter")});
  }
  e.budget = detail::field<Money>(j, "budget", "election");
  e.tie_break = detail::field<std::vector<std::string>>(j, "tie_break", "election");
  const auto report = validate_election(e);
  if (!report.empty()) {
    std::string msg = "invalid election:";
    for (const auto& v : report) msg += "\n  " + v.message;
    throw InvalidInput(msg);
  }
  return e;
}

inline Mode parse_mode(std::string_view s) {
  if (s == "PSG" || s == "psg") return Mode::kPsg;
  if (s == "PSG1" || s == "psg1") return Mode::kPsg1;
  throw InvalidInput("unknown mode '" + std::string(s) + "' (expected psg or psg1)");
}

inline json to_json(const Game& g) {
  return {{"election", to_json(g.election())}, {"proposers", g.proposer_ids()}, {"mode", to_string(g.mode())}};
}

inline Game game_from_json(const json& j) {
  return Game(election_from_json(detail::field<json>(j, "election", "game")),
              detail::field<std::vector<std::vector<std::string>>>(j, "proposers", "game"),
              parse_mode(detail::field<std::string>(j, "mode", "game")));
}

inline json profile_to_json(const Game& g, const StrategyProfile& s) { return g.profile_ids(s); }

inline StrategyProfile profile_from_json(const Game& g, const json& j) {
  try {
    return g.profile_from_ids(j.get<std::vector<std::vector<std::string>>>());
  } catch (const json::exception& ex) {
    throw InvalidInput(std::string("bad profile: ") + ex.what());
  }
}

/// One JSON object per round. Balances, when recorded, are listed per voter
/// in election order.
inline std::vector<json> trace_to_json(const BallotProfile& bp, const Election& e, const Outcome& o) {
  std::vector<json> out;
  const auto group = bp.voter_group();
  for (const auto& r : o.trace) {
    json rec = {{"round", r.round},
                {"project", bp.id(r.project)},
                {"action", r.action == RoundAction::kFunded ? "funded" : "dropped"},
                {"time_or_rho", to_fraction_string(r.value)}};
    if (!r.balances.empty() && group.size() == e.voters.size()) {
      json balances = json::object();
      for (std::size_t v = 0; v < group.size(); ++v) {
        balances[e.voters[v].id] = to_fraction_string(r.balances[group[v]]);
      }
      rec["balances"] = std::move(balances);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

/// Expected-results sidecar written next to an exported fixture game.
inline json fixture_sidecar(const Fixture& f) {
  json rules = json::array();
  for (const auto& r : f.rules) rules.push_back(r.name());
  json cells = json::array();
  for (const auto& c : f.expected) {
    cells.push_back({{"label", c.label}, {"profile", profile_to_json(f.game, c.profile)}, {"utilities", c.utilities}});
  }
  json ne = f.expected_ne ? profile_to_json(f.game, *f.expected_ne) : json("NONE");
  return {{"name", f.name}, {"rules", rules}, {"tracked", f.tracked}, {"expected", cells}, {"expected_ne", ne}};
}

struct Sidecar {
  std::string name;
  std::vector<RuleSpec> rules;
  std::vector<std::size_t> tracked;
  std::vector<ExpectedCell> expected;
  std::optional<StrategyProfile> expected_ne;
};

inline Sidecar sidecar_from_json(const Game& g, const json& j) {
  Sidecar s;
  s.name = detail::field<std::string>(j, "name", "sidecar");
  for (const auto& r : detail::field<std::vector<std::string>>(j, "rules", "sidecar")) s.rules.push_back(parse_rule(r));
  s.tracked = detail::field<std::vector<std::size_t>>(j, "tracked", "sidecar");
  for (const auto& c : detail::field<json>(j, "expected", "sidecar")) {
    s.expected.push_back({detail::field<std::string>(c, "label", "expected cell"),
                          profile_from_json(g, detail::field<json>(c, "profile", "expected cell")),
                          detail::field<UtilityVector>(c, "utilities", "expected cell")});
  }
  const auto ne = detail::field<json>(j, "expected_ne", "sidecar");
  if (!ne.is_string()) s.expected_ne = profile_from_json(g, ne);
  return s;
}

}  // namespace psg
