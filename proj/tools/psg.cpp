// psg: command-line front end for project submission games.
//
//   psg run --in <dir> --out <dir> [--rules ...] [--mode psg|psg1] [--proposers 2,3,4,5] ...
//   psg analyze <game.json> --rule <rule> [--mode psg|psg1] [--expected <sidecar>] [--json] [--trace <file>]
//   psg fixtures <name>|--all --out <dir>
//
// Exit status is nonzero only for I/O and configuration errors.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "psg/psg.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<psg::RuleSpec> parse_rules(const std::vector<std::string>& names) {
  std::vector<psg::RuleSpec> out;
  for (const auto& n : names) out.push_back(psg::parse_rule(n));
  return out;
}

psg::TieBreakConfig parse_tie_break(const std::string& value) {
  if (value == "file-order") return {};
  constexpr std::string_view prefix = "explicit:";
  if (value.starts_with(prefix)) {
    psg::TieBreakConfig cfg{psg::TieBreakPolicy::kExplicit, {}};
    std::stringstream ss(value.substr(prefix.size()));
    for (std::string id; std::getline(ss, id, ',');) cfg.order.push_back(id);
    return cfg;
  }
  throw psg::InvalidInput("unknown tie-break policy '" + value + "' (expected file-order or explicit:<id>,<id>,...)");
}

psg::json read_json(const fs::path& p) {
  try {
    return psg::json::parse(psg::read_file(p));
  } catch (const psg::json::exception& ex) {
    throw psg::InvalidInput(p.string() + ": " + ex.what());
  }
}

int cmd_run(const psg::RunManifest& m, const std::string& out_dir) {
  const auto result = psg::run_experiments(m);
  psg::write_run_outputs(m, result, out_dir);
  if (result.files == 0) std::cerr << "warning: no .pb files in " << m.input_dir << "\n";
  for (const auto& e : result.errors) std::cerr << "warning: skipped " << e.file << ": " << e.message << "\n";
  std::cout << psg::rows_to_csv(result.rows);
  std::cout << "files: " << result.files << ", parse errors: " << result.errors.size() << "\n";
  return 0;
}

int cmd_analyze(const std::string& path, const std::string& rule_name, const std::string& mode,
                std::string expected, bool as_json, std::size_t max_iter, std::uint64_t seed,
                const std::string& trace_path) {
  auto game = psg::game_from_json(read_json(path));
  if (!mode.empty()) {
    game = psg::Game(game.election(), game.proposer_ids(), psg::parse_mode(mode));
  }
  const auto rule = psg::parse_rule(rule_name);

  const std::string suffix = ".game.json";
  if (expected.empty() && path.ends_with(suffix)) {
    const auto guess = path.substr(0, path.size() - suffix.size()) + ".expected.json";
    if (fs::exists(guess)) expected = guess;
  }
  std::optional<psg::Sidecar> sidecar;
  if (!expected.empty()) sidecar = psg::sidecar_from_json(game, read_json(expected));

  psg::ExperimentOptions opt;
  opt.max_iter = max_iter;
  opt.seed = seed;
  const auto report = psg::analyze_game(game, rule, opt, sidecar);
  if (!trace_path.empty()) {
    // Round-by-round record of the rule on the full submission.
    const auto outcome = psg::run_rule(game.ballots(), rule, {.trace = true, .balances = true});
    std::ofstream out(trace_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + trace_path);
    for (const auto& rec : psg::trace_to_json(game.ballots(), game.election(), outcome)) out << rec.dump() << "\n";
  }
  if (as_json) {
    std::cout << psg::to_json(game, report).dump(2) << "\n";
  } else {
    std::cout << psg::render_text(game, report);
  }
  return 0;
}

int cmd_fixtures(const std::string& name, bool all, const std::string& out_dir) {
  std::vector<psg::Fixture> chosen;
  if (all) {
    for (const auto& f : psg::fixture_catalog()) chosen.push_back(f.make());
  } else {
    auto f = psg::fixture_by_name(name);
    if (!f) {
      std::string names;
      for (const auto& c : psg::fixture_catalog()) names += "\n  " + std::string(c.name);
      throw psg::InvalidInput("unknown fixture '" + name + "'; available:" + names);
    }
    chosen.push_back(std::move(*f));
  }
  for (const auto& f : chosen) {
    for (const auto& p : psg::export_fixture(f, out_dir)) std::cout << p.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Project submission games: rules, equilibria and experiments"};
  app.require_subcommand(1);

  psg::RunManifest manifest;
  std::vector<std::string> rules = {"basicav", "phragmen", "mes"};
  std::string mode = "psg", tie_break = "file-order", out_dir;
  auto* run = app.add_subcommand("run", "Classify every .pb instance in a directory");
  run->add_option("--in", manifest.input_dir, "Directory of .pb files")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--rules", rules, "Comma-separated rules")->delimiter(',')->capture_default_str();
  run->add_option("--mode", mode, "psg or psg1")->capture_default_str();
  run->add_option("--proposers", manifest.proposers, "Comma-separated proposer counts")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--max-projects", manifest.max_projects, "Skip instances with more projects")
      ->capture_default_str();
  run->add_option("--seed", manifest.seed, "Base seed")->capture_default_str();
  run->add_option("--tie-break", tie_break, "file-order or explicit:<id>,<id>,...")->capture_default_str();
  run->add_option("--max-iter", manifest.max_iter, "Best-response dynamics iterations")->capture_default_str();
  run->add_option("--max-profiles", manifest.limits.max_profiles, "Brute-force profile cap")->capture_default_str();
  run->add_option("--threads", manifest.threads, "Worker threads (0 = all cores)")->capture_default_str();

  std::string game_path, rule = "basicav", analyze_mode, expected, trace_path;
  bool as_json = false;
  std::size_t max_iter = 10;
  std::uint64_t seed = 0;
  auto* analyze = app.add_subcommand("analyze", "Classify one game and print its payoffs");
  analyze->add_option("game", game_path, "Game JSON file")->required();
  analyze->add_option("--rule", rule, "Rule")->capture_default_str();
  analyze->add_option("--mode", analyze_mode, "Override the game's mode (psg or psg1)");
  analyze->add_option("--expected", expected, "Expected-results sidecar (auto-detected for *.game.json)");
  analyze->add_option("--max-iter", max_iter, "Best-response dynamics iterations")->capture_default_str();
  analyze->add_option("--seed", seed, "Seed of the random PSG1 start profile")->capture_default_str();
  analyze->add_flag("--json", as_json, "Print the report as JSON");
  analyze->add_option("--trace", trace_path, "Write the rule trace on the full submission as JSON lines");

  std::string fixture_name, fixture_out;
  bool all = false;
  auto* fixtures = app.add_subcommand("fixtures", "Export named fixture games with expected results");
  fixtures->add_option("name", fixture_name, "Fixture name");
  fixtures->add_flag("--all", all, "Export every fixture");
  fixtures->add_option("--out", fixture_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      manifest.rules = parse_rules(rules);
      manifest.mode = psg::parse_mode(mode);
      manifest.tie_break = parse_tie_break(tie_break);
      return cmd_run(manifest, out_dir);
    }
    if (*analyze) return cmd_analyze(game_path, rule, analyze_mode, expected, as_json, max_iter, seed, trace_path);
    if (*fixtures) {
      if (all == !fixture_name.empty()) throw psg::InvalidInput("give either a fixture name or --all");
      return cmd_fixtures(fixture_name, all, fixture_out);
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
