#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "psg/games.hpp"
#include "psg/json_io.hpp"
#include "psg/pabulib.hpp"
#include "psg/random.hpp"

namespace psg {

inline constexpr std::string_view kArtifactVersion = "1.0.0";

/// Everything that determines a run's outputs, given the input files.
struct RunManifest {
  std::string input_dir;
  std::uint64_t seed = 0;
  std::vector<std::size_t> proposers = {2, 3, 4, 5};
  std::vector<RuleSpec> rules = {RuleSpec::basic_av(), RuleSpec::phragmen(), RuleSpec::mes()};
  Mode mode = Mode::kPsg;
  std::size_t max_projects = 10;
  TieBreakConfig tie_break;
  std::size_t max_iter = 10;
  SearchLimits limits;
  /// Worker threads; results do not depend on it. 0 picks the hardware count.
  std::size_t threads = 1;
};

inline json to_json(const RunManifest& m) {
  json rules = json::array();
  for (const auto& r : m.rules) rules.push_back(r.name());
  json tie = {{"policy", m.tie_break.name()}};
  if (m.tie_break.policy == TieBreakPolicy::kExplicit) tie["order"] = m.tie_break.order;
  return {{"artifact_version", kArtifactVersion},
          {"input_dir", m.input_dir},
          {"seed", m.seed},
          {"proposers", m.proposers},
          {"rules", rules},
          {"mode", to_string(m.mode)},
          {"max_projects", m.max_projects},
          {"tie_break", tie},
          {"caps",
           {{"max_iter", m.max_iter},
            {"max_cell_size", m.limits.max_cell_size},
            {"max_profiles", m.limits.max_profiles},
            {"global_max_projects", m.limits.rule.global_max_projects},
            {"global_max_subsets", m.limits.rule.global_max_subsets}}}};
}

/// One line of the results table.
struct ExperimentRow {
  std::string rule;
  Mode mode = Mode::kPsg;
  std::size_t proposers = 0;
  std::size_t all = 0, full_ne = 0, br_ne = 0, bf_ne = 0, no_ne = 0, undecided = 0;
  /// BR_NE instances whose dynamics stopped after a single iteration.
  std::size_t br_ne_one_iteration = 0;

  void add(Classification c) {
    ++all;
    switch (c) {
      case Classification::kFullNe: ++full_ne; break;
      case Classification::kBrNe: ++br_ne; break;
      case Classification::kBfNe: ++bf_ne; break;
      case Classification::kNoNe: ++no_ne; break;
      case Classification::kUndecided: ++undecided; break;
    }
  }
};

/// Outcome of one (file, proposer count, rule) combination.
struct InstanceRecord {
  std::string file;
  std::size_t proposers = 0;
  std::string rule;
  Mode mode = Mode::kPsg;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::string>> cells;
  bool skipped = false;
  std::string skip_reason;
  Classification kind = Classification::kUndecided;
  std::size_t iterations = 0;
  std::string dynamics_status;
  std::optional<std::vector<std::vector<std::string>>> start;
  std::optional<std::vector<std::vector<std::string>>> witness;
  std::string undecided_reason;
};

inline json to_json(const InstanceRecord& r) {
  json j = {{"file", r.file}, {"proposers", r.proposers}, {"rule", r.rule}, {"mode", to_string(r.mode)},
            {"seed", r.seed}};
  if (r.skipped) {
    j["classification"] = "SKIPPED";
    j["skip_reason"] = r.skip_reason;
    return j;
  }
  j["cells"] = r.cells;
  j["classification"] = to_string(r.kind);
  j["iterations"] = r.iterations;
  j["dynamics"] = r.dynamics_status.empty() ? json(nullptr) : json(r.dynamics_status);
  j["start"] = r.start ? json(*r.start) : json(nullptr);
  j["witness"] = r.witness ? json(*r.witness) : json(nullptr);
  if (r.kind == Classification::kUndecided) j["undecided_reason"] = r.undecided_reason;
  return j;
}

struct FileError {
  std::string file;
  std::string message;
};

struct RunResult {
  std::vector<ExperimentRow> rows;
  std::vector<InstanceRecord> records;
  std::vector<FileError> errors;
  std::size_t files = 0;
  /// Skipped (file, proposer count) pairs per proposer count.
  std::map<std::size_t, std::size_t> skipped;
};

/// Seed for partitioning one file into `proposers` cells.
inline std::uint64_t instance_seed(std::uint64_t base, std::string_view file, std::size_t proposers) {
  return derive_seed(base, file, proposers);
}

/// Runs the full protocol on one parsed election. Records come out in
/// (proposer count, rule) manifest order.
inline std::vector<InstanceRecord> run_instance(const Election& e, const std::string& file, const RunManifest& m) {
  std::vector<InstanceRecord> out;
  for (auto l : m.proposers) {
    const std::uint64_t seed = instance_seed(m.seed, file, l);
    auto part = partition_into_game(e, {l, seed, m.max_projects}, m.mode);
    for (const auto& rule : m.rules) {
      InstanceRecord rec;
      rec.file = file;
      rec.proposers = l;
      rec.rule = rule.name();
      rec.mode = m.mode;
      rec.seed = seed;
      if (!part.game) {
        rec.skipped = true;
        rec.skip_reason = part.skip_reason;
        out.push_back(std::move(rec));
        continue;
      }
      const Game& g = *part.game;
      rec.cells = g.proposer_ids();
      ExperimentOptions opt;
      opt.max_iter = m.max_iter;
      opt.seed = splitmix64(seed);
      opt.limits = m.limits;
      const auto res = experiment_classify(g, rule, opt);
      rec.kind = res.kind;
      rec.undecided_reason = res.undecided_reason;
      if (res.start) rec.start = g.profile_ids(*res.start);
      if (res.witness) rec.witness = g.profile_ids(*res.witness);
      if (res.dynamics) {
        rec.iterations = res.dynamics->iterations;
        rec.dynamics_status = std::string(to_string(res.dynamics->status));
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

inline std::vector<std::filesystem::path> list_pb_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pb") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Processes every `.pb` file in the manifest's input directory. Per-file
/// parse errors are collected, never fatal. Output order is independent of
/// the thread count.
inline RunResult run_experiments(const RunManifest& m) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(m.input_dir)) throw std::runtime_error("input directory not found: " + m.input_dir);
  const auto files = list_pb_files(m.input_dir);

  struct Slot {
    std::vector<InstanceRecord> records;
    std::optional<FileError> error;
  };
  std::vector<Slot> slots(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < files.size();) {
      const std::string name = files[k].filename().string();
      try {
        const auto election = to_election(parse_pb(read_file(files[k])), m.tie_break);
        slots[k].records = run_instance(election, name, m);
      } catch (const std::exception& ex) {
        slots[k].error = FileError{name, ex.what()};
      }
    }
  };
  std::size_t threads = m.threads ? m.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(files.size(), 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  RunResult result;
  result.files = files.size();
  for (const auto& rule : m.rules) {
    for (auto l : m.proposers) result.rows.push_back({rule.name(), m.mode, l});
  }
  auto row_of = [&](const InstanceRecord& r) -> ExperimentRow& {
    for (auto& row : result.rows) {
      if (row.rule == r.rule && row.proposers == r.proposers) return row;
    }
    throw std::logic_error("record without a row");
  };
  for (auto& slot : slots) {
    if (slot.error) result.errors.push_back(*slot.error);
    for (auto& rec : slot.records) {
      if (rec.skipped) {
        if (rec.rule == m.rules.front().name()) ++result.skipped[rec.proposers];
      } else {
        auto& row = row_of(rec);
        row.add(rec.kind);
        if (rec.kind == Classification::kBrNe && rec.iterations == 1) ++row.br_ne_one_iteration;
      }
      result.records.push_back(std::move(rec));
    }
  }
  return result;
}

inline std::string rows_to_csv(const std::vector<ExperimentRow>& rows) {
  std::string out = "rule,mode,proposers,all,full_ne,br_ne,bf_ne,no_ne,undecided\n";
  for (const auto& r : rows) {
    out += r.rule + "," + std::string(to_string(r.mode)) + "," + std::to_string(r.proposers) + "," +
           std::to_string(r.all) + "," + std::to_string(r.full_ne) + "," + std::to_string(r.br_ne) + "," +
           std::to_string(r.bf_ne) + "," + std::to_string(r.no_ne) + "," + std::to_string(r.undecided) + "\n";
  }
  return out;
}

inline json summary_to_json(const RunResult& r) {
  json errors = json::array();
  for (const auto& e : r.errors) errors.push_back({{"file", e.file}, {"error", e.message}});
  json skipped = json::object();
  for (const auto& [l, n] : r.skipped) skipped[std::to_string(l)] = n;
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"rule", row.rule},
                    {"proposers", row.proposers},
                    {"br_ne", row.br_ne},
                    {"br_ne_one_iteration", row.br_ne_one_iteration}});
  }
  return {{"files", r.files}, {"parse_errors", errors}, {"skipped", skipped}, {"dynamics", rows}};
}

/// Writes results.csv, instances.jsonl, manifest.json and summary.json.
inline void write_run_outputs(const RunManifest& m, const RunResult& r, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream f(out_dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (out_dir / name).string());
    f << text;
  };
  write("results.csv", rows_to_csv(r.rows));
  std::string lines;
  for (const auto& rec : r.records) lines += to_json(rec).dump() + "\n";
  write("instances.jsonl", lines);
  write("manifest.json", to_json(m).dump(2) + "\n");
  write("summary.json", summary_to_json(r).dump(2) + "\n");
}

// --- single-game analysis --------------------------------------------------

struct MatrixCell {
  StrategyProfile profile;
  UtilityVector utilities;
};

struct AnalysisReport {
  std::string rule;
  Mode mode = Mode::kPsg;
  ExperimentResult result;
  std::optional<UtilityVector> witness_utilities;
  /// Every profile with its utilities; only for at most two proposers and at
  /// most 256 profiles.
  std::vector<MatrixCell> matrix;
  std::vector<std::pair<ExpectedCell, UtilityVector>> reduced;
  std::vector<std::size_t> tracked;
  std::string verdict;
};

inline AnalysisReport analyze_game(const Game& g, const RuleSpec& rule, const ExperimentOptions& opt = {},
                                   const std::optional<Sidecar>& sidecar = std::nullopt) {
  AnalysisReport rep;
  rep.rule = rule.name();
  rep.mode = g.mode();
  rep.result = experiment_classify(g, rule, opt);
  const auto& res = rep.result;
  if (res.witness) rep.witness_utilities = utilities(g, rule, *res.witness, opt.limits);

  if (g.proposer_count() <= 2) {
    try {
      detail::ProfileSpace space(g, opt.limits);
      if (space.size() <= 256) {
        for (std::uint64_t k = 0; k < space.size(); ++k) {
          auto s = space.profile(k);
          auto u = utilities(g, rule, s, opt.limits);
          rep.matrix.push_back({std::move(s), std::move(u)});
        }
      }
    } catch (const CapExceeded&) {
    }
  }
  if (sidecar) {
    rep.tracked = sidecar->tracked;
    for (const auto& cell : sidecar->expected) {
      const auto u = utilities(g, rule, cell.profile, opt.limits);
      UtilityVector got;
      for (auto i : sidecar->tracked) got.push_back(u[i]);
      rep.reduced.emplace_back(cell, got);
    }
  }

  auto utils = [](const UtilityVector& u) {
    std::string s;
    for (std::size_t i = 0; i < u.size(); ++i) s += (i ? "/" : "") + std::to_string(u[i]);
    return s;
  };
  switch (res.kind) {
    case Classification::kFullNe:
    case Classification::kBrNe:
    case Classification::kBfNe:
      rep.verdict = "NE " + g.describe(*res.witness) + " with utilities " + utils(*rep.witness_utilities);
      break;
    case Classification::kNoNe:
      if (res.dynamics && res.dynamics->status == DynamicsStatus::kCycle) {
        rep.verdict = "no NE; best-response cycle of length " + std::to_string(res.dynamics->cycle_length);
      } else {
        rep.verdict = "no NE; best-response dynamics stopped after " +
                      std::to_string(res.dynamics ? res.dynamics->iterations : 0) + " iterations";
      }
      break;
    case Classification::kUndecided:
      rep.verdict = "undecided; cap exceeded (" + res.undecided_reason + ")";
      break;
  }
  return rep;
}

inline json to_json(const Game& g, const AnalysisReport& rep) {
  const auto& res = rep.result;
  json j = {{"rule", rep.rule}, {"mode", to_string(rep.mode)}, {"classification", to_string(res.kind)},
            {"verdict", rep.verdict}};
  j["witness"] = res.witness ? profile_to_json(g, *res.witness) : json(nullptr);
  j["witness_utilities"] = rep.witness_utilities ? json(*rep.witness_utilities) : json(nullptr);
  if (res.kind == Classification::kUndecided) j["undecided_reason"] = res.undecided_reason;
  if (res.dynamics) {
    json traj = json::array();
    for (const auto& s : res.dynamics->trajectory) traj.push_back(profile_to_json(g, s));
    j["dynamics"] = {{"status", to_string(res.dynamics->status)},
                     {"iterations", res.dynamics->iterations},
                     {"cycle_length", res.dynamics->cycle_length},
                     {"trajectory", traj}};
  }
  if (!rep.matrix.empty()) {
    json m = json::array();
    for (const auto& c : rep.matrix) m.push_back({{"profile", profile_to_json(g, c.profile)}, {"utilities", c.utilities}});
    j["payoff_matrix"] = m;
  }
  if (!rep.reduced.empty()) {
    json cells = json::array();
    for (const auto& [cell, got] : rep.reduced) {
      cells.push_back({{"label", cell.label}, {"utilities", got}, {"expected", cell.utilities}});
    }
    j["reduced_matrix"] = {{"tracked", rep.tracked}, {"cells", cells}};
  }
  return j;
}

inline std::string render_text(const Game& g, const AnalysisReport& rep) {
  std::ostringstream out;
  const auto& res = rep.result;
  out << "rule: " << rep.rule << "  mode: " << to_string(rep.mode) << "  proposers: " << g.proposer_count() << "\n";
  out << "classification: " << to_string(res.kind) << "\n";
  out << rep.verdict << "\n";
  if (res.dynamics) {
    out << "dynamics: " << to_string(res.dynamics->status) << " after " << res.dynamics->iterations
        << " iteration(s)\n";
    for (std::size_t k = 0; k < res.dynamics->trajectory.size(); ++k) {
      out << "  " << k << ": " << g.describe(res.dynamics->trajectory[k]) << "\n";
    }
  }
  if (!rep.matrix.empty()) {
    out << "payoff matrix:\n";
    for (const auto& c : rep.matrix) {
      out << "  " << g.describe(c.profile) << " ->";
      for (auto u : c.utilities) out << " " << u;
      out << "\n";
    }
  }
  if (!rep.reduced.empty()) {
    out << "reduced matrix (tracked proposers";
    for (auto i : rep.tracked) out << " " << i;
    out << "):\n";
    for (const auto& [cell, got] : rep.reduced) {
      out << "  " << cell.label << " ->";
      for (auto u : got) out << " " << u;
      out << (got == cell.utilities ? "" : "  (expected differs)") << "\n";
    }
  }
  return out.str();
}

// --- fixture export --------------------------------------------------------

/// Writes <name>.game.json and <name>.expected.json; returns the paths.
inline std::vector<std::filesystem::path> export_fixture(const Fixture& f, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto game_path = out_dir / (f.name + ".game.json");
  const auto sidecar_path = out_dir / (f.name + ".expected.json");
  std::ofstream(game_path, std::ios::binary) << to_json(f.game).dump(2) << "\n";
  std::ofstream(sidecar_path, std::ios::binary) << fixture_sidecar(f).dump(2) << "\n";
  if (!std::filesystem::exists(game_path) || !std::filesystem::exists(sidecar_path)) {
    throw std::runtime_error("cannot write fixture files into " + out_dir.string());
  }
  return {game_path, sidecar_path};
}

}  // namespace psg
