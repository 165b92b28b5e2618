#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "psg/core_model.hpp"
#include "psg/random.hpp"
#include "psg/rational.hpp"

// Reader and writer for the Pabulib `.pb` format:
//
//   META
//   key;value
//   budget;75000
//   vote_type;approval
//   PROJECTS
//   project_id;cost;name
//   T1;50000;Park
//   VOTES
//   voter_id;vote
//   1;T1,B2
//
// Fields are separated by ';' and may be double-quoted ("" escapes a quote).

namespace psg {

enum class PbErrorKind {
  kMissingSection,
  kMissingColumn,
  kMissingMeta,
  kMalformedRow,
  kDuplicateProject,
  kDanglingReference,
  kBadNumber,
  kUnsupportedVoteType,
};

inline std::string_view to_string(PbErrorKind k) {
  switch (k) {
    case PbErrorKind::kMissingSection: return "missing section";
    case PbErrorKind::kMissingColumn: return "missing column";
    case PbErrorKind::kMissingMeta: return "missing meta key";
    case PbErrorKind::kMalformedRow: return "malformed row";
    case PbErrorKind::kDuplicateProject: return "duplicate project";
    case PbErrorKind::kDanglingReference: return "dangling reference";
    case PbErrorKind::kBadNumber: return "bad number";
    case PbErrorKind::kUnsupportedVoteType: return "unsupported vote type";
  }
  return "?";
}

/// A located error in a `.pb` file. Line 0 means "end of file / whole file".
class PbParseError : public InvalidInput {
 public:
  PbParseError(PbErrorKind kind, std::size_t line, const std::string& detail)
      : InvalidInput((line ? "line " + std::to_string(line) + ": " : std::string()) + std::string(to_string(kind)) +
                     ": " + detail),
        kind_(kind),
        line_(line) {}

  PbErrorKind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  PbErrorKind kind_;
  std::size_t line_;
};

/// A header row plus data rows. Source line numbers are kept for error
/// reporting and ignored by ==.
struct PbTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;

  std::optional<std::size_t> column(std::string_view name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  }

  friend bool operator==(const PbTable& a, const PbTable& b) { return a.header == b.header && a.rows == b.rows; }
};

struct RawInstance {
  /// META rows in file order; unknown keys are kept verbatim.
  std::vector<std::pair<std::string, std::string>> meta;
  std::size_t meta_line = 0;
  PbTable projects;
  PbTable votes;

  std::optional<std::string> meta_value(std::string_view key) const {
    for (const auto& [k, v] : meta) {
      if (k == key) return v;
    }
    return std::nullopt;
  }

  friend bool operator==(const RawInstance& a, const RawInstance& b) {
    return a.meta == b.meta && a.projects == b.projects && a.votes == b.votes;
  }
};

/// A non-negative decimal literal split into digits and scale:
/// value = mantissa / 10^decimals.
struct Decimal {
  BigInt mantissa;
  std::size_t decimals = 0;
};

inline std::optional<Decimal> parse_decimal(std::string_view s) {
  if (s.empty()) return std::nullopt;
  Decimal d;
  bool seen_point = false, seen_digit = false;
  for (char ch : s) {
    if (ch == '.') {
      if (seen_point) return std::nullopt;
      seen_point = true;
    } else if (ch >= '0' && ch <= '9') {
      d.mantissa = d.mantissa * 10 + (ch - '0');
      if (seen_point) ++d.decimals;
      seen_digit = true;
    } else {
      return std::nullopt;
    }
  }
  if (!seen_digit) return std::nullopt;
  return d;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

/// Splits on `sep` outside double quotes; unquoted fields are trimmed.
inline std::optional<std::vector<std::string>> split_fields(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (true) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::string field;
    if (i < line.size() && line[i] == '"') {
      ++i;
      while (true) {
        if (i >= line.size()) return std::nullopt;  // unterminated quote
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field += line[i++];
      }
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      if (i < line.size() && line[i] != sep) return std::nullopt;
    } else {
      const std::size_t end = std::min(line.find(sep, i), line.size());
      field = std::string(trim(line.substr(i, end - i)));
      i = end;
    }
    out.push_back(std::move(field));
    if (i >= line.size()) break;
    ++i;  // skip separator
  }
  return out;
}

inline std::string quote_field(const std::string& f) {
  const bool plain = f.find_first_of(";\"\r\n") == std::string::npos && trim(f).size() == f.size();
  if (plain) return f;
  std::string out = "\"";
  for (char ch : f) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::vector<std::string> split_vote(std::string_view s) {
  std::vector<std::string> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = std::min(s.find(',', start), s.size());
    out.emplace_back(trim(s.substr(start, end - start)));
    if (end >= s.size()) break;
    start = end + 1;
  }
  return out;
}

inline bool is_section(std::string_view line, std::string_view name) {
  if (line.size() != name.size()) return false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(line[i])) != name[i]) return false;
  }
  return true;
}

}  // namespace detail

/// Parses the text of a `.pb` file. Errors carry the offending line.
inline RawInstance parse_pb(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  enum class Section { kNone, kMeta, kProjects, kVotes };
  Section section = Section::kNone;
  bool need_header = false;
  RawInstance raw;
  std::size_t projects_line = 0, votes_line = 0;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) {
      if (end == text.size()) break;
      continue;
    }

    auto enter = [&](Section next, std::string_view name) {
      if (static_cast<int>(next) != static_cast<int>(section) + 1) {
        throw PbParseError(PbErrorKind::kMissingSection, line_no,
                           "section " + std::string(name) + " out of order (expected META, PROJECTS, VOTES)");
      }
      section = next;
      need_header = true;
    };
    if (detail::is_section(trimmed, "META")) {
      enter(Section::kMeta, "META");
      raw.meta_line = line_no;
    } else if (detail::is_section(trimmed, "PROJECTS")) {
      enter(Section::kProjects, "PROJECTS");
      projects_line = line_no;
    } else if (detail::is_section(trimmed, "VOTES")) {
      enter(Section::kVotes, "VOTES");
      votes_line = line_no;
    } else {
      if (section == Section::kNone) {
        throw PbParseError(PbErrorKind::kMissingSection, line_no, "content before the META section");
      }
      auto fields = detail::split_fields(trimmed, ';');
      if (!fields) throw PbParseError(PbErrorKind::kMalformedRow, line_no, "unterminated quoted field");
      if (section == Section::kMeta) {
        if (need_header) {
          need_header = false;  // "key;value"
        } else {
          std::string value;
          for (std::size_t k = 1; k < fields->size(); ++k) value += (k > 1 ? ";" : "") + (*fields)[k];
          raw.meta.emplace_back(std::move((*fields)[0]), std::move(value));
        }
      } else {
        PbTable& table = section == Section::kProjects ? raw.projects : raw.votes;
        if (need_header) {
          table.header = std::move(*fields);
          need_header = false;
        } else {
          if (fields->size() > table.header.size()) {
            throw PbParseError(PbErrorKind::kMalformedRow, line_no,
                               "row has " + std::to_string(fields->size()) + " fields, header has " +
                                   std::to_string(table.header.size()));
          }
          fields->resize(table.header.size());
          table.rows.push_back(std::move(*fields));
          table.lines.push_back(line_no);
        }
      }
    }
    if (end == text.size()) break;
  }

  if (section != Section::kVotes) {
    const char* missing = section == Section::kNone ? "META" : section == Section::kMeta ? "PROJECTS" : "VOTES";
    throw PbParseError(PbErrorKind::kMissingSection, 0, std::string("no ") + missing + " section");
  }

  if (auto vt = raw.meta_value("vote_type"); vt && *vt != "approval") {
    throw PbParseError(PbErrorKind::kUnsupportedVoteType, raw.meta_line,
                       "vote_type '" + *vt + "' (only approval ballots are supported)");
  }
  auto budget = raw.meta_value("budget");
  if (!budget) throw PbParseError(PbErrorKind::kMissingMeta, raw.meta_line, "META has no 'budget' entry");
  if (!parse_decimal(*budget)) {
    throw PbParseError(PbErrorKind::kBadNumber, raw.meta_line, "budget '" + *budget + "' is not a decimal");
  }

  const auto id_col = raw.projects.column("project_id");
  const auto cost_col = raw.projects.column("cost");
  if (!id_col) throw PbParseError(PbErrorKind::kMissingColumn, projects_line, "PROJECTS has no 'project_id' column");
  if (!cost_col) throw PbParseError(PbErrorKind::kMissingColumn, projects_line, "PROJECTS has no 'cost' column");
  std::unordered_set<std::string> ids;
  for (std::size_t r = 0; r < raw.projects.rows.size(); ++r) {
    const auto& row = raw.projects.rows[r];
    const auto line = raw.projects.lines[r];
    if (row[*id_col].empty()) throw PbParseError(PbErrorKind::kMalformedRow, line, "empty project_id");
    if (!ids.insert(row[*id_col]).second) {
      throw PbParseError(PbErrorKind::kDuplicateProject, line, "project '" + row[*id_col] + "' listed twice");
    }
    if (!parse_decimal(row[*cost_col])) {
      throw PbParseError(PbErrorKind::kBadNumber, line, "cost '" + row[*cost_col] + "' is not a decimal");
    }
  }

  const auto voter_col = raw.votes.column("voter_id");
  const auto vote_col = raw.votes.column("vote");
  if (!voter_col) throw PbParseError(PbErrorKind::kMissingColumn, votes_line, "VOTES has no 'voter_id' column");
  if (!vote_col) throw PbParseError(PbErrorKind::kMissingColumn, votes_line, "VOTES has no 'vote' column");
  for (std::size_t r = 0; r < raw.votes.rows.size(); ++r) {
    for (const auto& id : detail::split_vote(raw.votes.rows[r][*vote_col])) {
      if (!ids.contains(id)) {
        throw PbParseError(PbErrorKind::kDanglingReference, raw.votes.lines[r],
                           "vote references unknown project '" + id + "'");
      }
    }
  }
  return raw;
}

inline std::string serialize_pb(const RawInstance& raw) {
  std::string out = "META\nkey;value\n";
  auto row = [&](const std::vector<std::string>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (k) out += ';';
      out += detail::quote_field(fields[k]);
    }
    out += '\n';
  };
  for (const auto& [k, v] : raw.meta) row({k, v});
  out += "PROJECTS\n";
  row(raw.projects.header);
  for (const auto& r : raw.projects.rows) row(r);
  out += "VOTES\n";
  row(raw.votes.header);
  for (const auto& r : raw.votes.rows) row(r);
  return out;
}

/// Writes an election back out as a minimal `.pb` instance. Projects are
/// listed in tie-breaking order so FILE_ORDER reproduces it.
inline RawInstance to_raw_instance(const Election& e, std::string_view description = {}) {
  RawInstance raw;
  if (!description.empty()) raw.meta.emplace_back("description", std::string(description));
  raw.meta.emplace_back("num_projects", std::to_string(e.projects.size()));
  raw.meta.emplace_back("num_votes", std::to_string(e.voters.size()));
  raw.meta.emplace_back("budget", std::to_string(e.budget));
  raw.meta.emplace_back("vote_type", "approval");
  raw.projects.header = {"project_id", "cost"};
  const auto index = e.id_index();
  for (const auto& id : e.tie_break) {
    raw.projects.rows.push_back({id, std::to_string(e.projects[index.at(id)].cost)});
  }
  raw.votes.header = {"voter_id", "vote"};
  for (const auto& v : e.voters) {
    std::string vote;
    for (std::size_t k = 0; k < v.approvals.size(); ++k) vote += (k ? "," : "") + v.approvals[k];
    raw.votes.rows.push_back({v.id, vote});
  }
  return raw;
}

enum class TieBreakPolicy { kFileOrder, kExplicit };

struct TieBreakConfig {
  TieBreakPolicy policy = TieBreakPolicy::kFileOrder;
  /// Used with kExplicit; must be a permutation of the project ids.
  std::vector<std::string> order;

  std::string name() const { return policy == TieBreakPolicy::kFileOrder ? "file-order" : "explicit"; }
};

/// Converts to an Election. Amounts are scaled by 10^d, d the largest number
/// of decimals among the budget and the costs, so ratios stay exact.
inline Election to_election(const RawInstance& raw, const TieBreakConfig& tie = {}) {
  const auto budget_text = raw.meta_value("budget");
  if (!budget_text) throw PbParseError(PbErrorKind::kMissingMeta, raw.meta_line, "META has no 'budget' entry");
  const auto id_col = raw.projects.column("project_id");
  const auto cost_col = raw.projects.column("cost");
  const auto voter_col = raw.votes.column("voter_id");
  const auto vote_col = raw.votes.column("vote");
  if (!id_col || !cost_col || !voter_col || !vote_col) {
    throw PbParseError(PbErrorKind::kMissingColumn, 0, "required column missing");
  }

  auto number = [](const std::string& s, std::size_t line, const char* what) {
    auto d = parse_decimal(s);
    if (!d) throw PbParseError(PbErrorKind::kBadNumber, line, std::string(what) + " '" + s + "' is not a decimal");
    return *d;
  };
  const Decimal budget = number(*budget_text, raw.meta_line, "budget");
  std::vector<Decimal> costs;
  std::size_t scale = budget.decimals;
  for (std::size_t r = 0; r < raw.projects.rows.size(); ++r) {
    costs.push_back(number(raw.projects.rows[r][*cost_col], raw.projects.lines.empty() ? 0 : raw.projects.lines[r],
                           "cost"));
    scale = std::max(scale, costs.back().decimals);
  }
  auto scaled = [&](const Decimal& d, const std::string& what) -> Money {
    BigInt v = d.mantissa;
    for (std::size_t k = d.decimals; k < scale; ++k) v *= 10;
    if (v > BigInt(std::numeric_limits<Money>::max())) {
      throw InvalidInput(what + " overflows 64-bit minor units after scaling by 10^" + std::to_string(scale));
    }
    return static_cast<Money>(v);
  };

  Election e;
  e.budget = scaled(budget, "budget");
  for (std::size_t r = 0; r < raw.projects.rows.size(); ++r) {
    const auto& id = raw.projects.rows[r][*id_col];
    e.projects.push_back({id, scaled(costs[r], "cost of project '" + id + "'")});
  }
  for (const auto& row : raw.votes.rows) {
    auto approvals = detail::split_vote(row[*vote_col]);
    std::sort(approvals.begin(), approvals.end());
    approvals.erase(std::unique(approvals.begin(), approvals.end()), approvals.end());
    e.voters.push_back({row[*voter_col], std::move(approvals)});
  }

  if (tie.policy == TieBreakPolicy::kFileOrder) {
    for (const auto& p : e.projects) e.tie_break.push_back(p.id);
  } else {
    e.tie_break = tie.order;
  }
  const auto report = validate_election(e);
  if (!report.empty()) {
    std::string msg = "election from .pb data is invalid:";
    for (const auto& v : report) msg += "\n  " + v.message;
    throw InvalidInput(msg);
  }
  return e;
}

struct PartitionConfig {
  std::size_t proposers = 2;
  std::uint64_t seed = 0;
  std::size_t max_projects = 10;
};

/// Either a game or the reason the instance was skipped.
struct PartitionResult {
  std::optional<Game> game;
  std::string skip_reason;
};

/// Seeded random partition into cells whose sizes differ by at most one;
/// the first (m mod l) cells get the larger size.
inline PartitionResult partition_into_game(const Election& e, const PartitionConfig& cfg, Mode mode) {
  if (cfg.proposers < 1) throw InvalidInput("partition needs at least one proposer");
  const std::size_t m = e.projects.size();
  const std::size_t l = cfg.proposers;
  if (m > cfg.max_projects) {
    return {std::nullopt, std::to_string(m) + " projects exceed max_projects " + std::to_string(cfg.max_projects)};
  }
  if (m < l + 1) {
    return {std::nullopt, std::to_string(m) + " projects are fewer than proposers + 1"};
  }
  std::vector<std::string> ids;
  for (const auto& p : e.projects) ids.push_back(p.id);
  Rng rng(cfg.seed);
  fisher_yates(rng, ids);

  std::vector<std::vector<std::string>> cells(l);
  std::size_t next = 0;
  for (std::size_t i = 0; i < l; ++i) {
    const std::size_t size = m / l + (i < m % l ? 1 : 0);
    for (std::size_t k = 0; k < size; ++k) cells[i].push_back(ids[next++]);
  }
  return {Game(e, cells, mode), {}};
}

}  // namespace psg
