#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace psg {

/// Amount of money in minor currency units.
using Money = std::int64_t;
using ProjectIndex = std::size_t;

struct Project {
  std::string id;
  Money cost = 1;

  friend bool operator==(const Project&, const Project&) = default;
};

struct Voter {
  std::string id;
  std::vector<std::string> approvals;

  friend bool operator==(const Voter&, const Voter&) = default;
};

/// A participatory budgeting election with an explicit tie-breaking order
/// (tie_break.front() is the most preferred project).
struct Election {
  std::vector<Project> projects;
  std::vector<Voter> voters;
  Money budget = 0;
  std::vector<std::string> tie_break;

  std::optional<ProjectIndex> index_of(std::string_view id) const {
    for (ProjectIndex i = 0; i < projects.size(); ++i) {
      if (projects[i].id == id) return i;
    }
    return std::nullopt;
  }

  std::unordered_map<std::string, ProjectIndex> id_index() const {
    std::unordered_map<std::string, ProjectIndex> out;
    out.reserve(projects.size());
    for (ProjectIndex i = 0; i < projects.size(); ++i) out.emplace(projects[i].id, i);
    return out;
  }

  Money cost_of(const std::vector<ProjectIndex>& set) const {
    Money total = 0;
    for (auto p : set) total += projects[p].cost;
    return total;
  }

  bool unit_costs() const {
    return std::all_of(projects.begin(), projects.end(),
                       [](const Project& p) { return p.cost == 1; });
  }

  friend bool operator==(const Election&, const Election&) = default;
};

enum class ViolationKind {
  kNonPositiveCost,
  kDuplicateProjectId,
  kDanglingApproval,
  kDuplicateApproval,
  kNegativeBudget,
  kTieBreakMismatch,
};

struct Violation {
  ViolationKind kind;
  std::string message;
};

using ValidationReport = std::vector<Violation>;

/// Lists every violated election invariant; empty iff well-formed.
inline ValidationReport validate_election(const Election& e) {
  ValidationReport report;
  std::unordered_set<std::string> ids;
  for (const auto& p : e.projects) {
    if (p.cost < 1) {
      report.push_back({ViolationKind::kNonPositiveCost,
                        "project '" + p.id + "' has non-positive cost " + std::to_string(p.cost)});
    }
    if (!ids.insert(p.id).second) {
      report.push_back({ViolationKind::kDuplicateProjectId, "duplicate project id '" + p.id + "'"});
    }
  }
  if (e.budget < 0) {
    report.push_back({ViolationKind::kNegativeBudget,
                      "negative budget " + std::to_string(e.budget)});
  }
  for (const auto& v : e.voters) {
    std::unordered_set<std::string> seen;
    for (const auto& a : v.approvals) {
      if (!ids.contains(a)) {
        report.push_back({ViolationKind::kDanglingApproval,
                          "voter '" + v.id + "' approves unknown project '" + a + "'"});
      } else if (!seen.insert(a).second) {
        report.push_back({ViolationKind::kDuplicateApproval,
                          "voter '" + v.id + "' approves '" + a + "' more than once"});
      }
    }
  }

  // tie_break must be a permutation of exactly the project ids.
  std::vector<std::string> missing;
  std::vector<std::string> extra;
  std::unordered_set<std::string> in_order;
  for (const auto& id : e.tie_break) {
    if (!ids.contains(id) || !in_order.insert(id).second) extra.push_back(id);
  }
  for (const auto& p : e.projects) {
    if (!in_order.contains(p.id)) missing.push_back(p.id);
  }
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "tie_break is not a permutation of the project ids";
    if (!missing.empty()) {
      msg += "; missing:";
      for (const auto& m : missing) msg += " " + m;
    }
    if (!extra.empty()) {
      msg += "; unknown or repeated:";
      for (const auto& x : extra) msg += " " + x;
    }
    report.push_back({ViolationKind::kTieBreakMismatch, msg});
  }
  return report;
}

enum class StructureClass { kGeneral, kLaminar, kPartyList };

inline std::string_view to_string(StructureClass s) {
  switch (s) {
    case StructureClass::kGeneral: return "GENERAL";
    case StructureClass::kLaminar: return "LAMINAR";
    case StructureClass::kPartyList: return "PARTY_LIST";
  }
  return "?";
}

}  // namespace psg
