#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "psg/election.hpp"
#include "psg/errors.hpp"

namespace psg {

/// Voters sharing an approval set, collapsed into one weighted ballot.
struct Ballot {
  std::vector<ProjectIndex> approvals;  // sorted ascending
  std::int64_t weight = 0;
};

/// Index-based, voter-aggregated view of an election that the rules run on.
///
/// Voters with identical approval sets are merged; every rule treats such
/// voters symmetrically, so outcomes and per-voter balances are unchanged.
/// Project indices follow the source election unless the profile was built
/// by `restrict`, in which case `origin()` maps them back.
class BallotProfile {
 public:
  static BallotProfile compile(const Election& e) {
    auto report = validate_election(e);
    if (!report.empty()) {
      std::string msg = "malformed election:";
      for (const auto& v : report) msg += "\n  " + v.message;
      throw InvalidInput(msg);
    }
    BallotProfile out;
    const auto index = e.id_index();
    const std::size_t m = e.projects.size();
    out.costs_.resize(m);
    out.ids_.resize(m);
    out.origin_.resize(m);
    for (ProjectIndex p = 0; p < m; ++p) {
      out.costs_[p] = e.projects[p].cost;
      out.ids_[p] = e.projects[p].id;
      out.origin_[p] = p;
    }
    out.rank_.resize(m);
    for (std::size_t r = 0; r < e.tie_break.size(); ++r) out.rank_[index.at(e.tie_break[r])] = r;
    out.budget_ = e.budget;
    out.voter_count_ = static_cast<std::int64_t>(e.voters.size());

    std::map<std::vector<ProjectIndex>, std::size_t> seen;
    out.voter_group_.reserve(e.voters.size());
    for (const auto& v : e.voters) {
      std::vector<ProjectIndex> approvals;
      approvals.reserve(v.approvals.size());
      for (const auto& a : v.approvals) approvals.push_back(index.at(a));
      std::sort(approvals.begin(), approvals.end());
      auto [it, inserted] = seen.try_emplace(approvals, out.ballots_.size());
      if (inserted) out.ballots_.push_back({std::move(approvals), 0});
      out.ballots_[it->second].weight += 1;
      out.voter_group_.push_back(it->second);
    }
    out.index_supporters();
    return out;
  }

  /// Sub-profile over the projects in `keep` (sorted ascending). New index i
  /// corresponds to keep[i]; approvals are intersected; budget, voter count
  /// and relative tie-breaking order are preserved.
  BallotProfile restrict(std::span<const ProjectIndex> keep) const {
    BallotProfile out;
    std::vector<std::ptrdiff_t> remap(costs_.size(), -1);
    for (std::size_t i = 0; i < keep.size(); ++i) {
      remap[keep[i]] = static_cast<std::ptrdiff_t>(i);
      out.costs_.push_back(costs_[keep[i]]);
      out.ids_.push_back(ids_[keep[i]]);
      out.rank_.push_back(rank_[keep[i]]);
      out.origin_.push_back(origin_[keep[i]]);
    }
    out.budget_ = budget_;
    out.voter_count_ = voter_count_;
    std::map<std::vector<ProjectIndex>, std::size_t> seen;
    for (const auto& b : ballots_) {
      std::vector<ProjectIndex> approvals;
      for (auto p : b.approvals) {
        if (remap[p] >= 0) approvals.push_back(static_cast<ProjectIndex>(remap[p]));
      }
      auto [it, inserted] = seen.try_emplace(approvals, out.ballots_.size());
      if (inserted) out.ballots_.push_back({std::move(approvals), 0});
      out.ballots_[it->second].weight += b.weight;
    }
    out.index_supporters();
    return out;
  }

  std::size_t project_count() const { return costs_.size(); }
  Money cost(ProjectIndex p) const { return costs_[p]; }
  const std::string& id(ProjectIndex p) const { return ids_[p]; }
  /// Position in the tie-breaking order; smaller is preferred.
  std::size_t rank(ProjectIndex p) const { return rank_[p]; }
  ProjectIndex origin(ProjectIndex p) const { return origin_[p]; }
  Money budget() const { return budget_; }
  std::int64_t voter_count() const { return voter_count_; }
  std::span<const Ballot> ballots() const { return ballots_; }
  /// Ballot indices whose approval set contains p.
  std::span<const std::size_t> supporters(ProjectIndex p) const { return supporters_[p]; }
  std::int64_t support(ProjectIndex p) const { return support_[p]; }
  /// Ballot index of each source voter (empty for restricted profiles).
  std::span<const std::size_t> voter_group() const { return voter_group_; }

  bool unit_costs() const {
    return std::all_of(costs_.begin(), costs_.end(), [](Money c) { return c == 1; });
  }

  /// Projects sorted by preference in the tie-breaking order.
  std::vector<ProjectIndex> by_rank() const {
    std::vector<ProjectIndex> order(costs_.size());
    for (ProjectIndex p = 0; p < order.size(); ++p) order[p] = p;
    std::sort(order.begin(), order.end(),
              [&](ProjectIndex a, ProjectIndex b) { return rank_[a] < rank_[b]; });
    return order;
  }

  StructureClass structure() const {
    const std::size_t m = costs_.size();
    bool party_list = true;
    for (ProjectIndex a = 0; a < m; ++a) {
      for (ProjectIndex b = a + 1; b < m; ++b) {
        bool both = false, only_a = false, only_b = false;
        for (const auto& ballot : ballots_) {
          const bool has_a = std::binary_search(ballot.approvals.begin(), ballot.approvals.end(), a);
          const bool has_b = std::binary_search(ballot.approvals.begin(), ballot.approvals.end(), b);
          both |= has_a && has_b;
          only_a |= has_a && !has_b;
          only_b |= has_b && !has_a;
        }
        if (!both) continue;
        if (only_a && only_b) return StructureClass::kGeneral;
        if (only_a || only_b) party_list = false;
      }
    }
    return party_list ? StructureClass::kPartyList : StructureClass::kLaminar;
  }

 private:
  void index_supporters() {
    supporters_.assign(costs_.size(), {});
    support_.assign(costs_.size(), 0);
    for (std::size_t g = 0; g < ballots_.size(); ++g) {
      for (auto p : ballots_[g].approvals) {
        supporters_[p].push_back(g);
        support_[p] += ballots_[g].weight;
      }
    }
  }

  std::vector<Money> costs_;
  std::vector<std::string> ids_;
  std::vector<std::size_t> rank_;
  std::vector<ProjectIndex> origin_;
  Money budget_ = 0;
  std::int64_t voter_count_ = 0;
  std::vector<Ballot> ballots_;
  std::vector<std::vector<std::size_t>> supporters_;
  std::vector<std::int64_t> support_;
  std::vector<std::size_t> voter_group_;
};

/// Most specific structure class of a well-formed election.
inline StructureClass classify_structure(const Election& e) {
  return BallotProfile::compile(e).structure();
}

}  // namespace psg
