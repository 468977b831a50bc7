#pragma once

#include <cstddef>
#include <vector>

#include "ppanova/errors.hpp"

namespace ppanova {

/// Identity observation mapping. Permutation tests substitute a mapping that
/// sends layout slots to shuffled observation indices, so cached pairwise
/// data is re-indexed instead of recomputed.
struct IdentityMap {
  std::size_t operator()(std::size_t i) const { return i; }
};

/// One-way layout: observation index -> group index in [0, k). Also keeps
/// the derived counts used by the distance statistics: N_i = C(n_i, 2),
/// N = sum N_i and N* = sum n_i (n_i - 1)^2.
class GroupLayout {
 public:
  explicit GroupLayout(std::vector<int> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw invalid_input("layout needs observations");
    int k = 0;
    for (int g : labels_) {
      if (g < 0) throw invalid_input("group labels must be >= 0");
      k = std::max(k, g + 1);
    }
    members_.resize(k);
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      members_[labels_[i]].push_back(i);
    }
    for (const auto& g : members_) {
      if (g.empty()) throw invalid_input("every group must be non-empty");
    }
  }

  int k() const { return static_cast<int>(members_.size()); }
  std::size_t n() const { return labels_.size(); }
  int group_of(std::size_t obs) const { return labels_[obs]; }
  const std::vector<int>& labels() const { return labels_; }
  std::size_t group_size(int g) const { return members_[g].size(); }
  const std::vector<std::size_t>& members(int g) const { return members_[g]; }

  std::size_t pairs_in(int g) const {
    const std::size_t m = group_size(g);
    return m * (m - 1) / 2;
  }

  std::size_t total_pairs() const {
    std::size_t s = 0;
    for (int g = 0; g < k(); ++g) s += pairs_in(g);
    return s;
  }

  std::size_t nstar() const {
    std::size_t s = 0;
    for (int g = 0; g < k(); ++g) {
      const std::size_t m = group_size(g);
      s += m * (m - 1) * (m - 1);
    }
    return s;
  }

  void require_k_at_least(int kmin) const {
    if (k() < kmin) throw invalid_input("statistic needs at least 2 groups");
  }

  void require_group_sizes_at_least(std::size_t nmin) const {
    for (int g = 0; g < k(); ++g) {
      if (group_size(g) < nmin) {
        throw invalid_input("group sizes too small for this statistic");
      }
    }
  }

 private:
  std::vector<int> labels_;
  std::vector<std::vector<std::size_t>> members_;
};

/// Balanced two-way layout: every (factor a, factor b) cell holds exactly
/// the same number of observations.
class TwoWayLayout {
 public:
  TwoWayLayout(std::vector<int> level_a, std::vector<int> level_b)
      : a_(std::move(level_a)), b_(std::move(level_b)) {
    if (a_.empty() || a_.size() != b_.size()) {
      throw invalid_input("two-way layout needs matching factor vectors");
    }
    for (std::size_t i = 0; i < a_.size(); ++i) {
      if (a_[i] < 0 || b_[i] < 0) throw invalid_input("factor levels must be >= 0");
      k1_ = std::max(k1_, a_[i] + 1);
      k2_ = std::max(k2_, b_[i] + 1);
    }
    cells_.resize(static_cast<std::size_t>(k1_) * k2_);
    for (std::size_t i = 0; i < a_.size(); ++i) {
      cells_[cell_index(a_[i], b_[i])].push_back(i);
    }
    cell_size_ = cells_.front().size();
    for (const auto& c : cells_) {
      if (c.size() != cell_size_ || c.empty()) {
        throw invalid_input("two-way design must be balanced with non-empty cells");
      }
    }
  }

  int k1() const { return k1_; }
  int k2() const { return k2_; }
  std::size_t n() const { return a_.size(); }
  std::size_t cell_size() const { return cell_size_; }
  std::size_t cell_pairs() const { return cell_size_ * (cell_size_ - 1) / 2; }
  const std::vector<std::size_t>& cell(int i1, int i2) const {
    return cells_[cell_index(i1, i2)];
  }
  const std::vector<int>& levels_a() const { return a_; }
  const std::vector<int>& levels_b() const { return b_; }

 private:
  std::size_t cell_index(int i1, int i2) const {
    return static_cast<std::size_t>(i1) * k2_ + i2;
  }

  std::vector<int> a_, b_;
  int k1_ = 0, k2_ = 0;
  std::size_t cell_size_ = 0;
  std::vector<std::vector<std::size_t>> cells_;
};

}  // namespace ppanova
