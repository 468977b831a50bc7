#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "ppanova/errors.hpp"

namespace ppanova {

enum class CostTag : std::uint8_t { RealReal, RealDummy, DummyDummy };

/// Dense square cost matrix with per-entry provenance. Dummy-dummy entries
/// must be exactly zero.
class CostMatrix {
 public:
  explicit CostMatrix(std::size_t n)
      : n_(n), cost_(n * n, 0.0), tag_(n * n, CostTag::RealReal) {}

  static CostMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    CostMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != n) {
        throw invalid_input("cost matrix must be square");
      }
      for (std::size_t j = 0; j < n; ++j) m.cost(i, j) = rows[i][j];
    }
    m.validate();
    return m;
  }

  std::size_t size() const { return n_; }

  double& cost(std::size_t i, std::size_t j) { return cost_[i * n_ + j]; }
  double cost(std::size_t i, std::size_t j) const { return cost_[i * n_ + j]; }
  CostTag& tag(std::size_t i, std::size_t j) { return tag_[i * n_ + j]; }
  CostTag tag(std::size_t i, std::size_t j) const { return tag_[i * n_ + j]; }

  void validate() const {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        const double c = cost(i, j);
        if (!std::isfinite(c) || c < 0.0) {
          throw invalid_input("cost matrix entries must be finite and >= 0");
        }
        if (tag(i, j) == CostTag::DummyDummy && c != 0.0) {
          throw invalid_input("dummy-dummy cost entries must be exactly 0");
        }
      }
    }
  }

 private:
  std::size_t n_;
  std::vector<double> cost_;
  std::vector<CostTag> tag_;
};

struct AssignmentResult {
  std::vector<std::size_t> row_to_col;
  double total_cost = 0.0;
};

/// Exact minimum-cost perfect matching by shortest augmenting paths with
/// dual potentials (Jonker-Volgenant family). Rows are augmented in
/// increasing index order, so ties resolve the same way on every run.
inline AssignmentResult solve_assignment(const CostMatrix& m) {
  m.validate();
  const std::size_t n = m.size();
  AssignmentResult result;
  result.row_to_col.assign(n, 0);
  if (n == 0) return result;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // One-based columns; column 0 is the virtual start of each augmentation.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
  std::vector<std::size_t> col_to_row(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1, false);

  for (std::size_t i = 1; i <= n; ++i) {
    col_to_row[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = col_to_row[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = m.cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[col_to_row[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_to_row[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      col_to_row[j0] = col_to_row[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= n; ++j) {
    result.row_to_col[col_to_row[j] - 1] = j - 1;
  }
  // Re-sum from the matrix entries so the reported cost carries no dual
  // round-off.
  for (std::size_t i = 0; i < n; ++i) {
    result.total_cost += m.cost(i, result.row_to_col[i]);
  }
  return result;
}

}  // namespace ppanova
