#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "ppanova/errors.hpp"
#include "ppanova/parallel.hpp"
#include "ppanova/point_pattern.hpp"
#include "ppanova/rng.hpp"

namespace ppanova {

/// Axis-aligned observation window, default the unit square.
struct Window {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

  double area() const { return (x1 - x0) * (y1 - y0); }
  bool contains(Point p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
  void validate() const {
    if (!(area() > 0.0)) throw invalid_input("window must have positive area");
  }
  Point sample(Rng& rng) const {
    return {rng.uniform(x0, x1), rng.uniform(y0, y1)};
  }
};

/// Homogeneous Poisson process (complete spatial randomness): a Poisson
/// number of i.i.d. uniform points in the window.
inline PointPattern sample_csr(double lambda, const Window& w, Rng& rng) {
  if (lambda < 0.0) throw invalid_input("CSR intensity must be >= 0");
  w.validate();
  const long n = rng.poisson(lambda * w.area());
  PointPattern p;
  for (long i = 0; i < n; ++i) p.add(w.sample(rng));
  return p;
}

/// Poisson process whose intensity is a Gaussian mixture scaled to the given
/// total mass. Sampling is exact (component choice plus a bivariate normal
/// draw); points may fall outside the window.
struct GaussianMixtureModel {
  std::vector<Point> means;
  double sd = 0.1;
  double total_mass = 35.0;

  void validate() const {
    if (means.empty()) throw invalid_input("mixture needs at least one mean");
    if (!(sd > 0.0)) throw invalid_input("mixture sd must be positive");
    if (total_mass < 0.0) throw invalid_input("total mass must be >= 0");
  }
};

inline PointPattern sample_gaussian_mixture(const GaussianMixtureModel& m,
                                            Rng& rng) {
  m.validate();
  const long n = rng.poisson(m.total_mass);
  PointPattern p;
  for (long i = 0; i < n; ++i) {
    const Point& mu = m.means[rng.below(m.means.size())];
    p.add({rng.normal(mu.x, m.sd), rng.normal(mu.y, m.sd)});
  }
  return p;
}

/// Poisson process with intensity proportional to exp(-rate * x), constant
/// in y, total mass fixed. x is drawn by inverse CDF of the truncated
/// exponential on the window's x-range.
struct ExponentialTiltModel {
  double rate = 1.0;
  double total_mass = 35.0;
};

inline PointPattern sample_exponential_tilt(const ExponentialTiltModel& m,
                                            const Window& w, Rng& rng) {
  w.validate();
  if (m.total_mass < 0.0) throw invalid_input("total mass must be >= 0");
  const long n = rng.poisson(m.total_mass);
  const double width = w.x1 - w.x0;
  const double a = m.rate * width;
  PointPattern p;
  for (long i = 0; i < n; ++i) {
    double t;  // position in [0, 1] along the x-range
    if (std::abs(a) < 1e-12) {
      t = rng.uniform();
    } else {
      const double u = rng.uniform();
      t = -std::log1p(-u * (1.0 - std::exp(-a))) / a;
    }
    p.add({w.x0 + width * t, rng.uniform(w.y0, w.y1)});
  }
  return p;
}

/// Number of unordered point pairs at distance <= range (closed inequality).
inline long strauss_pair_count(const PointPattern& xi, double range) {
  const double r2 = range * range;
  long s = 0;
  const auto& pts = xi.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (squared_distance(pts[i], pts[j]) <= r2) ++s;
    }
  }
  return s;
}

/// Strauss process parameters: activity beta, interaction strength gamma in
/// [0, 1] and interaction range. gamma = 1 is CSR(beta); gamma = 0 is a hard
/// core process.
struct StraussModel {
  double beta = 35.0;
  double gamma = 1.0;
  double range = 0.1;

  void validate() const {
    if (!(beta > 0.0)) throw invalid_input("Strauss activity beta must be > 0");
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
      throw invalid_input("Strauss gamma must be in [0, 1]");
    }
    if (!(range > 0.0)) throw invalid_input("Strauss range must be > 0");
  }
};

/// Unnormalized density ratio beta^dn * gamma^ds between two states; the
/// normalizing constant cancels. gamma = 0 follows the hard-core limit:
/// 0 for ds > 0, 1 for ds = 0, +infinity for ds < 0.
inline double strauss_density_ratio(const StraussModel& m, long delta_n,
                                    long delta_s) {
  double r = std::pow(m.beta, static_cast<double>(delta_n));
  if (m.gamma > 0.0) {
    r *= std::pow(m.gamma, static_cast<double>(delta_s));
  } else if (delta_s > 0) {
    r = 0.0;
  } else if (delta_s < 0) {
    r = std::numeric_limits<double>::infinity();
  }
  return r;
}

namespace detail {

// Uniform-cell spatial index; cell side >= interaction range, so all
// neighbors of a point live in the surrounding 3x3 block.
class StraussState {
 public:
  StraussState(const Window& w, double range)
      : w_(w),
        nx_(std::max<std::size_t>(1, static_cast<std::size_t>((w.x1 - w.x0) / range))),
        ny_(std::max<std::size_t>(1, static_cast<std::size_t>((w.y1 - w.y0) / range))),
        cells_(nx_ * ny_),
        r2_(range * range) {}

  std::size_t size() const { return pts_.size(); }
  const std::vector<Point>& points() const { return pts_; }

  long close_pairs_with(Point p, std::size_t exclude) const {
    const auto [cx, cy] = cell_of(p);
    long count = 0;
    const std::size_t x_lo = cx == 0 ? 0 : cx - 1;
    const std::size_t x_hi = std::min(nx_ - 1, cx + 1);
    const std::size_t y_lo = cy == 0 ? 0 : cy - 1;
    const std::size_t y_hi = std::min(ny_ - 1, cy + 1);
    for (std::size_t gx = x_lo; gx <= x_hi; ++gx) {
      for (std::size_t gy = y_lo; gy <= y_hi; ++gy) {
        for (std::size_t idx : cells_[gx * ny_ + gy]) {
          if (idx == exclude) continue;
          if (squared_distance(pts_[idx], p) <= r2_) ++count;
        }
      }
    }
    return count;
  }

  void insert(Point p) {
    const std::size_t idx = pts_.size();
    pts_.push_back(p);
    const auto [cx, cy] = cell_of(p);
    cell_ids_.push_back(cx * ny_ + cy);
    cells_[cell_ids_[idx]].push_back(idx);
  }

  void erase(std::size_t idx) {
    remove_from_cell(idx);
    const std::size_t last = pts_.size() - 1;
    if (idx != last) {
      remove_from_cell(last);
      pts_[idx] = pts_[last];
      cell_ids_[idx] = cell_ids_[last];
      cells_[cell_ids_[idx]].push_back(idx);
    }
    pts_.pop_back();
    cell_ids_.pop_back();
  }

  void move(std::size_t idx, Point p) {
    remove_from_cell(idx);
    pts_[idx] = p;
    const auto [cx, cy] = cell_of(p);
    cell_ids_[idx] = cx * ny_ + cy;
    cells_[cell_ids_[idx]].push_back(idx);
  }

 private:
  std::pair<std::size_t, std::size_t> cell_of(Point p) const {
    const double fx = (p.x - w_.x0) / (w_.x1 - w_.x0);
    const double fy = (p.y - w_.y0) / (w_.y1 - w_.y0);
    const auto cx = std::min<std::size_t>(nx_ - 1, static_cast<std::size_t>(
        std::max(0.0, fx * static_cast<double>(nx_))));
    const auto cy = std::min<std::size_t>(ny_ - 1, static_cast<std::size_t>(
        std::max(0.0, fy * static_cast<double>(ny_))));
    return {cx, cy};
  }

  void remove_from_cell(std::size_t idx) {
    auto& cell = cells_[cell_ids_[idx]];
    for (std::size_t i = 0; i < cell.size(); ++i) {
      if (cell[i] == idx) {
        cell[i] = cell.back();
        cell.pop_back();
        return;
      }
    }
  }

  Window w_;
  std::size_t nx_, ny_;
  std::vector<std::vector<std::size_t>> cells_;
  std::vector<Point> pts_;
  std::vector<std::size_t> cell_ids_;
  double r2_;
};

}  // namespace detail

/// Birth/death/move Metropolis-Hastings sampler for the Strauss process,
/// started from the empty pattern (feasible for every gamma) and run for
/// `proposals` steps. Each draw uses a fresh chain, so patterns sampled for
/// different replicates are independent. Acceptance combines the density
/// ratio beta^dn gamma^ds with the usual birth/death proposal corrections
/// area/(n+1) and n/area.
inline PointPattern sample_strauss(const StraussModel& m, const Window& w,
                                   long proposals, Rng& rng) {
  m.validate();
  w.validate();
  const double area = w.area();
  detail::StraussState state(w, m.range);

  const bool hard_core = m.gamma == 0.0;
  const double log_gamma = hard_core ? 0.0 : std::log(m.gamma);

  for (long step = 0; step < proposals; ++step) {
    const double u = rng.uniform();
    if (u < 1.0 / 3.0) {  // birth
      const Point p = w.sample(rng);
      const long ds = state.close_pairs_with(p, state.size());
      if (hard_core && ds > 0) continue;
      const double log_acc = std::log(m.beta) + ds * log_gamma +
                             std::log(area / (static_cast<double>(state.size()) + 1.0));
      if (log_acc >= 0.0 || std::log(rng.uniform()) < log_acc) state.insert(p);
    } else if (u < 2.0 / 3.0) {  // death
      if (state.size() == 0) continue;
      const std::size_t idx = rng.below(state.size());
      const long ds = state.close_pairs_with(state.points()[idx], idx);
      // Removing idx changes s by -ds; for gamma = 0 a feasible state has
      // ds = 0, and an infeasible one only becomes more likely to shrink.
      double log_acc = -std::log(m.beta) +
                       std::log(static_cast<double>(state.size()) / area);
      if (!hard_core) {
        log_acc -= ds * log_gamma;
      } else if (ds > 0) {
        log_acc = 0.0;  // accept: leaving a zero-density state
      }
      if (log_acc >= 0.0 || std::log(rng.uniform()) < log_acc) state.erase(idx);
    } else {  // move
      if (state.size() == 0) continue;
      const std::size_t idx = rng.below(state.size());
      const Point q = w.sample(rng);
      const long ds_old = state.close_pairs_with(state.points()[idx], idx);
      const long ds_new = state.close_pairs_with(q, idx);
      if (hard_core) {
        // gamma^(ds_new - ds_old) with gamma = 0: accept iff ds_new <= ds_old.
        if (ds_new <= ds_old) state.move(idx, q);
        continue;
      }
      const double log_acc = (ds_new - ds_old) * log_gamma;
      if (log_acc >= 0.0 || std::log(rng.uniform()) < log_acc) state.move(idx, q);
    }
  }
  return PointPattern(state.points());
}

constexpr long kStraussDefaultProposals = 100000;

struct CalibrationEvaluation {
  double beta = 0.0;
  double mean_count = 0.0;
  std::size_t draws = 0;
};

struct CalibrationResult {
  double beta = 0.0;
  std::vector<CalibrationEvaluation> evaluations;
};

/// Finds the Strauss activity beta whose mean point count matches
/// target_lambda * area, by monotone bisection on log beta. Every
/// evaluation estimates the mean count from fresh MCMC draws; the internal
/// stopping tolerance is 1% of the target so that a later validation run
/// stays within +-1 point of the target. The bracket is grown by doubling
/// from beta = target_lambda; failure to bracket below 1e4 * target_lambda
/// raises calibration_error.
inline CalibrationResult calibrate_strauss_beta(
    double gamma, double range, double target_lambda, Rng& rng,
    const Window& w = Window{}, unsigned threads = 1,
    std::size_t draws_per_eval = 2000,
    long proposals = kStraussDefaultProposals) {
  if (!(target_lambda > 0.0)) {
    throw invalid_input("calibration target intensity must be > 0");
  }
  StraussModel model{target_lambda, gamma, range};
  model.validate();
  w.validate();

  const double target = target_lambda * w.area();
  const double tol = 0.01 * target;
  CalibrationResult result;
  std::uint64_t eval_counter = 0;
  const std::uint64_t base_seed = rng.next_u64();

  auto eval = [&](double beta) {
    StraussModel m{beta, gamma, range};
    std::vector<double> counts(draws_per_eval);
    const std::uint64_t eval_id = eval_counter++;
    parallel_for(static_cast<std::int64_t>(draws_per_eval), threads,
                 [&](std::int64_t i) {
                   Rng chain(derive_seed(base_seed,
                                         eval_id * 1000003ULL +
                                             static_cast<std::uint64_t>(i)));
                   counts[i] = static_cast<double>(
                       sample_strauss(m, w, proposals, chain).size());
                 });
    double s = 0.0;
    for (double c : counts) s += c;
    const double mean = s / static_cast<double>(draws_per_eval);
    result.evaluations.push_back({beta, mean, draws_per_eval});
    return mean;
  };

  double lo = target_lambda;
  double m_lo = eval(lo);
  if (std::abs(m_lo - target) <= tol) {
    result.beta = lo;
    return result;
  }
  if (m_lo > target) {
    throw calibration_error("mean count already exceeds the target at the CSR activity");
  }

  double hi = lo;
  double m_hi = m_lo;
  while (m_hi < target) {
    hi *= 2.0;
    if (hi > 1e4 * target_lambda) {
      throw calibration_error("could not bracket the target intensity");
    }
    m_hi = eval(hi);
    if (std::abs(m_hi - target) <= tol) {
      result.beta = hi;
      return result;
    }
  }

  for (int it = 0; it < 60; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double m_mid = eval(mid);
    if (std::abs(m_mid - target) <= tol || hi / lo < 1.002) {
      result.beta = mid;
      return result;
    }
    if (m_mid < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  result.beta = std::sqrt(lo * hi);
  return result;
}

}  // namespace ppanova
