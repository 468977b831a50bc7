#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "ppanova/errors.hpp"
#include "ppanova/tt_metric.hpp"

namespace ppanova {

struct Embedding {
  std::size_t n = 0;
  std::size_t dims = 0;
  std::vector<double> coordinates;  ///< n x dims, row-major, column-centered
  std::vector<double> eigenvalues;  ///< the dims retained, descending
  /// Fraction of negative eigenvalue mass of the doubly centered Gram
  /// matrix: sum(-lambda)+ / sum |lambda|. Zero for Euclidean inputs.
  double negative_mass_fraction = 0.0;
};

namespace detail {

// Cyclic Jacobi for a dense symmetric matrix; returns eigenvalues on the
// diagonal of a and accumulates rotations into v (columns = eigenvectors).
inline void jacobi_eigen(std::vector<double>& a, std::vector<double>& v,
                         std::size_t n, double off_tol) {
  v.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a[i * n + j] * a[i * n + j];
    }
    return std::sqrt(s);
  };
  for (int sweep = 0; sweep < 200; ++sweep) {
    if (off_norm() < off_tol) return;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a[i * n + p];
          const double aiq = a[i * n + q];
          a[i * n + p] = c * aip - s * aiq;
          a[i * n + q] = s * aip + c * aiq;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const double apj = a[p * n + j];
          const double aqj = a[q * n + j];
          a[p * n + j] = c * apj - s * aqj;
          a[q * n + j] = s * apj + c * aqj;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v[i * n + p];
          const double viq = v[i * n + q];
          v[i * n + p] = c * vip - s * viq;
          v[i * n + q] = s * vip + c * viq;
        }
      }
    }
  }
}

}  // namespace detail

/// Classical (Torgerson) multidimensional scaling: double-center the squared
/// distances, take the top eigenpairs of B = -1/2 J D^2 J, and scale the
/// eigenvectors by the square roots of the eigenvalues. Negative eigenvalues
/// (non-Euclidean inputs) are clipped to zero and reported as mass.
inline Embedding classical_mds(const DistanceMatrix& d, std::size_t dims) {
  const std::size_t n = d.size();
  if (n < 2 || dims < 1 || dims > n - 1) {
    throw invalid_input("mds dims must be in [1, n-1]");
  }

  // B = -1/2 J D2 J with J = I - 11'/n.
  std::vector<double> b(n * n, 0.0);
  std::vector<double> row_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = d.at(i, j);
      b[i * n + j] = v * v;
      row_mean[i] += v * v;
    }
    grand += row_mean[i];
    row_mean[i] /= static_cast<double>(n);
  }
  grand /= static_cast<double>(n) * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      b[i * n + j] = -0.5 * (b[i * n + j] - row_mean[i] - row_mean[j] + grand);
    }
  }

  std::vector<double> vec;
  detail::jacobi_eigen(b, vec, n, 1e-10);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = b[i * n + i];
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return eig[x] > eig[y]; });

  double neg = 0.0, abs_total = 0.0;
  for (double e : eig) {
    abs_total += std::abs(e);
    if (e < 0.0) neg += -e;
  }

  Embedding out;
  out.n = n;
  out.dims = dims;
  out.negative_mass_fraction = abs_total > 0.0 ? neg / abs_total : 0.0;
  out.eigenvalues.resize(dims);
  out.coordinates.assign(n * dims, 0.0);
  for (std::size_t c = 0; c < dims; ++c) {
    const std::size_t idx = order[c];
    out.eigenvalues[c] = eig[idx];
    const double scale = std::sqrt(std::max(eig[idx], 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      out.coordinates[i * dims + c] = scale * vec[i * n + idx];
    }
  }
  return out;
}

}  // namespace ppanova
