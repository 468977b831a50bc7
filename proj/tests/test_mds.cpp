#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ppanova/mds.hpp"
#include "ppanova/rng.hpp"
#include "ppanova/simulate.hpp"
#include "ppanova/tt_metric.hpp"

using namespace ppanova;

namespace {

DistanceMatrix euclidean_matrix(const std::vector<Point>& pts) {
  DistanceMatrix d(pts.size(), MetricParams{});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      d.set(i, j, euclidean_distance(pts[i], pts[j]));
    }
  }
  return d;
}

double embedded_distance(const Embedding& e, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t c = 0; c < e.dims; ++c) {
    const double diff = e.coordinates[i * e.dims + c] - e.coordinates[j * e.dims + c];
    s += diff * diff;
  }
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("collinear points in one dimension") {
  DistanceMatrix d(3, MetricParams{});
  d.set(0, 1, 1.0);
  d.set(1, 2, 1.0);
  d.set(0, 2, 2.0);
  const Embedding e = classical_mds(d, 1);
  std::vector<double> coords{e.coordinates[0], e.coordinates[1], e.coordinates[2]};
  std::sort(coords.begin(), coords.end());
  REQUIRE(coords[0] == Catch::Approx(-1.0).margin(1e-8));
  REQUIRE(coords[1] == Catch::Approx(0.0).margin(1e-8));
  REQUIRE(coords[2] == Catch::Approx(1.0).margin(1e-8));
  REQUIRE(e.negative_mass_fraction == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("euclidean configurations round trip") {
  Rng rng(71);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<Point> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({rng.uniform(), rng.uniform()});
    const DistanceMatrix d = euclidean_matrix(pts);
    const Embedding e = classical_mds(d, 2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        REQUIRE(embedded_distance(e, i, j) ==
                Catch::Approx(d.at(i, j)).margin(1e-8));
      }
    }
  }
}

TEST_CASE("eigenvalue mass equals the centered square-distance mass") {
  Rng rng(72);
  std::vector<Point> pts;
  for (int i = 0; i < 9; ++i) pts.push_back({rng.uniform(), rng.uniform()});
  const DistanceMatrix d = euclidean_matrix(pts);
  const Embedding e = classical_mds(d, 8);
  // trace of the doubly centered Gram matrix
  const std::size_t n = 9;
  double row[9] = {0};
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      row[i] += d.at(i, j) * d.at(i, j);
    }
    grand += row[i];
  }
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    trace += -0.5 * (0.0 - 2.0 * row[i] / n + grand / (n * static_cast<double>(n)));
  }
  double mass = 0.0;
  for (double v : e.eigenvalues) mass += v;
  REQUIRE(mass == Catch::Approx(trace).margin(1e-8));
}

TEST_CASE("columns are centered and eigenvalues sorted") {
  Rng rng(73);
  std::vector<PointPattern> pats;
  for (int i = 0; i < 10; ++i) pats.push_back(sample_csr(12.0, Window{}, rng));
  const DistanceMatrix d = distance_matrix(pats, MetricParams{});
  const Embedding e = classical_mds(d, 3);
  for (std::size_t c = 0; c < e.dims; ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < e.n; ++i) s += e.coordinates[i * e.dims + c];
    REQUIRE(std::abs(s) < 1e-8);
  }
  for (std::size_t c = 1; c < e.dims; ++c) {
    REQUIRE(e.eigenvalues[c] <= e.eigenvalues[c - 1]);
  }
  REQUIRE(e.negative_mass_fraction >= 0.0);
  REQUIRE(e.negative_mass_fraction < 1.0);
}

TEST_CASE("relabeling the observations relabels the embedding") {
  Rng rng(74);
  std::vector<Point> pts;
  for (int i = 0; i < 8; ++i) pts.push_back({rng.uniform(), rng.uniform()});
  const DistanceMatrix d = euclidean_matrix(pts);
  std::vector<Point> reversed(pts.rbegin(), pts.rend());
  const DistanceMatrix dr = euclidean_matrix(reversed);
  const Embedding a = classical_mds(d, 2);
  const Embedding b = classical_mds(dr, 2);
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      REQUIRE(embedded_distance(a, i, j) ==
              Catch::Approx(embedded_distance(b, n - 1 - i, n - 1 - j)).margin(1e-8));
    }
  }
}

TEST_CASE("dims validation") {
  DistanceMatrix d(3, MetricParams{});
  d.set(0, 1, 1.0);
  d.set(1, 2, 1.0);
  d.set(0, 2, 1.0);
  REQUIRE_THROWS_AS(classical_mds(d, 0), invalid_input);
  REQUIRE_THROWS_AS(classical_mds(d, 3), invalid_input);
}
