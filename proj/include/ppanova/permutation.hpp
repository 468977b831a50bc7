#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ppanova/errors.hpp"
#include "ppanova/parallel.hpp"
#include "ppanova/rng.hpp"
#include "ppanova/statistic_value.hpp"

namespace ppanova {

struct PermutationTestResult {
  std::string statistic;
  double observed = 0.0;
  StatFlag observed_flag = StatFlag::Ok;
  int permutations = 0;  ///< M
  int rank = 0;          ///< r in [1, M+1], counted from the highest value
  double p_value = 0.0;  ///< r / (M+1)
  std::uint64_t seed = 0;
  int invalid_permutations = 0;  ///< permutations whose statistic was invalid
};

/// Evaluates a vector of statistics on a relabeling of the observations.
/// slot_to_obs[s] is the observation placed at slot s; the group of slot s
/// is fixed by the original layout, so the identity mapping reproduces the
/// observed statistics. replicate_seed feeds any internal randomness
/// (barycenter restarts); it is derived per replicate, so results do not
/// depend on evaluation order.
using MultiStatFn = std::function<std::vector<StatisticValue>(
    const std::vector<std::size_t>& slot_to_obs, std::uint64_t replicate_seed)>;

inline std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

/// Joint permutation test: all statistics are evaluated on the same M
/// uniform relabelings and each is ranked against its own permutation
/// distribution. Rank r counts ties as greater (conservative); a permuted
/// outcome beats the observed one only if it is finite-and-larger, equal, or
/// flagged infinite. Reject at level alpha iff p = r/(M+1) <= alpha.
inline std::vector<PermutationTestResult> permutation_test_multi(
    const MultiStatFn& stat, std::size_t n_obs, int M, std::uint64_t seed,
    unsigned threads = 1) {
  if (M < 1) throw invalid_input("permutation test needs M >= 1");
  if (n_obs < 2) throw invalid_input("permutation test needs >= 2 observations");

  std::vector<std::size_t> identity(n_obs);
  for (std::size_t i = 0; i < n_obs; ++i) identity[i] = i;
  const std::vector<StatisticValue> observed =
      stat(identity, derive_seed(seed, 0));
  for (const auto& s : observed) {
    if (s.flag == StatFlag::Invalid) {
      throw degenerate_error("statistic '" + s.name +
                             "' is invalid on the observed data");
    }
  }

  // Replicate m draws its permutation and any statistic-internal randomness
  // from stream m; stream 0 belongs to the observed evaluation.
  std::vector<std::vector<StatisticValue>> outcomes(M);
  parallel_for(M, threads, [&](std::int64_t m) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(m) + 1);
    Rng rng(s);
    const auto perm = random_permutation(n_obs, rng);
    outcomes[m] = stat(perm, s);
  });

  std::vector<PermutationTestResult> results(observed.size());
  for (std::size_t j = 0; j < observed.size(); ++j) {
    PermutationTestResult r;
    r.statistic = observed[j].name;
    r.observed = observed[j].value;
    r.observed_flag = observed[j].flag;
    r.permutations = M;
    r.seed = seed;
    int geq = 0;
    for (int m = 0; m < M; ++m) {
      if (outcomes[m][j].flag == StatFlag::Invalid) ++r.invalid_permutations;
      if (counts_as_geq(outcomes[m][j], observed[j])) ++geq;
    }
    r.rank = 1 + geq;
    r.p_value = static_cast<double>(r.rank) / (M + 1);
    results[j] = std::move(r);
  }
  return results;
}

inline PermutationTestResult permutation_test(
    const std::function<StatisticValue(const std::vector<std::size_t>&,
                                       std::uint64_t)>& stat,
    std::size_t n_obs, int M, std::uint64_t seed, unsigned threads = 1) {
  MultiStatFn multi = [&stat](const std::vector<std::size_t>& p,
                              std::uint64_t s) {
    return std::vector<StatisticValue>{stat(p, s)};
  };
  return permutation_test_multi(multi, n_obs, M, seed, threads)[0];
}

}  // namespace ppanova
