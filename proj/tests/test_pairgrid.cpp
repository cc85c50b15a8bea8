#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>

#include "noisevar/error.hpp"
#include "noisevar/generators.hpp"
#include "noisevar/pairgrid.hpp"
#include "oracles.hpp"

using namespace noisevar;

namespace {

GridConfig fixed_grid(double e0, double e1, double d0, double d1, std::size_t ne = 8, std::size_t nd = 6) {
  GridConfig g;
  g.auto_range = false;
  g.eps_min = e0;
  g.eps_max = e1;
  g.delta_min = d0;
  g.delta_max = d1;
  g.n_eps_bins = ne;
  g.n_delta_bins = nd;
  return g;
}

RegressionProblem permuted(const RegressionProblem& p, std::uint32_t seed) {
  std::vector<std::size_t> idx(p.rows());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937 gen(seed);
  std::shuffle(idx.begin(), idx.end(), gen);
  RegressionProblem q = p;
  for (std::size_t r = 0; r < p.rows(); ++r) {
    q.y[r] = p.y[idx[r]];
    for (std::size_t k = 0; k < p.d; ++k) q.x[r * p.d + k] = p.x[idx[r] * p.d + k];
  }
  return q;
}

}  // namespace

TEST(GridConfig, EdgesAreLogSpaced) {
  auto g = fixed_grid(0.01, 1.0, 0.1, 10.0, 4, 2);
  auto e = g.eps_edges();
  ASSERT_EQ(e.size(), 5u);
  EXPECT_DOUBLE_EQ(e.front(), 0.01);
  EXPECT_EQ(e.back(), 1.0);
  EXPECT_NEAR(e[2], 0.1, 1e-15);
  auto d = g.delta_edges();
  EXPECT_NEAR(d[1], 1.0, 1e-14);
}

TEST(GridConfig, ValidatesRanges) {
  EXPECT_THROW(fixed_grid(0.0, 1.0, 0.1, 1.0).validate(), Error);
  EXPECT_THROW(fixed_grid(1.0, 1.0, 0.1, 1.0).validate(), Error);
  EXPECT_THROW(fixed_grid(0.1, 1.0, 0.5, 0.4).validate(), Error);
  EXPECT_THROW(fixed_grid(0.1, 1.0, 0.1, 1.0, 0, 3).validate(), Error);
  EXPECT_NO_THROW(fixed_grid(0.1, 1.0, 0.1, 1.0).validate());
}

TEST(PairGrid, IdenticalPairCountsOnce) {
  RegressionProblem p;
  p.y = {0.5, 0.5};
  p.x = {2.0, 2.0};
  p.d = 1;
  auto g = accumulate_pairs(p, fixed_grid(0.1, 1.0, 0.1, 1.0), 1);
  EXPECT_EQ(g.total_pairs, 1u);
  EXPECT_EQ(g.at(0, 0), 1u);
  EXPECT_EQ(g.marginal_delta[0], 1u);
}

TEST(PairGrid, ZeroDimensionsGivesUnconditionalColumns) {
  auto p = oracle::random_problem(120, 0, 11);
  auto g = accumulate_pairs(p, GridConfig{}, 1);
  auto m = conditional_probabilities(g);
  for (std::size_t j = 0; j < m.delta_count(); ++j) {
    ASSERT_TRUE(m.defined(j));
    for (std::size_t i = 0; i < m.eps_count(); ++i) {
      EXPECT_EQ(m.prob(i, j), m.prob(i, 0));
      EXPECT_DOUBLE_EQ(m.prob(i, j), oracle::pair_cdf(p.y, m.eps_values[i]));
    }
  }
}

TEST(PairGrid, MatchesBruteForceOracle) {
  for (std::uint32_t seed = 1; seed <= 12; ++seed) {
    for (std::size_t d : {0u, 1u, 2u, 3u}) {
      auto p = oracle::random_problem(150 + seed * 4, d, seed * 31 + static_cast<std::uint32_t>(d));
      for (bool autor : {true, false}) {
        GridConfig cfg = autor ? GridConfig{} : fixed_grid(0.02, 0.9, 0.05, 0.8, 11, 7);
        auto g = accumulate_pairs(p, cfg, 3);
        auto expected = oracle::brute_force_joint(p, g.eps_values, g.delta_values);
        ASSERT_EQ(g.joint, expected) << "seed " << seed << " d " << d << " auto " << autor;
      }
    }
  }
}

TEST(PairGrid, CumulativeInvariants) {
  auto p = oracle::random_problem(180, 2, 5);
  auto g = accumulate_pairs(p, GridConfig{}, 1);
  const auto ne = g.eps_count(), nd = g.delta_count();
  for (std::size_t i = 0; i < ne; ++i) {
    for (std::size_t j = 0; j < nd; ++j) {
      if (i + 1 < ne) EXPECT_LE(g.at(i, j), g.at(i + 1, j));
      if (j + 1 < nd) EXPECT_LE(g.at(i, j), g.at(i, j + 1));
      EXPECT_LE(g.at(i, j), g.marginal_delta[j]);
    }
  }
  for (std::size_t j = 0; j < nd; ++j) EXPECT_EQ(g.at(ne - 1, j), g.marginal_delta[j]);
  EXPECT_EQ(g.marginal_delta.back(), g.total_pairs);
  EXPECT_EQ(g.total_pairs, 180u * 179u / 2u);
  EXPECT_EQ(g.raw.total(), g.total_pairs);
}

TEST(PairGrid, AllPairsColumnIsEmpiricalCdf) {
  auto p = oracle::random_problem(160, 3, 8);
  auto m = conditional_probabilities(accumulate_pairs(p, GridConfig{}, 1));
  const auto last = m.delta_count() - 1;
  for (std::size_t i = 0; i < m.eps_count(); ++i) {
    EXPECT_DOUBLE_EQ(m.prob(i, last), oracle::pair_cdf(p.y, m.eps_values[i]));
  }
}

TEST(PairGrid, MergeOfDisjointRowRangesEqualsSinglePass) {
  auto p = oracle::random_problem(200, 2, 21);
  const auto cfg = resolve_range(p, GridConfig{});
  auto whole = accumulate_rows(p, cfg, 0, p.rows());
  auto a = accumulate_rows(p, cfg, 0, 37);
  auto b = accumulate_rows(p, cfg, 37, 140);
  auto c = accumulate_rows(p, cfg, 140, p.rows());
  a += b;
  a += c;
  EXPECT_EQ(a, whole);
  const std::uint64_t pairs = 200 * 199 / 2;
  EXPECT_EQ(finalize_grid(cfg, a, pairs), finalize_grid(cfg, whole, pairs));
  EXPECT_EQ(finalize_grid(cfg, whole, pairs), accumulate_pairs(p, GridConfig{}, 1));
}

TEST(PairGrid, PermutationInvariant) {
  auto p = oracle::random_problem(190, 3, 4);
  auto g = accumulate_pairs(p, GridConfig{}, 1);
  for (std::uint32_t s = 1; s <= 3; ++s) EXPECT_EQ(accumulate_pairs(permuted(p, s), GridConfig{}, 1), g);
}

TEST(PairGrid, WorkerCountDoesNotChangeResult) {
  auto p = oracle::random_problem(400, 2, 17);
  auto g1 = accumulate_pairs(p, GridConfig{}, 1);
  for (std::size_t w : {2u, 3u, 8u, 64u}) EXPECT_EQ(accumulate_pairs(p, GridConfig{}, w), g1);
}

TEST(PairGrid, ChunksCoverAllRows) {
  for (std::size_t n : {2u, 3u, 10u, 65u, 2000u}) {
    auto chunks = pair_chunks(n);
    ASSERT_FALSE(chunks.empty());
    EXPECT_EQ(chunks.front().first, 0u);
    // the last row has no later partner
    EXPECT_EQ(chunks.back().second, n - 1);
    std::uint64_t pairs = 0;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
      if (c > 0) EXPECT_EQ(chunks[c].first, chunks[c - 1].second);
      for (std::size_t i = chunks[c].first; i < chunks[c].second; ++i) pairs += n - 1 - i;
    }
    EXPECT_EQ(pairs, static_cast<std::uint64_t>(n) * (n - 1) / 2);
  }
}

TEST(PairGrid, TiesCountAtEveryDelta) {
  // All inputs equal: every pair has |dx| = 0 and satisfies every delta.
  auto p = make_problem({0.0, 1.0, 3.0, 7.0}, {2.0, 2.0, 2.0, 2.0}, 1);
  auto g = accumulate_pairs(p, GridConfig{}, 1);
  for (std::size_t j = 0; j < g.delta_count(); ++j) EXPECT_EQ(g.marginal_delta[j], 6u);
}

TEST(PairGrid, BinIndexBoundaries) {
  std::vector<double> edges{1.0, 2.0, 4.0};
  EXPECT_EQ(bin_index(edges, 0.0), 0u);
  EXPECT_EQ(bin_index(edges, 1.0), 0u);
  EXPECT_EQ(bin_index(edges, 1.5), 1u);
  EXPECT_EQ(bin_index(edges, 2.0), 1u);
  EXPECT_EQ(bin_index(edges, 4.0), 2u);
  EXPECT_EQ(bin_index(edges, 4.5), 3u);
}

TEST(PairGrid, ConstantTargetIsRejected) {
  RegressionProblem p;
  p.y = {1.0, 1.0, 1.0};
  p.x = {1.0, 2.0, 3.0};
  p.d = 1;
  EXPECT_THROW(accumulate_pairs(p, GridConfig{}, 1), Error);
}

TEST(CondProb, BinomialCell) {
  PairGrid g;
  g.eps_values = {0.5};
  g.delta_values = {0.1, 0.2};
  g.joint = {5, 0};
  g.marginal_delta = {10, 0};
  g.total_pairs = 10;
  auto m = conditional_probabilities(g);
  EXPECT_DOUBLE_EQ(m.prob(0, 0), 0.5);
  EXPECT_NEAR(m.error(0, 0), 0.158113883, 1e-9);
  EXPECT_TRUE(m.defined(0));
  EXPECT_FALSE(m.defined(1));
  EXPECT_TRUE(std::isnan(m.prob(0, 1)));
  const auto csv = condprob_csv(m, 4);
  EXPECT_EQ(csv, "eps,delta,p,stderr,n_pairs\n0.5,0.1,0.5,0.1581,10\n");
}

TEST(CondProb, ProbabilitiesBoundedAndMonotoneInEps) {
  auto p = oracle::random_problem(200, 2, 99);
  auto m = conditional_probabilities(accumulate_pairs(p, GridConfig{}, 1));
  for (std::size_t j = 0; j < m.delta_count(); ++j) {
    if (!m.defined(j)) continue;
    for (std::size_t i = 0; i < m.eps_count(); ++i) {
      EXPECT_GE(m.prob(i, j), 0.0);
      EXPECT_LE(m.prob(i, j), 1.0);
      if (i > 0) EXPECT_GE(m.prob(i, j), m.prob(i - 1, j));
    }
  }
}

TEST(CondProb, HenonColumnRisesThenPlateaus) {
  HenonConfig cfg;
  const auto data = gen_henon(cfg);
  ASSERT_EQ(data.rows(), 3000u);
  auto p = build_lag_problem(data, {"x", 0, {1, 2}, {}});
  auto m = conditional_probabilities(accumulate_pairs(p, GridConfig{}, 0));
  std::size_t i = 0;
  while (i + 1 < m.eps_count() && m.eps_values[i] < 0.108) ++i;

  // Columns with enough pairs, ordered from the all-pairs column down to small delta.
  std::vector<std::size_t> cols;
  for (std::size_t j = m.delta_count(); j-- > 0;) {
    if (m.counts[j] >= 50) cols.push_back(j);
  }
  ASSERT_GT(cols.size(), 10u);
  std::size_t peak = 0;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (m.prob(i, cols[k]) > m.prob(i, cols[peak])) peak = k;
  }
  const auto se = [&](std::size_t a, std::size_t b) {
    return std::hypot(m.error(i, cols[a]), m.error(i, cols[b]));
  };
  // Rises: the plateau is far above the all-pairs value.
  EXPECT_GT(m.prob(i, cols[peak]) - m.prob(i, cols[0]), 2.0 * se(peak, 0));
  EXPECT_GT(m.prob(i, cols[peak]), 3.0 * m.prob(i, cols[0]));
  // Monotone up to the peak, then flat, each within 2 standard errors.
  for (std::size_t k = 1; k <= peak; ++k) EXPECT_GE(m.prob(i, cols[k]), m.prob(i, cols[k - 1]) - 2.0 * se(k, k - 1));
  for (std::size_t k = peak + 1; k < cols.size(); ++k) {
    EXPECT_LE(m.prob(i, cols[peak]) - m.prob(i, cols[k]), 2.0 * se(k, peak) + 1e-12) << "column " << cols[k];
  }
}
