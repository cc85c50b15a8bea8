#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "noisevar/error.hpp"
#include "noisevar/generators.hpp"
#include "noisevar/scan.hpp"

using namespace noisevar;

namespace {

Dataset ikeda_clean() {
  IkedaConfig cfg;
  cfg.n = 2001;
  return gen_ikeda(cfg);
}

ScanRow row(double nl, bool ok = true) {
  ScanRow r;
  r.ok = ok;
  r.sigma_nl_fractional = nl;
  return r;
}

}  // namespace

TEST(Scan, Labels) {
  EXPECT_EQ(subset_label({}), "{none}");
  EXPECT_EQ(subset_label({{"x", 1}, {"y", 1}}), "{x@1, y@1}");
}

TEST(Scan, NoneSubsetIsUnexplained) {
  auto rep = subset_scan(ikeda_clean(), {"x", 0}, {{}});
  ASSERT_EQ(rep.rows.size(), 1u);
  ASSERT_TRUE(rep.rows[0].ok) << rep.rows[0].error;
  EXPECT_DOUBLE_EQ(rep.rows[0].sigma_lr_fractional, 1.0);
  EXPECT_NEAR(rep.rows[0].sigma_nl_fractional, 1.0, 0.03);
}

TEST(Scan, IkedaSubsets) {
  auto rep = subset_scan(ikeda_clean(), {"x", 0}, {{}, {{"x", 1}}, {{"x", 1}, {"y", 1}}});
  ASSERT_EQ(rep.rows.size(), 3u);
  for (const auto& r : rep.rows) {
    ASSERT_TRUE(r.ok) << r.error;
    EXPECT_EQ(r.rows, 2000u);
  }
  EXPECT_EQ(rep.rows[1].label, "{x@1}");
  EXPECT_NEAR(rep.rows[1].sigma_lr_fractional, 0.997, 0.02);
  EXPECT_NEAR(rep.rows[1].sigma_nl_fractional, 0.82, 0.08);
  EXPECT_LE(rep.rows[2].sigma_nl_fractional, 0.02);
}

TEST(Scan, ShuffledTargetLosesDependence) {
  const auto d = ikeda_clean();
  std::vector<double> s(d.column("x").begin(), d.column("x").end());
  std::mt19937 gen(3);
  std::shuffle(s.begin(), s.end(), gen);
  Dataset shuffled({"s", "x", "y"}, {s, std::vector<double>(d.column("x").begin(), d.column("x").end()),
                                       std::vector<double>(d.column("y").begin(), d.column("y").end())});
  auto rep = subset_scan(shuffled, {"s", 0}, {{}, {{"x", 1}}, {{"x", 1}, {"y", 1}}, {{"x", 0}, {"y", 0}}});
  for (const auto& r : rep.rows) {
    ASSERT_TRUE(r.ok) << r.error;
    EXPECT_NEAR(r.sigma_nl_fractional, 1.0, 0.1) << r.label;
    EXPECT_NEAR(r.sigma_lr_fractional, 1.0, 0.01) << r.label;
  }
}

TEST(Scan, FailingSubsetIsRecordedNotFatal) {
  Dataset d({"x", "c"}, {{1, 2, 4, 3, 5, 7, 6, 8}, {1, 1, 1, 1, 1, 1, 1, 1}});
  AnalysisOptions o;
  o.min_count = 1;
  auto rep = subset_scan(d, {"x", 0}, {{}, {{"c", 0}}}, o);
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_TRUE(rep.rows[0].ok);
  EXPECT_FALSE(rep.rows[1].ok);
  EXPECT_FALSE(rep.rows[1].error.empty());
  EXPECT_THROW(subset_scan(d, {"x", 0}, {{{"nope", 1}}}), Error);
}

TEST(Scan, ChooseEmbeddingDimension) {
  EXPECT_EQ(choose_embedding_dimension({row(1.0), row(0.8), row(0.5), row(0.1), row(0.03), row(0.029)}, 0.02), 5u);
  EXPECT_EQ(choose_embedding_dimension({row(1.0), row(0.99), row(1.0)}, 0.02), 1u);
  EXPECT_EQ(choose_embedding_dimension({row(1.0), row(0.5), row(0.49), row(0.2)}, 0.02), 4u);
  EXPECT_FALSE(choose_embedding_dimension({row(1.0, false)}, 0.02).has_value());
}

TEST(Scan, IkedaEmbedding) {
  auto rep = embedding_scan(ikeda_clean(), "x", 5);
  ASSERT_EQ(rep.rows.size(), 6u);
  for (const auto& r : rep.rows) {
    ASSERT_TRUE(r.ok) << r.error;
    EXPECT_EQ(r.rows, rep.rows.front().rows);
  }
  for (std::size_t k = 1; k < rep.rows.size(); ++k) {
    EXPECT_LE(rep.rows[k].sigma_lr_fractional, rep.rows[k - 1].sigma_lr_fractional + 1e-12);
    EXPECT_LE(rep.rows[k].sigma_nl_fractional,
              rep.rows[k - 1].sigma_nl_fractional + 2.0 * (rep.rows[k].stderr_nl + rep.rows[k - 1].stderr_nl));
  }
  EXPECT_NEAR(rep.rows[1].sigma_nl_fractional, 0.82, 0.08);
  EXPECT_EQ(rep.chosen_de, 5u);
}

TEST(Scan, LorenzEmbedding) {
  LorenzConfig cfg;
  auto rep = embedding_scan(gen_lorenz(cfg), "x", 5);
  EXPECT_EQ(rep.chosen_de, 4u);
  EXPECT_LE(rep.rows[3].sigma_nl_fractional, 0.05);
}

TEST(Scan, IidSeriesHasNoEmbedding) {
  Dataset d({"x"}, {gaussian_noise(1500, 1.0, 4)});
  auto rep = embedding_scan(d, "x", 4);
  EXPECT_EQ(rep.chosen_de, 1u);
  for (const auto& r : rep.rows) EXPECT_NEAR(r.sigma_nl_fractional, 1.0, 0.1);
}

TEST(Scan, ArgumentErrors) {
  Dataset d({"x"}, {{1, 2, 3, 5}});
  EXPECT_THROW(embedding_scan(d, "x", 0), Error);
  EXPECT_THROW(embedding_scan(d, "x", 3), Error);
  EXPECT_THROW(embedding_scan(d, "q", 1), Error);
  EXPECT_THROW(embedding_scan(d, "x", 1, -0.1), Error);
}
