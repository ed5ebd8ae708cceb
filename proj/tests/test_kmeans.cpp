#include <gtest/gtest.h>

#include "ctxbias/metrics/kmeans.hpp"
#include "test_util.hpp"

using namespace ctxbias;

namespace {

std::vector<Vector> two_blobs(Rng& rng, std::size_t per, double sep, double radius,
                              std::vector<int>& labels) {
  std::vector<Vector> x;
  labels.clear();
  for (std::size_t i = 0; i < 2 * per; ++i) {
    const int l = i < per ? 0 : 1;
    x.push_back({(l == 0 ? -sep : sep) + radius * standard_normal(rng), radius * standard_normal(rng)});
    labels.push_back(l);
  }
  return x;
}

// WCSS of an assignment with centroids recomputed from scratch.
double wcss_of(const std::vector<Vector>& x, const std::vector<int>& a, std::size_t k) {
  std::vector<Vector> c(k, Vector(x[0].size(), 0.0));
  std::vector<double> cnt(k, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    cnt[static_cast<std::size_t>(a[i])] += 1;
    for (std::size_t j = 0; j < x[i].size(); ++j) c[static_cast<std::size_t>(a[i])][j] += x[i][j];
  }
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto ci = static_cast<std::size_t>(a[i]);
    for (std::size_t j = 0; j < x[i].size(); ++j) {
      const double m = c[ci][j] / cnt[ci];
      s += (x[i][j] - m) * (x[i][j] - m);
    }
  }
  return s;
}

}  // namespace

TEST(KMeans, SeparableBlobs) {
  Rng rng(31);
  std::vector<int> labels;
  const auto x = two_blobs(rng, 50, 10.0, 0.1, labels);
  Rng krng(32);
  const auto r = kmeans(x, krng);
  EXPECT_DOUBLE_EQ(cluster_accuracy<int>(r.assignments, labels), 1.0);
  EXPECT_NEAR(r.wcss, wcss_of(x, r.assignments, 2), 1e-9);
}

TEST(KMeans, IdenticalPointsTriggerRepair) {
  const std::vector<Vector> x(10, Vector{1.0, 1.0});
  Rng rng(33);
  const auto r = kmeans(x, rng);
  EXPECT_GT(r.empty_repairs, 0u);
  EXPECT_EQ(r.assignments.size(), 10u);
  EXPECT_NEAR(r.wcss, 0.0, 1e-12);
  // Both clusters populated after repair.
  EXPECT_EQ(std::count(r.assignments.begin(), r.assignments.end(), 1), 1);
}

TEST(KMeans, BeatsRandomAssignments) {
  Rng rng(34);
  const auto x = ctxbias::testing::gaussian_cloud(rng, 30, 2);
  Rng krng(35);
  const auto r = kmeans(x, krng);
  Rng arng(36);
  for (int t = 0; t < 1000; ++t) {
    std::vector<int> a(30);
    for (auto& v : a) v = static_cast<int>(uniform_index(arng, 2));
    if (std::count(a.begin(), a.end(), 0) == 0 || std::count(a.begin(), a.end(), 1) == 0) continue;
    EXPECT_LE(r.wcss, wcss_of(x, a, 2) + 1e-9);
  }
}

TEST(KMeans, DeterministicGivenSeed) {
  Rng rng(37);
  const auto x = ctxbias::testing::gaussian_cloud(rng, 60, 3);
  Rng a(8), b(8);
  const auto ra = kmeans(x, a), rb = kmeans(x, b);
  EXPECT_EQ(ra.assignments, rb.assignments);
  EXPECT_EQ(ra.wcss, rb.wcss);
}

TEST(KMeans, Errors) {
  const std::vector<Vector> two = {{0.0}, {1.0}};
  Rng rng(1);
  EXPECT_THROW(kmeans(two, rng), DataError);
  EXPECT_THROW(kmeans(two, rng, {0, 300, 10}), ConfigError);
}

TEST(ClusterAccuracy, Examples) {
  const std::vector<Gender> labels = {Gender::female, Gender::female, Gender::male, Gender::male};
  EXPECT_DOUBLE_EQ(cluster_accuracy<Gender>(std::vector<int>{0, 0, 1, 1}, labels), 1.0);
  EXPECT_DOUBLE_EQ(cluster_accuracy<Gender>(std::vector<int>{1, 1, 0, 0}, labels), 1.0);
  EXPECT_DOUBLE_EQ(cluster_accuracy<Gender>(std::vector<int>{0, 1, 0, 1}, labels), 0.5);
  EXPECT_DOUBLE_EQ(cluster_accuracy<Gender>(std::vector<int>{0, 0, 0, 1}, labels), 0.75);
}

TEST(ClusterAccuracy, ExhaustiveBijectionOracle) {
  Rng rng(38);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + uniform_index(rng, 20);
    std::vector<int> a(n), l(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<int>(uniform_index(rng, 2));
      l[i] = static_cast<int>(uniform_index(rng, 2));
    }
    double best = 0;
    for (int flip : {0, 1}) {
      std::size_t ok = 0;
      for (std::size_t i = 0; i < n; ++i) ok += ((a[i] ^ flip) == l[i]);
      best = std::max(best, static_cast<double>(ok) / static_cast<double>(n));
    }
    // The oracle fixes cluster id c <-> label c; only valid when both sides use both values.
    const bool full = std::count(a.begin(), a.end(), 0) % static_cast<long>(n) != 0 &&
                      std::count(l.begin(), l.end(), 0) % static_cast<long>(n) != 0;
    const double got = cluster_accuracy<int>(a, l);
    if (full) {
      EXPECT_DOUBLE_EQ(got, best);
    }
    EXPECT_GE(got, 0.5);
    EXPECT_LE(got, 1.0);
    // Permuting cluster ids leaves the score unchanged.
    std::vector<int> swapped(a);
    for (int& v : swapped) v = 1 - v;
    EXPECT_EQ(cluster_accuracy<int>(swapped, l), got);
  }
}

TEST(ClusterAccuracy, Errors) {
  EXPECT_THROW(cluster_accuracy<int>(std::vector<int>{0, 1, 2}, std::vector<int>{0, 1, 1}), DataError);
  EXPECT_THROW(cluster_accuracy<int>(std::vector<int>{0, 1}, std::vector<int>{0, 1, 2}), DataError);
  EXPECT_THROW(cluster_accuracy<int>(std::vector<int>{0, 1, 1}, std::vector<int>{0, 1, 2}), DataError);
}

TEST(ClusterBiasedWords, ProjectionShapeAndAccuracy) {
  Rng rng(39);
  std::vector<Vector> x;
  std::vector<Gender> labels;
  for (int i = 0; i < 40; ++i) {
    const bool male = i % 2 == 1;
    Vector v = ctxbias::testing::gaussian_vector(rng, 6, 0.05);
    v[0] += male ? 1.0 : -1.0;
    x.push_back(v);
    labels.push_back(male ? Gender::male : Gender::female);
  }
  Rng krng(40);
  const auto out = cluster_biased_words(x, labels, krng);
  EXPECT_DOUBLE_EQ(out.accuracy, 1.0);
  ASSERT_EQ(out.projection_2d.size(), 40u);
  // First PCA coordinate separates the groups.
  for (std::size_t i = 0; i < 40; ++i) {
    EXPECT_EQ(out.projection_2d[i][0] > 0, out.projection_2d[1][0] > 0 ? (i % 2 == 1) : (i % 2 == 0));
  }
}
