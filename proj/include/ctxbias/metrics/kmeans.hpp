#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ctxbias/corpus.hpp"
#include "ctxbias/error.hpp"
#include "ctxbias/linalg.hpp"
#include "ctxbias/random.hpp"

namespace ctxbias {

struct KMeansOptions {
  std::size_t k = 2;
  std::size_t max_iter = 300;
  std::size_t restarts = 10;
};

struct KMeansResult {
  std::vector<int> assignments;
  std::vector<Vector> centroids;
  double wcss = 0.0;
  std::size_t iterations = 0;    // of the winning restart
  std::size_t empty_repairs = 0;  // summed over all restarts
};

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline std::vector<Vector> kmeanspp_seed(std::span<const Vector> x, std::size_t k, Rng& rng) {
  std::vector<Vector> centers;
  centers.push_back(x[uniform_index(rng, x.size())]);
  std::vector<double> d2(x.size(), std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(x[i], centers.back()));
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double r = uniform01(rng) * total;
      double acc = 0.0;
      pick = x.size() - 1;
      for (std::size_t i = 0; i < x.size(); ++i) {
        acc += d2[i];
        if (r < acc && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = uniform_index(rng, x.size());
    }
    centers.push_back(x[pick]);
  }
  return centers;
}

}  // namespace detail

inline double within_cluster_ss(std::span<const Vector> x, std::span<const int> assignments,
                                std::span<const Vector> centroids) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += detail::squared_distance(x[i], centroids[static_cast<std::size_t>(assignments[i])]);
  }
  return s;
}

// Lloyd's algorithm from k-means++ seeds, best of `restarts` by WCSS.
// An empty cluster takes over the point farthest from its own centroid.
inline KMeansResult kmeans(std::span<const Vector> x, Rng& rng, const KMeansOptions& opt = {}) {
  const std::size_t n = x.size();
  if (opt.k == 0) throw ConfigError("kmeans: k must be >= 1");
  if (n <= opt.k) {
    throw DataError("kmeans: need more points (" + std::to_string(n) + ") than clusters (" +
                    std::to_string(opt.k) + ")");
  }
  const std::size_t d = uniform_dimension(x);
  const std::size_t k = opt.k;

  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  std::size_t repairs_total = 0;

  for (std::size_t restart = 0; restart < std::max<std::size_t>(1, opt.restarts); ++restart) {
    std::vector<Vector> centroids = detail::kmeanspp_seed(x, k, rng);
    std::vector<int> assign(n, -1);
    std::size_t iter = 0;
    for (; iter < opt.max_iter; ++iter) {
      std::vector<int> next(n);
      for (std::size_t i = 0; i < n; ++i) {
        double bd = std::numeric_limits<double>::infinity();
        int bc = 0;
        for (std::size_t c = 0; c < k; ++c) {
          const double dist = detail::squared_distance(x[i], centroids[c]);
          if (dist < bd) {
            bd = dist;
            bc = static_cast<int>(c);
          }
        }
        next[i] = bc;
      }

      std::vector<std::size_t> sizes(k, 0);
      for (int a : next) ++sizes[static_cast<std::size_t>(a)];
      for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] != 0) continue;
        std::size_t far = n;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const auto from = static_cast<std::size_t>(next[i]);
          if (sizes[from] < 2) continue;
          const double dist = detail::squared_distance(x[i], centroids[from]);
          if (dist > far_d) {
            far_d = dist;
            far = i;
          }
        }
        --sizes[static_cast<std::size_t>(next[far])];
        next[far] = static_cast<int>(c);
        ++sizes[c];
        centroids[c] = x[far];
        ++repairs_total;
      }

      const bool unchanged = (next == assign);
      assign = std::move(next);

      std::vector<Vector> sums(k, Vector(d, 0.0));
      for (std::size_t i = 0; i < n; ++i) {
        auto& s = sums[static_cast<std::size_t>(assign[i])];
        for (std::size_t j = 0; j < d; ++j) s[j] += x[i][j];
      }
      for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < d; ++j) {
          centroids[c][j] = sums[c][j] / static_cast<double>(sizes[c]);
        }
      }
      if (unchanged) {
        ++iter;
        break;
      }
    }
    const double wcss = within_cluster_ss(x, assign, centroids);
    if (wcss < best.wcss) {
      best.assignments = std::move(assign);
      best.centroids = std::move(centroids);
      best.wcss = wcss;
      best.iterations = iter;
    }
  }
  best.empty_repairs = repairs_total;
  return best;
}

// Agreement between a 2-cluster assignment and 2-valued labels, maximised
// over both cluster-to-label bijections.
template <typename Label>
double cluster_accuracy(std::span<const int> assignments, std::span<const Label> labels) {
  if (assignments.size() != labels.size()) throw DataError("cluster_accuracy: length mismatch");
  if (assignments.empty()) throw DataError("cluster_accuracy: empty input");
  std::map<int, int> cluster_ids;
  for (int a : assignments) cluster_ids.emplace(a, 0);
  std::map<Label, int> label_ids;
  for (const auto& l : labels) label_ids.emplace(l, 0);
  if (cluster_ids.size() > 2) throw DataError("cluster_accuracy: more than 2 clusters");
  if (label_ids.size() > 2) throw DataError("cluster_accuracy: more than 2 label values");
  int next = 0;
  for (auto& [id, v] : cluster_ids) v = next++;
  next = 0;
  for (auto& [id, v] : label_ids) v = next++;

  std::size_t agree = 0;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (cluster_ids[assignments[i]] == label_ids[labels[i]]) ++agree;
  }
  const std::size_t best = std::max(agree, assignments.size() - agree);
  return static_cast<double>(best) / static_cast<double>(assignments.size());
}

struct ClusteringOutcome {
  std::vector<int> assignments;
  double accuracy = 0.0;
  // 2-D PCA coordinates of each input vector, for plotting.
  std::vector<std::array<double, 2>> projection_2d;
  KMeansResult kmeans;
};

// Projects onto the top two principal components; a degenerate cloud maps
// to the origin.
inline std::vector<std::array<double, 2>> pca_projection_2d(std::span<const Vector> x) {
  std::vector<std::array<double, 2>> out(x.size(), {0.0, 0.0});
  if (x.size() < 2) return out;
  const std::size_t d = uniform_dimension(x);
  const std::size_t k = std::min<std::size_t>({2, d, x.size()});
  PcaResult p;
  try {
    p = pca(x, k);
  } catch (const DataError&) {
    return out;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Vector c = subtract(x[i], p.mean);
    for (std::size_t j = 0; j < k; ++j) out[i][j] = dot(c, p.components[j]);
  }
  return out;
}

inline ClusteringOutcome cluster_biased_words(std::span<const Vector> vectors,
                                              std::span<const Gender> labels, Rng& rng,
                                              const KMeansOptions& opt = {}) {
  ClusteringOutcome out;
  out.kmeans = kmeans(vectors, rng, opt);
  out.assignments = out.kmeans.assignments;
  out.accuracy = cluster_accuracy<Gender>(out.assignments, labels);
  out.projection_2d = pca_projection_2d(vectors);
  return out;
}

}  // namespace ctxbias
