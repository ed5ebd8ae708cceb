#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "ctxbias/corpus.hpp"
#include "ctxbias/error.hpp"
#include "ctxbias/linalg.hpp"

namespace ctxbias {

// 100 neighbours when at least 101 items exist, else floor((n - 1) / 2).
inline std::size_t default_knn_k(std::size_t n) {
  if (n >= 101) return 100;
  return n == 0 ? 0 : (n - 1) / 2;
}

// Two-sided p-value of a sample Pearson r over n pairs (t-transform,
// n - 2 degrees of freedom). NaN when n < 3.
inline double pearson_p_value(double r, std::size_t n) {
  if (n < 3) return std::numeric_limits<double>::quiet_NaN();
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = std::abs(r) * std::sqrt(df / (1.0 - r * r));
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, t));
}

struct KnnOutcome {
  std::size_t k = 0;
  std::vector<std::string> words;  // lexicographic
  std::vector<std::vector<std::string>> neighbors;
  Vector female_fraction;
  Vector original_bias;
  double r = 0.0;
  double p_value = 0.0;
};

// The k most cosine-similar other items for each item; equal similarities
// are ordered by word.
inline std::vector<std::vector<std::string>> cosine_neighbors(
    const std::map<std::string, Vector>& vectors, std::size_t k) {
  std::vector<std::string> words;
  std::vector<const Vector*> vs;
  for (const auto& [w, v] : vectors) {
    words.push_back(w);
    vs.push_back(&v);
  }
  const std::size_t n = words.size();
  std::vector<Vector> unit;
  unit.reserve(n);
  for (const auto* v : vs) unit.push_back(normalized(*v));

  std::vector<std::vector<std::string>> out(n);
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cand.emplace_back(dot(unit[i], unit[j]), j);
    }
    const std::size_t take = std::min(k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end(),
                      [&](const auto& a, const auto& b) {
                        if (a.first != b.first) return a.first > b.first;
                        return words[a.second] < words[b.second];
                      });
    for (std::size_t t = 0; t < take; ++t) out[i].push_back(words[cand[t].second]);
  }
  return out;
}

// For each profession, the fraction of its k nearest (cosine) professions
// labelled female, correlated (Pearson) with `original_bias`. Professions
// without a label count towards k but never as female.
inline KnnOutcome knn_stereotype_correlation(
    const std::map<std::string, Vector>& profession_vectors,
    const std::map<std::string, Gender>& stereotype_labels,
    const std::map<std::string, double>& original_bias, std::size_t k) {
  const std::size_t n = profession_vectors.size();
  if (k == 0) throw ConfigError("knn: k must be >= 1");
  if (n < k + 1) {
    throw DataError("knn: need at least k+1 = " + std::to_string(k + 1) + " professions, have " +
                    std::to_string(n));
  }
  KnnOutcome out;
  out.k = k;
  out.neighbors = cosine_neighbors(profession_vectors, k);
  for (const auto& [w, v] : profession_vectors) {
    auto it = original_bias.find(w);
    if (it == original_bias.end()) throw DataError("knn: no original bias for '" + w + "'");
    out.words.push_back(w);
    out.original_bias.push_back(it->second);
  }
  for (const auto& nb : out.neighbors) {
    std::size_t female = 0;
    for (const auto& w : nb) {
      auto it = stereotype_labels.find(w);
      if (it != stereotype_labels.end() && it->second == Gender::female) ++female;
    }
    out.female_fraction.push_back(static_cast<double>(female) / static_cast<double>(nb.size()));
  }
  out.r = pearson(out.female_fraction, out.original_bias);
  out.p_value = pearson_p_value(out.r, n);
  return out;
}

}  // namespace ctxbias
