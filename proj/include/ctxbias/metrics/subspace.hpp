#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ctxbias/embformat.hpp"
#include "ctxbias/error.hpp"
#include "ctxbias/linalg.hpp"
#include "ctxbias/random.hpp"

namespace ctxbias {

// PCA of definitional difference vectors; g is the first component.
struct GenderSubspace {
  PcaResult pca;
  Vector g;
  // True when g was negated to point from female towards male.
  bool flipped = false;
};

// Principal directions of the difference vectors
// emb(original occurrence) - emb(gender-swapped occurrence).
inline GenderSubspace gender_subspace(std::span<const Vector> diff_vectors, std::size_t k) {
  if (diff_vectors.size() < 2) throw DataError("gender subspace needs at least 2 difference vectors");
  GenderSubspace out;
  out.pca = pca(diff_vectors, k);
  out.g = out.pca.components.front();
  return out;
}

// Orients g so that the mean male-minus-female difference projects
// positively. Leaves g unchanged when that mean is orthogonal to g.
inline void orient_male_positive(GenderSubspace& subspace,
                                 std::span<const Vector> male_minus_female) {
  if (male_minus_female.empty()) return;
  const Vector mean = column_mean(male_minus_female);
  if (dot(mean, subspace.g) < 0.0) {
    for (double& x : subspace.g) x = -x;
    subspace.flipped = !subspace.flipped;
  }
}

// Signed scalar projection onto g.
inline double word_bias(std::span<const double> vector, std::span<const double> g) {
  return dot(vector, g);
}

// Mean absolute cosine between each vector and g (strictness 1).
inline double direct_bias(std::span<const Vector> word_vectors, std::span<const double> g) {
  if (word_vectors.empty()) throw DataError("direct bias of an empty word set");
  double sum = 0.0;
  for (const auto& w : word_vectors) sum += std::abs(cosine(w, g));
  return sum / static_cast<double>(word_vectors.size());
}

// PCA spectrum of `n` representations drawn uniformly without replacement
// from a population of `population` items; `get` maps an index to its vector.
template <typename Getter>
PcaResult random_baseline_spectrum(std::size_t population, Getter&& get, std::size_t n,
                                   std::size_t k, Rng& rng) {
  if (n > population) {
    throw DataError("random baseline: requested " + std::to_string(n) + " samples from " +
                    std::to_string(population) + " records");
  }
  std::vector<Vector> sample;
  sample.reserve(n);
  for (std::size_t i : sample_indices(population, n, rng)) sample.push_back(get(i));
  return pca(sample, k);
}

inline PcaResult random_baseline_spectrum(const EmbeddingStore& store, std::size_t n,
                                          std::size_t k, Rng& rng) {
  return random_baseline_spectrum(
      store.size(), [&](std::size_t i) { return store[i].values; }, n, k, rng);
}

}  // namespace ctxbias
