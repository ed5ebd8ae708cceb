#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctxbias/error.hpp"

namespace ctxbias {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DataError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vector subtract(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("dimension mismatch in subtract");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vector scaled(std::span<const double> a, double c) {
  Vector out(a.begin(), a.end());
  for (double& x : out) x *= c;
  return out;
}

inline Vector normalized(std::span<const double> a) {
  const double n = norm(a);
  if (n == 0.0) throw DataError("cannot normalize a zero vector");
  return scaled(a, 1.0 / n);
}

// Checks a nonempty, rectangular point set; returns its dimension.
inline std::size_t uniform_dimension(std::span<const Vector> vectors) {
  if (vectors.empty()) throw DataError("empty vector list");
  const std::size_t d = vectors.front().size();
  for (std::size_t i = 1; i < vectors.size(); ++i) {
    if (vectors[i].size() != d) {
      throw DataError("ragged dimensions: vector " + std::to_string(i) + " has " +
                      std::to_string(vectors[i].size()) + ", expected " + std::to_string(d));
    }
  }
  return d;
}

inline Vector column_mean(std::span<const Vector> vectors) {
  const std::size_t d = uniform_dimension(vectors);
  Vector mean(d, 0.0);
  for (const auto& v : vectors) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += v[j];
  }
  for (double& m : mean) m /= static_cast<double>(vectors.size());
  return mean;
}

struct Centered {
  std::vector<Vector> vectors;
  Vector mean;
};

inline Centered mean_center(std::span<const Vector> vectors) {
  Centered out;
  out.mean = column_mean(vectors);
  out.vectors.reserve(vectors.size());
  for (const auto& v : vectors) out.vectors.push_back(subtract(v, out.mean));
  return out;
}

// Dense symmetric matrix, row-major.
struct SymmetricMatrix {
  std::size_t n = 0;
  std::vector<double> a;

  explicit SymmetricMatrix(std::size_t size = 0) : n(size), a(size * size, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

struct EigenDecomposition {
  Vector values;                // descending
  std::vector<Vector> vectors;  // unit eigenvectors, same order
};

// Cyclic Jacobi eigensolver. Converged once every off-diagonal entry is
// below 1e-12 times the Frobenius norm of the input.
inline EigenDecomposition jacobi_eigen(SymmetricMatrix m, int max_sweeps = 100) {
  const std::size_t n = m.n;
  SymmetricMatrix v(n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  double frob = 0.0;
  for (double x : m.a) frob += x * x;
  frob = std::sqrt(frob);
  const double threshold = 1e-12 * frob;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(m(p, q)));
    }
    if (off <= threshold) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (std::abs(apq) <= threshold * 1e-3) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = m(k, p);
          const double akq = m(k, q);
          m(k, p) = c * akp - s * akq;
          m(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = m(p, k);
          const double aqk = m(q, k);
          m(p, k) = c * apk - s * aqk;
          m(q, k) = s * apk + c * aqk;
        }
        m(p, q) = 0.0;
        m(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return m(i, i) > m(j, j); });
  EigenDecomposition out;
  for (std::size_t idx : order) {
    out.values.push_back(m(idx, idx));
    Vector col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v(k, idx);
    out.vectors.push_back(std::move(col));
  }
  return out;
}

struct PcaResult {
  std::vector<Vector> components;  // orthonormal, descending variance
  Vector explained_variance;
  Vector explained_ratio;
  Vector mean;
  double total_variance = 0.0;
};

namespace detail {

// Flip so the largest-magnitude entry (first on ties) is positive.
inline void canonical_sign(Vector& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  if (!v.empty() && v[best] < 0.0) {
    for (double& x : v) x = -x;
  }
}

// Extends `basis` with a unit vector orthogonal to it (Gram-Schmidt over
// the standard basis).
inline Vector orthogonal_complement_vector(const std::vector<Vector>& basis, std::size_t d) {
  Vector best;
  double best_norm = -1.0;
  for (std::size_t j = 0; j < d; ++j) {
    Vector e(d, 0.0);
    e[j] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) {
        const double c = dot(e, b);
        for (std::size_t k = 0; k < d; ++k) e[k] -= c * b[k];
      }
    }
    const double n = norm(e);
    if (n > best_norm + 1e-12) {
      best_norm = n;
      best = std::move(e);
    }
  }
  return scaled(best, 1.0 / best_norm);
}

}  // namespace detail

// Principal components of the point cloud: top-k eigenvectors of the
// covariance (divisor n) of the mean-centered input.
inline PcaResult pca(std::span<const Vector> vectors, std::size_t k) {
  if (vectors.size() < 2) throw DataError("pca needs at least 2 vectors");
  const std::size_t d = uniform_dimension(vectors);
  const std::size_t n = vectors.size();
  if (k == 0 || k > std::min(n, d)) {
    throw ConfigError("pca: component count " + std::to_string(k) + " out of range [1, " +
                      std::to_string(std::min(n, d)) + "]");
  }
  Centered c = mean_center(vectors);
  const auto& x = c.vectors;
  const double inv_n = 1.0 / static_cast<double>(n);

  double scale = 0.0;
  for (const auto& v : vectors) scale = std::max(scale, dot(v, v));

  EigenDecomposition eig;
  if (n >= d) {
    SymmetricMatrix cov(d);
    for (const auto& row : x) {
      for (std::size_t i = 0; i < d; ++i) {
        const double ri = row[i];
        if (ri == 0.0) continue;
        for (std::size_t j = i; j < d; ++j) cov(i, j) += ri * row[j];
      }
    }
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) {
        cov(i, j) *= inv_n;
        cov(j, i) = cov(i, j);
      }
    }
    eig = jacobi_eigen(std::move(cov));
  } else {
    // Fewer points than dimensions: diagonalize the n x n Gram matrix and
    // map its eigenvectors back through the data.
    SymmetricMatrix gram(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        gram(i, j) = dot(x[i], x[j]) * inv_n;
        gram(j, i) = gram(i, j);
      }
    }
    EigenDecomposition g = jacobi_eigen(std::move(gram));
    const double lead = std::max(g.values.empty() ? 0.0 : g.values.front(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const double lambda = g.values[r];
      Vector comp;
      if (lambda > 1e-12 * lead && lambda > 0.0) {
        comp.assign(d, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          const double w = g.vectors[r][i];
          for (std::size_t j = 0; j < d; ++j) comp[j] += w * x[i][j];
        }
        // Re-orthogonalize against earlier components to absorb rounding.
        for (const auto& b : eig.vectors) {
          const double cb = dot(comp, b);
          for (std::size_t j = 0; j < d; ++j) comp[j] -= cb * b[j];
        }
        comp = normalized(comp);
      } else {
        comp = detail::orthogonal_complement_vector(eig.vectors, d);
      }
      eig.values.push_back(lambda);
      eig.vectors.push_back(std::move(comp));
    }
  }

  double total = 0.0;
  for (const auto& row : x) total += dot(row, row);
  total *= inv_n;
  if (!(total > 1e-24 * std::max(scale, 1e-300)) || total <= 0.0) {
    throw DataError("degenerate point cloud: zero total variance");
  }

  PcaResult out;
  out.mean = std::move(c.mean);
  out.total_variance = total;
  for (std::size_t i = 0; i < k; ++i) {
    const double lambda = std::max(eig.values[i], 0.0);
    Vector comp = std::move(eig.vectors[i]);
    detail::canonical_sign(comp);
    out.components.push_back(std::move(comp));
    out.explained_variance.push_back(lambda);
    out.explained_ratio.push_back(lambda / total);
  }
  return out;
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
  const double ab = dot(a, b);
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw DataError("cosine of a zero-norm vector");
  return std::clamp(ab / (na * nb), -1.0, 1.0);
}

// Sample Pearson correlation.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("pearson: length mismatch");
  if (x.size() < 2) throw DataError("pearson: need at least 2 samples");
  auto constant = [](std::span<const double> s) {
    return std::all_of(s.begin(), s.end(), [&](double v) { return v == s.front(); });
  };
  if (constant(x) || constant(y)) throw DataError("pearson: zero variance");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace ctxbias
