#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ctxbias/error.hpp"
#include "ctxbias/linalg.hpp"

namespace ctxbias {

struct SvmParams {
  double C = 1.0;
  double gamma = 0.0;  // <= 0 selects default_gamma() of the training data
  double tol = 1e-3;
  std::size_t max_iter = 10'000'000;
};

struct SvmModel {
  std::vector<Vector> support_vectors;
  Vector dual_coef;  // alpha_i * y_i per support vector
  std::vector<std::size_t> support_indices;  // positions in the training set
  double bias = 0.0;
  double gamma = 0.0;
  double C = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

inline double rbf_kernel(std::span<const double> u, std::span<const double> v, double gamma) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    s += d * d;
  }
  return std::exp(-gamma * s);
}

// 1 / (d * variance of all feature values); 1 when the data is constant.
inline double default_gamma(std::span<const Vector> x) {
  const std::size_t d = uniform_dimension(x);
  double sum = 0.0, sq = 0.0;
  for (const auto& v : x) {
    for (double f : v) sum += f;
  }
  const double count = static_cast<double>(x.size() * d);
  const double mean = sum / count;
  for (const auto& v : x) {
    for (double f : v) sq += (f - mean) * (f - mean);
  }
  const double var = sq / count;
  return var > 0.0 ? 1.0 / (static_cast<double>(d) * var) : 1.0;
}

// Dual objective W(alpha) = sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
inline double svm_dual_objective(std::span<const Vector> x, std::span<const int> y,
                                 std::span<const double> alpha, double gamma) {
  double linear = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    linear += alpha[i];
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (alpha[j] == 0.0) continue;
      quad += alpha[i] * alpha[j] * y[i] * y[j] * rbf_kernel(x[i], x[j], gamma);
    }
  }
  return linear - 0.5 * quad;
}

// Soft-margin C-SVC with an RBF kernel, solved by SMO with second-order
// working-set selection. Stops once the maximal KKT violation is below tol.
inline SvmModel svm_rbf_train(std::span<const Vector> x, std::span<const int> y,
                              const SvmParams& params) {
  const std::size_t n = x.size();
  if (n != y.size()) throw DataError("svm: feature/label count mismatch");
  if (n == 0) throw DataError("svm: empty training set");
  if (!(params.C > 0.0)) throw ConfigError("svm: C must be > 0");
  if (!(params.tol > 0.0)) throw ConfigError("svm: tol must be > 0");
  const std::size_t d = uniform_dimension(x);
  (void)d;
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] == 1) {
      has_pos = true;
    } else if (y[i] == -1) {
      has_neg = true;
    } else {
      throw DataError("svm: labels must be -1 or +1");
    }
    for (double f : x[i]) {
      if (!std::isfinite(f)) throw DataError("svm: non-finite feature in sample " + std::to_string(i));
    }
  }
  if (!has_pos || !has_neg) throw DataError("svm: training data has a single class");

  const double gamma = params.gamma > 0.0 ? params.gamma : default_gamma(x);
  const double C = params.C;
  constexpr double kTau = 1e-12;

  std::vector<double> kmat(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    kmat[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double kv = rbf_kernel(x[i], x[j], gamma);
      kmat[i * n + j] = kv;
      kmat[j * n + i] = kv;
    }
  }
  auto K = [&](std::size_t i, std::size_t j) { return kmat[i * n + j]; };
  auto yd = [&](std::size_t i) { return static_cast<double>(y[i]); };

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // Q alpha - e
  auto at_upper = [&](std::size_t i) { return alpha[i] >= C; };
  auto at_lower = [&](std::size_t i) { return alpha[i] <= 0.0; };

  SvmModel model;
  model.gamma = gamma;
  model.C = C;

  std::size_t iter = 0;
  for (; iter < params.max_iter; ++iter) {
    // i: maximal violator in I_up.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (!at_upper(t) && -grad[t] >= gmax) {
          gmax = -grad[t];
          i = t;
        }
      } else {
        if (!at_lower(t) && grad[t] >= gmax) {
          gmax = grad[t];
          i = t;
        }
      }
    }
    // j: second-order choice in I_low.
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    if (i < n) {
      for (std::size_t t = 0; t < n; ++t) {
        double grad_diff;
        if (y[t] == 1) {
          if (at_lower(t)) continue;
          grad_diff = gmax + grad[t];
          gmax2 = std::max(gmax2, grad[t]);
        } else {
          if (at_upper(t)) continue;
          grad_diff = gmax - grad[t];
          gmax2 = std::max(gmax2, -grad[t]);
        }
        if (grad_diff > 0.0) {
          double quad = K(i, i) + K(t, t) - 2.0 * K(i, t);
          if (quad <= 0.0) quad = kTau;
          const double obj = -(grad_diff * grad_diff) / quad;
          if (obj <= best_obj) {
            best_obj = obj;
            j = t;
          }
        }
      }
    }
    if (i == n || j == n || gmax + gmax2 < params.tol) {
      model.converged = true;
      break;
    }

    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    const double qij = yd(i) * yd(j) * K(i, j);
    if (y[i] != y[j]) {
      double quad = K(i, i) + K(j, j) + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = K(i, i) + K(j, j) - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += yd(i) * yd(t) * K(i, t) * dai + yd(j) * yd(t) * K(j, t) * daj;
    }
  }
  model.iterations = iter;

  // Bias: mean of -y_i grad_i over free vectors, else the midpoint of the
  // feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = yd(t) * grad[t];
    if (at_upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  model.bias = -rho;

  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.support_vectors.push_back(x[t]);
      model.dual_coef.push_back(alpha[t] * yd(t));
      model.support_indices.push_back(t);
    }
  }
  return model;
}

// Full alpha vector of the training set, reconstructed from the model.
inline Vector svm_alpha(const SvmModel& model, std::size_t n_train) {
  Vector alpha(n_train, 0.0);
  for (std::size_t s = 0; s < model.support_indices.size(); ++s) {
    alpha[model.support_indices[s]] = std::abs(model.dual_coef[s]);
  }
  return alpha;
}

inline double svm_decision(const SvmModel& model, std::span<const double> v) {
  if (!model.support_vectors.empty() && v.size() != model.support_vectors.front().size()) {
    throw DataError("svm: dimension mismatch (" + std::to_string(v.size()) + " vs " +
                    std::to_string(model.support_vectors.front().size()) + ")");
  }
  double f = model.bias;
  for (std::size_t s = 0; s < model.support_vectors.size(); ++s) {
    f += model.dual_coef[s] * rbf_kernel(model.support_vectors[s], v, model.gamma);
  }
  return f;
}

inline std::vector<int> svm_predict(const SvmModel& model, std::span<const Vector> vectors) {
  std::vector<int> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) out.push_back(svm_decision(model, v) >= 0.0 ? 1 : -1);
  return out;
}

inline double svm_accuracy(const SvmModel& model, std::span<const Vector> vectors,
                           std::span<const int> labels) {
  if (vectors.size() != labels.size()) throw DataError("svm_accuracy: length mismatch");
  if (vectors.empty()) throw DataError("svm_accuracy: empty evaluation set");
  const auto pred = svm_predict(model, vectors);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == labels[i];
  return static_cast<double>(ok) / static_cast<double>(pred.size());
}

}  // namespace ctxbias
