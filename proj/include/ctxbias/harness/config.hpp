#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxbias/error.hpp"
#include "ctxbias/harness/report.hpp"
#include "ctxbias/wordlists.hpp"

namespace ctxbias {

inline const std::vector<std::string>& all_metric_names() {
  static const std::vector<std::string> names = {"subspace", "direct-bias", "cluster", "classify",
                                                 "knn"};
  return names;
}

enum class EmbeddingSourceKind { cemb, word2vec, toy };

struct EmbeddingSourceConfig {
  EmbeddingSourceKind kind = EmbeddingSourceKind::toy;
  std::string path;  // CEMB1 store or word2vec text table
  double alpha = 0.5;
  std::size_t window = 2;
};

struct MetricParams {
  std::size_t subspace_cap = 1000;      // occurrences sampled per definitional word
  std::size_t subspace_components = 10;
  std::size_t baseline_samples = 0;     // 0: as many as difference vectors
  std::size_t knn_k = 0;                // 0: 100 if n >= 101 else floor((n-1)/2)
  std::string original_bias = "auto";   // auto | list | projection
  double svm_C = 1.0;
  double svm_gamma = 0.0;               // 0: 1 / (d * feature variance)
  double svm_tol = 1e-3;
  std::size_t train_size = 1000;
  std::size_t test_size = 4000;
  std::size_t kmeans_restarts = 10;
  std::size_t kmeans_max_iter = 300;
};

struct ExperimentConfig {
  std::string corpus;  // optional for CEMB1 sources
  bool lowercase = true;
  std::string definitional;
  std::string professions;
  std::string biased;
  std::string extended_biased;
  EmbeddingSourceConfig embeddings;
  std::vector<std::string> metrics = all_metric_names();
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // never affects results
  MetricParams params;
  // Directory that relative paths are resolved against.
  std::string base_dir = ".";

  bool wants(const std::string& metric) const {
    return std::find(metrics.begin(), metrics.end(), metric) != metrics.end();
  }

  std::string resolve(const std::string& path) const {
    if (path.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
  }
};

inline std::string to_string(EmbeddingSourceKind k) {
  switch (k) {
    case EmbeddingSourceKind::cemb: return "cemb";
    case EmbeddingSourceKind::word2vec: return "word2vec";
    case EmbeddingSourceKind::toy: return "toy";
  }
  return "?";
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

inline void read_count(const nlohmann::json& obj, const char* key, std::size_t& out,
                       const std::string& where) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(where + "." + key + ": expected a non-negative integer");
  }
  out = v.get<std::size_t>();
}

}  // namespace detail

inline std::vector<std::string> parse_metric_list(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t end = csv.find(',', start);
    if (end == std::string::npos) end = csv.size();
    std::string m = csv.substr(start, end - start);
    if (!m.empty()) out.push_back(m);
    start = end + 1;
  }
  return out;
}

inline ExperimentConfig parse_config(const nlohmann::json& j, const std::string& base_dir = ".") {
  using detail::read_count;
  using detail::read_field;
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  detail::reject_unknown_keys(j, {"corpus", "lowercase", "lists", "embeddings", "metrics",
                                  "repeats", "seed", "threads", "params"},
                              "config");
  ExperimentConfig c;
  c.base_dir = base_dir;
  read_field(j, "corpus", c.corpus, "config");
  read_field(j, "lowercase", c.lowercase, "config");
  if (j.contains("lists")) {
    const auto& l = j.at("lists");
    if (!l.is_object()) throw ConfigError("config.lists: expected an object");
    detail::reject_unknown_keys(l, {"definitional", "professions", "biased", "extended_biased"},
                                "config.lists");
    read_field(l, "definitional", c.definitional, "config.lists");
    read_field(l, "professions", c.professions, "config.lists");
    read_field(l, "biased", c.biased, "config.lists");
    read_field(l, "extended_biased", c.extended_biased, "config.lists");
  }
  if (!j.contains("embeddings")) throw ConfigError("config: missing 'embeddings'");
  {
    const auto& e = j.at("embeddings");
    if (!e.is_object()) throw ConfigError("config.embeddings: expected an object");
    detail::reject_unknown_keys(e, {"source", "path", "alpha", "window"}, "config.embeddings");
    std::string source = "toy";
    read_field(e, "source", source, "config.embeddings");
    if (source == "cemb") {
      c.embeddings.kind = EmbeddingSourceKind::cemb;
    } else if (source == "word2vec") {
      c.embeddings.kind = EmbeddingSourceKind::word2vec;
    } else if (source == "toy") {
      c.embeddings.kind = EmbeddingSourceKind::toy;
    } else {
      throw ConfigError("config.embeddings.source: unknown source '" + source + "'");
    }
    read_field(e, "path", c.embeddings.path, "config.embeddings");
    read_field(e, "alpha", c.embeddings.alpha, "config.embeddings");
    read_count(e, "window", c.embeddings.window, "config.embeddings");
  }
  if (j.contains("metrics")) {
    const auto& m = j.at("metrics");
    if (m.is_string()) {
      c.metrics = parse_metric_list(m.get<std::string>());
    } else {
      read_field(j, "metrics", c.metrics, "config");
    }
  }
  read_count(j, "repeats", c.repeats, "config");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) throw ConfigError("config.seed: expected an integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  read_count(j, "threads", c.threads, "config");
  if (j.contains("params")) {
    const auto& p = j.at("params");
    if (!p.is_object()) throw ConfigError("config.params: expected an object");
    detail::reject_unknown_keys(
        p,
        {"subspace_cap", "subspace_components", "baseline_samples", "knn_k", "original_bias",
         "svm_C", "svm_gamma", "svm_tol", "train_size", "test_size", "kmeans_restarts",
         "kmeans_max_iter"},
        "config.params");
    auto& q = c.params;
    read_count(p, "subspace_cap", q.subspace_cap, "config.params");
    read_count(p, "subspace_components", q.subspace_components, "config.params");
    read_count(p, "baseline_samples", q.baseline_samples, "config.params");
    read_count(p, "knn_k", q.knn_k, "config.params");
    read_field(p, "original_bias", q.original_bias, "config.params");
    read_field(p, "svm_C", q.svm_C, "config.params");
    read_field(p, "svm_gamma", q.svm_gamma, "config.params");
    read_field(p, "svm_tol", q.svm_tol, "config.params");
    read_count(p, "train_size", q.train_size, "config.params");
    read_count(p, "test_size", q.test_size, "config.params");
    read_count(p, "kmeans_restarts", q.kmeans_restarts, "config.params");
    read_count(p, "kmeans_max_iter", q.kmeans_max_iter, "config.params");
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = read_json_file(path);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  auto dir = std::filesystem::path(path).parent_path().string();
  if (dir.empty()) dir = ".";
  try {
    return parse_config(j, dir);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// Checks value ranges, metric/list coverage and that referenced files exist
// (missing files raise IoError).
inline void validate(const ExperimentConfig& c) {
  if (c.repeats < 1) throw ConfigError("repeats must be >= 1");
  if (c.metrics.empty()) throw ConfigError("no metrics selected");
  std::set<std::string> seen;
  for (const auto& m : c.metrics) {
    const auto& all = all_metric_names();
    if (std::find(all.begin(), all.end(), m) == all.end()) {
      throw ConfigError("unknown metric '" + m + "' (expected one of subspace, direct-bias, "
                        "cluster, classify, knn)");
    }
    if (!seen.insert(m).second) throw ConfigError("metric '" + m + "' selected twice");
  }
  const auto& p = c.params;
  if (p.subspace_cap < 1) throw ConfigError("params.subspace_cap must be >= 1");
  if (p.subspace_components < 1) throw ConfigError("params.subspace_components must be >= 1");
  if (!(p.svm_C > 0.0)) throw ConfigError("params.svm_C must be > 0");
  if (p.svm_gamma < 0.0) throw ConfigError("params.svm_gamma must be >= 0");
  if (!(p.svm_tol > 0.0)) throw ConfigError("params.svm_tol must be > 0");
  if (p.train_size < 1 || p.test_size < 1) throw ConfigError("params.train_size/test_size must be >= 1");
  if (p.kmeans_restarts < 1 || p.kmeans_max_iter < 1) {
    throw ConfigError("params.kmeans_restarts/kmeans_max_iter must be >= 1");
  }
  if (p.original_bias != "auto" && p.original_bias != "list" && p.original_bias != "projection") {
    throw ConfigError("params.original_bias must be auto, list or projection");
  }
  if (!(c.embeddings.alpha >= 0.0 && c.embeddings.alpha <= 1.0)) {
    throw ConfigError("embeddings.alpha must be in [0, 1]");
  }
  if (c.embeddings.path.empty()) throw ConfigError("embeddings.path is required");
  if (c.embeddings.kind == EmbeddingSourceKind::toy && c.corpus.empty()) {
    throw ConfigError("the toy provider needs a corpus");
  }

  auto need_list = [&](const std::string& path, const char* list, const char* metric) {
    if (path.empty()) {
      throw ConfigError(std::string("metric '") + metric + "' needs lists." + list);
    }
  };
  if (c.wants("subspace") || c.wants("direct-bias")) {
    need_list(c.definitional, "definitional", c.wants("subspace") ? "subspace" : "direct-bias");
  }
  if (c.wants("direct-bias")) need_list(c.professions, "professions", "direct-bias");
  if (c.wants("knn")) need_list(c.professions, "professions", "knn");
  if (c.wants("cluster")) need_list(c.biased, "biased", "cluster");
  if (c.wants("classify")) need_list(c.extended_biased, "extended_biased", "classify");
  if (c.wants("knn") && p.original_bias == "projection") {
    need_list(c.definitional, "definitional", "knn");
  }

  auto must_exist = [&](const std::string& path, const char* what) {
    if (path.empty()) return;
    const std::string resolved = c.resolve(path);
    if (!std::filesystem::exists(resolved)) {
      throw IoError(std::string(what) + " not found: " + resolved);
    }
  };
  must_exist(c.corpus, "corpus");
  must_exist(c.embeddings.path, "embeddings");
  must_exist(c.definitional, "definitional list");
  must_exist(c.professions, "professions list");
  must_exist(c.biased, "biased list");
  must_exist(c.extended_biased, "extended biased list");
}

// Normalized configuration as echoed in reports (paths as written, all
// defaults filled in, thread count omitted).
inline nlohmann::json config_echo(const ExperimentConfig& c) {
  nlohmann::json j;
  j["corpus"] = c.corpus;
  j["lowercase"] = c.lowercase;
  j["lists"] = {{"definitional", c.definitional},
                {"professions", c.professions},
                {"biased", c.biased},
                {"extended_biased", c.extended_biased}};
  nlohmann::json e = {{"source", to_string(c.embeddings.kind)}, {"path", c.embeddings.path}};
  if (c.embeddings.kind == EmbeddingSourceKind::toy) {
    e["alpha"] = c.embeddings.alpha;
    e["window"] = c.embeddings.window;
  }
  j["embeddings"] = e;
  j["metrics"] = c.metrics;
  j["repeats"] = c.repeats;
  j["seed"] = c.seed;
  const auto& p = c.params;
  j["params"] = {{"subspace_cap", p.subspace_cap},
                 {"subspace_components", p.subspace_components},
                 {"baseline_samples", p.baseline_samples},
                 {"knn_k", p.knn_k},
                 {"original_bias", p.original_bias},
                 {"svm_C", p.svm_C},
                 {"svm_gamma", p.svm_gamma},
                 {"svm_tol", p.svm_tol},
                 {"train_size", p.train_size},
                 {"test_size", p.test_size},
                 {"kmeans_restarts", p.kmeans_restarts},
                 {"kmeans_max_iter", p.kmeans_max_iter}};
  return j;
}

inline std::string config_digest(const ExperimentConfig& c) {
  return hex64(fnv1a64(canonical_json(config_echo(c), -1)));
}

}  // namespace ctxbias
