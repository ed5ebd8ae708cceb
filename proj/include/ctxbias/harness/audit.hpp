#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxbias/corpus.hpp"
#include "ctxbias/embformat.hpp"
#include "ctxbias/error.hpp"
#include "ctxbias/harness/config.hpp"
#include "ctxbias/harness/report.hpp"
#include "ctxbias/harness/source.hpp"
#include "ctxbias/linalg.hpp"
#include "ctxbias/metrics/kmeans.hpp"
#include "ctxbias/metrics/knn.hpp"
#include "ctxbias/metrics/subspace.hpp"
#include "ctxbias/metrics/svm.hpp"
#include "ctxbias/random.hpp"
#include "ctxbias/wordlists.hpp"

namespace ctxbias {

inline constexpr int kReportVersion = 1;

struct AuditInputs {
  std::shared_ptr<const EmbeddingSource> source;
  std::vector<DefinitionalPair> pairs;
  std::optional<WordList> professions;
  std::optional<WordList> biased;
  std::optional<WordList> extended_biased;
  bool from_cemb = false;
};

// Loads the lists and builds the embedding source a config refers to.
inline AuditInputs load_inputs(const ExperimentConfig& c) {
  AuditInputs in;
  const bool lc = c.lowercase;
  if (!c.definitional.empty()) in.pairs = load_definitional_pairs(c.resolve(c.definitional), lc);
  if (!c.professions.empty()) in.professions = load_word_list(c.resolve(c.professions), "professions", lc);
  if (!c.biased.empty()) in.biased = load_word_list(c.resolve(c.biased), "biased", lc);
  if (!c.extended_biased.empty()) {
    in.extended_biased = load_word_list(c.resolve(c.extended_biased), "extended_biased", lc);
  }

  std::shared_ptr<const Corpus> corpus;
  if (!c.corpus.empty()) corpus = std::make_shared<const Corpus>(load_corpus(c.resolve(c.corpus), lc));

  const std::string path = c.resolve(c.embeddings.path);
  if (c.embeddings.kind == EmbeddingSourceKind::cemb) {
    auto store = std::make_shared<const EmbeddingStore>(read_cemb(path));
    in.source = std::make_shared<StoreSource>(store, corpus);
    in.from_cemb = true;
    return in;
  }

  auto table = std::make_shared<const WordTable>(load_word2vec_text(path, lc));
  if (!corpus) {
    in.source = std::make_shared<StoreSource>(std::make_shared<const EmbeddingStore>(to_store(*table)));
    return in;
  }
  std::shared_ptr<const EmbeddingProvider> provider;
  if (c.embeddings.kind == EmbeddingSourceKind::toy) {
    provider = std::make_shared<ToyContextualProvider>(table, c.embeddings.alpha, c.embeddings.window);
  } else {
    provider = std::make_shared<StaticProvider>(table);
  }
  std::vector<WordList> lists{definitional_word_list(in.pairs)};
  for (const auto* l : {&in.professions, &in.biased, &in.extended_biased}) {
    if (*l) lists.push_back(**l);
  }
  in.source = std::make_shared<CorpusSource>(corpus, provider, table, lists);
  return in;
}

namespace detail {

// Runs body(i) for i in [0, n) on up to `threads` workers. Each index owns
// its output slot, so results do not depend on the thread count.
inline void parallel_for(std::size_t n, std::size_t threads,
                         const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const std::size_t workers = std::min(threads, n);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

using Pools = std::map<std::string, std::vector<Occurrence>>;

inline Pools build_pools(const EmbeddingSource& source, const std::vector<std::string>& words,
                         std::vector<std::string>& missing) {
  Pools pools;
  for (const auto& w : words) {
    auto occ = source.occurrences(w);
    if (occ.empty()) {
      missing.push_back(w);
    } else {
      pools.emplace(w, std::move(occ));
    }
  }
  return pools;
}

inline const Occurrence& pick_one(const std::vector<Occurrence>& pool, Rng& rng) {
  return pool[static_cast<std::size_t>(uniform_index(rng, pool.size()))];
}

// Per-repeat metric driver: fills values[r]; the first failing repeat (in
// repeat order) fails the metric.
inline void run_repeats(MetricReport& m, std::size_t repeats, std::size_t threads,
                        const std::function<double(std::size_t)>& one) {
  std::vector<double> values(repeats, 0.0);
  std::vector<std::string> errors(repeats);
  parallel_for(repeats, threads, [&](std::size_t r) {
    try {
      values[r] = one(r);
    } catch (const std::exception& e) {
      errors[r] = e.what();
      if (errors[r].empty()) errors[r] = "error";
    }
  });
  for (std::size_t r = 0; r < repeats; ++r) {
    if (!errors[r].empty()) {
      m.ok = false;
      m.error = "repeat " + std::to_string(r) + ": " + errors[r];
      m.values.clear();
      return;
    }
  }
  m.ok = true;
  m.values = std::move(values);
  m.summary = aggregate(m.values);
}

inline void run_single(MetricReport& m, const std::function<double()>& one) {
  try {
    m.values = {one()};
    m.ok = true;
    m.summary = aggregate(m.values);
  } catch (const Error& e) {
    m.ok = false;
    m.error = e.what();
    m.values.clear();
  }
}

struct Direction {
  std::optional<GenderSubspace> subspace;
  std::string error;
  std::size_t n_differences = 0;
  std::size_t skipped_swaps = 0;
  std::vector<std::string> words_used;
};

inline Direction compute_direction(const ExperimentConfig& c, const AuditInputs& in,
                                   const Pools& def_pools) {
  Direction out;
  Rng rng(stable_hash(c.seed, "subspace", 0));
  std::vector<Vector> diffs;
  std::vector<Vector> male_minus_female;
  for (const auto& pair : in.pairs) {
    for (const auto* word : {&pair.female, &pair.male}) {
      auto it = def_pools.find(*word);
      if (it == def_pools.end()) continue;
      const auto& pool = it->second;
      auto picks = sample_indices(pool.size(), c.params.subspace_cap, rng);
      std::sort(picks.begin(), picks.end());
      bool used = false;
      for (std::size_t i : picks) {
        const Occurrence& occ = pool[i];
        auto swapped = in.source->embed_swapped(occ, pair);
        if (!swapped) {
          ++out.skipped_swaps;
          continue;
        }
        Vector diff = subtract(in.source->embed(occ), *swapped);
        male_minus_female.push_back(*word == pair.male ? diff : scaled(diff, -1.0));
        diffs.push_back(std::move(diff));
        used = true;
      }
      if (used) out.words_used.push_back(*word);
    }
  }
  out.n_differences = diffs.size();
  try {
    if (diffs.size() < 2) {
      throw DataError("gender subspace needs at least 2 difference vectors, have " +
                      std::to_string(diffs.size()));
    }
    const std::size_t k =
        std::min({c.params.subspace_components, diffs.size(), in.source->dimension()});
    GenderSubspace s = gender_subspace(diffs, k);
    orient_male_positive(s, male_minus_female);
    out.subspace = std::move(s);
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace detail

// Runs every selected metric over the given inputs.
inline ExperimentReport run_audit(const ExperimentConfig& c, const AuditInputs& in) {
  using detail::Pools;
  const auto& p = c.params;
  const EmbeddingSource& source = *in.source;
  ExperimentReport report;
  report.config = config_echo(c);
  report.provenance = {{"report_version", kReportVersion},
                       {"seed", c.seed},
                       {"config_digest", config_digest(c)},
                       {"embedding_source", source.description()},
                       {"dimension", source.dimension()},
                       {"rng", "mt19937_64"},
                       {"child_seed", "fnv1a64(\"<seed>:<metric>:<repeat>\")"}};
  if (in.from_cemb) report.provenance["cemb_version"] = kCembVersion;

  const bool need_direction =
      c.wants("subspace") || c.wants("direct-bias") ||
      (c.wants("knn") && p.original_bias == "projection");
  const bool need_definitional = need_direction || c.wants("knn");

  Pools def_pools;
  if (need_definitional && !in.pairs.empty()) {
    auto& missing = report.missing_words["definitional"];
    def_pools = detail::build_pools(source, definitional_word_list(in.pairs).words(), missing);
  }

  std::optional<detail::Direction> direction;
  auto get_direction = [&]() -> const detail::Direction& {
    if (!direction) direction = detail::compute_direction(c, in, def_pools);
    return *direction;
  };
  auto require_g = [&]() -> const Vector& {
    const auto& d = get_direction();
    if (!d.subspace) throw DataError("gender direction unavailable: " + d.error);
    return d.subspace->g;
  };

  if (need_direction) {
    const auto& d = get_direction();
    report.gender_direction = {{"orientation", "male-minus-female difference projects positively"},
                               {"n_differences", d.n_differences},
                               {"skipped_swaps", d.skipped_swaps}};
    if (d.subspace) {
      report.gender_direction["g"] = d.subspace->g;
      report.gender_direction["flipped"] = d.subspace->flipped;
    } else {
      report.gender_direction["error"] = d.error;
    }
  }

  // Subspace spectrum (single shot: g is computed once per audit).
  if (c.wants("subspace")) {
    MetricReport m;
    m.name = "subspace";
    detail::run_single(m, [&] {
      const auto& d = get_direction();
      require_g();
      const auto& ratios = d.subspace->pca.explained_ratio;
      m.details["explained_ratio"] = ratios;
      m.details["n_differences"] = d.n_differences;
      m.details["components"] = ratios.size();
      report.plots.spectrum = ratios;

      Rng rng(stable_hash(c.seed, "subspace-baseline", 0));
      std::size_t n = p.baseline_samples > 0 ? p.baseline_samples : d.n_differences;
      n = std::min(n, source.population());
      try {
        if (n < 2) throw DataError("random baseline needs at least 2 samples");
        const std::size_t kb = std::min({p.subspace_components, n, source.dimension()});
        PcaResult base = random_baseline_spectrum(
            source.population(), [&](std::size_t i) { return source.population_vector(i); }, n,
            kb, rng);
        m.details["random_baseline_ratio"] = base.explained_ratio;
        m.details["random_baseline_samples"] = n;
        report.plots.baseline_spectrum = base.explained_ratio;
      } catch (const Error& e) {
        m.details["random_baseline_error"] = e.what();
      }
      return ratios.front();
    });
    report.metrics[m.name] = std::move(m);
  }

  Pools prof_pools;
  if ((c.wants("direct-bias") || c.wants("knn")) && in.professions) {
    prof_pools = detail::build_pools(source, in.professions->words(),
                                     report.missing_words["professions"]);
  }

  // Direct bias over every surviving profession occurrence (single shot).
  if (c.wants("direct-bias")) {
    MetricReport m;
    m.name = "direct-bias";
    detail::run_single(m, [&] {
      const Vector& g = require_g();
      std::set<std::string> gendered;
      for (const auto& pr : in.pairs) {
        gendered.insert(pr.female);
        gendered.insert(pr.male);
      }
      std::vector<Vector> vectors;
      std::size_t excluded = 0, words = 0;
      bool filter_available = true;
      for (const auto& [word, pool] : prof_pools) {
        bool any = false;
        for (const auto& occ : pool) {
          auto has = source.sentence_contains(occ, gendered);
          if (!has) filter_available = false;
          if (has && *has) {
            ++excluded;
            continue;
          }
          vectors.push_back(source.embed(occ));
          any = true;
        }
        words += any;
      }
      m.details["n_words"] = words;
      m.details["n_occurrences"] = vectors.size();
      m.details["n_excluded_cooccurrence"] = excluded;
      m.details["cooccurrence_filter"] = filter_available ? "applied" : "unavailable";
      m.details["strictness"] = 1;
      return direct_bias(vectors, g);
    });
    report.metrics[m.name] = std::move(m);
  }

  // Labelled words with at least one occurrence, in list order.
  auto labelled = [&](const WordList& list, const std::string& key, std::vector<std::string>& words,
                      std::vector<Gender>& labels, Pools& pools) {
    for (const auto& e : list.entries) {
      if (!e.gender) throw DataError(key + " list entry '" + e.word + "' has no gender label");
    }
    pools = detail::build_pools(source, list.words(), report.missing_words[key]);
    for (const auto& e : list.entries) {
      if (pools.count(e.word)) {
        words.push_back(e.word);
        labels.push_back(*e.gender);
      }
    }
  };

  if (c.wants("cluster")) {
    MetricReport m;
    m.name = "cluster";
    std::vector<std::string> words;
    std::vector<Gender> labels;
    Pools pools;
    try {
      if (!in.biased) throw DataError("no biased list");
      labelled(*in.biased, "biased", words, labels, pools);
      const KMeansOptions opt{2, p.kmeans_max_iter, p.kmeans_restarts};
      std::vector<ProjectionRow> rows;
      detail::run_repeats(m, c.repeats, c.threads, [&](std::size_t r) {
        Rng rng(stable_hash(c.seed, "cluster", r));
        std::vector<Vector> x;
        x.reserve(words.size());
        for (const auto& w : words) x.push_back(source.embed(detail::pick_one(pools.at(w), rng)));
        ClusteringOutcome out = cluster_biased_words(x, labels, rng, opt);
        if (r == 0) {
          for (std::size_t i = 0; i < words.size(); ++i) {
            rows.push_back({words[i], std::string(to_string(labels[i])), out.assignments[i],
                            out.projection_2d[i]});
          }
        }
        return out.accuracy;
      });
      report.plots.projection = std::move(rows);
    } catch (const Error& e) {
      m.ok = false;
      m.error = e.what();
    }
    m.details["n_words"] = words.size();
    m.details["k"] = 2;
    m.details["kmeans_restarts"] = p.kmeans_restarts;
    m.details["kmeans_max_iter"] = p.kmeans_max_iter;
    m.details["projection"] = "pca-2d";
    report.metrics[m.name] = std::move(m);
  }

  if (c.wants("classify")) {
    MetricReport m;
    m.name = "classify";
    std::vector<std::string> words;
    std::vector<Gender> labels;
    Pools pools;
    try {
      if (!in.extended_biased) throw DataError("no extended biased list");
      labelled(*in.extended_biased, "extended_biased", words, labels, pools);
      const std::size_t n = words.size();
      std::size_t train = p.train_size, test = p.test_size;
      std::string split = "configured";
      if (train + test > n) {
        split = "scaled";
        const double frac = static_cast<double>(p.train_size) /
                            static_cast<double>(p.train_size + p.test_size);
        train = static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)));
        train = std::min(std::max<std::size_t>(train, 2), n > 0 ? n - 1 : 0);
        test = n - train;
      }
      m.details["split"] = split;
      m.details["train_size"] = train;
      m.details["test_size"] = test;
      m.details["C"] = p.svm_C;
      m.details["tol"] = p.svm_tol;
      if (n < 3 || train < 2 || test < 1) {
        throw DataError("classification needs at least 3 labelled words, have " + std::to_string(n));
      }
      std::vector<double> gammas(c.repeats, 0.0);
      detail::run_repeats(m, c.repeats, c.threads, [&](std::size_t r) {
        Rng rng(stable_hash(c.seed, "classify", r));
        std::vector<Vector> x;
        x.reserve(n);
        for (const auto& w : words) x.push_back(source.embed(detail::pick_one(pools.at(w), rng)));
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        shuffle(order, rng);
        std::vector<Vector> xtr, xte;
        std::vector<int> ytr, yte;
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t w = order[i];
          const int y = labels[w] == Gender::male ? 1 : -1;
          if (i < train) {
            xtr.push_back(x[w]);
            ytr.push_back(y);
          } else if (i < train + test) {
            xte.push_back(x[w]);
            yte.push_back(y);
          }
        }
        SvmParams sp{p.svm_C, p.svm_gamma, p.svm_tol};
        SvmModel model = svm_rbf_train(xtr, ytr, sp);
        gammas[r] = model.gamma;
        return svm_accuracy(model, xte, yte);
      });
      if (m.ok) m.details["gamma"] = gammas;
    } catch (const Error& e) {
      m.ok = false;
      m.error = e.what();
    }
    m.details["n_words"] = words.size();
    report.metrics[m.name] = std::move(m);
  }

  if (c.wants("knn")) {
    MetricReport m;
    m.name = "knn";
    try {
      if (!in.professions) throw DataError("no professions list");
      std::vector<std::string> words;
      for (const auto& [w, pool] : prof_pools) words.push_back(w);  // sorted
      bool all_scored = !words.empty();
      for (const auto& w : words) all_scored = all_scored && in.professions->find(w)->score.has_value();
      std::string bias_source = p.original_bias;
      if (bias_source == "auto") bias_source = all_scored ? "list" : "projection";
      if (bias_source == "list" && !all_scored) {
        throw DataError("original_bias=list but some professions carry no score");
      }
      m.details["original_bias_source"] = bias_source;

      // Male-positive original bias per profession.
      std::map<std::string, double> bias;
      if (bias_source == "list") {
        for (const auto& w : words) bias[w] = *in.professions->find(w)->score;
      } else {
        const Vector& g = require_g();
        Rng rng(stable_hash(c.seed, "knn-bias", 0));
        for (const auto& w : words) {
          const auto& pool = prof_pools.at(w);
          std::vector<Vector> vs;
          for (std::size_t i : sample_indices(pool.size(), p.subspace_cap, rng)) {
            vs.push_back(source.embed(pool[i]));
          }
          bias[w] = word_bias(column_mean(vs), g);
        }
      }
      std::map<std::string, Gender> stereotype;
      std::map<std::string, double> female_lean;
      for (const auto& [w, b] : bias) {
        if (b < 0.0) stereotype[w] = Gender::female;
        if (b > 0.0) stereotype[w] = Gender::male;
        female_lean[w] = -b;
      }
      const std::size_t k = p.knn_k > 0 ? p.knn_k : default_knn_k(words.size());
      m.details["k"] = k;
      m.details["n_professions"] = words.size();
      m.details["correlation"] = "female neighbour fraction vs female-leaning original bias";
      std::vector<double> pvalues(c.repeats, 0.0);
      detail::run_repeats(m, c.repeats, c.threads, [&](std::size_t r) {
        Rng rng(stable_hash(c.seed, "knn", r));
        std::map<std::string, Vector> vectors;
        for (const auto& w : words) vectors[w] = source.embed(detail::pick_one(prof_pools.at(w), rng));
        KnnOutcome out = knn_stereotype_correlation(vectors, stereotype, female_lean, k);
        pvalues[r] = out.p_value;
        return out.r;
      });
      if (m.ok) m.details["p_values"] = pvalues;
    } catch (const Error& e) {
      m.ok = false;
      m.error = e.what();
    }
    report.metrics[m.name] = std::move(m);
  }

  for (auto& [list, words] : report.missing_words) std::sort(words.begin(), words.end());
  return report;
}

inline ExperimentReport run_audit(const ExperimentConfig& c) {
  validate(c);
  return run_audit(c, load_inputs(c));
}

}  // namespace ctxbias
