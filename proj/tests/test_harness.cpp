#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "cli.hpp"
#include "ctxbias.hpp"
#include "test_util.hpp"

using namespace ctxbias;
using ctxbias::testing::TempDir;
using ctxbias::testing::write_file;

namespace {

const std::string kMini = CTXBIAS_MINI_DATA;

ExperimentConfig mini_config() { return load_config(kMini + "/config.json"); }

// Planted store, lists and config written to `dir` by the synth command.
ExperimentConfig planted_config(const TempDir& dir, const PlantedParams& p) {
  std::ostringstream out, err;
  cli::SynthFlags f{dir.path().string(), p};
  EXPECT_EQ(cli::run_synth_command(f, out, err), 0);
  return load_config(dir.file("config.json"));
}

}  // namespace

TEST(StableHash, Fnv1aReferenceVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(stable_hash(42, "knn", 3), fnv1a64("42:knn:3"));
}

TEST(StableHash, DistinctAcrossMetricsAndRepeats) {
  std::set<std::uint64_t> seen;
  std::size_t n = 0;
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL}) {
    for (const auto& m : all_metric_names()) {
      for (std::size_t r = 0; r < 1000; ++r) {
        seen.insert(stable_hash(seed, m, r));
        ++n;
      }
    }
  }
  EXPECT_EQ(seen.size(), n);
}

TEST(Random, UniformIndexInRangeAndCoversAll) {
  Rng rng(1);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = uniform_index(rng, 7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_NEAR(h, 1000, 150);
}

TEST(Random, SampleIndicesDistinct) {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const auto s = sample_indices(20, 8, rng);
    EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 8u);
    for (auto i : s) EXPECT_LT(i, 20u);
  }
  EXPECT_EQ(sample_indices(3, 10, rng).size(), 3u);
}

TEST(Random, StandardNormalMoments) {
  Rng rng(3);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(rng);
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Aggregate, Invariants) {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v;
    const auto n = 1 + uniform_index(rng, 20);
    for (std::uint64_t i = 0; i < n; ++i) v.push_back(0.3 + 1e-9 * standard_normal(rng));
    const auto a = aggregate(v);
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    EXPECT_NEAR(a.mean, mean, 1e-12);
    EXPECT_LE(a.min, a.mean);
    EXPECT_LE(a.mean, a.max);
    for (double x : v) {
      EXPECT_LE(a.min, x);
      EXPECT_GE(a.max, x);
    }
  }
  const auto one = aggregate({0.25});
  EXPECT_EQ(one.min, 0.25);
  EXPECT_EQ(one.max, 0.25);
  EXPECT_EQ(one.mean, 0.25);
}

TEST(CanonicalJson, SortedKeysAndFixedPrecision) {
  nlohmann::json a = {{"b", 0.1}, {"a", {1, 2.5, "x"}}, {"c", nlohmann::json::object()}};
  EXPECT_EQ(canonical_json(a, -1), R"({"a":[1,2.5,"x"],"b":0.10000000000000001,"c":{}})");
  nlohmann::json b;
  b["c"] = nlohmann::json::object();
  b["a"] = {1, 2.5, "x"};
  b["b"] = 0.1;
  EXPECT_EQ(canonical_json(a), canonical_json(b));
  EXPECT_EQ(format_double(std::nan("")), "null");
  EXPECT_EQ(format_double(1.0), "1");
}

TEST(Config, ParsesMiniConfig) {
  const auto c = mini_config();
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.repeats, 10u);
  EXPECT_EQ(c.embeddings.kind, EmbeddingSourceKind::toy);
  EXPECT_EQ(c.metrics.size(), 5u);
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"embeddings":{"path":"x"},"bogus":1})")),
               ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"embeddings":{"source":"elmo","path":"x"}})")),
               ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"embeddings":{"path":"x"},"repeats":-1})")),
               ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"lists":{}})")), ConfigError);
  auto c = mini_config();
  c.repeats = 0;
  EXPECT_THROW(validate(c), ConfigError);
  c = mini_config();
  c.metrics = {"cluster", "bogus"};
  EXPECT_THROW(validate(c), ConfigError);
  c = mini_config();
  c.biased.clear();
  EXPECT_THROW(validate(c), ConfigError);
  c = mini_config();
  c.params.svm_C = 0;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Config, MissingFileIsIoError) {
  auto c = mini_config();
  c.embeddings.kind = EmbeddingSourceKind::cemb;
  c.embeddings.path = "does-not-exist.cemb";
  try {
    validate(c);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("does-not-exist.cemb"), std::string::npos);
  }
}

TEST(Config, DigestIgnoresThreadsOnly) {
  auto a = mini_config();
  auto b = a;
  b.threads = 8;
  EXPECT_EQ(config_digest(a), config_digest(b));
  b.seed = 43;
  EXPECT_NE(config_digest(a), config_digest(b));
}

TEST(Audit, SingleRepeatDirectBias) {
  auto c = mini_config();
  c.repeats = 1;
  c.metrics = {"direct-bias"};
  const auto r = run_audit(c);
  ASSERT_EQ(r.metrics.size(), 1u);
  const auto& m = r.metrics.at("direct-bias");
  ASSERT_TRUE(m.ok) << m.error;
  ASSERT_EQ(m.values.size(), 1u);
  EXPECT_EQ(m.summary.min, m.summary.max);
  EXPECT_EQ(m.summary.mean, m.values[0]);
  EXPECT_EQ(m.details["cooccurrence_filter"], "applied");
  EXPECT_GT(m.details["n_excluded_cooccurrence"].get<int>(), 0);
}

TEST(Audit, MiniCorpusAllMetrics) {
  const auto r = run_audit(mini_config());
  EXPECT_FALSE(r.any_failed());
  for (const auto& [name, m] : r.metrics) {
    EXPECT_TRUE(m.ok) << name << ": " << m.error;
    const std::size_t expected = (name == "subspace" || name == "direct-bias") ? 1 : 10;
    EXPECT_EQ(m.values.size(), expected) << name;
    EXPECT_LE(m.summary.min, m.summary.mean);
    EXPECT_LE(m.summary.mean, m.summary.max);
  }
  // g points from female to male.
  const Vector g = r.gender_direction["g"].get<Vector>();
  EXPECT_NEAR(norm(g), 1.0, 1e-10);
  EXPECT_GT(g[0], 0.5);
}

TEST(Audit, DeterministicAcrossRunsAndThreads) {
  auto c = mini_config();
  const std::string a = report_json(run_audit(c));
  const std::string b = report_json(run_audit(c));
  c.threads = 4;
  const std::string t4 = report_json(run_audit(c));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, t4);
  c.seed = 7;
  EXPECT_NE(a, report_json(run_audit(c)));
}

TEST(Audit, MissingWordsListedAndSkipped) {
  TempDir dir;
  auto c = mini_config();
  write_file(dir.file("biased.json"),
             R"({"female": ["bridal", "lipstick", "zzfemale"], "male": ["hero", "cigar", "zzmale"]})");
  c.biased = dir.file("biased.json");
  c.metrics = {"cluster"};
  const auto r = run_audit(c);
  EXPECT_EQ(r.missing_words.at("biased"), (std::vector<std::string>{"zzfemale", "zzmale"}));
  EXPECT_EQ(r.metrics.at("cluster").details["n_words"], 4);
}

TEST(Audit, InsufficientDataFailsMetricOnly) {
  TempDir dir;
  auto c = mini_config();
  write_file(dir.file("biased.json"), R"({"female": ["bridal"], "male": ["hero"]})");
  c.biased = dir.file("biased.json");
  c.metrics = {"cluster", "direct-bias"};
  const auto r = run_audit(c);
  EXPECT_FALSE(r.metrics.at("cluster").ok);
  EXPECT_FALSE(r.metrics.at("cluster").error.empty());
  EXPECT_TRUE(r.metrics.at("direct-bias").ok);
  EXPECT_TRUE(r.any_failed());
}

TEST(Audit, CsvSummary) {
  auto c = mini_config();
  c.metrics = {"cluster", "knn"};
  c.repeats = 2;
  const std::string csv = report_csv(run_audit(c));
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "metric,status,repeats,min,max,mean");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("cluster,ok,2,", 0), 0u) << line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("knn,ok,2,", 0), 0u) << line;
}

TEST(Planted, NoiselessRecoversAxis) {
  TempDir dir;
  PlantedParams p;
  p.noise_scale = 0.0;
  p.n_words = 40;
  auto c = planted_config(dir, p);
  c.metrics = {"subspace"};
  const auto r = run_audit(c);
  const auto& m = r.metrics.at("subspace");
  ASSERT_TRUE(m.ok) << m.error;
  EXPECT_NEAR(m.values[0], 1.0, 1e-12);
  const Vector g = r.gender_direction["g"].get<Vector>();
  EXPECT_NEAR(g[0], 1.0, 1e-12);
}

TEST(Planted, SeparablePipeline) {
  TempDir dir;
  PlantedParams p;
  p.seed = 3;
  auto c = planted_config(dir, p);
  const auto r = run_audit(c);
  ASSERT_FALSE(r.any_failed());
  EXPECT_EQ(r.metrics.at("cluster").summary.min, 1.0);
  EXPECT_EQ(r.metrics.at("classify").summary.min, 1.0);
  EXPECT_GE(r.metrics.at("knn").summary.min, 0.99);
  EXPECT_EQ(r.metrics.at("classify").details["train_size"], 100);
  EXPECT_EQ(r.metrics.at("classify").details["test_size"], 400);
}

TEST(Planted, PureNoiseClusteringNearChance) {
  TempDir dir;
  PlantedParams p;
  p.bias_scale = 0.0;
  p.seed = 5;
  auto c = planted_config(dir, p);
  c.metrics = {"cluster"};
  const auto r = run_audit(c);
  const auto& m = r.metrics.at("cluster");
  ASSERT_TRUE(m.ok) << m.error;
  EXPECT_GE(m.summary.mean, 0.5);
  EXPECT_LE(m.summary.mean, 0.65);
}

TEST(Planted, StoreShape) {
  PlantedParams p;
  p.n_words = 6;
  p.n_pairs = 2;
  p.n_professions = 4;
  p.instances = 3;
  const auto d = make_planted_store(p);
  // pairs: 2 words x 3 instances x (orig + swap); professions and words: 3 each
  EXPECT_EQ(d.store.size(), 2u * 2 * 3 * 2 + 4 * 3 + 6 * 3);
  EXPECT_EQ(d.pairs.size(), 2u);
  for (const auto& rec : d.store.records()) {
    const bool male = rec.word[0] == 'm' || (rec.word.rfind("prof", 0) == 0 && (rec.word.back() - '0') % 2 == 1);
    if (rec.tag == "orig") {
      EXPECT_EQ(rec.values[0], male ? 1.0 : -1.0) << rec.word;
    }
  }
  EXPECT_THROW(make_planted_store({.d = 1}), ConfigError);
}

TEST(Sources, StoreSourceSwapLookup) {
  auto store = std::make_shared<const EmbeddingStore>(
      2, std::vector<ContextualVector>{{"she", 0, 1, "orig", {1, 0}},
                                       {"he", 0, 1, "swap", {0, 1}},
                                       {"he", 1, 0, "orig", {2, 2}},
                                       {"man", -1, -1, "static", {3, 3}},
                                       {"woman", -1, -1, "static", {4, 4}}});
  const StoreSource s(store);
  EXPECT_EQ(s.population(), 4u);
  ASSERT_EQ(s.occurrences("she").size(), 1u);
  const DefinitionalPair sh{"she", "he"};
  EXPECT_EQ(*s.embed_swapped(s.occurrences("she")[0], sh), (Vector{0, 1}));
  EXPECT_FALSE(s.embed_swapped(s.occurrences("he")[0], sh).has_value());
  EXPECT_EQ(*s.embed_swapped(s.occurrences("man")[0], {"woman", "man"}), (Vector{4, 4}));
  EXPECT_FALSE(s.sentence_contains(s.occurrences("she")[0], {"she"}).has_value());
}

TEST(Sources, CorpusSourceMatchesProvider) {
  auto table = std::make_shared<WordTable>();
  table->dimension = 1;
  table->vectors = {{"she", {1}}, {"he", {-1}}, {"nurse", {5}}, {"the", {0.5}}};
  auto corpus = std::make_shared<Corpus>();
  corpus->sentences = {{"she", "is", "the", "nurse"}, {"he", "slept"}};
  auto provider = std::make_shared<ToyContextualProvider>(table);
  WordList list{"l", {{"she", {}, {}}, {"he", {}, {}}, {"nurse", {}, {}}, {"is", {}, {}}}};
  const CorpusSource s(corpus, provider, table, {list});
  EXPECT_TRUE(s.occurrences("is").empty());  // not in the table
  EXPECT_EQ(s.population(), 4u);
  const auto occ = s.occurrences("she").at(0);
  EXPECT_EQ(s.embed(occ), provider->embed(corpus->sentences[0], 0));
  const std::vector<std::string> swapped = {"he", "is", "the", "nurse"};
  EXPECT_EQ(*s.embed_swapped(occ, {"she", "he"}), provider->embed(swapped, 0));
  EXPECT_EQ(s.sentence_contains(s.occurrences("nurse").at(0), {"she"}), std::optional<bool>(true));
  EXPECT_EQ(s.population_vector(3), provider->embed(corpus->sentences[1], 0));
}
