#include <gtest/gtest.h>

#include <sys/wait.h>

#include <map>
#include <sstream>

#include "cli.hpp"
#include "test_util.hpp"

using namespace ctxbias;
using ctxbias::testing::read_file;
using ctxbias::testing::TempDir;
using ctxbias::testing::write_file;

namespace {

const std::string kMini = CTXBIAS_MINI_DATA;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

// In-process invocation.
Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "ctxbias");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// The installed binary, through the shell.
Result run_binary(const std::string& args, const TempDir& dir) {
  const std::string cmd = std::string(CTXBIAS_CLI_PATH) + " " + args + " > " + dir.file("stdout") +
                          " 2> " + dir.file("stderr");
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(dir.file("stdout"));
  r.err = read_file(dir.file("stderr"));
  return r;
}

std::vector<nlohmann::json> parse_lines(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"audit"}).code, 2);
  EXPECT_EQ(run({"audit", "--config", kMini + "/config.json", "--format", "xml"}).code, 2);
  const auto help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("Exit codes"), std::string::npos);
}

TEST(Cli, ExtractPairsSwapWithOrig) {
  TempDir dir;
  write_file(dir.file("pairs.json"), R"([["she", "he"], ["woman", "man"]])");
  const auto r = run({"extract", "--corpus", kMini + "/corpus.txt", "--definitional",
                      dir.file("pairs.json"), "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto recs = parse_lines(r.out);
  std::map<std::pair<long, int>, nlohmann::json> orig, swap;
  for (const auto& j : recs) {
    ASSERT_TRUE(j.contains("sid") && j.contains("tid") && j.contains("word") && j.contains("tokens"));
    auto& dst = j["tag"] == "orig" ? orig : swap;
    dst[{j["sid"].get<long>(), j["tid"].get<int>()}] = j;
  }
  ASSERT_FALSE(orig.empty());
  EXPECT_EQ(orig.size(), swap.size());
  const std::map<std::string, std::string> partner = {
      {"she", "he"}, {"he", "she"}, {"woman", "man"}, {"man", "woman"}};
  for (const auto& [key, o] : orig) {
    ASSERT_TRUE(swap.count(key));
    const auto& s = swap.at(key);
    const auto tid = static_cast<std::size_t>(key.second);
    EXPECT_EQ(s["word"], partner.at(o["word"].get<std::string>()));
    EXPECT_EQ(o["tokens"][tid], o["word"]);
    EXPECT_EQ(s["tokens"][tid], s["word"]);
    for (std::size_t i = 0; i < o["tokens"].size(); ++i) {
      if (i != tid) {
        EXPECT_EQ(o["tokens"][i], s["tokens"][i]);
      }
    }
  }
  EXPECT_NE(r.err.find("seed=3"), std::string::npos);
}

TEST(Cli, ExtractCapIsExact) {
  TempDir dir;
  const Corpus corpus = load_corpus(kMini + "/corpus.txt");
  std::map<std::string, std::size_t> counts;
  for (const auto& s : corpus.sentences)
    for (const auto& t : s) ++counts[t];
  ASSERT_GE(counts["nurse"], 10u);
  write_file(dir.file("words.json"), R"(["nurse", "the"])");
  const auto r = run({"extract", "--corpus", kMini + "/corpus.txt", "--list", dir.file("words.json"),
                      "--cap", "10", "--out", dir.file("m.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::map<std::string, int> per_word;
  for (const auto& j : parse_lines(read_file(dir.file("m.jsonl")))) {
    EXPECT_EQ(j["tag"], "orig");
    ++per_word[j["word"].get<std::string>()];
  }
  EXPECT_EQ(per_word["nurse"], 10);
  EXPECT_EQ(per_word["the"], 10);
}

TEST(Cli, ExtractMissingWordsGiveEmptyManifest) {
  TempDir dir;
  write_file(dir.file("words.json"), R"(["zzz", "qqq"])");
  const auto r = run({"extract", "--corpus", kMini + "/corpus.txt", "--list", dir.file("words.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST(Cli, ExtractMissingCorpusIsIo) {
  const auto r = run({"extract", "--corpus", "/nonexistent/corpus.txt"});
  EXPECT_EQ(r.code, 3);
}

TEST(Cli, AuditTwiceIdenticalBytes) {
  TempDir dir;
  const auto a = run_binary("audit --config " + kMini + "/config.json --seed 42", dir);
  const auto b = run_binary("audit --config " + kMini + "/config.json --seed 42 --threads 3", dir);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_FALSE(a.out.empty());
  EXPECT_NE(a.err.find("seed=42"), std::string::npos);
  EXPECT_NE(a.err.find("config_digest="), std::string::npos);
}

TEST(Cli, MetricsOverrideSelectsSections) {
  const auto r = run({"audit", "--config", kMini + "/config.json", "--metrics", "direct-bias,cluster",
                      "--repeats", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  std::vector<std::string> keys;
  for (auto it = j["metrics"].begin(); it != j["metrics"].end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"cluster", "direct-bias"}));
  EXPECT_EQ(j["metrics"]["cluster"]["repeats"], 2);
}

TEST(Cli, SingleMetricSubcommand) {
  const auto r = run({"knn", "--config", kMini + "/config.json", "--repeats", "3", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("metric,status,repeats,min,max,mean\nknn,ok,3,", 0), 0u) << r.out;
}

TEST(Cli, MissingCembIsIoWithPath) {
  TempDir dir;
  write_file(dir.file("c.json"), R"({"embeddings": {"source": "cemb", "path": "missing.cemb"},
    "lists": {"biased": ")" + kMini + R"(/biased.json"}, "metrics": ["cluster"]})");
  const auto r = run({"audit", "--config", dir.file("c.json")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("missing.cemb"), std::string::npos) << r.err;
}

TEST(Cli, BadConfigIsUsageError) {
  TempDir dir;
  write_file(dir.file("c.json"), R"({"embeddings": {"path": "x"}, "nonsense": true})");
  EXPECT_EQ(run({"audit", "--config", dir.file("c.json")}).code, 2);
  write_file(dir.file("bad.json"), "{not json");
  EXPECT_EQ(run({"audit", "--config", dir.file("bad.json")}).code, 2);
  EXPECT_EQ(run({"audit", "--config", kMini + "/config.json", "--metrics", "bogus"}).code, 2);
  EXPECT_EQ(run({"audit", "--config", dir.file("absent.json")}).code, 3);
}

TEST(Cli, MetricFailureExitsOne) {
  TempDir dir;
  write_file(dir.file("biased.json"), R"({"female": ["bridal"], "male": ["hero"]})");
  auto cfg = nlohmann::json::parse(read_file(kMini + "/config.json"));
  cfg["corpus"] = kMini + "/corpus.txt";
  cfg["embeddings"]["path"] = kMini + "/vectors.txt";
  cfg["lists"]["definitional"] = kMini + "/definitional.json";
  cfg["lists"]["professions"] = kMini + "/professions.json";
  cfg["lists"]["extended_biased"] = kMini + "/extended_biased.json";
  cfg["lists"]["biased"] = dir.file("biased.json");
  write_file(dir.file("c.json"), cfg.dump());
  const auto r = run({"audit", "--config", dir.file("c.json"), "--metrics", "cluster,direct-bias"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("metric cluster failed"), std::string::npos);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["metrics"]["cluster"]["status"], "failed");
  EXPECT_EQ(j["metrics"]["direct-bias"]["status"], "ok");
}

TEST(Cli, SynthRoundTripAndAudit) {
  TempDir dir;
  const auto s = run_binary("synth --out-dir " + dir.file("pl") + " --words 60 --seed 9", dir);
  ASSERT_EQ(s.code, 0) << s.err;
  const auto store = read_cemb(dir.file("pl/store.cemb"));
  EXPECT_EQ(store.dimension(), 16u);
  EXPECT_EQ(store.size(), 10u * 2 * 5 * 2 + 40 * 5 + 60 * 5);
  const auto r = run({"audit", "--config", dir.file("pl/config.json"), "--out", dir.file("r.json"),
                      "--plot-dir", dir.file("plots")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(read_file(dir.file("r.json")));
  EXPECT_EQ(j["provenance"]["cemb_version"], 1);
  EXPECT_EQ(j["metrics"]["cluster"]["mean"], 1.0);
  const std::string spectrum = read_file(dir.file("plots/spectrum.tsv"));
  EXPECT_EQ(spectrum.rfind("component\tdefinitional_ratio\trandom_ratio\n1\t", 0), 0u);
  const std::string proj = read_file(dir.file("plots/projection.tsv"));
  EXPECT_EQ(std::count(proj.begin(), proj.end(), '\n'), 61);
}

TEST(Cli, CorruptCembIsIo) {
  TempDir dir;
  ASSERT_EQ(run({"synth", "--out-dir", dir.path().string(), "--words", "20"}).code, 0);
  std::string bytes = read_file(dir.file("store.cemb"));
  write_file(dir.file("store.cemb"), bytes.substr(0, bytes.size() - 3));
  const auto r = run({"audit", "--config", dir.file("config.json")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("truncated file in record"), std::string::npos) << r.err;
}
