#pragma once

// Command-line front end. Kept in a header so the test suite can drive the
// subcommands in-process.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "ctxbias.hpp"

namespace ctxbias::cli {

enum ExitCode : int { kOk = 0, kMetricFailure = 1, kUsage = 2, kIo = 3 };

inline const char* kDefaultsFooter =
    "Defaults:\n"
    "  sampling cap        1000 occurrences per word (params.subspace_cap, extract --cap)\n"
    "  subspace components 10 (params.subspace_components)\n"
    "  random baseline     as many samples as difference vectors (params.baseline_samples)\n"
    "  knn k               100 if >= 101 professions, else floor((n-1)/2) (params.knn_k)\n"
    "  original bias       list score when every profession has one, else projection on g\n"
    "  svm C               1.0 (params.svm_C)\n"
    "  svm gamma           1 / (d * variance of training features) (params.svm_gamma)\n"
    "  svm tol             1e-3 (params.svm_tol)\n"
    "  svm split           1000 train / 4000 test, scaled 1:4 when fewer words exist\n"
    "  k-means             k=2, 10 restarts, 300 iterations, k-means++ seeding\n"
    "  toy provider        alpha=0.5, window=2\n"
    "  repeats             10\n"
    "Exit codes: 0 ok, 1 metric failure, 2 usage/config error, 3 I/O or format error.\n";

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

struct AuditFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repeats;
  std::optional<std::size_t> threads;
  std::string metrics;
  std::string out;
  std::string format = "json";
  std::string plot_dir;
};

inline int run_audit_command(const AuditFlags& f, const std::vector<std::string>& fixed_metrics,
                             std::ostream& out, std::ostream& err) {
  ExperimentConfig config = load_config(f.config);
  if (f.seed) config.seed = *f.seed;
  if (f.repeats) config.repeats = *f.repeats;
  if (f.threads) config.threads = *f.threads;
  if (!fixed_metrics.empty()) {
    config.metrics = fixed_metrics;
  } else if (!f.metrics.empty()) {
    config.metrics = parse_metric_list(f.metrics);
  }
  validate(config);
  err << "ctxbias: seed=" << config.seed << " config_digest=" << config_digest(config) << '\n';

  const ExperimentReport report = run_audit(config, load_inputs(config));
  const std::string text = f.format == "csv" ? report_csv(report) : report_json(report);
  if (f.out.empty()) {
    out << text;
  } else {
    write_text(f.out, text);
  }
  if (!f.plot_dir.empty()) {
    std::filesystem::create_directories(f.plot_dir);
    write_text((std::filesystem::path(f.plot_dir) / "spectrum.tsv").string(),
               spectrum_tsv(report.plots));
    write_text((std::filesystem::path(f.plot_dir) / "projection.tsv").string(),
               projection_tsv(report.plots));
  }
  for (const auto& [name, m] : report.metrics) {
    if (!m.ok) err << "ctxbias: metric " << name << " failed: " << m.error << '\n';
  }
  return report.any_failed() ? kMetricFailure : kOk;
}

struct ExtractFlags {
  std::string corpus;
  std::string definitional;
  std::vector<std::string> lists;  // other word lists (orig records only)
  std::string out;
  std::size_t cap = 1000;
  std::uint64_t seed = 0;
  bool no_lowercase = false;
};

// JSON-lines manifest: orig/swap record pairs for definitional words,
// orig records for every other listed word.
inline int run_extract_command(const ExtractFlags& f, std::ostream& out, std::ostream& err) {
  if (f.cap < 1) throw ConfigError("--cap must be >= 1");
  const bool lc = !f.no_lowercase;
  const Corpus corpus = load_corpus(f.corpus, lc);
  std::vector<DefinitionalPair> pairs;
  if (!f.definitional.empty()) pairs = load_definitional_pairs(f.definitional, lc);
  std::vector<WordList> others;
  for (const auto& path : f.lists) {
    others.push_back(load_word_list(path, std::filesystem::path(path).stem().string(), lc));
  }

  Rng rng(stable_hash(f.seed, "extract", 0));
  std::set<std::tuple<std::int64_t, std::int32_t, std::string>> emitted;
  std::string lines;
  std::size_t n_orig = 0, n_swap = 0;
  std::vector<std::string> missing;

  auto record = [&](const Occurrence& occ, const std::string& word, const Tokens& tokens,
                    const char* tag) {
    if (!emitted.insert({occ.sentence_id, occ.token_index, tag}).second) return false;
    nlohmann::json j = {{"sid", occ.sentence_id}, {"tid", occ.token_index}, {"word", word},
                        {"tokens", tokens}, {"tag", tag}};
    lines += j.dump();
    lines += '\n';
    return true;
  };

  if (!pairs.empty()) {
    const WordList def = definitional_word_list(pairs);
    const OccurrenceIndex index = index_occurrences(corpus, def);
    for (const auto& e : def.entries) {
      const auto* pair = find_pair(pairs, e.word);
      auto sample = sample_occurrences(index, e.word, f.cap, rng);
      if (sample.empty()) missing.push_back(e.word);
      for (const auto& occ : sample) {
        const Tokens& orig = corpus.sentences[static_cast<std::size_t>(occ.sentence_id)];
        if (!record(occ, occ.word, orig, "orig")) continue;
        ++n_orig;
        const Tokens swapped = swap_pair(corpus, occ, *pair);
        if (record(occ, swapped[static_cast<std::size_t>(occ.token_index)], swapped, "swap")) {
          ++n_swap;
        }
      }
    }
  }
  for (const auto& list : others) {
    const OccurrenceIndex index = index_occurrences(corpus, list);
    for (const auto& e : list.entries) {
      auto sample = sample_occurrences(index, e.word, f.cap, rng);
      if (sample.empty()) missing.push_back(e.word);
      for (const auto& occ : sample) {
        n_orig += record(occ, occ.word,
                         corpus.sentences[static_cast<std::size_t>(occ.sentence_id)], "orig");
      }
    }
  }

  if (f.out.empty()) {
    out << lines;
  } else {
    write_text(f.out, lines);
  }
  if (!missing.empty()) {
    err << "ctxbias: warning: " << missing.size() << " listed words do not occur in the corpus:";
    for (const auto& w : missing) err << ' ' << w;
    err << '\n';
  }
  err << "ctxbias: seed=" << f.seed << " orig=" << n_orig << " swap=" << n_swap << '\n';
  return kOk;
}

struct SynthFlags {
  std::string out_dir;
  PlantedParams params;
};

// Planted store plus the lists and an audit config that reads them.
inline int run_synth_command(const SynthFlags& f, std::ostream& /*out*/, std::ostream& err) {
  const PlantedData data = make_planted_store(f.params);
  const std::filesystem::path dir(f.out_dir);
  std::filesystem::create_directories(dir);
  write_cemb(data.store, (dir / "store.cemb").string());
  write_text((dir / "definitional.json").string(), pairs_to_json(data.pairs).dump(1) + "\n");
  write_text((dir / "professions.json").string(),
             scored_list_to_json(data.professions).dump(1) + "\n");
  write_text((dir / "biased.json").string(), labelled_list_to_json(data.biased).dump(1) + "\n");
  write_text((dir / "extended_biased.json").string(),
             labelled_list_to_json(data.biased).dump(1) + "\n");
  nlohmann::json config = {
      {"embeddings", {{"source", "cemb"}, {"path", "store.cemb"}}},
      {"lists",
       {{"definitional", "definitional.json"},
        {"professions", "professions.json"},
        {"biased", "biased.json"},
        {"extended_biased", "extended_biased.json"}}},
      {"metrics", all_metric_names()},
      {"repeats", 10},
      {"seed", f.params.seed}};
  write_text((dir / "config.json").string(), config.dump(2) + "\n");
  err << "ctxbias: seed=" << f.params.seed << " records=" << data.store.size()
      << " dim=" << data.store.dimension() << " -> " << dir.string() << '\n';
  return kOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ctxbias: gender-bias audit for (contextualized) word embeddings", "ctxbias"};
  app.footer(kDefaultsFooter);
  app.require_subcommand(1);

  ExtractFlags ex;
  auto* extract = app.add_subcommand("extract", "Write an embedding-request manifest (JSON lines)");
  extract->add_option("--corpus", ex.corpus, "Corpus file, one sentence per line")->required();
  extract->add_option("--definitional", ex.definitional, "Definitional pairs JSON");
  extract->add_option("--list", ex.lists, "Other word list JSON (repeatable)");
  extract->add_option("--out", ex.out, "Manifest path (default: stdout)");
  extract->add_option("--cap", ex.cap, "Occurrences sampled per word")->capture_default_str();
  extract->add_option("--seed", ex.seed, "Sampling seed")->capture_default_str();
  extract->add_flag("--no-lowercase", ex.no_lowercase, "Keep corpus and list casing");

  SynthFlags sy;
  auto* synth = app.add_subcommand("synth", "Write a planted synthetic store, lists and config");
  synth->add_option("--out-dir", sy.out_dir, "Output directory")->required();
  synth->add_option("--words", sy.params.n_words, "Biased words")->capture_default_str();
  synth->add_option("--dim", sy.params.d, "Dimension (>= 2)")->capture_default_str();
  synth->add_option("--bias", sy.params.bias_scale, "Planted bias scale")->capture_default_str();
  synth->add_option("--noise", sy.params.noise_scale, "Noise scale")->capture_default_str();
  synth->add_option("--seed", sy.params.seed, "Generator seed")->capture_default_str();
  synth->add_option("--pairs", sy.params.n_pairs, "Definitional pairs")->capture_default_str();
  synth->add_option("--professions", sy.params.n_professions, "Professions")->capture_default_str();
  synth->add_option("--instances", sy.params.instances, "Contextual variants per word")
      ->capture_default_str();

  AuditFlags af;
  std::map<CLI::App*, std::vector<std::string>> audit_commands;
  auto add_audit_options = [&](CLI::App* sub, bool with_metrics) {
    sub->add_option("--config", af.config, "Audit config JSON")->required();
    sub->add_option("--seed", af.seed, "Override the master seed");
    sub->add_option("--repeats", af.repeats, "Override the repeat count");
    sub->add_option("--threads", af.threads, "Worker threads (results do not depend on it)");
    if (with_metrics) {
      sub->add_option("--metrics", af.metrics,
                      "Comma-separated subset of subspace,direct-bias,cluster,classify,knn");
    }
    sub->add_option("--out", af.out, "Report path (default: stdout)");
    sub->add_option("--format", af.format, "Report format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    sub->add_option("--plot-dir", af.plot_dir, "Write spectrum.tsv and projection.tsv here");
  };
  auto* audit = app.add_subcommand("audit", "Run the selected metrics");
  add_audit_options(audit, true);
  audit_commands[audit] = {};
  for (const auto& [name, desc] : std::vector<std::pair<std::string, std::string>>{
           {"subspace", "Gender-subspace spectrum and random baseline"},
           {"direct-bias", "Direct bias of professions against g"},
           {"cluster", "2-means clustering accuracy of biased words"},
           {"classify", "RBF-SVM generalization accuracy on biased words"},
           {"knn", "KNN stereotype fraction vs original bias correlation"}}) {
    auto* sub = app.add_subcommand(name, desc);
    add_audit_options(sub, false);
    audit_commands[sub] = {name};
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "ctxbias: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (extract->parsed()) return run_extract_command(ex, out, err);
    if (synth->parsed()) return run_synth_command(sy, out, err);
    for (const auto& [sub, metrics] : audit_commands) {
      if (sub->parsed()) return run_audit_command(af, metrics, out, err);
    }
  } catch (const ConfigError& e) {
    err << "ctxbias: config error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "ctxbias: I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const FormatError& e) {
    err << "ctxbias: format error: " << e.what() << '\n';
    return kIo;
  } catch (const Error& e) {
    err << "ctxbias: error: " << e.what() << '\n';
    return kMetricFailure;
  }
  return kUsage;
}

}  // namespace ctxbias::cli
