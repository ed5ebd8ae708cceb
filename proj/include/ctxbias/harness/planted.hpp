#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxbias/corpus.hpp"
#include "ctxbias/embformat.hpp"
#include "ctxbias/error.hpp"
#include "ctxbias/random.hpp"

namespace ctxbias {

// Synthetic ground truth: every vector is bias * e1 plus Gaussian noise on
// the remaining d - 1 axes, so the planted gender direction is e1. Male
// words carry +bias_scale, female words -bias_scale.
struct PlantedParams {
  std::size_t n_words = 500;        // biased words (half female, half male)
  std::size_t d = 16;
  double bias_scale = 1.0;
  double noise_scale = 0.1;
  std::uint64_t seed = 0;
  std::size_t n_pairs = 10;         // definitional pairs
  std::size_t n_professions = 40;
  std::size_t instances = 5;        // contextual variants per word
};

struct PlantedData {
  EmbeddingStore store;
  std::vector<DefinitionalPair> pairs;
  WordList professions;  // score = planted bias
  WordList biased;       // gender label + planted bias
};

namespace detail {

inline std::string numbered(const char* stem, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu", stem, i);
  return buf;
}

}  // namespace detail

inline PlantedData make_planted_store(const PlantedParams& p) {
  if (p.d < 2) throw ConfigError("planted store: d must be >= 2");
  if (p.instances < 1) throw ConfigError("planted store: instances must be >= 1");
  Rng rng(p.seed);
  std::vector<ContextualVector> records;
  std::int64_t next_sid = 0;

  auto draw = [&](double bias) {
    Vector v(p.d, 0.0);
    v[0] = bias;
    for (std::size_t j = 1; j < p.d; ++j) v[j] = p.noise_scale * standard_normal(rng);
    return v;
  };
  auto signed_bias = [&](Gender g) { return g == Gender::male ? p.bias_scale : -p.bias_scale; };

  PlantedData out;
  for (std::size_t i = 0; i < p.n_pairs; ++i) {
    DefinitionalPair pair{detail::numbered("fdef", i), detail::numbered("mdef", i)};
    for (Gender g : {Gender::female, Gender::male}) {
      const std::string& word = g == Gender::female ? pair.female : pair.male;
      const std::string& partner = g == Gender::female ? pair.male : pair.female;
      for (std::size_t k = 0; k < p.instances; ++k) {
        const std::int64_t sid = next_sid++;
        records.push_back({word, sid, 0, "orig", draw(signed_bias(g))});
        records.push_back({partner, sid, 0, "swap", draw(-signed_bias(g))});
      }
    }
    out.pairs.push_back(std::move(pair));
  }

  out.professions.name = "professions";
  for (std::size_t i = 0; i < p.n_professions; ++i) {
    const Gender g = i % 2 == 0 ? Gender::female : Gender::male;
    const std::string word = detail::numbered("prof", i);
    for (std::size_t k = 0; k < p.instances; ++k) {
      records.push_back({word, next_sid++, 0, "orig", draw(signed_bias(g))});
    }
    out.professions.entries.push_back({word, g, signed_bias(g)});
  }

  out.biased.name = "biased";
  for (std::size_t i = 0; i < p.n_words; ++i) {
    const Gender g = i % 2 == 0 ? Gender::female : Gender::male;
    const std::string word = detail::numbered(g == Gender::female ? "fword" : "mword", i);
    for (std::size_t k = 0; k < p.instances; ++k) {
      records.push_back({word, next_sid++, 0, "orig", draw(signed_bias(g))});
    }
    out.biased.entries.push_back({word, g, signed_bias(g)});
  }

  out.store = EmbeddingStore(static_cast<std::uint32_t>(p.d), std::move(records));
  return out;
}

// JSON shapes read back by the word-list loaders.
inline nlohmann::json pairs_to_json(const std::vector<DefinitionalPair>& pairs) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : pairs) j.push_back({p.female, p.male});
  return j;
}

inline nlohmann::json scored_list_to_json(const WordList& list) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : list.entries) j.push_back({e.word, e.score.value_or(0.0)});
  return j;
}

inline nlohmann::json labelled_list_to_json(const WordList& list) {
  nlohmann::json j = {{"female", nlohmann::json::array()}, {"male", nlohmann::json::array()}};
  for (const auto& e : list.entries) {
    if (e.gender) j[std::string(to_string(*e.gender))].push_back(e.word);
  }
  return j;
}

}  // namespace ctxbias
