#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "ctxbias/corpus.hpp"
#include "ctxbias/embformat.hpp"
#include "ctxbias/error.hpp"
#include "ctxbias/linalg.hpp"

namespace ctxbias {

// Where the harness gets occurrences and their vectors from. Implementations
// are immutable after construction and safe to query concurrently.
class EmbeddingSource {
 public:
  virtual ~EmbeddingSource() = default;

  virtual std::size_t dimension() const = 0;
  // Original (non-swapped) occurrences of `word`, in corpus order.
  virtual std::vector<Occurrence> occurrences(const std::string& word) const = 0;
  virtual Vector embed(const Occurrence& occ) const = 0;
  // Vector of the opposite-gender word in the gender-swapped sentence.
  virtual std::optional<Vector> embed_swapped(const Occurrence& occ,
                                              const DefinitionalPair& pair) const = 0;
  // Whether the occurrence's sentence contains any of `words`; nullopt when
  // sentence text is unavailable.
  virtual std::optional<bool> sentence_contains(const Occurrence& occ,
                                                const std::set<std::string>& words) const = 0;
  // Pool of word representations for the random baseline.
  virtual std::size_t population() const = 0;
  virtual Vector population_vector(std::size_t i) const = 0;
  virtual std::string description() const = 0;
};

// Corpus sentences run through a provider (static table or toy contextual).
class CorpusSource final : public EmbeddingSource {
 public:
  // Indexes occurrences of the words in `lists` whose vectors the table has.
  CorpusSource(std::shared_ptr<const Corpus> corpus, std::shared_ptr<const EmbeddingProvider> provider,
               std::shared_ptr<const WordTable> table, const std::vector<WordList>& lists)
      : corpus_(std::move(corpus)), provider_(std::move(provider)), table_(std::move(table)) {
    WordList wanted{"wanted", {}};
    std::set<std::string> seen;
    for (const auto& l : lists) {
      for (const auto& e : l.entries) {
        if (table_->find(e.word) != nullptr && seen.insert(e.word).second) {
          wanted.entries.push_back({e.word, {}, {}});
        }
      }
    }
    index_ = index_occurrences(*corpus_, wanted);
    known_prefix_.reserve(corpus_->size() + 1);
    known_prefix_.push_back(0);
    for (const auto& s : corpus_->sentences) {
      std::size_t known = 0;
      for (const auto& t : s) known += table_->find(t) != nullptr;
      known_prefix_.push_back(known_prefix_.back() + known);
    }
  }

  std::size_t dimension() const override { return provider_->dimension(); }

  std::vector<Occurrence> occurrences(const std::string& word) const override {
    const auto* occ = index_.find(word);
    return occ == nullptr ? std::vector<Occurrence>{} : *occ;
  }

  Vector embed(const Occurrence& occ) const override {
    return provider_->embed(sentence(occ), static_cast<std::size_t>(occ.token_index));
  }

  std::optional<Vector> embed_swapped(const Occurrence& occ,
                                      const DefinitionalPair& pair) const override {
    const Tokens swapped = swap_pair(*corpus_, occ, pair);
    if (table_->find(swapped[static_cast<std::size_t>(occ.token_index)]) == nullptr) {
      return std::nullopt;
    }
    return provider_->embed(swapped, static_cast<std::size_t>(occ.token_index));
  }

  std::optional<bool> sentence_contains(const Occurrence& occ,
                                        const std::set<std::string>& words) const override {
    return sentence_contains_any(sentence(occ), words);
  }

  std::size_t population() const override { return known_prefix_.back(); }

  Vector population_vector(std::size_t i) const override {
    // Sentence holding the i-th known token, then the token within it.
    auto it = std::upper_bound(known_prefix_.begin(), known_prefix_.end(), i);
    const auto sid = static_cast<std::size_t>(it - known_prefix_.begin() - 1);
    std::size_t remaining = i - known_prefix_[sid];
    const auto& s = corpus_->sentences[sid];
    for (std::size_t tid = 0; tid < s.size(); ++tid) {
      if (table_->find(s[tid]) == nullptr) continue;
      if (remaining == 0) return provider_->embed(s, tid);
      --remaining;
    }
    throw DataError("population index out of range");
  }

  std::string description() const override { return provider_->description() + " over corpus"; }

 private:
  const Tokens& sentence(const Occurrence& occ) const {
    return corpus_->sentences.at(static_cast<std::size_t>(occ.sentence_id));
  }

  std::shared_ptr<const Corpus> corpus_;
  std::shared_ptr<const EmbeddingProvider> provider_;
  std::shared_ptr<const WordTable> table_;
  OccurrenceIndex index_;
  std::vector<std::size_t> known_prefix_;
};

// Records of a CEMB1 store. Records tagged "swap" are the gender-swapped
// counterparts of "orig" records at the same (sentence_id, token_index);
// every other record is an original occurrence. Context-free records
// (sentence_id < 0) swap to the partner word's own record.
class StoreSource final : public EmbeddingSource {
 public:
  explicit StoreSource(std::shared_ptr<const EmbeddingStore> store,
                       std::shared_ptr<const Corpus> corpus = nullptr)
      : store_(std::move(store)), corpus_(std::move(corpus)) {
    for (std::size_t i = 0; i < store_->size(); ++i) {
      const auto& r = (*store_)[i];
      if (tag_base(r.tag) == "swap") continue;
      originals_.push_back(i);
      by_word_[r.word].push_back(i);
      by_key_.emplace(std::make_tuple(r.sentence_id, r.token_index, r.word), i);
    }
    for (auto& [w, idx] : by_word_) {
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = (*store_)[a];
        const auto& rb = (*store_)[b];
        return std::tie(ra.sentence_id, ra.token_index) < std::tie(rb.sentence_id, rb.token_index);
      });
    }
  }

  std::size_t dimension() const override { return store_->dimension(); }

  std::vector<Occurrence> occurrences(const std::string& word) const override {
    std::vector<Occurrence> out;
    auto it = by_word_.find(word);
    if (it == by_word_.end()) return out;
    for (std::size_t i : it->second) {
      const auto& r = (*store_)[i];
      out.push_back({r.sentence_id, r.token_index, r.word});
    }
    return out;
  }

  Vector embed(const Occurrence& occ) const override {
    auto it = by_key_.find({occ.sentence_id, occ.token_index, occ.word});
    if (it == by_key_.end()) {
      throw DataError("no record for '" + occ.word + "' at (" + std::to_string(occ.sentence_id) +
                      ", " + std::to_string(occ.token_index) + ")");
    }
    return (*store_)[it->second].values;
  }

  std::optional<Vector> embed_swapped(const Occurrence& occ,
                                      const DefinitionalPair& pair) const override {
    const std::string& partner = occ.word == pair.female ? pair.male : pair.female;
    if (occ.word != pair.female && occ.word != pair.male) {
      throw DataError("'" + occ.word + "' is not part of the pair " + pair.female + "/" + pair.male);
    }
    if (occ.sentence_id >= 0) {
      const auto* rec = store_->find_position(occ.sentence_id, occ.token_index, "swap");
      if (rec == nullptr || rec->word != partner) return std::nullopt;
      return rec->values;
    }
    auto it = by_word_.find(partner);
    if (it == by_word_.end()) return std::nullopt;
    for (std::size_t i : it->second) {
      if ((*store_)[i].sentence_id < 0) return (*store_)[i].values;
    }
    return std::nullopt;
  }

  std::optional<bool> sentence_contains(const Occurrence& occ,
                                        const std::set<std::string>& words) const override {
    if (!corpus_ || occ.sentence_id < 0 ||
        static_cast<std::size_t>(occ.sentence_id) >= corpus_->size()) {
      return std::nullopt;
    }
    return sentence_contains_any(corpus_->sentences[static_cast<std::size_t>(occ.sentence_id)],
                                 words);
  }

  std::size_t population() const override { return originals_.size(); }

  Vector population_vector(std::size_t i) const override {
    return (*store_)[originals_.at(i)].values;
  }

  std::string description() const override { return "cemb store"; }

 private:
  std::shared_ptr<const EmbeddingStore> store_;
  std::shared_ptr<const Corpus> corpus_;
  std::vector<std::size_t> originals_;
  std::map<std::string, std::vector<std::size_t>> by_word_;
  std::map<std::tuple<std::int64_t, std::int32_t, std::string>, std::size_t> by_key_;
};

}  // namespace ctxbias
