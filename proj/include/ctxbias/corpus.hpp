#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ctxbias/error.hpp"
#include "ctxbias/random.hpp"

namespace ctxbias {

using Tokens = std::vector<std::string>;

// Line-per-sentence corpus. Sentence ids are positions in `sentences`.
struct Corpus {
  std::vector<Tokens> sentences;
  std::string source_path;

  std::size_t size() const { return sentences.size(); }
  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
  }
};

// Locates one token of one sentence.
struct Occurrence {
  std::int64_t sentence_id = -1;
  std::int32_t token_index = -1;
  std::string word;

  friend bool operator==(const Occurrence&, const Occurrence&) = default;
  friend auto operator<=>(const Occurrence& a, const Occurrence& b) {
    if (auto c = a.sentence_id <=> b.sentence_id; c != 0) return c;
    if (auto c = a.token_index <=> b.token_index; c != 0) return c;
    return a.word <=> b.word;
  }
};

inline void ascii_lowercase(std::string& s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
}

inline std::string ascii_lowercased(std::string s) {
  ascii_lowercase(s);
  return s;
}

// Offset of the first byte that breaks UTF-8 well-formedness, if any.
inline std::optional<std::size_t> find_invalid_utf8(std::string_view bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = p[i];
    std::size_t len;
    std::uint32_t min_cp;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2, min_cp = 0x80, cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3, min_cp = 0x800, cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4, min_cp = 0x10000, cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > n) return i;
    for (std::size_t k = 1; k < len; ++k) {
      if ((p[i + k] & 0xC0) != 0x80) return i + k;
      cp = (cp << 6) | (p[i + k] & 0x3F);
    }
    if (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return i;
    i += len;
  }
  return std::nullopt;
}

inline Tokens split_whitespace(std::string_view line) {
  Tokens out;
  std::size_t i = 0;
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
  };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// Reads a UTF-8 corpus, one sentence per line. Lines with no tokens are
// skipped; lowercasing is ASCII-only.
inline Corpus load_corpus(const std::string& path, bool lowercase = true) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  if (auto bad = find_invalid_utf8(bytes)) {
    throw FormatError("corpus " + path + ": invalid UTF-8 at byte offset " +
                      std::to_string(*bad));
  }
  Corpus corpus;
  corpus.source_path = path;
  std::size_t start = 0;
  while (start <= bytes.size()) {
    std::size_t end = bytes.find('\n', start);
    if (end == std::string::npos) end = bytes.size();
    Tokens tokens = split_whitespace(std::string_view(bytes).substr(start, end - start));
    if (!tokens.empty()) {
      if (lowercase) {
        for (auto& t : tokens) ascii_lowercase(t);
      }
      corpus.sentences.push_back(std::move(tokens));
    }
    start = end + 1;
  }
  return corpus;
}

enum class Gender { female, male };

inline std::string_view to_string(Gender g) { return g == Gender::female ? "female" : "male"; }

struct DefinitionalPair {
  std::string female;
  std::string male;
};

struct WordEntry {
  std::string word;
  std::optional<Gender> gender;
  std::optional<double> score;
};

struct WordList {
  std::string name;
  std::vector<WordEntry> entries;

  std::vector<std::string> words() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.word);
    return out;
  }

  const WordEntry* find(std::string_view word) const {
    for (const auto& e : entries) {
      if (e.word == word) return &e;
    }
    return nullptr;
  }
};

// Every definitional word (female and male elements) as an unlabeled list.
inline WordList definitional_word_list(const std::vector<DefinitionalPair>& pairs) {
  WordList list{"definitional", {}};
  std::set<std::string> seen;
  for (const auto& p : pairs) {
    if (seen.insert(p.female).second) list.entries.push_back({p.female, Gender::female, {}});
    if (seen.insert(p.male).second) list.entries.push_back({p.male, Gender::male, {}});
  }
  return list;
}

// word -> occurrences ordered by (sentence_id, token_index), plus the list
// words that never occur.
struct OccurrenceIndex {
  std::map<std::string, std::vector<Occurrence>> occurrences;
  std::vector<std::string> missing;

  const std::vector<Occurrence>* find(std::string_view word) const {
    auto it = occurrences.find(std::string(word));
    return it == occurrences.end() ? nullptr : &it->second;
  }

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& [w, occ] : occurrences) n += occ.size();
    return n;
  }
};

inline OccurrenceIndex index_occurrences(const Corpus& corpus, const WordList& words) {
  OccurrenceIndex index;
  for (const auto& e : words.entries) index.occurrences[e.word];
  for (std::size_t sid = 0; sid < corpus.sentences.size(); ++sid) {
    const auto& sentence = corpus.sentences[sid];
    for (std::size_t tid = 0; tid < sentence.size(); ++tid) {
      auto it = index.occurrences.find(sentence[tid]);
      if (it != index.occurrences.end()) {
        it->second.push_back({static_cast<std::int64_t>(sid), static_cast<std::int32_t>(tid),
                              sentence[tid]});
      }
    }
  }
  for (const auto& e : words.entries) {
    if (index.occurrences[e.word].empty()) index.missing.push_back(e.word);
  }
  return index;
}

// min(n, available) occurrences of `word`, uniform without replacement,
// returned in corpus order. A word absent from the index yields an empty
// list; such words are listed in `index.missing` when they came from the
// indexed list.
inline std::vector<Occurrence> sample_occurrences(const OccurrenceIndex& index,
                                                  std::string_view word, std::size_t n,
                                                  Rng& rng) {
  if (n == 0) throw ConfigError("sample_occurrences: n must be >= 1");
  const auto* all = index.find(word);
  if (all == nullptr || all->empty()) return {};
  std::vector<Occurrence> out;
  for (std::size_t i : sample_indices(all->size(), n, rng)) out.push_back((*all)[i]);
  std::sort(out.begin(), out.end());
  return out;
}

// Copy of the sentence with only the token at `occ` replaced by its
// opposite-gender partner.
inline Tokens swap_pair(const Corpus& corpus, const Occurrence& occ, const DefinitionalPair& pair) {
  if (occ.sentence_id < 0 || static_cast<std::size_t>(occ.sentence_id) >= corpus.size()) {
    throw DataError("swap_pair: sentence id out of range: " + std::to_string(occ.sentence_id));
  }
  Tokens tokens = corpus.sentences[static_cast<std::size_t>(occ.sentence_id)];
  if (occ.token_index < 0 || static_cast<std::size_t>(occ.token_index) >= tokens.size()) {
    throw DataError("swap_pair: token index out of range: " + std::to_string(occ.token_index));
  }
  auto& token = tokens[static_cast<std::size_t>(occ.token_index)];
  if (token == pair.female) {
    token = pair.male;
  } else if (token == pair.male) {
    token = pair.female;
  } else {
    throw DataError("swap_pair: token '" + token + "' matches neither '" + pair.female +
                    "' nor '" + pair.male + "'");
  }
  return tokens;
}

// The pair that `word` belongs to, if any.
inline const DefinitionalPair* find_pair(const std::vector<DefinitionalPair>& pairs,
                                         std::string_view word) {
  for (const auto& p : pairs) {
    if (p.female == word || p.male == word) return &p;
  }
  return nullptr;
}

inline bool sentence_contains_any(const Tokens& sentence, const std::set<std::string>& words) {
  return std::any_of(sentence.begin(), sentence.end(),
                     [&](const std::string& t) { return words.count(t) != 0; });
}

// Drops every occurrence whose sentence contains a definitional word.
inline OccurrenceIndex filter_cooccurrence(const Corpus& corpus, const OccurrenceIndex& index,
                                           const std::vector<DefinitionalPair>& definitional) {
  std::set<std::string> gendered;
  for (const auto& p : definitional) {
    gendered.insert(p.female);
    gendered.insert(p.male);
  }
  OccurrenceIndex out;
  out.missing = index.missing;
  for (const auto& [word, occs] : index.occurrences) {
    auto& kept = out.occurrences[word];
    for (const auto& o : occs) {
      if (!sentence_contains_any(corpus.sentences.at(static_cast<std::size_t>(o.sentence_id)),
                                 gendered)) {
        kept.push_back(o);
      }
    }
  }
  return out;
}

}  // namespace ctxbias
