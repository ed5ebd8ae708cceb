#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctxbias/corpus.hpp"
#include "ctxbias/error.hpp"
#include "ctxbias/linalg.hpp"

namespace ctxbias {

// One embedding vector bound to an occurrence (sentence_id/token_index are
// -1 for context-free vectors).
struct ContextualVector {
  std::string word;
  std::int64_t sentence_id = -1;
  std::int32_t token_index = -1;
  std::string tag;
  Vector values;

  friend bool operator==(const ContextualVector&, const ContextualVector&) = default;
};

// Tag prefix before the first ':' ("orig:top" -> "orig").
inline std::string_view tag_base(std::string_view tag) {
  return tag.substr(0, tag.find(':'));
}

// Immutable record collection with lookups by word, (word, tag base) and
// (sentence_id, token_index, tag base).
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  EmbeddingStore(std::uint32_t dimension, std::vector<ContextualVector> records)
      : dimension_(dimension), records_(std::move(records)) {
    if (dimension_ == 0) throw DataError("embedding dimension must be > 0");
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      if (r.values.size() != dimension_) {
        throw DataError("record " + std::to_string(i) + " has dimension " +
                        std::to_string(r.values.size()) + ", expected " +
                        std::to_string(dimension_));
      }
      for (double v : r.values) {
        if (!std::isfinite(v)) throw DataError("record " + std::to_string(i) + " is not finite");
      }
      by_word_[r.word].push_back(i);
      by_word_tag_[{r.word, std::string(tag_base(r.tag))}].push_back(i);
      by_position_[{r.sentence_id, r.token_index, std::string(tag_base(r.tag))}].push_back(i);
    }
  }

  std::uint32_t dimension() const { return dimension_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<ContextualVector>& records() const { return records_; }
  const ContextualVector& operator[](std::size_t i) const { return records_[i]; }

  std::span<const std::size_t> find_word(const std::string& word) const {
    auto it = by_word_.find(word);
    if (it == by_word_.end()) return {};
    return it->second;
  }

  std::span<const std::size_t> find_word_tag(const std::string& word,
                                             std::string_view tag) const {
    auto it = by_word_tag_.find({word, std::string(tag_base(tag))});
    if (it == by_word_tag_.end()) return {};
    return it->second;
  }

  const ContextualVector* find_position(std::int64_t sentence_id, std::int32_t token_index,
                                        std::string_view tag) const {
    auto it = by_position_.find({sentence_id, token_index, std::string(tag_base(tag))});
    if (it == by_position_.end() || it->second.empty()) return nullptr;
    return &records_[it->second.front()];
  }

  friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
    return a.dimension_ == b.dimension_ && a.records_ == b.records_;
  }

 private:
  std::uint32_t dimension_ = 0;
  std::vector<ContextualVector> records_;
  std::map<std::string, std::vector<std::size_t>> by_word_;
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> by_word_tag_;
  std::map<std::tuple<std::int64_t, std::int32_t, std::string>, std::vector<std::size_t>>
      by_position_;
};

// ---------------------------------------------------------------------------
// CEMB1
//
//   "CEMB" | u32 version=1 | u32 dimension | u64 record count
//   per record:
//     u16 word length | word bytes | i64 sentence_id | i32 token_index |
//     u8 tag length | tag bytes | dimension x f32
//
// All integers and floats little-endian. Values are stored as IEEE-754
// binary32 and widened to double on read.
// ---------------------------------------------------------------------------

inline constexpr std::array<char, 4> kCembMagic = {'C', 'E', 'M', 'B'};
inline constexpr std::uint32_t kCembVersion = 1;
inline constexpr std::size_t kCembHeaderSize = 4 + 4 + 4 + 8;

inline std::size_t cemb_record_size(std::size_t word_bytes, std::size_t tag_bytes,
                                    std::size_t dimension) {
  return 2 + word_bytes + 8 + 4 + 1 + tag_bytes + 4 * dimension;
}

namespace detail {

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(u & 0xFF));
    if constexpr (sizeof(T) > 1) u = static_cast<U>(u >> 8);
  }
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return bytes_.size() - pos_ >= n; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  template <typename T>
  T get_le() {
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i));
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }

  std::string_view take(std::size_t n) {
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_cemb(const EmbeddingStore& store) {
  std::string out;
  out.append(kCembMagic.data(), kCembMagic.size());
  detail::put_le<std::uint32_t>(out, kCembVersion);
  detail::put_le<std::uint32_t>(out, store.dimension());
  detail::put_le<std::uint64_t>(out, store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& r = store[i];
    if (r.word.size() > 0xFFFF) throw FormatError("record " + std::to_string(i) + ": word too long");
    if (r.tag.size() > 0xFF) throw FormatError("record " + std::to_string(i) + ": tag too long");
    detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(r.word.size()));
    out += r.word;
    detail::put_le<std::int64_t>(out, r.sentence_id);
    detail::put_le<std::int32_t>(out, r.token_index);
    detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(r.tag.size()));
    out += r.tag;
    for (double v : r.values) {
      detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return out;
}

inline EmbeddingStore decode_cemb(std::string_view bytes, const std::string& origin = "<memory>") {
  auto fail = [&](const std::string& what) { throw FormatError(origin + ": " + what); };
  detail::ByteReader in(bytes);
  if (!in.has(kCembHeaderSize)) fail("truncated header");
  if (in.take(4) != std::string_view(kCembMagic.data(), kCembMagic.size())) fail("bad magic");
  const auto version = in.get_le<std::uint32_t>();
  if (version != kCembVersion) fail("unsupported version " + std::to_string(version));
  const auto dimension = in.get_le<std::uint32_t>();
  if (dimension == 0) fail("dimension must be > 0");
  const auto count = in.get_le<std::uint64_t>();

  std::vector<ContextualVector> records;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string where = "record " + std::to_string(i);
    auto need = [&](std::size_t n) {
      if (!in.has(n)) fail("truncated file in " + where);
    };
    ContextualVector r;
    need(2);
    const auto word_len = in.get_le<std::uint16_t>();
    need(word_len);
    r.word = std::string(in.take(word_len));
    if (r.word.empty()) fail(where + ": empty word");
    if (find_invalid_utf8(r.word)) fail(where + ": word is not valid UTF-8");
    need(8 + 4 + 1);
    r.sentence_id = in.get_le<std::int64_t>();
    r.token_index = in.get_le<std::int32_t>();
    const auto tag_len = in.get_le<std::uint8_t>();
    need(tag_len);
    r.tag = std::string(in.take(tag_len));
    if (find_invalid_utf8(r.tag)) fail(where + ": tag is not valid UTF-8");
    need(4 * static_cast<std::size_t>(dimension));
    r.values.resize(dimension);
    for (std::uint32_t j = 0; j < dimension; ++j) {
      const float f = std::bit_cast<float>(in.get_le<std::uint32_t>());
      if (!std::isfinite(f)) fail(where + ": non-finite value at component " + std::to_string(j));
      r.values[j] = static_cast<double>(f);
    }
    records.push_back(std::move(r));
  }
  if (in.remaining() != 0) {
    fail(std::to_string(in.remaining()) + " trailing bytes after " + std::to_string(count) +
         " records");
  }
  return EmbeddingStore(dimension, std::move(records));
}

inline void write_cemb(const EmbeddingStore& store, const std::string& path) {
  const std::string bytes = encode_cemb(store);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

inline EmbeddingStore read_cemb(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open CEMB1 file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_cemb(buf.str(), path);
}

// ---------------------------------------------------------------------------
// Static word vectors (word2vec text format)
// ---------------------------------------------------------------------------

struct WordTable {
  std::size_t dimension = 0;
  std::unordered_map<std::string, Vector> vectors;
  std::vector<std::string> warnings;

  const Vector* find(const std::string& word) const {
    auto it = vectors.find(word);
    return it == vectors.end() ? nullptr : &it->second;
  }
};

namespace detail {

inline bool parse_integer(std::string_view s, long long& out) {
  if (s.empty()) return false;
  std::size_t i = 0;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  out = std::stoll(std::string(s));
  return true;
}

inline bool parse_double(const std::string& s, double& out) {
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end != s.c_str() && *end == '\0';
}

}  // namespace detail

// "count dim" header (optional), then "word v1 ... vd" per line.
inline WordTable parse_word2vec_text(std::istream& in, const std::string& origin,
                                     bool lowercase = false) {
  WordTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    Tokens fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (line_no == 1 && fields.size() == 2) {
      long long count = 0, dim = 0;
      if (detail::parse_integer(fields[0], count) && detail::parse_integer(fields[1], dim)) {
        if (dim <= 0) throw FormatError(origin + ":1: header dimension must be > 0");
        table.dimension = static_cast<std::size_t>(dim);
        continue;
      }
    }
    if (fields.size() < 2) {
      throw FormatError(origin + ":" + std::to_string(line_no) + ": expected a word and values");
    }
    const std::size_t d = fields.size() - 1;
    if (table.dimension == 0) table.dimension = d;
    if (d != table.dimension) {
      throw FormatError(origin + ":" + std::to_string(line_no) + ": " + std::to_string(d) +
                        " values, expected " + std::to_string(table.dimension));
    }
    Vector v(d);
    for (std::size_t j = 0; j < d; ++j) {
      if (!detail::parse_double(fields[j + 1], v[j]) || !std::isfinite(v[j])) {
        throw FormatError(origin + ":" + std::to_string(line_no) + ": bad value '" +
                          fields[j + 1] + "'");
      }
    }
    std::string word = std::move(fields[0]);
    if (lowercase) ascii_lowercase(word);
    auto [it, inserted] = table.vectors.insert_or_assign(word, std::move(v));
    if (!inserted) {
      table.warnings.push_back(origin + ":" + std::to_string(line_no) + ": duplicate word '" +
                               it->first + "', keeping the last vector");
    }
  }
  if (table.vectors.empty()) throw FormatError(origin + ": no vectors");
  return table;
}

inline WordTable load_word2vec_text(const std::string& path, bool lowercase = false) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word vectors: " + path);
  return parse_word2vec_text(in, path, lowercase);
}

// Context-free store view of a table: one record per word, sorted by word.
inline EmbeddingStore to_store(const WordTable& table, const std::string& tag = "static") {
  std::map<std::string, const Vector*> sorted;
  for (const auto& [w, v] : table.vectors) sorted.emplace(w, &v);
  std::vector<ContextualVector> records;
  records.reserve(sorted.size());
  for (const auto& [w, v] : sorted) records.push_back({w, -1, -1, tag, *v});
  return EmbeddingStore(static_cast<std::uint32_t>(table.dimension), std::move(records));
}

// ---------------------------------------------------------------------------
// Providers
// ---------------------------------------------------------------------------

// Deterministic map from (sentence, position) to a vector of fixed dimension.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dimension() const = 0;
  virtual Vector embed(std::span<const std::string> tokens, std::size_t index) const = 0;
  virtual std::string description() const = 0;

  Vector embed_word(const std::string& word) const {
    const std::string tokens[] = {word};
    return embed(tokens, 0);
  }
};

// (1 - alpha) * v(word) + alpha * mean of v(neighbours within +-window).
// Neighbours absent from the table contribute zero vectors; a sentence
// with no neighbours in the window yields v(word).
inline Vector toy_contextual(const WordTable& table, std::span<const std::string> tokens,
                             std::size_t index, double alpha, std::size_t window) {
  if (index >= tokens.size()) throw DataError("toy_contextual: index out of range");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("toy_contextual: alpha must be in [0, 1]");
  const Vector* self = table.find(tokens[index]);
  if (self == nullptr) throw DataError("toy_contextual: word '" + tokens[index] + "' not in table");
  const std::size_t lo = index >= window ? index - window : 0;
  const std::size_t hi = std::min(tokens.size() - 1, index + window);
  Vector context(table.dimension, 0.0);
  std::size_t count = 0;
  for (std::size_t i = lo; i <= hi; ++i) {
    if (i == index) continue;
    ++count;
    if (const Vector* v = table.find(tokens[i])) {
      for (std::size_t j = 0; j < context.size(); ++j) context[j] += (*v)[j];
    }
  }
  if (count == 0) return *self;
  Vector out(table.dimension);
  const double inv = 1.0 / static_cast<double>(count);
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = (1.0 - alpha) * (*self)[j] + alpha * context[j] * inv;
  }
  return out;
}

class StaticProvider final : public EmbeddingProvider {
 public:
  explicit StaticProvider(std::shared_ptr<const WordTable> table) : table_(std::move(table)) {}

  std::size_t dimension() const override { return table_->dimension; }

  Vector embed(std::span<const std::string> tokens, std::size_t index) const override {
    const Vector* v = table_->find(tokens[index]);
    if (v == nullptr) throw DataError("word '" + tokens[index] + "' not in vector table");
    return *v;
  }

  std::string description() const override { return "static"; }

 private:
  std::shared_ptr<const WordTable> table_;
};

class ToyContextualProvider final : public EmbeddingProvider {
 public:
  static constexpr double kDefaultAlpha = 0.5;
  static constexpr std::size_t kDefaultWindow = 2;

  ToyContextualProvider(std::shared_ptr<const WordTable> table, double alpha = kDefaultAlpha,
                        std::size_t window = kDefaultWindow)
      : table_(std::move(table)), alpha_(alpha), window_(window) {
    if (!(alpha_ >= 0.0 && alpha_ <= 1.0)) throw ConfigError("toy provider: alpha must be in [0, 1]");
  }

  std::size_t dimension() const override { return table_->dimension; }

  Vector embed(std::span<const std::string> tokens, std::size_t index) const override {
    return toy_contextual(*table_, tokens, index, alpha_, window_);
  }

  std::string description() const override { return "toy-contextual"; }

 private:
  std::shared_ptr<const WordTable> table_;
  double alpha_;
  std::size_t window_;
};

}  // namespace ctxbias
