#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxbias/corpus.hpp"
#include "ctxbias/error.hpp"

namespace ctxbias {

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

namespace detail {

inline std::string list_word(const nlohmann::json& v, const std::string& where, bool lowercase) {
  if (!v.is_string() || v.get_ref<const std::string&>().empty()) {
    throw FormatError(where + ": expected a nonempty string");
  }
  std::string w = v.get<std::string>();
  if (lowercase) ascii_lowercase(w);
  return w;
}

}  // namespace detail

// Parses a word list from JSON. Accepted shapes:
//   ["w1", "w2", ...]                        plain list
//   [["w1", s, ..., score], ...]             scored list (last number is the score)
//   {"female": [...], "male": [...]}         gender-labelled list
inline WordList parse_word_list(const nlohmann::json& doc, const std::string& name,
                                bool lowercase = true) {
  WordList list{name, {}};
  std::set<std::string> seen;
  auto add = [&](WordEntry e) {
    if (!seen.insert(e.word).second) {
      throw FormatError(name + ": duplicate word '" + e.word + "'");
    }
    list.entries.push_back(std::move(e));
  };

  if (doc.is_object()) {
    for (const auto& [key, gender] : {std::pair{"female", Gender::female},
                                      std::pair{"male", Gender::male}}) {
      if (!doc.contains(key)) continue;
      const auto& arr = doc.at(key);
      if (!arr.is_array()) throw FormatError(name + ": '" + key + "' must be an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        add({detail::list_word(arr[i], name + "." + key + "[" + std::to_string(i) + "]",
                               lowercase),
             gender, {}});
      }
    }
    return list;
  }
  if (!doc.is_array()) throw FormatError(name + ": expected a JSON array or object");
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string where = name + "[" + std::to_string(i) + "]";
    if (item.is_string()) {
      add({detail::list_word(item, where, lowercase), {}, {}});
    } else if (item.is_array() && !item.empty()) {
      WordEntry e{detail::list_word(item[0], where, lowercase), {}, {}};
      for (std::size_t k = 1; k < item.size(); ++k) {
        if (!item[k].is_number()) throw FormatError(where + ": non-numeric field");
        e.score = item[k].get<double>();
      }
      add(std::move(e));
    } else {
      throw FormatError(where + ": expected a string or [word, number...] array");
    }
  }
  return list;
}

inline WordList load_word_list(const std::string& path, const std::string& name,
                               bool lowercase = true) {
  return parse_word_list(read_json_file(path), name, lowercase);
}

// [[female, male], ...]
inline std::vector<DefinitionalPair> parse_definitional_pairs(const nlohmann::json& doc,
                                                              bool lowercase = true) {
  if (!doc.is_array()) throw FormatError("definitional pairs: expected a JSON array");
  std::vector<DefinitionalPair> pairs;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string where = "definitional[" + std::to_string(i) + "]";
    if (!item.is_array() || item.size() != 2) {
      throw FormatError(where + ": expected a 2-element array");
    }
    DefinitionalPair p{detail::list_word(item[0], where, lowercase),
                       detail::list_word(item[1], where, lowercase)};
    if (p.female == p.male) throw FormatError(where + ": both elements are '" + p.female + "'");
    pairs.push_back(std::move(p));
  }
  return pairs;
}

inline std::vector<DefinitionalPair> load_definitional_pairs(const std::string& path,
                                                             bool lowercase = true) {
  return parse_definitional_pairs(read_json_file(path), lowercase);
}

}  // namespace ctxbias
