#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctxbias/random.hpp"

namespace ctxbias {

// %.17g; non-finite values have no JSON spelling and become null.
inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void canonical_json_impl(const nlohmann::json& j, std::string& out, int indent, int depth) {
  auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: sorted keys
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += nlohmann::json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        canonical_json_impl(it.value(), out, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        canonical_json_impl(v, out, indent, depth + 1);
      }
      newline(depth);
      out += ']';
      return;
    }
    case nlohmann::json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

}  // namespace detail

// Deterministic serialization: sorted keys, floats at 17 significant digits.
inline std::string canonical_json(const nlohmann::json& j, int indent = 2) {
  std::string out;
  detail::canonical_json_impl(j, out, indent, 0);
  if (indent >= 0) out += '\n';
  return out;
}

struct Aggregate {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

inline Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  if (values.empty()) return a;
  a.min = *std::min_element(values.begin(), values.end());
  a.max = *std::max_element(values.begin(), values.end());
  a.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  // Guard the min <= mean <= max invariant against summation rounding.
  a.mean = std::clamp(a.mean, a.min, a.max);
  return a;
}

struct MetricReport {
  std::string name;
  bool ok = false;
  std::string error;
  std::vector<double> values;  // one per repeat (single-shot metrics: one)
  Aggregate summary;
  nlohmann::json details = nlohmann::json::object();
};

struct ProjectionRow {
  std::string word;
  std::string label;
  int cluster = 0;
  std::array<double, 2> xy{};
};

// Plot data emitted as TSV; not part of the JSON report.
struct PlotData {
  std::vector<double> spectrum;
  std::vector<double> baseline_spectrum;
  std::vector<ProjectionRow> projection;
};

struct ExperimentReport {
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, MetricReport> metrics;
  std::map<std::string, std::vector<std::string>> missing_words;
  nlohmann::json gender_direction = nlohmann::json::object();
  nlohmann::json provenance = nlohmann::json::object();
  PlotData plots;

  bool any_failed() const {
    return std::any_of(metrics.begin(), metrics.end(), [](const auto& kv) { return !kv.second.ok; });
  }
};

inline nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["config"] = report.config;
  j["gender_direction"] = report.gender_direction;
  j["provenance"] = report.provenance;
  nlohmann::json missing = nlohmann::json::object();
  for (const auto& [list, words] : report.missing_words) missing[list] = words;
  j["missing_words"] = missing;
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [name, m] : report.metrics) {
    nlohmann::json mj = m.details;
    mj["status"] = m.ok ? "ok" : "failed";
    if (!m.ok) mj["error"] = m.error;
    mj["values"] = m.values;
    mj["repeats"] = m.values.size();
    if (m.ok && !m.values.empty()) {
      mj["min"] = m.summary.min;
      mj["max"] = m.summary.max;
      mj["mean"] = m.summary.mean;
    }
    metrics[name] = mj;
  }
  j["metrics"] = metrics;
  return j;
}

inline std::string report_json(const ExperimentReport& report) {
  return canonical_json(to_json(report));
}

inline std::string report_csv(const ExperimentReport& report) {
  std::string out = "metric,status,repeats,min,max,mean\n";
  for (const auto& [name, m] : report.metrics) {
    out += name;
    out += m.ok ? ",ok," : ",failed,";
    out += std::to_string(m.values.size());
    if (m.ok && !m.values.empty()) {
      out += "," + format_double(m.summary.min) + "," + format_double(m.summary.max) + "," +
             format_double(m.summary.mean);
    } else {
      out += ",,,";
    }
    out += '\n';
  }
  return out;
}

inline std::string spectrum_tsv(const PlotData& plots) {
  std::string out = "component\tdefinitional_ratio\trandom_ratio\n";
  const std::size_t n = std::max(plots.spectrum.size(), plots.baseline_spectrum.size());
  for (std::size_t i = 0; i < n; ++i) {
    out += std::to_string(i + 1);
    out += '\t';
    if (i < plots.spectrum.size()) out += format_double(plots.spectrum[i]);
    out += '\t';
    if (i < plots.baseline_spectrum.size()) out += format_double(plots.baseline_spectrum[i]);
    out += '\n';
  }
  return out;
}

inline std::string projection_tsv(const PlotData& plots) {
  std::string out = "word\tlabel\tcluster\tx\ty\n";
  for (const auto& r : plots.projection) {
    out += r.word + '\t' + r.label + '\t' + std::to_string(r.cluster) + '\t' +
           format_double(r.xy[0]) + '\t' + format_double(r.xy[1]) + '\n';
  }
  return out;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace ctxbias
