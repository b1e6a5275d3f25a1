#include "qkm/report.h"

#include <charconv>
#include <cmath>

namespace qkm {
namespace {

using Json = nlohmann::ordered_json;

template <typename T>
Json OrNull(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::string Num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string CsvField(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return Num(*v);
  } else {
    return std::to_string(*v);
  }
}

std::string CsvQuote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Mean of a numeric field over rows where it is present (not null).
Json MeanOf(const std::vector<const Json*>& rows, const std::string& field) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const Json* row : rows) {
    const Json& v = (*row)[field];
    if (v.is_null()) continue;
    sum += v.get<double>();
    ++count;
  }
  if (count == 0) return nullptr;
  return sum / static_cast<double>(count);
}

}  // namespace

const std::vector<std::pair<std::string, std::string>> kBoundTargets = {
    {"dixie_queries", "queries_total"},
    {"qkmwol_phase1", "queries_phase1"},
    {"qkmwol_phase2", "queries_phase2"},
    {"qkmwol_total", "queries_total"},
};

void ExperimentReport::SetPotentials(double achieved, double reference) {
  potential_achieved = achieved;
  potential_reference = reference;
  if (reference > 0.0) {
    potential_ratio = achieved / reference;
  } else {
    potential_ratio.reset();
  }
}

nlohmann::ordered_json ToJson(const ExperimentReport& r) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["row"] = "trial";
  j["algorithm"] = r.algorithm;
  j["trial_id"] = r.trial_id;
  j["rng_seed"] = r.rng_seed;
  j["config"] = r.config;
  j["scale_mode"] = OrNull(r.scale_mode);
  j["error"] = OrNull(r.error);
  j["success"] = r.success;
  j["draws"] = r.draws;
  j["queries_total"] = r.queries_total;
  j["queries_phase1"] = OrNull(r.queries_phase1);
  j["queries_phase2"] = OrNull(r.queries_phase2);
  j["distinct_pairs"] = r.distinct_pairs;
  j["potential_achieved"] = r.potential_achieved;
  j["potential_reference"] = r.potential_reference;
  j["potential_reference_kind"] = r.potential_reference_kind;
  j["potential_ratio"] = OrNull(r.potential_ratio);
  j["misclassification_ratio"] = r.misclassification_ratio;
  j["outlier_precision"] = OrNull(r.outlier_precision);
  j["outlier_recall"] = OrNull(r.outlier_recall);
  j["gamma"] = OrNull(r.gamma);
  j["bound_values"] = Json::object();
  for (const auto& [k, v] : r.bound_values) j["bound_values"][k] = v;
  j["extras"] = Json::object();
  for (const auto& [k, v] : r.extras) j["extras"][k] = v;
  j["wall_time_ms"] = r.wall_time_ms;
  return j;
}

nlohmann::ordered_json Aggregate(const std::vector<ExperimentReport>& rows) {
  std::vector<Json> all;
  all.reserve(rows.size());
  for (const auto& r : rows) all.push_back(ToJson(r));
  std::vector<const Json*> done;
  std::size_t successes = 0;
  double wall = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    wall += rows[i].wall_time_ms;
    if (rows[i].error) continue;
    done.push_back(&all[i]);
    successes += rows[i].success;
  }

  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["row"] = "aggregate";
  j["algorithm"] = rows.empty() ? std::string() : rows.front().algorithm;
  j["trials"] = rows.size();
  j["completed"] = done.size();
  j["errored"] = rows.size() - done.size();
  j["success_fraction"] =
      done.empty() ? Json(nullptr)
                   : Json(static_cast<double>(successes) /
                          static_cast<double>(done.size()));
  Json means = Json::object();
  for (const char* field :
       {"draws", "queries_total", "queries_phase1", "queries_phase2",
        "distinct_pairs", "potential_achieved", "potential_ratio",
        "misclassification_ratio", "outlier_precision", "outlier_recall"}) {
    means[field] = MeanOf(done, field);
  }
  j["means"] = means;
  Json bounds = Json::object();
  Json checks = Json::object();
  if (!done.empty()) {
    bounds = (*done.front())["bound_values"];
    for (const auto& [name, field] : kBoundTargets) {
      if (!bounds.contains(name) || means[field].is_null()) continue;
      const double mean = means[field].get<double>();
      const double bound = bounds[name].get<double>();
      checks[name] = Json{{"field", field},
                          {"mean", mean},
                          {"bound", bound},
                          {"holds", mean <= bound}};
    }
  }
  j["bound_values"] = bounds;
  j["bound_checks"] = checks;
  j["wall_time_ms"] = wall;
  return j;
}

std::string CsvHeader() {
  return "trial_id,algorithm,rng_seed,scale_mode,draws,queries_total,"
         "queries_phase1,queries_phase2,distinct_pairs,potential_achieved,"
         "potential_reference,potential_ratio,misclassification_ratio,"
         "outlier_precision,outlier_recall,success,wall_time_ms,error";
}

std::string ToCsvRow(const ExperimentReport& r) {
  std::string s;
  s += std::to_string(r.trial_id) + ",";
  s += CsvQuote(r.algorithm) + ",";
  s += std::to_string(r.rng_seed) + ",";
  s += (r.scale_mode ? *r.scale_mode : std::string()) + ",";
  s += std::to_string(r.draws) + ",";
  s += std::to_string(r.queries_total) + ",";
  s += CsvField(r.queries_phase1) + ",";
  s += CsvField(r.queries_phase2) + ",";
  s += std::to_string(r.distinct_pairs) + ",";
  s += Num(r.potential_achieved) + ",";
  s += Num(r.potential_reference) + ",";
  s += CsvField(r.potential_ratio) + ",";
  s += Num(r.misclassification_ratio) + ",";
  s += CsvField(r.outlier_precision) + ",";
  s += CsvField(r.outlier_recall) + ",";
  s += std::string(r.success ? "1" : "0") + ",";
  s += Num(r.wall_time_ms) + ",";
  s += r.error ? CsvQuote(*r.error) : std::string();
  return s;
}

}  // namespace qkm
