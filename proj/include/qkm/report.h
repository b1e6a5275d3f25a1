#ifndef QKM_REPORT_H_
#define QKM_REPORT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace qkm {

inline constexpr int kReportSchemaVersion = 1;

// One trial of one algorithm. Optional fields are emitted as null.
struct ExperimentReport {
  std::string algorithm;
  std::uint64_t trial_id = 0;
  std::uint64_t rng_seed = 0;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::optional<std::string> scale_mode;

  std::uint64_t draws = 0;
  std::uint64_t queries_total = 0;
  std::optional<std::uint64_t> queries_phase1;
  std::optional<std::uint64_t> queries_phase2;
  std::uint64_t distinct_pairs = 0;

  double potential_achieved = 0.0;
  double potential_reference = 0.0;
  std::string potential_reference_kind = "ground_truth_partition";
  std::optional<double> potential_ratio;  // unset when the reference is 0
  double misclassification_ratio = 0.0;
  std::optional<double> outlier_precision;
  std::optional<double> outlier_recall;
  std::optional<double> gamma;

  // Closed-form values this trial is compared against (query bounds, M, N).
  std::map<std::string, double> bound_values;
  // Algorithm-specific counters (self matches, discarded draws, rounds).
  std::map<std::string, double> extras;

  bool success = false;
  double wall_time_ms = 0.0;
  std::optional<std::string> error;

  // Sets potential_achieved/reference/ratio together.
  void SetPotentials(double achieved, double reference);
};

nlohmann::ordered_json ToJson(const ExperimentReport& report);

// Aggregate over trial rows in trial order: means of numeric fields over
// non-error rows, success fraction, and for each query bound in
// kBoundTargets whether the mean of its target field stays below it.
nlohmann::ordered_json Aggregate(const std::vector<ExperimentReport>& rows);

// Pairs (bound name, report field it bounds).
extern const std::vector<std::pair<std::string, std::string>> kBoundTargets;

// Fixed CSV column list shared by the header and the rows.
std::string CsvHeader();
std::string ToCsvRow(const ExperimentReport& report);

}  // namespace qkm

#endif  // QKM_REPORT_H_
