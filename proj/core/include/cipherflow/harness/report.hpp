#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cipherflow/error.hpp"
#include "cipherflow/harness/experiment.hpp"

namespace cipherflow::harness {

inline constexpr int kSchemaVersion = 1;
inline constexpr double kPassThreshold = 0.95;

struct MethodSuccess {
  std::optional<double> ed;
  std::optional<double> erd;
  std::size_t rounds = 0;
};

// Mean seconds per stage. `recipient` is zero for E-D runs.
struct MethodTiming {
  double rule_gen = 0;
  double enc = 0;
  double recipient = 0;
  double dec = 0;
  double total = 0;
  std::size_t rounds = 0;
};

struct ReportMetadata {
  std::uint64_t seed = 0;
  std::string backend;
  std::string timestamp;  // UTC, ISO 8601
  std::string experiment;
  int trials = 0;
  std::vector<cipher::CipherMethod> methods;
  std::string corpus_source;
  std::string clock;
};

struct ExperimentReport {
  int schema_version = kSchemaVersion;
  ReportMetadata metadata;
  std::map<cipher::CipherMethod, MethodSuccess> success;
  std::map<cipher::CipherMethod, MethodTiming> timing;
  // Mean over every round of the run, regardless of method.
  MethodTiming overall;
  // Buckets in fixed order: the five method ids, then Others, then failed.
  std::vector<std::pair<std::string, std::size_t>> preference;
  std::vector<TrialRecord> records;          // sorted by (method, trial)
  std::vector<PreferenceRecord> preference_records;
  std::size_t leakage_violations = 0;
};

// Fills success, timing and overall from `records`, after sorting them.
void aggregate_rounds(ExperimentReport& report);

// Lowest pass rate over all cells present; nullopt when there are none.
std::optional<double> min_pass_rate(const ExperimentReport& report);

std::string utc_timestamp_now();

nlohmann::ordered_json to_json(const ExperimentReport& report, bool with_transcripts = false);
std::string to_markdown(const ExperimentReport& report);

enum class ReportFormat { Json, Markdown };

std::string render(const ExperimentReport& report, ReportFormat format,
                   bool with_transcripts = false);

class ReportIoError : public Error {
 public:
  using Error::Error;
};

// Writes the rendered report. Throws ReportIoError naming the path.
void emit_report(const ExperimentReport& report, ReportFormat format,
                 const std::filesystem::path& path, bool with_transcripts = false);

}  // namespace cipherflow::harness
