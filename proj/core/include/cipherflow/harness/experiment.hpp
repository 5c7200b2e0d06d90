#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cipherflow/agents.hpp"
#include "cipherflow/backend.hpp"
#include "cipherflow/cipher.hpp"
#include "cipherflow/flows.hpp"

namespace cipherflow::harness {

enum class ExperimentKind { Preference, ED, ERD };
std::string_view to_string(ExperimentKind kind);

// Wall uses the steady clock. Tick advances a fixed step per reading, which
// makes durations (and hence the whole report) reproducible.
enum class ClockKind { Wall, Tick };
std::string_view to_string(ClockKind kind);

struct ExperimentSpec {
  ExperimentKind experiment = ExperimentKind::ED;
  std::vector<cipher::CipherMethod> methods{cipher::kAllMethods.begin(), cipher::kAllMethods.end()};
  int trials = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> corpus;
  std::string corpus_source = "built-in";
  // Preference survey only; E-D and E-R-D pin each session to one method.
  MethodSelector selector = MethodSelector::uniform();
  TaskSpec task = TaskSpec::letter_frequency();
  ClockKind clock = ClockKind::Wall;
  // Methods run on this many threads. The backend must allow concurrent use.
  int jobs = 1;
};

// Throws std::invalid_argument for trials < 1, an empty corpus, an empty or
// repeated method list, or jobs < 1.
void validate(const ExperimentSpec& spec);

// One E-D or E-R-D round, tagged with the method row it belongs to.
struct TrialRecord {
  cipher::CipherMethod method{};
  int trial = 0;
  flows::RoundRecord round;
};

// One rule generation of the preference survey.
struct PreferenceRecord {
  int trial = 0;
  std::string bucket;  // method id, "Others" or "failed"
  std::optional<rules::CipherRule> rule;
  std::string method_text;
  std::string failure_reason;
};

inline constexpr std::string_view kOthersBucket = "Others";
inline constexpr std::string_view kFailedBucket = "failed";

struct ExperimentReport;

ExperimentReport run_preference_survey(const ExperimentSpec& spec, Backend& backend);
ExperimentReport run_ed(const ExperimentSpec& spec, Backend& backend);
ExperimentReport run_erd(const ExperimentSpec& spec, Backend& backend);
ExperimentReport run_experiment(const ExperimentSpec& spec, Backend& backend);

}  // namespace cipherflow::harness

#include "cipherflow/harness/report.hpp"
