#include "cipherflow/harness/experiment.hpp"

#include <algorithm>
#include <future>
#include <set>
#include <stdexcept>

#include "cipherflow/harness/corpus.hpp"
#include "cipherflow/rng.hpp"

namespace cipherflow::harness {
namespace {

std::size_t method_index(cipher::CipherMethod m) { return static_cast<std::size_t>(m); }

flows::ClockSource make_clock(ClockKind kind) {
  if (kind == ClockKind::Tick) return flows::tick_clock_source(std::chrono::microseconds(100));
  return flows::steady_clock_source();
}

ExperimentReport base_report(const ExperimentSpec& spec, const Backend& backend) {
  ExperimentReport r;
  r.metadata.seed = spec.seed;
  r.metadata.backend = std::string(backend.name());
  r.metadata.timestamp = utc_timestamp_now();
  r.metadata.experiment = std::string(to_string(spec.experiment));
  r.metadata.trials = spec.trials;
  r.metadata.methods = spec.methods;
  std::sort(r.metadata.methods.begin(), r.metadata.methods.end());
  r.metadata.corpus_source = spec.corpus_source;
  r.metadata.clock = std::string(to_string(spec.clock));
  return r;
}

struct MethodRun {
  std::vector<TrialRecord> records;
  std::size_t leakage_violations = 0;
};

MethodRun run_method(const ExperimentSpec& spec, Backend& backend, cipher::CipherMethod method,
                     flows::Mode mode) {
  flows::SessionOptions options;
  options.seed = derive_seed(spec.seed, method_index(method));
  options.selector = MethodSelector::only(method);
  options.task = spec.task;
  options.clock = make_clock(spec.clock);
  flows::Session session(backend, std::move(options));

  MethodRun run;
  for (int t = 0; t < spec.trials; ++t) {
    const std::string& input = spec.corpus[static_cast<std::size_t>(t) % spec.corpus.size()];
    run.records.push_back({method, t, session.run_round(input, mode)});
  }
  run.leakage_violations = session.leakage_violations();
  return run;
}

ExperimentReport run_rounds(const ExperimentSpec& spec, Backend& backend, flows::Mode mode) {
  validate(spec);
  require_preflight(spec.corpus);
  ExperimentReport report = base_report(spec, backend);

  std::vector<MethodRun> runs(spec.methods.size());
  if (spec.jobs <= 1) {
    for (std::size_t i = 0; i < spec.methods.size(); ++i) {
      runs[i] = run_method(spec, backend, spec.methods[i], mode);
    }
  } else {
    // Methods are independent sessions; at most `jobs` run at a time.
    for (std::size_t begin = 0; begin < spec.methods.size();
         begin += static_cast<std::size_t>(spec.jobs)) {
      const std::size_t end =
          std::min(spec.methods.size(), begin + static_cast<std::size_t>(spec.jobs));
      std::vector<std::future<MethodRun>> pending;
      for (std::size_t i = begin; i < end; ++i) {
        pending.push_back(std::async(std::launch::async, run_method, std::cref(spec),
                                     std::ref(backend), spec.methods[i], mode));
      }
      for (std::size_t i = begin; i < end; ++i) runs[i] = pending[i - begin].get();
    }
  }

  for (auto& run : runs) {
    report.leakage_violations += run.leakage_violations;
    for (auto& rec : run.records) report.records.push_back(std::move(rec));
  }
  aggregate_rounds(report);
  return report;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Preference: return "preference";
    case ExperimentKind::ED: return "ed";
    case ExperimentKind::ERD: return "erd";
  }
  return "";
}

std::string_view to_string(ClockKind kind) { return kind == ClockKind::Tick ? "tick" : "wall"; }

void validate(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (spec.corpus.empty()) throw std::invalid_argument("corpus must not be empty");
  if (spec.methods.empty()) throw std::invalid_argument("at least one method is required");
  if (std::set(spec.methods.begin(), spec.methods.end()).size() != spec.methods.size()) {
    throw std::invalid_argument("methods must not repeat");
  }
  if (spec.jobs < 1) throw std::invalid_argument("jobs must be at least 1");
  validate_task(spec.task);
}

ExperimentReport run_preference_survey(const ExperimentSpec& spec, Backend& backend) {
  if (spec.trials < 1) throw std::invalid_argument("trials must be at least 1");
  ExperimentReport report = base_report(spec, backend);

  std::map<std::string, std::size_t> counts;
  RuleAgent agent;
  Rng rng(spec.seed);
  for (int t = 0; t < spec.trials; ++t) {
    PreferenceRecord rec;
    rec.trial = t;
    try {
      rec.rule = agent.generate(backend, rng, spec.selector, static_cast<std::uint64_t>(t) + 1);
      rec.method_text = rec.rule->text.method_chosen;
      rec.bucket = std::string(cipher::method_id(rec.rule->method()));
    } catch (const RuleGenerationFailed& e) {
      // The choice was still made even if the rest of the rule was unusable.
      rec.method_text = e.method_text();
      rec.failure_reason = e.what();
      if (e.method()) rec.bucket = std::string(cipher::method_id(*e.method()));
      else if (!e.method_text().empty()) rec.bucket = std::string(kOthersBucket);
      else rec.bucket = std::string(kFailedBucket);
    } catch (const Error& e) {
      rec.failure_reason = e.what();
      rec.bucket = std::string(kFailedBucket);
    }
    ++counts[rec.bucket];
    report.preference_records.push_back(std::move(rec));
  }

  for (const auto m : cipher::kAllMethods) {
    const std::string id(cipher::method_id(m));
    report.preference.emplace_back(id, counts[id]);
  }
  report.preference.emplace_back(std::string(kOthersBucket), counts[std::string(kOthersBucket)]);
  report.preference.emplace_back(std::string(kFailedBucket), counts[std::string(kFailedBucket)]);
  return report;
}

ExperimentReport run_ed(const ExperimentSpec& spec, Backend& backend) {
  return run_rounds(spec, backend, flows::Mode::ED);
}

ExperimentReport run_erd(const ExperimentSpec& spec, Backend& backend) {
  return run_rounds(spec, backend, flows::Mode::ERD);
}

ExperimentReport run_experiment(const ExperimentSpec& spec, Backend& backend) {
  switch (spec.experiment) {
    case ExperimentKind::Preference: return run_preference_survey(spec, backend);
    case ExperimentKind::ED: return run_ed(spec, backend);
    case ExperimentKind::ERD: return run_erd(spec, backend);
  }
  throw std::invalid_argument("unknown experiment kind");
}

}  // namespace cipherflow::harness
