#include "cipherflow/harness/report.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>

namespace cipherflow::harness {
namespace {

using ojson = nlohmann::ordered_json;

ojson timing_json(const MethodTiming& t, bool with_recipient) {
  ojson j;
  j["rule_gen"] = t.rule_gen;
  j["enc"] = t.enc;
  if (with_recipient) j["recipient"] = t.recipient;
  j["dec"] = t.dec;
  j["total"] = t.total;
  j["rounds"] = t.rounds;
  return j;
}

ojson rate_json(const std::optional<double>& rate) {
  return rate ? ojson(*rate) : ojson(nullptr);
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string seconds_cell(double v) { return fixed(v, 2) + "s"; }

std::string mark(const std::optional<double>& rate) {
  if (!rate) return "n/a";
  return *rate >= kPassThreshold ? "\xE2\x9C\x93" : "\xE2\x9C\x97";
}

std::string rate_cell(const std::optional<double>& rate) {
  return rate ? fixed(*rate, 2) : "n/a";
}

bool is_erd(const ExperimentReport& r) { return r.metadata.experiment == "erd"; }

void accumulate(MethodTiming& t, const flows::StageDurations& d) {
  t.rule_gen += d.rule_gen;
  t.enc += d.enc;
  t.recipient += d.recipient;
  t.dec += d.dec;
  t.total += d.total;
  ++t.rounds;
}

void finish_mean(MethodTiming& t) {
  if (t.rounds == 0) return;
  const auto n = static_cast<double>(t.rounds);
  t.rule_gen /= n;
  t.enc /= n;
  t.recipient /= n;
  t.dec /= n;
  t.total /= n;
}

}  // namespace

void aggregate_rounds(ExperimentReport& report) {
  std::stable_sort(report.records.begin(), report.records.end(),
                   [](const TrialRecord& a, const TrialRecord& b) {
                     return std::pair(a.method, a.trial) < std::pair(b.method, b.trial);
                   });
  report.success.clear();
  report.timing.clear();
  report.overall = {};

  std::map<cipher::CipherMethod, std::pair<std::size_t, std::size_t>> ed, erd;  // passed, run
  for (const auto& rec : report.records) {
    const auto& round = rec.round;
    auto& tally = round.mode == flows::Mode::ED ? ed[rec.method] : erd[rec.method];
    const bool ok = (round.mode == flows::Mode::ED ? round.status.ed_success
                                                   : round.status.erd_success)
                        .value_or(false);
    tally.first += ok ? 1 : 0;
    ++tally.second;
    ++report.success[rec.method].rounds;
    accumulate(report.timing[rec.method], round.durations);
    accumulate(report.overall, round.durations);
  }
  for (auto& [method, s] : report.success) {
    if (auto it = ed.find(method); it != ed.end()) {
      s.ed = static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
    }
    if (auto it = erd.find(method); it != erd.end()) {
      s.erd = static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
    }
  }
  for (auto& [_, t] : report.timing) finish_mean(t);
  finish_mean(report.overall);
}

std::optional<double> min_pass_rate(const ExperimentReport& report) {
  std::optional<double> low;
  const auto take = [&](const std::optional<double>& r) {
    if (r && (!low || *r < *low)) low = r;
  };
  for (const auto& [_, s] : report.success) {
    take(s.ed);
    take(s.erd);
  }
  return low;
}

std::string utc_timestamp_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::ordered_json to_json(const ExperimentReport& report, bool with_transcripts) {
  ojson j;
  j["schema_version"] = report.schema_version;

  const auto& m = report.metadata;
  ojson meta;
  meta["seed"] = m.seed;
  meta["backend"] = m.backend;
  meta["timestamp"] = m.timestamp;
  meta["experiment"] = m.experiment;
  meta["trials"] = m.trials;
  meta["methods"] = ojson::array();
  for (const auto method : m.methods) meta["methods"].push_back(std::string(cipher::method_id(method)));
  meta["corpus_source"] = m.corpus_source;
  meta["clock"] = m.clock;
  j["metadata"] = std::move(meta);

  const bool recipient = is_erd(report);
  ojson success = ojson::object();
  for (const auto& [method, s] : report.success) {
    success[std::string(cipher::method_id(method))] = {
        {"ed", rate_json(s.ed)}, {"erd", rate_json(s.erd)}, {"rounds", s.rounds}};
  }
  j["success_matrix"] = std::move(success);

  ojson timing = ojson::object();
  for (const auto& [method, t] : report.timing) {
    timing[std::string(cipher::method_id(method))] = timing_json(t, recipient);
  }
  j["timing"] = std::move(timing);
  j["overall_timing"] = report.overall.rounds ? timing_json(report.overall, recipient)
                                              : ojson(nullptr);

  ojson pref = ojson::object();
  for (const auto& [bucket, count] : report.preference) pref[bucket] = count;
  j["preference"] = std::move(pref);
  j["leakage_violations"] = report.leakage_violations;

  ojson records = ojson::array();
  for (const auto& rec : report.records) {
    ojson r;
    r["method"] = std::string(cipher::method_id(rec.method));
    r["trial"] = rec.trial;
    const ojson round = flows::to_json(rec.round, with_transcripts);
    for (const auto& [k, v] : round.items()) r[k] = v;
    records.push_back(std::move(r));
  }
  for (const auto& rec : report.preference_records) {
    ojson r;
    r["trial"] = rec.trial;
    r["bucket"] = rec.bucket;
    r["method_text"] = rec.method_text;
    r["rule"] = rec.rule ? rules::to_json(*rec.rule) : ojson(nullptr);
    r["failure_reason"] = rec.failure_reason;
    records.push_back(std::move(r));
  }
  j["records"] = std::move(records);
  return j;
}

std::string to_markdown(const ExperimentReport& report) {
  const auto& m = report.metadata;
  std::string out;
  out += "# Experiment report: " + m.experiment + "\n\n";
  out += "- seed: " + std::to_string(m.seed) + "\n";
  out += "- backend: " + m.backend + "\n";
  out += "- timestamp: " + m.timestamp + "\n";
  out += "- trials per method: " + std::to_string(m.trials) + "\n";
  out += "- corpus: " + m.corpus_source + "\n";
  out += "- clock: " + m.clock + "\n";

  if (!report.success.empty()) {
    out += "\n## Success matrix\n\n";
    out += "Pass mark: rate >= " + fixed(kPassThreshold, 2) + "\n\n";
    out += "| Method | E-D | E-R-D | E-D rate | E-R-D rate |\n";
    out += "|---|---|---|---|---|\n";
    for (const auto& [method, s] : report.success) {
      out += "| " + std::string(cipher::display_name(method)) + " | " + mark(s.ed) + " | " +
             mark(s.erd) + " | " + rate_cell(s.ed) + " | " + rate_cell(s.erd) + " |\n";
    }
  }

  if (!report.timing.empty()) {
    const bool recipient = is_erd(report);
    out += "\n## Mean time per stage\n\n";
    out += recipient ? "| Method | Rule Gen | Enc | Recipient | Dec | Total |\n|---|---|---|---|---|---|\n"
                     : "| Method | Rule Gen | Enc | Dec | Total |\n|---|---|---|---|---|\n";
    const auto row = [&](const std::string& name, const MethodTiming& t) {
      out += "| " + name + " | " + seconds_cell(t.rule_gen) + " | " + seconds_cell(t.enc) + " | ";
      if (recipient) out += seconds_cell(t.recipient) + " | ";
      out += seconds_cell(t.dec) + " | " + seconds_cell(t.total) + " |\n";
    };
    for (const auto& [method, t] : report.timing) row(std::string(cipher::display_name(method)), t);
    row("Overall", report.overall);
  }

  if (!report.preference.empty()) {
    std::size_t total = 0;
    for (const auto& [_, n] : report.preference) total += n;
    out += "\n## Rule preference\n\n| Method | Count | Share |\n|---|---|---|\n";
    for (const auto& [bucket, n] : report.preference) {
      const auto method = cipher::method_from_id(bucket);
      const std::string name = method ? std::string(cipher::display_name(*method)) : bucket;
      const double share = total ? static_cast<double>(n) / static_cast<double>(total) : 0.0;
      out += "| " + name + " | " + std::to_string(n) + " | " + fixed(share * 100, 1) + "% |\n";
    }
  }

  std::map<std::string, std::size_t> reasons;
  for (const auto& rec : report.records) {
    const auto& reason = rec.round.status.failure_reason;
    if (reason.empty()) continue;
    reasons[reason.substr(0, reason.find(':'))]++;
  }
  if (!report.records.empty()) {
    out += "\n## Failures\n\n";
    out += "- leakage violations: " + std::to_string(report.leakage_violations) + "\n";
    if (reasons.empty()) out += "- none\n";
    for (const auto& [reason, n] : reasons) out += "- " + reason + ": " + std::to_string(n) + "\n";
  }
  return out;
}

std::string render(const ExperimentReport& report, ReportFormat format, bool with_transcripts) {
  if (format == ReportFormat::Markdown) return to_markdown(report);
  return to_json(report, with_transcripts).dump(2, ' ', false, ojson::error_handler_t::replace) +
         "\n";
}

void emit_report(const ExperimentReport& report, ReportFormat format,
                 const std::filesystem::path& path, bool with_transcripts) {
  const std::string text = render(report, format, with_transcripts);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ReportIoError("cannot open report file " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw ReportIoError("failed writing report file " + path.string());
}

}  // namespace cipherflow::harness
