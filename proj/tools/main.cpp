#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cipherflow/deterministic_backend.hpp"
#include "cipherflow/harness/corpus.hpp"
#include "cipherflow/harness/experiment.hpp"
#include "cipherflow/llm/llm_backend.hpp"

namespace cf = cipherflow;
namespace harness = cipherflow::harness;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBelowThreshold = 3;

struct Options {
  std::string backend = "deterministic";
  std::uint64_t seed = 0;
  std::string methods = "all";
  int trials = 10;
  std::string corpus;
  std::string report_format = "json";
  std::string out;
  std::string config;
  bool llm_fills_numbers = false;
  std::optional<double> fail_under;
  std::string weights;
  std::string inject_fault;
  std::string fault_stage = "decrypt";
  std::string clock = "wall";
  std::string task = "letter-frequency";
  int jobs = 1;
  bool transcripts = false;
  // round only
  std::string text;
  std::string method;
  std::string mode = "erd";
  std::string channel_log;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

cf::cipher::CipherMethod parse_method(const std::string& name) {
  if (auto m = cf::cipher::method_from_id(name)) return *m;
  throw CLI::ValidationError("unknown cipher method: " + name);
}

std::vector<cf::cipher::CipherMethod> parse_methods(const std::string& list) {
  if (list == "all") return {cf::cipher::kAllMethods.begin(), cf::cipher::kAllMethods.end()};
  std::vector<cf::cipher::CipherMethod> out;
  for (const auto& name : split_list(list)) out.push_back(parse_method(name));
  return out;
}

// "1,1,1,1,1" in method order, or "Caesar=2,Atbash=1" with the rest zero.
cf::MethodSelector parse_weights(const std::string& text) {
  if (text.empty()) return cf::MethodSelector::uniform();
  std::array<double, 5> w{};
  const auto items = split_list(text);
  if (!items.empty() && items.front().find('=') == std::string::npos) {
    if (items.size() != w.size()) throw CLI::ValidationError("--weights needs five numbers");
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::stod(items[i]);
  } else {
    for (const auto& item : items) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw CLI::ValidationError("bad weight entry: " + item);
      w[static_cast<std::size_t>(parse_method(item.substr(0, eq)))] = std::stod(item.substr(eq + 1));
    }
  }
  return cf::MethodSelector::weighted(w);
}

cf::FaultInjectingBackend::Stage parse_stage(const std::string& s) {
  using Stage = cf::FaultInjectingBackend::Stage;
  if (s == "encrypt") return Stage::Encrypt;
  if (s == "decrypt") return Stage::Decrypt;
  if (s == "recipient") return Stage::Recipient;
  throw CLI::ValidationError("unknown fault stage: " + s);
}

// Owns whatever backend stack the options describe.
struct BackendStack {
  std::unique_ptr<cf::llm::Transport> transport;
  std::unique_ptr<cf::Backend> base;
  std::unique_ptr<cf::Backend> faulty;
  cf::Backend& get() { return faulty ? *faulty : *base; }
};

BackendStack make_backend(const Options& o) {
  BackendStack stack;
  if (o.backend == "deterministic") {
    stack.base = std::make_unique<cf::DeterministicBackend>();
  } else {
    cf::llm::LlmConfig config = o.config.empty() ? cf::llm::LlmConfig{} : cf::llm::load_config(o.config);
    if (o.llm_fills_numbers) config.llm_fills_numbers = true;
    if (config.fixture) {
      stack.transport = std::make_unique<cf::llm::FixtureTransport>(*config.fixture);
    } else {
      stack.transport = std::make_unique<cf::llm::HttpTransport>();
    }
    stack.base = std::make_unique<cf::llm::LlmBackend>(config, *stack.transport);
  }
  if (!o.inject_fault.empty()) {
    const auto methods = parse_methods(o.inject_fault);
    std::set<cf::FaultInjectingBackend::Stage> stages;
    for (const auto& s : split_list(o.fault_stage)) stages.insert(parse_stage(s));
    stack.faulty = std::make_unique<cf::FaultInjectingBackend>(
        *stack.base, std::set(methods.begin(), methods.end()), stages);
  }
  return stack;
}

cf::TaskSpec parse_task(const std::string& s) {
  if (s == "letter-frequency") return cf::TaskSpec::letter_frequency();
  if (s == "echo") return cf::TaskSpec::echo();
  throw CLI::ValidationError("unknown task: " + s);
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw harness::ReportIoError("cannot write " + path);
}

int run_experiment(harness::ExperimentKind kind, const Options& o) {
  harness::ExperimentSpec spec;
  spec.experiment = kind;
  spec.methods = parse_methods(o.methods);
  spec.trials = o.trials;
  spec.seed = o.seed;
  if (o.corpus.empty() || o.corpus == "built-in") {
    spec.corpus = harness::builtin_corpus();
  } else {
    spec.corpus = harness::load_corpus(o.corpus);
    spec.corpus_source = o.corpus;
  }
  spec.selector = parse_weights(o.weights);
  spec.task = parse_task(o.task);
  spec.clock = o.clock == "tick" ? harness::ClockKind::Tick : harness::ClockKind::Wall;
  spec.jobs = o.jobs;

  BackendStack backend = make_backend(o);
  const auto report = harness::run_experiment(spec, backend.get());
  const auto format =
      o.report_format == "markdown" ? harness::ReportFormat::Markdown : harness::ReportFormat::Json;
  if (o.out.empty() || o.out == "-") {
    std::cout << harness::render(report, format, o.transcripts);
  } else {
    harness::emit_report(report, format, o.out, o.transcripts);
  }

  if (o.fail_under) {
    const auto low = harness::min_pass_rate(report);
    if (low && *low < *o.fail_under) {
      std::cerr << "lowest pass rate " << *low << " is below " << *o.fail_under << "\n";
      return kExitBelowThreshold;
    }
  }
  return 0;
}

int run_single_round(const Options& o) {
  cf::flows::SessionOptions options;
  options.seed = o.seed;
  options.selector = o.method.empty() ? parse_weights(o.weights)
                                      : cf::MethodSelector::only(parse_method(o.method));
  options.task = parse_task(o.task);
  if (o.clock == "tick") options.clock = cf::flows::tick_clock_source(std::chrono::microseconds(100));

  BackendStack backend = make_backend(o);
  cf::flows::Session session(backend.get(), options);
  const auto mode = o.mode == "ed" ? cf::flows::Mode::ED : cf::flows::Mode::ERD;
  const auto record = session.run_round(o.text, mode);
  write_output(o.out, cf::flows::to_json(record, o.transcripts)
                              .dump(2, ' ', false, nlohmann::ordered_json::error_handler_t::replace) +
                          "\n");
  if (!o.channel_log.empty()) {
    write_output(o.channel_log, session.encrypted_flow().to_jsonl() + session.agent_flow().to_jsonl());
  }
  return 0;
}

// Prints the CLI11 message; --help stays a success.
int usage_error(const CLI::App& app, const CLI::Error& e) {
  const int rc = app.exit(e);
  return rc == 0 ? 0 : kExitUsage;
}

void add_common(CLI::App& app, Options& o) {
  app.add_option("--backend", o.backend, "Agent backend")
      ->check(CLI::IsMember({"deterministic", "llm"}))
      ->capture_default_str();
  app.add_option("--seed", o.seed, "Experiment seed")->capture_default_str();
  app.add_option("--config", o.config, "LLM settings file (JSON)")->check(CLI::ExistingFile);
  app.add_flag("--llm-fills-numbers", o.llm_fills_numbers,
               "Take key values from the model instead of the engine draw");
  app.add_option("--weights", o.weights,
                 "Method selector weights: five numbers, or Method=weight pairs");
  app.add_option("--inject-fault", o.inject_fault,
                 "Corrupt backend answers for these methods (comma list)");
  app.add_option("--fault-stage", o.fault_stage, "Stages to corrupt: encrypt, decrypt, recipient")
      ->capture_default_str();
  app.add_option("--clock", o.clock, "Stage timer")
      ->check(CLI::IsMember({"wall", "tick"}))
      ->capture_default_str();
  app.add_option("--task", o.task, "Recipient task")
      ->check(CLI::IsMember({"letter-frequency", "echo"}))
      ->capture_default_str();
  app.add_option("--out", o.out, "Output file (default stdout)");
  app.add_flag("--transcripts", o.transcripts, "Include agent transcripts in round records");
}

void add_experiment(CLI::App& app, Options& o) {
  add_common(app, o);
  app.add_option("--methods", o.methods, "Comma list of methods, or 'all'")->capture_default_str();
  app.add_option("--trials", o.trials, "Trials per method")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--corpus", o.corpus, "Plaintext file, one per line; default built-in");
  app.add_option("--report-format", o.report_format, "Report format")
      ->check(CLI::IsMember({"json", "markdown"}))
      ->capture_default_str();
  app.add_option("--fail-under", o.fail_under, "Exit 3 when any pass rate is below this")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--jobs", o.jobs, "Methods run in parallel")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent classical-cipher messaging harness"};
  app.require_subcommand(1);
  Options o;

  auto* pref = app.add_subcommand("preference", "Tally which method the rule agent picks");
  add_experiment(*pref, o);
  auto* ed = app.add_subcommand("ed", "Encrypt then decrypt, per method");
  add_experiment(*ed, o);
  auto* erd = app.add_subcommand("erd", "Encrypt, recipient task, decrypt, per method");
  add_experiment(*erd, o);
  auto* round = app.add_subcommand("round", "Run one round and print its record");
  add_common(*round, o);
  round->add_option("--text", o.text, "Plaintext")->required();
  round->add_option("--method", o.method, "Pin the cipher method");
  round->add_option("--mode", o.mode, "Round mode")
      ->check(CLI::IsMember({"ed", "erd"}))
      ->capture_default_str();
  round->add_option("--channel-log", o.channel_log, "Write both channel logs here as JSON lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return usage_error(app, e);
  }

  try {
    if (pref->parsed()) return run_experiment(harness::ExperimentKind::Preference, o);
    if (ed->parsed()) return run_experiment(harness::ExperimentKind::ED, o);
    if (erd->parsed()) return run_experiment(harness::ExperimentKind::ERD, o);
    return run_single_round(o);
  } catch (const CLI::Error& e) {
    return usage_error(app, e);
  } catch (const std::exception& e) {
    std::cerr << "cipherflow: " << e.what() << "\n";
    return kExitFailure;
  }
}
