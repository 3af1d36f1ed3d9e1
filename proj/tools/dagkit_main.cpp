// dagkit command line: index building, corpus mining, benchmark runs, reports
// and one-off invocation checks.

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dagkit/api_index.hpp"
#include "dagkit/bench.hpp"
#include "dagkit/corpus_miner.hpp"
#include "dagkit/errors.hpp"
#include "dagkit/http_backend.hpp"
#include "dagkit/invocation.hpp"
#include "dagkit/io.hpp"
#include "dagkit/mock_backend.hpp"

namespace fs = std::filesystem;
using namespace dagkit;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
  }
}

std::optional<BindMode> bind_mode_flag(const std::string& text) {
  if (text == "auto") return std::nullopt;
  return parse_bind_mode(text);
}

fs::path meta_path_for(const fs::path& results) { return fs::path(results.string() + ".meta.json"); }

struct IndexBuildArgs {
  std::string specs;
  std::string out;
};

struct MineArgs {
  std::string corpus;
  std::string index;
  std::string provider = "all";
  std::string out;
};

struct RunArgs {
  std::string tasks;
  std::string index;
  std::string mock;
  bool mock_chat = false;
  std::string endpoint;
  std::string model;
  bool chat = false;
  std::string api_key_env = "DAGKIT_API_KEY";
  int max_retries = 3;
  std::string policy = "dag++";
  double threshold = kDefaultConfidenceThreshold;
  std::size_t k = 1;
  double precision = 0.5;
  std::uint64_t seed = 0;
  bool pin_target_first = false;
  std::string augmentation = "desc-spec";
  std::string binding_mode = "auto";
  int max_new_tokens = kDefaultMaxNewTokens;
  std::size_t parallelism = 1;
  std::string out;
  std::string report;
  std::string format = "json";
  std::string plan_out;
};

struct ReportArgs {
  std::string results;
  std::string tasks;
  std::string index;
  std::string config;
  std::string format = "markdown";
  std::string out;
};

struct ValidateArgs {
  std::string index;
  std::vector<std::string> targets;
  std::string code;
  std::string code_file;
  std::string binding_mode = "auto";
};

int cmd_index_build(const IndexBuildArgs& a) {
  const ApiIndex index = ApiIndex::build(load_spec_file(a.specs));
  save_index_file(index, a.out);
  std::cerr << "indexed " << index.doc_count() << " APIs (" << index.provider_count(Provider::AWS) << " AWS, "
            << index.provider_count(Provider::Azure) << " Azure)\n";
  return 0;
}

int cmd_mine(const MineArgs& a) {
  const ApiIndex index = load_index_file(a.index);
  std::vector<ProviderFilter> filters;
  if (a.provider == "aws" || a.provider == "all") filters.push_back(ProviderFilter::aws());
  if (a.provider == "azure" || a.provider == "all") filters.push_back(ProviderFilter::azure());
  if (filters.empty()) throw ConfigError("--provider must be aws, azure or all");
  const auto records = mine(a.corpus, index, filters, [](const std::string& w) { std::cerr << "warning: " << w << "\n"; });
  emit(to_jsonl(records), a.out);
  return 0;
}

std::unique_ptr<Backend> make_backend(const RunArgs& a) {
  if (!a.mock.empty() && !a.endpoint.empty()) throw ConfigError("use either --mock or --endpoint, not both");
  if (!a.mock.empty()) return std::make_unique<MockBackend>(MockBackend::from_file(a.mock, a.mock_chat));
  if (a.endpoint.empty()) throw ConfigError("a backend is required: --mock FILE or --endpoint URL");
  HttpBackendConfig cfg;
  cfg.base_url = a.endpoint;
  cfg.model = a.model;
  cfg.chat = a.chat;
  cfg.api_key_env = a.api_key_env;
  cfg.max_retries = a.max_retries;
  return std::make_unique<HttpBackend>(cfg);
}

int cmd_run(const RunArgs& a) {
  const ApiIndex index = load_index_file(a.index);
  const std::vector<Task> tasks = load_tasks(a.tasks, index);
  RunConfig config;
  config.policy = {parse_policy_kind(a.policy), a.threshold};
  config.retriever.k = a.k;
  config.retriever.precision_x = a.precision;
  config.retriever.seed = a.seed;
  config.retriever.pin_target_first = a.pin_target_first;
  config.design = parse_augmentation_design(a.augmentation);
  config.bind_mode = bind_mode_flag(a.binding_mode);
  config.max_new_tokens = a.max_new_tokens;
  config.parallelism = a.parallelism;
  auto backend = make_backend(a);

  const BenchmarkRun run = run_benchmark(tasks, index, *backend, config);
  emit(traces_to_jsonl(run.traces), a.out);
  if (!a.out.empty() && a.out != "-") write_text_file(meta_path_for(a.out), config.echo().dump(2) + "\n");
  if (!a.plan_out.empty()) write_text_file(a.plan_out, run.plan.to_json().dump(2) + "\n");
  if (!a.report.empty()) {
    const Report report = aggregate(run.traces, tasks, config.echo());
    emit(emit_report(report, parse_report_format(a.format)), a.report);
  }
  std::size_t errored = 0;
  for (const auto& t : run.traces) errored += t.errored ? 1 : 0;
  std::cerr << "ran " << run.traces.size() << " tasks (" << errored << " errored)\n";
  return 0;
}

int cmd_report(const ReportArgs& a) {
  const ApiIndex index = load_index_file(a.index);
  const std::vector<Task> tasks = load_tasks(a.tasks, index);
  const std::vector<TaskTrace> traces = parse_traces_jsonl(read_text_file(a.results));
  nlohmann::json config = nlohmann::json::object();
  if (!a.config.empty()) {
    config = read_json_file(a.config);
  } else if (fs::exists(meta_path_for(a.results))) {
    config = read_json_file(meta_path_for(a.results));
  }
  emit(emit_report(aggregate(traces, tasks, config), parse_report_format(a.format)), a.out);
  return 0;
}

int cmd_validate(const ValidateArgs& a) {
  const ApiIndex index = load_index_file(a.index);
  std::string code = a.code;
  if (!a.code_file.empty()) code = read_text_file(a.code_file);
  const auto call = extract_first_call(code);
  const Verdict verdict = validate(call, a.targets, index, bind_mode_flag(a.binding_mode));
  std::cout << verdict_to_json(verdict, call).dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dagkit: API hallucination measurement and documentation-augmented generation"};
  app.require_subcommand(1);

  auto* index_cmd = app.add_subcommand("index", "API index operations");
  index_cmd->require_subcommand(1);
  IndexBuildArgs index_args;
  auto* build_cmd = index_cmd->add_subcommand("build", "Build an index file from a spec file");
  build_cmd->add_option("--specs", index_args.specs, "JSON array of API specs")->required();
  build_cmd->add_option("--out", index_args.out, "Index file to write")->required();

  MineArgs mine_args;
  auto* mine_cmd = app.add_subcommand("mine", "Count API name occurrences in a Python corpus");
  mine_cmd->add_option("--corpus", mine_args.corpus, "Corpus root directory")->required();
  mine_cmd->add_option("--index", mine_args.index, "Index file")->required();
  mine_cmd->add_option("--provider", mine_args.provider, "aws|azure|all")
      ->check(CLI::IsMember({"aws", "azure", "all"}));
  mine_cmd->add_option("--out", mine_args.out, "JSONL output (default stdout)");

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run the benchmark over a task file");
  run_cmd->add_option("--tasks", run_args.tasks, "Tasks JSONL")->required();
  run_cmd->add_option("--index", run_args.index, "Index file")->required();
  run_cmd->add_option("--mock", run_args.mock, "Mock backend script (JSON)");
  run_cmd->add_flag("--mock-chat", run_args.mock_chat, "Treat mock replies as chat replies (unwrap code fences)");
  run_cmd->add_option("--endpoint", run_args.endpoint, "HTTP backend base URL");
  run_cmd->add_option("--model", run_args.model, "Model name sent to the HTTP backend");
  run_cmd->add_flag("--chat", run_args.chat, "Use the chat endpoint with the instruct system prompt");
  run_cmd->add_option("--api-key-env", run_args.api_key_env, "Environment variable holding the API key");
  run_cmd->add_option("--max-retries", run_args.max_retries, "Transport retries per request");
  run_cmd->add_option("--policy", run_args.policy, "base|dag|index-lookup|confidence|dag++")
      ->check(CLI::IsMember({"base", "dag", "index-lookup", "confidence", "dag++"}));
  run_cmd->add_option("--threshold", run_args.threshold, "Confidence threshold");
  run_cmd->add_option("--k", run_args.k, "Number of retrieved documents");
  run_cmd->add_option("--precision", run_args.precision, "Fraction of tasks whose target doc is included");
  run_cmd->add_option("--seed", run_args.seed, "Seed for the inclusion plan");
  run_cmd->add_flag("--pin-target-first", run_args.pin_target_first, "Place the forced target document first");
  run_cmd->add_option("--augmentation", run_args.augmentation, "name-only|description|specification|desc-spec|full-doc")
      ->check(CLI::IsMember({"name-only", "description", "specification", "desc-spec", "full-doc"}));
  run_cmd->add_option("--binding-mode", run_args.binding_mode, "auto|keyword-only|positional-or-keyword")
      ->check(CLI::IsMember({"auto", "keyword-only", "positional-or-keyword"}));
  run_cmd->add_option("--max-new-tokens", run_args.max_new_tokens, "Generation cap");
  run_cmd->add_option("--parallelism", run_args.parallelism, "Concurrent tasks");
  run_cmd->add_option("--out", run_args.out, "Results JSONL (default stdout)");
  run_cmd->add_option("--report", run_args.report, "Also write a report here");
  run_cmd->add_option("--format", run_args.format, "Report format: json|markdown")
      ->check(CLI::IsMember({"json", "markdown"}));
  run_cmd->add_option("--plan-out", run_args.plan_out, "Write the inclusion plan (JSON)");

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Aggregate a results file");
  report_cmd->add_option("--results", report_args.results, "Results JSONL")->required();
  report_cmd->add_option("--tasks", report_args.tasks, "Tasks JSONL")->required();
  report_cmd->add_option("--index", report_args.index, "Index file")->required();
  report_cmd->add_option("--config", report_args.config, "Run config echo (default: <results>.meta.json)");
  report_cmd->add_option("--format", report_args.format, "json|markdown")->check(CLI::IsMember({"json", "markdown"}));
  report_cmd->add_option("--out", report_args.out, "Output file (default stdout)");

  ValidateArgs validate_args;
  auto* validate_cmd = app.add_subcommand("validate", "Judge one generated invocation");
  validate_cmd->add_option("--index", validate_args.index, "Index file")->required();
  validate_cmd->add_option("--targets", validate_args.targets, "Target API names")->required()->delimiter(',');
  auto* code_opt = validate_cmd->add_option("--code", validate_args.code, "Generated code");
  auto* file_opt = validate_cmd->add_option("--code-file", validate_args.code_file, "File with generated code");
  code_opt->excludes(file_opt);
  validate_cmd->add_option("--binding-mode", validate_args.binding_mode, "auto|keyword-only|positional-or-keyword")
      ->check(CLI::IsMember({"auto", "keyword-only", "positional-or-keyword"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*build_cmd) return cmd_index_build(index_args);
    if (*mine_cmd) return cmd_mine(mine_args);
    if (*run_cmd) return cmd_run(run_args);
    if (*report_cmd) return cmd_report(report_args);
    if (*validate_cmd) {
      if (validate_args.code.empty() && validate_args.code_file.empty()) {
        throw ConfigError("validate needs --code or --code-file");
      }
      return cmd_validate(validate_args);
    }
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
