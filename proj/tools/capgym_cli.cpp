// capgym: challenge service, trace generation and evaluation.

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "capgym/eval/runner.hpp"
#include "capgym/render/render.hpp"
#include "capgym/service/server.hpp"
#include "capgym/trace/export.hpp"
#include "capgym/trace/pipeline.hpp"

namespace {

using namespace capgym;

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

EnvConfig load_env_config(const std::string& path) {
  return apply_env_overrides(load_config(path.empty() ? std::nullopt : std::optional<std::filesystem::path>(path)));
}

std::vector<ChallengeType> parse_types(const std::vector<std::string>& names) {
  std::vector<ChallengeType> out;
  for (const auto& arg : names) {
    std::stringstream ss(arg);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (name.empty()) continue;
      if (name == "all") {
        out.assign(kAllChallengeTypes.begin(), kAllChallengeTypes.end());
        continue;
      }
      const auto t = parse_challenge_type(name);
      if (!t) throw ConfigError("types", "unknown challenge type '" + name + "'");
      out.push_back(*t);
    }
  }
  if (out.empty()) out.assign(kAllChallengeTypes.begin(), kAllChallengeTypes.end());
  return out;
}

ChatOptions chat_options(const std::string& model, const std::string& key_env, int timeout_s) {
  ChatOptions c;
  if (!model.empty()) c.model = model;
  if (const char* key = std::getenv(key_env.c_str()); key && *key) c.api_key = key;
  c.timeout_s = timeout_s;
  return c;
}

int cmd_serve(const std::string& addr, const std::string& config, const std::string& schema_dir,
              const std::string& playground_dir) {
  auto env = Environment::make(load_env_config(config));
  ServiceOptions opts;
  if (!schema_dir.empty()) opts.schema_dir = schema_dir;
  if (!playground_dir.empty()) opts.playground_dir = playground_dir;
  Service service(std::move(env), opts);
  httplib::Server srv;
  service.register_routes(srv);
  service.start_sweeper();
  const auto [host, port] = parse_addr(addr);
  g_server = &srv;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on " << host << ":" << port << " (config " << config_hash(service.config()) << ")\n";
  if (!srv.listen(host, port)) {
    std::cerr << "error: cannot bind " << addr << "\n";
    return 1;
  }
  service.stop();
  return 0;
}

struct GenArgs {
  std::string kind = "solution";
  std::vector<std::string> types;
  std::size_t count = 10;
  std::uint64_t seed_base = 0;
  std::string expert = "mock";
  std::string expert_model;
  std::string student = "flawed";
  std::string student_model;
  std::string out = "traces";
  std::string config;
  int workers = 0;
  int max_in_flight = 4;
  int max_attempts = 3;
  int timeout_s = 120;
};

int cmd_gen_traces(const GenArgs& a) {
  if (a.kind != "solution" && a.kind != "correction") throw ConfigError("kind", "expected solution or correction");
  if (a.seed_base + a.count > kTrainSeedLimit) {
    throw ConfigError("seed_base", "training seeds must stay below " + std::to_string(kTrainSeedLimit));
  }
  const auto env = Environment::make(load_env_config(a.config));
  auto expert = make_expert(a.expert, chat_options(a.expert_model, "CAPGYM_EXPERT_API_KEY", a.timeout_s));
  std::vector<PipelineJob> jobs;
  for (auto t : parse_types(a.types)) {
    for (std::size_t i = 0; i < a.count; ++i) jobs.push_back({t, a.seed_base + i});
  }
  PipelineOptions opts;
  opts.workers = a.workers > 0 ? a.workers : default_workers();
  opts.max_in_flight = a.max_in_flight;
  opts.max_attempts = a.max_attempts;
  PipelineRun run;
  if (a.kind == "solution") {
    run = run_solution_pipeline(env, jobs, *expert, opts);
  } else {
    const auto student = make_student_factory(a.student, chat_options(a.student_model, "CAPGYM_AGENT_API_KEY", a.timeout_s));
    run = run_correction_pipeline(env, jobs, student, *expert, opts);
  }
  for (std::size_t i = 0; i < run.outcomes.size(); ++i) {
    const auto& o = run.outcomes[i];
    const std::string where = std::string(to_string(jobs[i].type)) + "/" + std::to_string(jobs[i].seed);
    if (!o.error.empty()) std::cerr << where << ": " << o.error << "\n";
    for (const auto& v : o.violations) std::cerr << where << ": rejected (" << v.code << ") " << v.message << "\n";
  }
  const auto manifest = export_dataset(run.records(), a.out);
  std::cout << "instances " << jobs.size() << ", records " << manifest.records << ", rejected "
            << run.count_rejected() << ", errors " << run.count_errors();
  if (a.kind == "correction") std::cout << ", student failures " << run.count_student_failures();
  std::cout << "\nwrote " << (std::filesystem::path(a.out) / kRecordsFile).string() << "\n";
  return 0;
}

struct EvalArgs {
  std::string agent = "oracle";
  std::string agent_model;
  std::size_t per_type = 100;
  std::uint64_t seed_base = kTestSeedBase;
  std::vector<std::string> types;
  std::string out = "report.json";
  std::string logs;
  std::string format = "text";
  std::string config;
  int workers = 0;
  int timeout_s = 120;
};

int cmd_eval(const EvalArgs& a) {
  const auto format = parse_report_format(a.format);
  if (!format) throw ConfigError("format", "expected text, json or markdown");
  if (a.seed_base < kTrainSeedLimit) {
    std::cerr << "warning: seed base " << a.seed_base << " overlaps the training seed range\n";
  }
  const auto env = Environment::make(load_env_config(a.config));
  const auto factory = make_agent_factory(a.agent, chat_options(a.agent_model, "CAPGYM_AGENT_API_KEY", a.timeout_s));
  const auto testset = build_testset(a.seed_base, a.per_type, parse_types(a.types));
  EvalOptions opts{a.workers > 0 ? a.workers : default_workers(), a.seed_base, a.per_type};
  const auto run = run_eval(env, factory, testset, opts);
  std::filesystem::path out(a.out);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  {
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw Error("cannot write " + out.string());
    f << render_report(run.report, ReportFormat::Json);
  }
  std::filesystem::path logs = a.logs.empty() ? std::filesystem::path(out).replace_extension(".logs.jsonl") : std::filesystem::path(a.logs);
  write_logs(run.logs, logs);
  std::cout << render_report(run.report, *format);
  std::cerr << "wrote " << out.string() << " and " << logs.string() << "\n";
  return 0;
}

int cmd_render(const std::string& type_name, std::uint64_t seed, const std::string& out, const std::string& config) {
  const auto t = parse_challenge_type(type_name);
  if (!t) throw ConfigError("type", "unknown challenge type '" + type_name + "'");
  const auto env = Environment::make(load_env_config(config));
  const auto inst = env.generate(*t, seed);
  const auto png = encode_png(render(inst.scene, *env.bank));
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + out);
  f.write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));
  std::cout << inst.instruction_text << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capgym: interactive CAPTCHA environment, trace generation and evaluation"};
  app.require_subcommand(1);

  auto* serve = app.add_subcommand("serve", "Run the challenge HTTP service");
  std::string addr = "127.0.0.1:8080", config, schema_dir, playground_dir;
  serve->add_option("--addr", addr, "host:port to bind")->capture_default_str();
  serve->add_option("--config", config, "environment config JSON");
  serve->add_option("--schema-dir", schema_dir, "directory served by /api/schema");
  serve->add_option("--playground-dir", playground_dir, "static files mounted at /playground");

  auto* gen = app.add_subcommand("gen-traces", "Generate reasoning traces and export a dataset");
  GenArgs g;
  gen->add_option("--kind", g.kind, "solution or correction")->check(CLI::IsMember({"solution", "correction"}))->capture_default_str();
  gen->add_option("--types", g.types, "challenge types (comma separated or repeated; default all)");
  gen->add_option("--count", g.count, "instances per type")->check(CLI::PositiveNumber)->capture_default_str();
  gen->add_option("--seed-base", g.seed_base, "first seed")->capture_default_str();
  gen->add_option("--expert", g.expert, "mock or a chat-completions URL")->capture_default_str();
  gen->add_option("--expert-model", g.expert_model, "model name sent to the expert endpoint");
  gen->add_option("--student", g.student, "correction student: flawed, random or remote:<url>")->capture_default_str();
  gen->add_option("--student-model", g.student_model, "model name for a remote student");
  gen->add_option("--out", g.out, "output directory")->capture_default_str();
  gen->add_option("--config", g.config, "environment config JSON");
  gen->add_option("--workers", g.workers, "worker threads (default: hardware concurrency)");
  gen->add_option("--max-in-flight", g.max_in_flight, "concurrent expert requests")->capture_default_str();
  gen->add_option("--max-attempts", g.max_attempts, "attempts per instance on expert failure")->capture_default_str();
  gen->add_option("--timeout", g.timeout_s, "HTTP timeout in seconds")->capture_default_str();

  auto* ev = app.add_subcommand("eval", "Evaluate an agent on a held-out instance set");
  EvalArgs e;
  ev->add_option("--agent", e.agent, "oracle, random, replay:<file> or remote:<url>")->capture_default_str();
  ev->add_option("--agent-model", e.agent_model, "model name for a remote agent");
  ev->add_option("--per-type", e.per_type, "instances per type")->check(CLI::PositiveNumber)->capture_default_str();
  ev->add_option("--seed-base", e.seed_base, "first seed")->capture_default_str();
  ev->add_option("--types", e.types, "challenge types (default all)");
  ev->add_option("--out", e.out, "JSON report path")->capture_default_str();
  ev->add_option("--logs", e.logs, "per-instance JSONL log (default: next to the report)");
  ev->add_option("--format", e.format, "stdout format: text, json or markdown")->capture_default_str();
  ev->add_option("--config", e.config, "environment config JSON");
  ev->add_option("--workers", e.workers, "parallel instances (default: hardware concurrency)");
  ev->add_option("--timeout", e.timeout_s, "HTTP timeout in seconds")->capture_default_str();

  auto* rend = app.add_subcommand("render", "Render one challenge to a PNG");
  std::string rtype = "text", rout = "challenge.png", rconfig;
  std::uint64_t rseed = 0;
  rend->add_option("--type", rtype, "challenge type")->capture_default_str();
  rend->add_option("--seed", rseed, "seed")->capture_default_str();
  rend->add_option("--out", rout, "output PNG")->capture_default_str();
  rend->add_option("--config", rconfig, "environment config JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (serve->parsed()) return cmd_serve(addr, config, schema_dir, playground_dir);
    if (gen->parsed()) return cmd_gen_traces(g);
    if (ev->parsed()) return cmd_eval(e);
    if (rend->parsed()) return cmd_render(rtype, rseed, rout, rconfig);
  } catch (const ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
