#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "odke/orchestrator/pipeline.hpp"

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2, kGoldenMismatch = 3 };

struct Flags {
  std::string config;
  std::string ontology, entities, corpus, feed, link_rules, query_templates, question_templates,
      locales, golden, escalations, work_dir, now;
  std::vector<std::string> rules;
  std::size_t workers = 0;
  std::size_t search_k = 0;
  double sla_minutes = 0;
  int poll_interval = 0;
  double auto_threshold = -1;
  double curation_floor = -1;
  std::string out;
};

void add_pipeline_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("-c,--config", f.config, "pipeline config file (its values override flags)");
  cmd->add_option("--ontology", f.ontology);
  cmd->add_option("--entities", f.entities);
  cmd->add_option("--corpus", f.corpus);
  cmd->add_option("--feed", f.feed);
  cmd->add_option("--rules", f.rules, "rule files");
  cmd->add_option("--link-rules", f.link_rules);
  cmd->add_option("--query-templates", f.query_templates);
  cmd->add_option("--question-templates", f.question_templates);
  cmd->add_option("--locales", f.locales, "directory of locale tables");
  cmd->add_option("--golden", f.golden);
  cmd->add_option("--escalations", f.escalations);
  cmd->add_option("--work-dir", f.work_dir);
  cmd->add_option("--workers", f.workers);
  cmd->add_option("--search-k", f.search_k);
  cmd->add_option("--sla-minutes", f.sla_minutes);
  cmd->add_option("--poll-interval", f.poll_interval, "minutes");
  cmd->add_option("--auto-threshold", f.auto_threshold);
  cmd->add_option("--curation-floor", f.curation_floor);
  cmd->add_option("--now", f.now, "fixed clock, YYYY-MM-DDTHH:MM:SSZ");
  cmd->add_option("-o,--out", f.out, "write the report here instead of stdout");
}

odke::Json flags_to_json(const Flags& f) {
  odke::Json j = {{"schema", "odke.config"}, {"version", 1}};
  auto str = [&](const char* key, const std::string& v) {
    if (!v.empty()) j[key] = v;
  };
  str("ontology", f.ontology);
  str("entities", f.entities);
  str("corpus", f.corpus);
  str("feed", f.feed);
  str("link_rules", f.link_rules);
  str("query_templates", f.query_templates);
  str("question_templates", f.question_templates);
  str("locales", f.locales);
  str("golden", f.golden);
  str("escalations", f.escalations);
  str("work_dir", f.work_dir);
  str("now", f.now);
  if (!f.rules.empty()) j["rules"] = f.rules;
  if (f.workers) j["workers"] = f.workers;
  if (f.search_k) j["search_k"] = f.search_k;
  if (f.sla_minutes > 0) j["sla_minutes"] = f.sla_minutes;
  if (f.poll_interval > 0) j["poll_interval_minutes"] = f.poll_interval;
  if (f.auto_threshold >= 0) j["scoring"]["auto_threshold"] = f.auto_threshold;
  if (f.curation_floor >= 0) j["scoring"]["curation_floor"] = f.curation_floor;
  return j;
}

constexpr const char* kPathKeys[] = {"ontology",       "entities",  "corpus",
                                     "feed",           "link_rules", "query_templates",
                                     "question_templates", "locales", "golden",
                                     "escalations",    "work_dir"};

void absolutize(odke::Json& j, const std::filesystem::path& base) {
  auto abs = [&](const std::string& p) {
    return std::filesystem::absolute(base / p).lexically_normal().string();
  };
  for (const char* key : kPathKeys)
    if (j.contains(key) && j[key].is_string()) j[key] = abs(j[key].get<std::string>());
  if (j.contains("rules"))
    for (auto& r : j["rules"]) r = abs(r.get<std::string>());
}

// Config file values override flags.
odke::PipelineConfig resolve_config(const Flags& f, odke::PipelineMode mode) {
  const auto cwd = std::filesystem::current_path();
  odke::Json merged = flags_to_json(f);
  absolutize(merged, cwd);
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw odke::ValidationError("cannot open config " + f.config);
    odke::Json file;
    try {
      file = odke::Json::parse(in);
    } catch (const odke::Json::exception& e) {
      throw odke::ValidationError(f.config + ": " + e.what());
    }
    if (!file.is_object()) throw odke::ValidationError(f.config + ": not a JSON object");
    const auto dir = std::filesystem::absolute(f.config).parent_path();
    absolutize(file, dir);
    for (auto& [k, v] : file.items()) {
      if (k == "scoring" && merged.contains("scoring")) {
        for (auto& [sk, sv] : v.items()) merged["scoring"][sk] = sv;
      } else {
        merged[k] = v;
      }
    }
    if (!merged.contains("work_dir")) merged["work_dir"] = (dir / "work").string();
  }
  merged["mode"] = mode == odke::PipelineMode::stream ? "stream" : "batch";
  return odke::config_from_json(merged, cwd);
}

void emit(const odke::Json& report, const std::string& out) {
  if (out.empty()) {
    std::cout << report.dump(2) << '\n';
    return;
  }
  std::ofstream file(out);
  file << report.dump(2) << '\n';
  if (!file) throw odke::Error("cannot write report " + out);
}

odke::Timestamp clock_start(const odke::PipelineConfig& c) {
  return c.now ? *c.now : odke::SystemClock().now();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open-domain knowledge extraction pipeline"};
  app.require_subcommand(1);

  Flags flags;
  auto* batch = app.add_subcommand("run-batch", "initiator → retriever → extractors → corroborator → ingestion");
  auto* stream = app.add_subcommand("run-stream", "replay the change feed on a simulated hourly poll");
  auto* infer = app.add_subcommand("infer-links", "apply link inference rules to the latest view");
  auto* materialize = app.add_subcommand("materialize", "write the latest view artifact");
  auto* serve = app.add_subcommand("serve", "curation HTTP API");
  auto* stats = app.add_subcommand("stats", "counts from the latest view and run metrics");
  auto* apply = app.add_subcommand("apply-decisions", "append decided curation tasks to the log");
  auto* import = app.add_subcommand("import", "ingest facts from an odke.facts file");
  for (auto* cmd : {batch, stream, infer, materialize, serve, stats, apply, import})
    add_pipeline_flags(cmd, flags);
  std::string facts_path;
  import->add_option("facts", facts_path, "odke.facts file")->required();

  std::string view_out;
  materialize->add_option("--view-out", view_out, "view path (default: <work_dir>/view.ndjson)");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  serve->add_option("--host", host);
  serve->add_option("--port", port);
  serve->add_option("--static-dir", static_dir, "curation UI assets");
  std::vector<std::size_t> delayed;
  int delay_minutes = 300;
  stream->add_option("--delay-event", delayed, "feed index of an event to hold back");
  stream->add_option("--delay-minutes", delay_minutes);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto mode = stream->parsed() ? odke::PipelineMode::stream : odke::PipelineMode::batch;
    auto config = resolve_config(flags, mode);
    odke::Runtime rt = odke::open_runtime(config);

    if (batch->parsed()) {
      odke::ManualClock clock(clock_start(config));
      const auto report = odke::run_batch(rt, clock);
      emit(odke::to_json(report), flags.out);
      if (report.golden && !report.golden->exact()) {
        std::cerr << "golden mismatch: " << report.golden->missing.size() << " missing, "
                  << report.golden->unexpected.size() << " unexpected\n";
        return kGoldenMismatch;
      }
    } else if (stream->parsed()) {
      odke::ManualClock clock(clock_start(config));
      odke::StreamOptions options;
      for (auto i : delayed) options.injected_delay_minutes[i] = delay_minutes;
      emit(odke::to_json(odke::run_stream(rt, clock, options)), flags.out);
    } else if (infer->parsed()) {
      const auto report = odke::run_link_inference(rt, clock_start(config));
      emit(odke::to_json(report), flags.out);
      std::cerr << "appended " << report.ingest.appended << '\n';
    } else if (materialize->parsed()) {
      const auto path = view_out.empty() ? config.view_path() : std::filesystem::path(view_out);
      const auto view = odke::materialize_latest(config.log_path());
      odke::write_view(view, path);
      emit({{"facts", view.size()}, {"path", path.string()}}, flags.out);
    } else if (stats->parsed()) {
      emit(odke::to_json(odke::collect_stats(rt)), flags.out);
    } else if (apply->parsed()) {
      const auto r = odke::apply_decisions(*rt.tasks, *rt.kg, *rt.log, clock_start(config));
      odke::Json errors = odke::Json::array();
      for (const auto& [task, msg] : r.errors) errors.push_back({{"task_id", task}, {"message", msg}});
      emit({{"applied", r.applied}, {"skipped", r.skipped}, {"ingest", odke::to_json(r.summary)},
            {"errors", errors}},
           flags.out);
    } else if (import->parsed()) {
      emit(odke::to_json(odke::import_facts(rt, facts_path, clock_start(config))), flags.out);
    } else if (serve->parsed()) {
      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);
      odke::SystemClock clock;
      std::optional<std::filesystem::path> assets;
      if (!static_dir.empty()) assets = static_dir;
      odke::CurationServer server(*rt.tasks, clock, assets);
      const int bound = server.start(host, port);
      std::cerr << "curation API listening on " << host << ":" << bound << '\n';
      int sig = 0;
      sigwait(&signals, &sig);
      server.stop();
    }
    return kOk;
  } catch (const odke::StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.validation() ? kValidation : kRuntime;
  } catch (const odke::ValidationError& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kValidation;
  } catch (const odke::ParseError& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
