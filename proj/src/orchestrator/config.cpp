#include "odke/orchestrator/config.hpp"

#include <fstream>

namespace odke {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::optional<std::filesystem::path> optional_path(const Json& j, const char* key,
                                                   const std::filesystem::path& base) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return resolve(base, j.at(key).get<std::string>());
}

}  // namespace

PipelineConfig config_from_json(const Json& j, const std::filesystem::path& base) {
  if (j.value("schema", "") != "odke.config" || j.value("version", 0) != 1)
    throw ParseError("config must declare schema odke.config version 1");
  PipelineConfig c;
  try {
    c.ontology = resolve(base, j.at("ontology").get<std::string>());
    c.entities = resolve(base, j.at("entities").get<std::string>());
    c.corpus = resolve(base, j.at("corpus").get<std::string>());
    c.feed = optional_path(j, "feed", base);
    for (const auto& r : j.value("rules", Json::array()))
      c.rules.push_back(resolve(base, r.get<std::string>()));
    c.link_rules = optional_path(j, "link_rules", base);
    c.query_templates = optional_path(j, "query_templates", base);
    c.question_templates = optional_path(j, "question_templates", base);
    c.locales = optional_path(j, "locales", base);
    c.golden = optional_path(j, "golden", base);
    c.escalations = optional_path(j, "escalations", base);
    c.work_dir = resolve(base, j.value("work_dir", std::string("work")));

    const auto mode = j.value("mode", std::string("batch"));
    if (mode != "batch" && mode != "stream") throw ValidationError("mode must be batch or stream");
    c.mode = mode == "stream" ? PipelineMode::stream : PipelineMode::batch;

    if (j.contains("scoring")) {
      const auto& s = j.at("scoring");
      c.scoring.auto_threshold = s.value("auto_threshold", c.scoring.auto_threshold);
      c.scoring.curation_floor = s.value("curation_floor", c.scoring.curation_floor);
      c.scoring.merge_threshold = s.value("merge_threshold", c.scoring.merge_threshold);
      const Json weights = s.value("base_weights", Json::object());
      for (const auto& [type, w] : weights.items())
        c.scoring.base_weights[type] = w.get<double>();
    }
    c.sla_minutes = j.value("sla_minutes", c.sla_minutes);
    c.poll_interval_minutes = j.value("poll_interval_minutes", c.poll_interval_minutes);
    c.processing_minutes = j.value("processing_minutes", c.processing_minutes);
    c.workers = j.value("workers", c.workers);
    c.search_k = j.value("search_k", c.search_k);
    c.languages = j.value("languages", c.languages);
    for (const auto& t : j.value("targets", Json::array()))
      c.targets.push_back({EntityId(t.at("entity_type").get<std::string>()),
                           t.at("predicate").get<std::string>()});
    c.stream_predicates = j.value("stream_predicates", c.stream_predicates);
    c.queue_capacity = j.value("queue_capacity", c.queue_capacity);
    c.full_scan = j.value("full_scan", c.full_scan);
    c.correction_min_confidence = j.value("correction_min_confidence", c.correction_min_confidence);
    if (j.contains("now")) c.now = parse_timestamp(j.at("now").get<std::string>());
    if (j.contains("model")) {
      const auto& m = j.at("model");
      ModelEndpoint e;
      e.host = m.value("host", e.host);
      e.port = m.at("port").get<int>();
      e.timeout = std::chrono::milliseconds(m.value("timeout_ms", 2000));
      c.model = e;
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

void PipelineConfig::validate() const {
  auto need = [](const std::filesystem::path& p, const char* what) {
    if (!std::filesystem::exists(p))
      throw ValidationError(std::string(what) + " not found: " + p.string());
  };
  need(ontology, "ontology");
  need(entities, "entities");
  need(corpus, "corpus");
  if (rules.empty()) throw ValidationError("no rule files configured");
  for (const auto& r : rules) need(r, "rules");
  if (feed) need(*feed, "feed");
  if (link_rules) need(*link_rules, "link rules");
  if (query_templates) need(*query_templates, "query templates");
  if (question_templates) need(*question_templates, "question templates");
  if (locales) need(*locales, "locales");
  if (golden) need(*golden, "golden set");
  if (escalations) need(*escalations, "escalations");
  if (mode == PipelineMode::stream && !feed) throw ValidationError("stream mode needs a feed");
  scoring.validate();
  if (!(sla_minutes > 0)) throw ValidationError("sla_minutes must be positive");
  if (poll_interval_minutes <= 0) throw ValidationError("poll_interval_minutes must be positive");
  if (processing_minutes < 0) throw ValidationError("processing_minutes must be >= 0");
  if (workers == 0) throw ValidationError("workers must be >= 1");
  if (search_k == 0) throw ValidationError("search_k must be >= 1");
  if (languages.empty()) throw ValidationError("no languages configured");
  if (queue_capacity == 0) throw ValidationError("queue_capacity must be >= 1");
  if (!(correction_min_confidence >= 0 && correction_min_confidence <= 1))
    throw ValidationError("correction_min_confidence outside [0,1]");
  if (!targets.empty() && !query_templates)
    throw ValidationError("targets need query_templates for search retrieval");
}

Json to_json(const PipelineConfig& c) {
  Json targets = Json::array();
  for (const auto& t : c.targets)
    targets.push_back({{"entity_type", t.entity_type.str()}, {"predicate", t.predicate}});
  Json rules = Json::array();
  for (const auto& r : c.rules) rules.push_back(r.string());
  Json j = {{"schema", "odke.config"},
            {"version", 1},
            {"ontology", c.ontology.string()},
            {"entities", c.entities.string()},
            {"corpus", c.corpus.string()},
            {"rules", rules},
            {"work_dir", c.work_dir.string()},
            {"mode", c.mode == PipelineMode::batch ? "batch" : "stream"},
            {"scoring",
             {{"auto_threshold", c.scoring.auto_threshold},
              {"curation_floor", c.scoring.curation_floor},
              {"merge_threshold", c.scoring.merge_threshold},
              {"base_weights", c.scoring.base_weights}}},
            {"sla_minutes", c.sla_minutes},
            {"poll_interval_minutes", c.poll_interval_minutes},
            {"processing_minutes", c.processing_minutes},
            {"workers", c.workers},
            {"search_k", c.search_k},
            {"languages", c.languages},
            {"targets", targets},
            {"stream_predicates", c.stream_predicates},
            {"queue_capacity", c.queue_capacity},
            {"full_scan", c.full_scan},
            {"correction_min_confidence", c.correction_min_confidence}};
  auto opt = [&](const char* key, const std::optional<std::filesystem::path>& p) {
    if (p) j[key] = p->string();
  };
  opt("feed", c.feed);
  opt("link_rules", c.link_rules);
  opt("query_templates", c.query_templates);
  opt("question_templates", c.question_templates);
  opt("locales", c.locales);
  opt("golden", c.golden);
  opt("escalations", c.escalations);
  if (c.now) j["now"] = format_timestamp(*c.now);
  if (c.model)
    j["model"] = {{"host", c.model->host},
                  {"port", c.model->port},
                  {"timeout_ms", c.model->timeout.count()}};
  return j;
}

}  // namespace odke
