#include "odke/initiator/initiator.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "odke/error.hpp"

namespace odke {

namespace {

constexpr std::array<std::string_view, 5> kReasonNames = {"missing", "stale", "escalation",
                                                          "change_event", "full_scan"};

ExtractionTask task_for_entity(const Entity& e, std::string predicate, TaskReason reason,
                               Timestamp now) {
  ExtractionTask t;
  t.subject = e.id;
  t.subject_name = e.canonical_name;
  t.subject_aliases = e.aliases;
  if (!e.types.empty()) t.subject_type = *e.types.begin();
  t.predicate = std::move(predicate);
  t.reason = reason;
  t.created_at = now;
  return t;
}

const Document* newest_document_for(const Entity& e, const Corpus& corpus) {
  const Document* best = nullptr;
  auto consider = [&](const Document* d) {
    if (d && (!best || d->revision_time > best->revision_time)) best = d;
  };
  for (const auto& url : e.sitelinks) consider(corpus.latest(url));
  if (!best)
    for (const Document* d : corpus.latest_documents())
      if (d->subject_hint == e.id) consider(d);
  return best;
}

}  // namespace

std::string_view to_string(TaskReason r) { return kReasonNames[static_cast<std::size_t>(r)]; }

TaskReason task_reason_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kReasonNames.size(); ++i)
    if (kReasonNames[i] == s) return static_cast<TaskReason>(i);
  throw ParseError("unknown task reason: " + std::string(s));
}

Json to_json(const ExtractionTask& t) {
  Json aliases = Json::array();
  for (const auto& a : t.subject_aliases)
    aliases.push_back(Json{{"name", a.name}, {"lang", a.language}});
  Json j{{"subject", t.subject.str()},
         {"name", t.subject_name},
         {"aliases", aliases},
         {"predicate", t.predicate},
         {"urls", t.urls},
         {"lang", t.language},
         {"reason", to_string(t.reason)},
         {"created_at", format_timestamp(t.created_at)}};
  if (t.subject_type) j["subject_type"] = t.subject_type->str();
  if (t.origin_event_time) j["origin_event_time"] = format_timestamp(*t.origin_event_time);
  return j;
}

ExtractionTask task_from_json(const Json& j) {
  ExtractionTask t;
  t.subject = EntityId(j.at("subject").get<std::string>());
  t.subject_name = j.value("name", std::string{});
  for (const auto& a : j.value("aliases", Json::array()))
    t.subject_aliases.push_back({a.at("name").get<std::string>(), a.value("lang", std::string{})});
  if (j.contains("subject_type")) t.subject_type = EntityId(j.at("subject_type").get<std::string>());
  t.predicate = j.at("predicate").get<std::string>();
  t.urls = j.value("urls", std::vector<std::string>{});
  t.language = j.value("lang", std::string("en"));
  t.reason = task_reason_from_string(j.value("reason", std::string("missing")));
  t.created_at = parse_timestamp(j.value("created_at", std::string("1970-01-01T00:00:00Z")));
  if (j.contains("origin_event_time"))
    t.origin_event_time = parse_timestamp(j.at("origin_event_time").get<std::string>());
  return t;
}

std::vector<ExtractionTask> load_tasks(const std::filesystem::path& path) {
  std::vector<ExtractionTask> out;
  NdjsonReader reader(path, "odke.tasks");
  Json record;
  while (reader.next(record)) {
    try {
      out.push_back(task_from_json(record));
    } catch (const std::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), reader.line(), reader.offset());
    }
  }
  return out;
}

void save_tasks(const std::vector<ExtractionTask>& tasks, const std::filesystem::path& path) {
  NdjsonWriter writer(path, make_header("odke.tasks", 1), /*truncate=*/true);
  for (const auto& t : tasks) writer.write(to_json(t));
  writer.flush();
}

std::vector<ExtractionTask> profile_gaps(const KnowledgeGraph& kg, const LatestView& view,
                                         const std::vector<Target>& targets, Timestamp now) {
  for (const auto& target : targets) kg.ontology().predicate(target.predicate);
  std::vector<ExtractionTask> tasks;
  for (const auto& target : targets) {
    for (const auto& id : kg.entities_of_type(target.entity_type)) {
      if (!view.by_subject_predicate(id, target.predicate).empty()) continue;
      auto task = task_for_entity(*kg.find(id), target.predicate, TaskReason::missing, now);
      task.subject_type = target.entity_type;
      tasks.push_back(std::move(task));
    }
  }
  return tasks;
}

std::optional<double> StalenessStats::mean_lag_days() const {
  if (lags_days.empty()) return std::nullopt;
  const double sum = std::accumulate(lags_days.begin(), lags_days.end(), 0.0);
  return sum / static_cast<double>(lags_days.size());
}

std::pair<std::vector<ExtractionTask>, StalenessReport> detect_stale(
    const KnowledgeGraph& kg, const LatestView& view, const Corpus& corpus,
    const std::vector<Target>& targets, const DocumentValues& document_values, Timestamp now) {
  std::vector<ExtractionTask> tasks;
  StalenessReport report;
  for (const auto& target : targets) {
    kg.ontology().predicate(target.predicate);
    auto& stats = report.per_target[target];
    for (const auto& id : kg.entities_of_type(target.entity_type)) {
      const Entity& entity = *kg.find(id);
      const auto current = view.by_subject_predicate(id, target.predicate);
      if (current.empty()) {
        ++stats.missing;
        continue;
      }
      const Document* doc = newest_document_for(entity, corpus);
      if (!doc) continue;
      const auto values = document_values(*doc, id, target.predicate);
      if (values.empty()) continue;
      for (const ViewEntry* entry : current) {
        if (doc->revision_time <= entry->appended_at) continue;
        const auto kg_value = canonical(entry->fact.object);
        const bool agrees = std::any_of(values.begin(), values.end(), [&](const Value& v) {
          return canonical(v) == kg_value;
        });
        if (agrees) continue;
        ++stats.stale;
        stats.lags_days.push_back(whole_days_between(entry->appended_at, doc->revision_time));
        auto task = task_for_entity(entity, target.predicate, TaskReason::stale, now);
        task.subject_type = target.entity_type;
        task.urls = {doc->url};
        task.language = doc->language;
        tasks.push_back(std::move(task));
        break;
      }
    }
  }
  return {std::move(tasks), std::move(report)};
}

EventTasks tasks_from_events(const std::vector<ChangeEvent>& events, const Corpus& corpus,
                             const KnowledgeGraph& kg, Timestamp now) {
  EventTasks out;
  for (const auto& event : events) {
    const Document* doc = corpus.latest(event.url);
    std::optional<EntityId> subject;
    if (doc) subject = doc->subject_hint ? doc->subject_hint : kg.entity_for_url(event.url);
    const Entity* entity = subject ? kg.find(*subject) : nullptr;
    if (!doc || !entity) {
      ++out.skipped;
      continue;
    }
    auto task = task_for_entity(*entity, std::string(kAllPredicates), TaskReason::change_event, now);
    task.urls = {event.url};
    task.language = doc->language;
    task.origin_event_time = event.event_time;
    out.tasks.push_back(std::move(task));
  }
  return out;
}

}  // namespace odke
