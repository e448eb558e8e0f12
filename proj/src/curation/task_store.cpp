#include "odke/curation/curation.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <unistd.h>

namespace odke {

std::string_view to_string(TaskStatus s) { return s == TaskStatus::pending ? "pending" : "decided"; }

TaskStatus task_status_from_string(std::string_view s) {
  if (s == "pending") return TaskStatus::pending;
  if (s == "decided") return TaskStatus::decided;
  throw ValidationError("unknown task status '" + std::string(s) + "'");
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::accept: return "accept";
    case Verdict::reject_all: return "reject_all";
    case Verdict::amend: return "amend";
  }
  return "accept";
}

Verdict verdict_from_string(std::string_view s) {
  for (auto v : {Verdict::accept, Verdict::reject_all, Verdict::amend})
    if (to_string(v) == s) return v;
  throw ValidationError("unknown verdict '" + std::string(s) + "'");
}

Json to_json(const Decision& d) {
  Json j = {{"task_id", d.task_id},
            {"verdict", to_string(d.verdict)},
            {"curator_id", d.curator_id},
            {"decided_at", format_timestamp(d.decided_at)}};
  if (!d.cluster_id.empty()) j["cluster_id"] = d.cluster_id;
  if (d.amended) j["value"] = to_json(*d.amended);
  return j;
}

Decision decision_from_json(const Json& j) {
  Decision d;
  d.task_id = j.at("task_id").get<std::string>();
  d.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  d.cluster_id = j.value("cluster_id", std::string());
  if (j.contains("value")) d.amended = value_from_json(j.at("value"));
  d.curator_id = j.value("curator_id", std::string());
  d.decided_at = parse_timestamp(j.at("decided_at").get<std::string>());
  return d;
}

namespace {

Json to_json(const ClusterOption& c) {
  Json prov = Json::array();
  for (const auto& p : c.provenance) prov.push_back(odke::to_json(p));
  return {{"cluster_id", c.cluster_id}, {"value", odke::to_json(c.value)},
          {"display", display(c.value)}, {"score", c.score},
          {"rank", c.rank},             {"support", c.support},
          {"route", c.route},           {"provenance", prov},
          {"snippets", c.snippets}};
}

ClusterOption cluster_option_from_json(const Json& j) {
  ClusterOption c;
  c.cluster_id = j.at("cluster_id").get<std::string>();
  c.value = value_from_json(j.at("value"));
  c.score = j.value("score", 0.0);
  c.rank = j.value("rank", std::size_t{0});
  c.support = j.value("support", std::size_t{0});
  c.route = j.value("route", std::string());
  for (const auto& p : j.value("provenance", Json::array()))
    c.provenance.push_back(provenance_from_json(p));
  c.snippets = j.value("snippets", std::vector<std::string>{});
  return c;
}

Json to_json(const EntitySummary& e) {
  Json types = Json::array();
  for (const auto& t : e.types) types.push_back(t.str());
  Json facts = Json::array();
  for (const auto& f : e.facts) facts.push_back(odke::to_json(f));
  return {{"id", e.id.str()},  {"name", e.name},   {"aliases", e.aliases},
          {"types", types},    {"description", e.description}, {"facts", facts}};
}

EntitySummary entity_summary_from_json(const Json& j) {
  EntitySummary e;
  e.id = EntityId(j.at("id").get<std::string>());
  e.name = j.value("name", std::string());
  e.aliases = j.value("aliases", std::vector<std::string>{});
  for (const auto& t : j.value("types", Json::array())) e.types.emplace_back(t.get<std::string>());
  e.description = j.value("description", std::string());
  for (const auto& f : j.value("facts", Json::array())) e.facts.push_back(fact_from_json(f));
  return e;
}

}  // namespace

Json to_json(const CurationTask& t) {
  Json clusters = Json::array();
  for (const auto& c : t.clusters) clusters.push_back(to_json(c));
  Json j = {{"task_id", t.task_id},
            {"subject", to_json(t.subject)},
            {"predicate", t.predicate},
            {"clusters", clusters},
            {"status", to_string(t.status)},
            {"created_at", format_timestamp(t.created_at)},
            {"run_id", t.run_id}};
  if (t.decision) j["decision"] = to_json(*t.decision);
  return j;
}

CurationTask curation_task_from_json(const Json& j) {
  CurationTask t;
  t.task_id = j.at("task_id").get<std::string>();
  t.subject = entity_summary_from_json(j.at("subject"));
  t.predicate = j.at("predicate").get<std::string>();
  for (const auto& c : j.at("clusters")) t.clusters.push_back(cluster_option_from_json(c));
  t.status = task_status_from_string(j.value("status", std::string("pending")));
  t.created_at = parse_timestamp(j.at("created_at").get<std::string>());
  t.run_id = j.value("run_id", std::string());
  if (j.contains("decision")) t.decision = decision_from_json(j.at("decision"));
  return t;
}

TaskStore::TaskStore(std::filesystem::path journal) : path_(std::move(journal)) {
  const bool exists = std::filesystem::exists(path_) && std::filesystem::file_size(path_) > 0;
  if (exists) {
    NdjsonReader reader(path_, "odke.curation", 1);
    Json rec;
    while (reader.next(rec)) {
      try {
        if (rec.contains("task")) {
          auto t = curation_task_from_json(rec.at("task"));
          t.status = TaskStatus::pending;
          t.decision.reset();
          tasks_.emplace(t.task_id, std::move(t));
        } else if (rec.contains("decision")) {
          auto d = decision_from_json(rec.at("decision"));
          auto it = tasks_.find(d.task_id);
          if (it == tasks_.end())
            throw ParseError("decision for unknown task " + d.task_id, reader.line(),
                             reader.offset());
          if (it->second.status == TaskStatus::pending) {
            it->second.status = TaskStatus::decided;
            it->second.decision = std::move(d);
          }
        } else {
          throw ParseError("unknown journal record", reader.line(), reader.offset());
        }
      } catch (const Json::exception& e) {
        throw ParseError(path_.string() + ": " + e.what(), reader.line(), reader.offset());
      }
    }
  }
  file_ = std::fopen(path_.c_str(), "ab");
  if (!file_) throw Error("cannot open curation journal " + path_.string());
  if (!exists) write_locked(make_header("odke.curation", 1));
}

TaskStore::~TaskStore() {
  if (file_) std::fclose(file_);
}

void TaskStore::write_locked(const Json& record) {
  const auto line = record.dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0 ||
      ::fsync(::fileno(file_)) != 0)
    throw Error("cannot write curation journal " + path_.string());
}

bool TaskStore::add(CurationTask task) {
  std::lock_guard lock(mutex_);
  if (tasks_.count(task.task_id)) return false;
  if (task.clusters.empty()) throw ValidationError("task " + task.task_id + " has no clusters");
  task.status = TaskStatus::pending;
  task.decision.reset();
  write_locked(Json{{"task", to_json(task)}});
  auto id = task.task_id;
  tasks_.emplace(std::move(id), std::move(task));
  return true;
}

DecideResult TaskStore::decide(Decision d) {
  std::lock_guard lock(mutex_);
  DecideResult r;
  auto it = tasks_.find(d.task_id);
  if (it == tasks_.end()) {
    r.outcome = DecideOutcome::not_found;
    r.message = "no task " + d.task_id;
    return r;
  }
  auto& task = it->second;
  if (task.status == TaskStatus::decided) {
    r.outcome = DecideOutcome::conflict;
    r.message = "task already decided";
    r.winner = task.decision;
    return r;
  }
  if (d.verdict == Verdict::accept &&
      std::none_of(task.clusters.begin(), task.clusters.end(),
                   [&](const ClusterOption& c) { return c.cluster_id == d.cluster_id; })) {
    r.outcome = DecideOutcome::invalid;
    r.message = "accept must reference a cluster of the task";
    return r;
  }
  if (d.verdict == Verdict::amend && !d.amended) {
    r.outcome = DecideOutcome::invalid;
    r.message = "amend requires a value";
    return r;
  }
  if (d.verdict != Verdict::accept) d.cluster_id.clear();
  if (d.verdict != Verdict::amend) d.amended.reset();
  write_locked(Json{{"decision", to_json(d)}});
  task.status = TaskStatus::decided;
  task.decision = d;
  r.winner = std::move(d);
  return r;
}

std::optional<CurationTask> TaskStore::get(std::string_view task_id) const {
  std::lock_guard lock(mutex_);
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) return std::nullopt;
  return it->second;
}

std::vector<CurationTask> TaskStore::all() const {
  std::lock_guard lock(mutex_);
  std::vector<CurationTask> out;
  for (const auto& [id, t] : tasks_) out.push_back(t);
  return out;
}

std::vector<CurationTask> TaskStore::page(std::optional<TaskStatus> status, std::size_t page,
                                          std::size_t page_size, std::size_t* total) const {
  std::lock_guard lock(mutex_);
  std::vector<const CurationTask*> matching;
  for (const auto& [id, t] : tasks_)
    if (!status || t.status == *status) matching.push_back(&t);
  if (total) *total = matching.size();
  std::vector<CurationTask> out;
  if (page == 0 || page_size == 0) return out;
  const auto first = (page - 1) * page_size;
  for (auto i = first; i < matching.size() && i < first + page_size; ++i)
    out.push_back(*matching[i]);
  return out;
}

CurationStats TaskStore::stats() const {
  std::lock_guard lock(mutex_);
  CurationStats s;
  for (const auto& [id, t] : tasks_) {
    if (t.status == TaskStatus::pending) {
      ++s.pending;
    } else {
      ++s.decided;
      ++s.verdicts[std::string(to_string(t.decision->verdict))];
    }
  }
  return s;
}

std::size_t TaskStore::size() const {
  std::lock_guard lock(mutex_);
  return tasks_.size();
}

}  // namespace odke
