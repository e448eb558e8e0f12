#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "odke/corpus/corpus.hpp"
#include "odke/corroborator/corroborate.hpp"
#include "odke/ingestion/ingest.hpp"
#include "odke/kg/fact_log.hpp"

namespace odke {

enum class TaskStatus { pending, decided };
std::string_view to_string(TaskStatus s);
TaskStatus task_status_from_string(std::string_view s);

enum class Verdict { accept, reject_all, amend };
std::string_view to_string(Verdict v);
Verdict verdict_from_string(std::string_view s);

struct ClusterOption {
  std::string cluster_id;  // canonical value
  Value value;
  double score = 0;
  std::size_t rank = 0;
  std::size_t support = 0;
  std::string route;
  std::vector<Provenance> provenance;
  std::vector<std::string> snippets;  // evidence text around each span
};

struct EntitySummary {
  EntityId id;
  std::string name;
  std::vector<std::string> aliases;
  std::vector<EntityId> types;
  std::string description;
  std::vector<Fact> facts;  // existing KG facts, at most kContextFacts
};

struct Decision {
  std::string task_id;
  Verdict verdict = Verdict::accept;
  std::string cluster_id;        // accept
  std::optional<Value> amended;  // amend
  std::string curator_id;
  Timestamp decided_at{};
};

struct CurationTask {
  std::string task_id;
  EntitySummary subject;
  std::string predicate;
  std::vector<ClusterOption> clusters;  // rank order
  TaskStatus status = TaskStatus::pending;
  Timestamp created_at{};
  std::string run_id;
  std::optional<Decision> decision;
};

Json to_json(const Decision& d);
Decision decision_from_json(const Json& j);
Json to_json(const CurationTask& t);
CurationTask curation_task_from_json(const Json& j);

inline constexpr std::size_t kContextFacts = 5;
inline constexpr std::size_t kSnippetRadius = 80;

// Evidence text within kSnippetRadius bytes of the span, widened to UTF-8
// character boundaries; empty when the document is not in the corpus.
std::string provenance_snippet(const Corpus& corpus, const Provenance& p);

// One task per (subject, predicate) with at least one curation-routed
// cluster; every non-dropped cluster of that pair becomes an option.
std::vector<CurationTask> generate_tasks(const std::vector<ScoredFact>& scored,
                                         const KnowledgeGraph& kg, const LatestView& view,
                                         const Corpus& corpus, Timestamp now,
                                         std::string_view run_id);

enum class DecideOutcome { ok, not_found, conflict, invalid };

struct DecideResult {
  DecideOutcome outcome = DecideOutcome::ok;
  std::string message;
  std::optional<Decision> winner;  // set on ok and conflict
};

struct CurationStats {
  std::size_t pending = 0;
  std::size_t decided = 0;
  std::map<std::string, std::size_t> verdicts;
};

// Tasks and decisions journalled to an append-only file; replaying the journal
// rebuilds the store. Mutations are durable (fsync) before they return.
class TaskStore {
 public:
  explicit TaskStore(std::filesystem::path journal);
  ~TaskStore();
  TaskStore(const TaskStore&) = delete;
  TaskStore& operator=(const TaskStore&) = delete;

  // Returns false when the id already exists.
  bool add(CurationTask task);
  // First write wins.
  DecideResult decide(Decision decision);

  std::optional<CurationTask> get(std::string_view task_id) const;
  std::vector<CurationTask> all() const;
  std::vector<CurationTask> page(std::optional<TaskStatus> status, std::size_t page,
                                 std::size_t page_size, std::size_t* total = nullptr) const;
  CurationStats stats() const;
  std::size_t size() const;

 private:
  void write_locked(const Json& record);

  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  mutable std::mutex mutex_;
  std::map<std::string, CurationTask, std::less<>> tasks_;
};

struct ApplyResult {
  IngestSummary summary;
  std::size_t applied = 0;  // decisions that produced rows
  std::size_t skipped = 0;  // already applied
  std::vector<std::pair<std::string, std::string>> errors;  // task_id, message
};

// Appends the effect of each decision under run id "decision:<task_id>".
// accept → cluster value, confidence 1.0, curated_accepted; amend → amended
// value likewise, provenance keeps the cluster evidence plus the curator;
// reject_all → one curated_rejected tombstone per cluster value.
ApplyResult apply_decisions(const std::vector<Decision>& decisions, const TaskStore& store,
                            KnowledgeGraph& kg, FactLog& log, Timestamp at);

// Every decided task in the store.
ApplyResult apply_decisions(const TaskStore& store, KnowledgeGraph& kg, FactLog& log,
                            Timestamp at);

class CurationServer {
 public:
  CurationServer(TaskStore& store, const Clock& clock,
                 std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~CurationServer();

  // Binds and serves in a background thread; returns the bound port. Throws
  // Error when the port is busy.
  int start(const std::string& host, int port);
  // Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace odke
