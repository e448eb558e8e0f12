#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "odke/corpus/corpus.hpp"
#include "odke/kg/fact_log.hpp"
#include "odke/kg/graph.hpp"

namespace odke {

inline constexpr std::string_view kAllPredicates = "*";

enum class TaskReason { missing, stale, escalation, change_event, full_scan };

std::string_view to_string(TaskReason r);
TaskReason task_reason_from_string(std::string_view s);

// ⟨subject, predicate, url⟩ unit of work. Empty urls route to search retrieval.
struct ExtractionTask {
  EntityId subject;
  std::string subject_name;
  std::vector<Alias> subject_aliases;
  std::optional<EntityId> subject_type;
  std::string predicate;  // or kAllPredicates
  std::vector<std::string> urls;
  std::string language = "en";
  TaskReason reason = TaskReason::missing;
  Timestamp created_at{};
  std::optional<Timestamp> origin_event_time;

  bool search_based() const noexcept { return urls.empty(); }
  bool wildcard() const noexcept { return predicate == kAllPredicates; }
};

Json to_json(const ExtractionTask& t);
ExtractionTask task_from_json(const Json& j);

// Task database / escalation file: header {"schema":"odke.tasks","version":1}.
std::vector<ExtractionTask> load_tasks(const std::filesystem::path& path);
void save_tasks(const std::vector<ExtractionTask>& tasks, const std::filesystem::path& path);

struct Target {
  EntityId entity_type;
  std::string predicate;
  auto operator<=>(const Target&) const = default;
};

// One reason=missing task per (entity of the target type, predicate) with no
// latest-view value. Throws ValidationError on an unknown predicate.
std::vector<ExtractionTask> profile_gaps(const KnowledgeGraph& kg, const LatestView& view,
                                         const std::vector<Target>& targets, Timestamp now);

struct StalenessStats {
  std::size_t missing = 0;
  std::size_t stale = 0;
  std::vector<std::int64_t> lags_days;  // one per stale fact

  // Mean of lags_days; nullopt when no lag is defined.
  std::optional<double> mean_lag_days() const;
};

struct StalenessReport {
  std::map<Target, StalenessStats> per_target;
};

// Values the newest document states for (subject, predicate), already
// normalized. Supplied by the caller so the initiator stays independent of
// the extraction stack.
using DocumentValues =
    std::function<std::vector<Value>(const Document&, const EntityId&, const std::string&)>;

// A latest-view fact is stale when the subject's newest document (matched via
// sitelinks or subject_hint) states a value, none of its values equals the
// fact's value, and the document revision is newer than the fact's append time.
std::pair<std::vector<ExtractionTask>, StalenessReport> detect_stale(
    const KnowledgeGraph& kg, const LatestView& view, const Corpus& corpus,
    const std::vector<Target>& targets, const DocumentValues& document_values, Timestamp now);

struct EventTasks {
  std::vector<ExtractionTask> tasks;
  std::size_t skipped = 0;
};

// One wildcard change_event task per event whose url is in the corpus and maps
// to a known subject (document subject_hint, else a KG sitelink).
EventTasks tasks_from_events(const std::vector<ChangeEvent>& events, const Corpus& corpus,
                             const KnowledgeGraph& kg, Timestamp now);

}  // namespace odke
