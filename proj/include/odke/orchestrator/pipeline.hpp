#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "odke/corpus/corpus.hpp"
#include "odke/corroborator/corroborate.hpp"
#include "odke/curation/curation.hpp"
#include "odke/extractors/model.hpp"
#include "odke/extractors/rules.hpp"
#include "odke/ingestion/ingest.hpp"
#include "odke/link_inference/link_inference.hpp"
#include "odke/orchestrator/config.hpp"
#include "odke/retriever/retriever.hpp"

namespace odke {

// Fatal failure of one pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message, bool validation = false)
      : Error(stage + ": " + message), stage_(std::move(stage)), validation_(validation) {}
  const std::string& stage() const noexcept { return stage_; }
  // Caused by invalid input (config, rules, data files) rather than a runtime fault.
  bool validation() const noexcept { return validation_; }

 private:
  std::string stage_;
  bool validation_;
};

// Everything a run needs, loaded once from a validated config.
struct Runtime {
  PipelineConfig config;
  std::unique_ptr<KnowledgeGraph> kg;
  Corpus corpus;
  RuleSet rules;
  std::vector<QueryTemplate> query_templates;
  QuestionTemplates questions;
  LocaleRegistry locales;
  std::vector<LinkInferenceRule> link_rules;
  std::unique_ptr<FactLog> log;
  std::unique_ptr<TaskStore> tasks;
  std::unique_ptr<ModelExtractorClient> model;
};

// Validates the config, creates work_dir and opens every artifact.
Runtime open_runtime(const PipelineConfig& config);

struct GoldenFact {
  EntityId subject;
  std::string predicate;
  Value value;
};

// Header {"schema":"odke.golden","version":1}; records {"subject","predicate","value"}.
std::vector<GoldenFact> load_golden(const std::filesystem::path& path);

struct GoldenComparison {
  std::size_t expected = 0;
  std::size_t actual = 0;
  std::size_t matched = 0;
  double precision = 0;
  double recall = 0;
  std::vector<std::string> missing;     // golden facts absent from the view
  std::vector<std::string> unexpected;  // view facts absent from the golden set

  bool exact() const noexcept { return missing.empty() && unexpected.empty(); }
};

GoldenComparison compare_golden(const LatestView& view, const std::vector<GoldenFact>& golden);

// Candidates for one (document, subject); `predicates` restricts the output.
std::vector<CandidateFact> extract_document(const Document& doc, const EntityId& subject,
                                            const RuleSet& rules, const ExtractContext& ctx,
                                            const std::optional<std::set<std::string>>& predicates);

struct CorroborationOutcome {
  std::vector<ScoredFact> scored;
  std::size_t normalization_failures = 0;
  std::size_t type_violations = 0;
  std::size_t clusters = 0;
};

// Deduplicates, normalizes, type-checks, clusters, scores and routes.
CorroborationOutcome corroborate(std::vector<CandidateFact> candidates, const KnowledgeGraph& kg,
                                 const ScoringConfig& scoring, const LocaleRegistry* locales);

struct RunReport {
  std::string run_id;
  std::map<std::string, std::size_t> tasks;  // by reason
  std::size_t search_tasks_without_template = 0;
  std::size_t documents = 0;
  std::size_t candidates = 0;
  std::size_t model_deferred = 0;
  std::size_t normalization_failures = 0;
  std::size_t type_violations = 0;
  std::size_t clusters = 0;
  std::map<std::string, std::size_t> routed;
  IngestSummary ingest;
  std::size_t curation_tasks = 0;
  std::size_t decisions_applied = 0;
  std::optional<GoldenComparison> golden;
  double extraction_seconds = 0;
  double facts_per_minute = 0;
  double elapsed_seconds = 0;
};

Json to_json(const RunReport& r);

RunReport run_batch(Runtime& rt, const Clock& clock);

struct StreamOptions {
  // Event index → extra minutes before the event becomes visible to polling.
  std::map<std::size_t, int> injected_delay_minutes;
};

struct StreamReport {
  SlaReport sla;
  IngestSummary ingest;
  std::size_t events = 0;
  std::size_t vandalism_filtered = 0;
  std::size_t events_skipped = 0;
  std::size_t polls = 0;
  std::size_t curation_tasks = 0;
  std::size_t filtered_by_priority = 0;
};

Json to_json(const StreamReport& r);

// Polls the feed on the configured interval of a simulated clock until it is
// exhausted; each poll's facts are delivered processing_minutes later.
StreamReport run_stream(Runtime& rt, ManualClock& clock, const StreamOptions& options = {});

struct InferenceReport {
  std::size_t inferred = 0;
  std::size_t corrections = 0;
  std::size_t missing_condition = 0;
  IngestSummary ingest;
};

Json to_json(const InferenceReport& r);

InferenceReport run_link_inference(Runtime& rt, Timestamp now);

// Header {"schema":"odke.facts","version":1}; one Fact per line. Ingested
// under run id "import".
IngestSummary import_facts(Runtime& rt, const std::filesystem::path& path, Timestamp now);

struct StatsReport {
  std::size_t entities = 0;
  std::size_t log_rows = 0;
  std::size_t view_facts = 0;
  std::map<std::string, std::size_t> by_status;
  std::map<std::string, std::size_t> by_predicate;
  std::size_t tasks_pending = 0;
  std::size_t tasks_decided = 0;
  std::size_t runs = 0;
};

Json to_json(const StatsReport& r);

StatsReport collect_stats(const Runtime& rt);

}  // namespace odke
