#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odke/corpus/corpus.hpp"
#include "odke/extractors/rules.hpp"
#include "odke/ingestion/bounded_queue.hpp"
#include "odke/kg/fact_log.hpp"
#include "odke/kg/graph.hpp"
#include "odke/normalize/parse.hpp"
#include "odke/time.hpp"

namespace odke {

struct IngestSummary {
  std::size_t appended = 0;
  std::size_t diverted = 0;   // ambiguous entity resolution
  std::size_t rejected = 0;   // failed validation
  std::size_t unchanged = 0;  // identical to the latest view already
  std::vector<std::size_t> diverted_indices;
  std::vector<AppendError> errors;
  std::vector<VersionedFactRow> rows;

  std::size_t total() const noexcept { return appended + diverted + rejected + unchanged; }
  IngestSummary& operator+=(const IngestSummary& other);
};

Json to_json(const IngestSummary& s);

// Resolves textual objects of entity predicates (ambiguous → diverted), skips
// facts equal in value, status and confidence to the current latest version,
// and appends the rest. Candidate-status facts are stored as auto_ingested.
IngestSummary ingest_batch(std::span<const Fact> facts, KnowledgeGraph& kg, FactLog& log,
                           std::string_view run_id, Timestamp at);

enum class DeliveryMode { batch, stream };
std::string_view to_string(DeliveryMode m);

struct DeliveryRecord {
  FactKey key;
  std::uint64_t version = 0;
  DeliveryMode mode = DeliveryMode::stream;
  Timestamp enqueued_at{};
  Timestamp delivered_at{};
  std::optional<Timestamp> origin_event_time;

  double latency_minutes() const;  // from origin (or enqueue) to delivery
};

Json to_json(const DeliveryRecord& r);
DeliveryRecord delivery_record_from_json(const Json& j);

struct SlaReport {
  DeliveryMode mode = DeliveryMode::stream;
  std::size_t deliveries = 0;
  double p50_minutes = 0;
  double p99_minutes = 0;
  double max_minutes = 0;
  std::size_t violations = 0;
  double sla_minutes = 240;
};

Json to_json(const SlaReport& r);

// Nearest-rank percentiles over record latencies; a violation is latency > SLA.
SlaReport compute_sla(const std::vector<DeliveryRecord>& records, double sla_minutes,
                      DeliveryMode mode = DeliveryMode::stream);

struct StreamItem {
  Fact fact;
  Timestamp enqueued_at{};
  std::optional<Timestamp> origin_event_time;
};

Json to_json(const StreamItem& s);
StreamItem stream_item_from_json(const Json& j);

using FactQueue = BoundedQueue<StreamItem>;

// Single consumer that appends and delivers facts one at a time, stamping
// delivery with the supplied clock.
class StreamIngestor {
 public:
  StreamIngestor(KnowledgeGraph& kg, FactLog& log, const Clock& clock, std::string run_id,
                 std::optional<std::filesystem::path> metrics_path = std::nullopt);

  IngestSummary deliver(const StreamItem& item);
  // Delivers whatever is queued right now without waiting.
  IngestSummary drain_available(FactQueue& queue);
  // Delivers until the queue is closed and empty.
  IngestSummary drain(FactQueue& queue);

  const std::vector<DeliveryRecord>& records() const noexcept { return records_; }
  SlaReport report(double sla_minutes) const;
  const IngestSummary& summary() const noexcept { return summary_; }

 private:
  KnowledgeGraph& kg_;
  FactLog& log_;
  const Clock& clock_;
  std::string run_id_;
  std::optional<NdjsonWriter> metrics_;
  std::vector<DeliveryRecord> records_;
  IngestSummary summary_;
};

SlaReport ingest_stream(FactQueue& queue, KnowledgeGraph& kg, FactLog& log, double sla_minutes,
                        const Clock& clock, std::string run_id);

struct ThroughputResult {
  std::size_t documents = 0;
  std::size_t facts = 0;
  std::size_t workers = 1;
  double seconds = 0;
  double facts_per_minute = 0;
};

Json to_json(const ThroughputResult& r);

// Wall-clock rate of pattern extraction plus normalization over the latest
// revision of every document. Subjects come from the document's subject hint
// or the KG's sitelinks; documents with neither are skipped.
ThroughputResult measure_throughput(const Corpus& corpus, const RuleSet& rules,
                                    const KnowledgeGraph& kg, std::size_t workers,
                                    const LocaleRegistry* locales = nullptr);

}  // namespace odke
