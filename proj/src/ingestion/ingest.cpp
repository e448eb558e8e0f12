#include "odke/ingestion/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "odke/corroborator/corroborate.hpp"
#include "odke/extractors/extract.hpp"
#include "odke/worker_pool.hpp"

namespace odke {

IngestSummary& IngestSummary::operator+=(const IngestSummary& other) {
  const auto offset = appended + diverted + rejected + unchanged;
  appended += other.appended;
  diverted += other.diverted;
  rejected += other.rejected;
  unchanged += other.unchanged;
  for (auto i : other.diverted_indices) diverted_indices.push_back(offset + i);
  for (auto e : other.errors) {
    e.index += offset;
    errors.push_back(std::move(e));
  }
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  return *this;
}

Json to_json(const IngestSummary& s) {
  Json errors = Json::array();
  for (const auto& e : s.errors) errors.push_back({{"index", e.index}, {"message", e.message}});
  return {{"appended", s.appended},
          {"diverted", s.diverted},
          {"rejected", s.rejected},
          {"unchanged", s.unchanged},
          {"errors", errors}};
}

namespace {

bool same_fact(const Fact& a, const Fact& b) {
  return canonical(a.object) == canonical(b.object) && a.status == b.status &&
         a.confidence == b.confidence;
}

bool same_as_latest(const LatestView& view, const FactKey& key, const Fact& fact) {
  const ViewEntry* e = view.find(key);
  return e && same_fact(e->fact, fact);
}

}  // namespace

IngestSummary ingest_batch(std::span<const Fact> facts, KnowledgeGraph& kg, FactLog& log,
                           std::string_view run_id, Timestamp at) {
  IngestSummary summary;
  if (facts.empty()) return summary;
  const auto view = log.latest();
  const auto& ontology = kg.ontology();

  std::vector<Fact> pending;
  std::vector<std::size_t> pending_index;
  // Newest valid pending fact per key, so in-batch repeats behave as they would
  // when delivered one at a time.
  std::map<FactKey, std::size_t> pending_by_key;
  for (std::size_t i = 0; i < facts.size(); ++i) {
    Fact f = facts[i];
    if (f.status == FactStatus::candidate) f.status = FactStatus::auto_ingested;
    const Predicate* p = ontology.find_predicate(f.predicate);
    if (p && p->value_kind == ValueKind::entity_ref) {
      if (const auto* mention = std::get_if<Text>(&f.object)) {
        std::optional<EntityId> hint;
        if (!p->allowed_object_types.empty()) hint = *p->allowed_object_types.begin();
        try {
          const auto r = kg.resolve_entity(mention->text, {}, hint);
          if (r.outcome == ResolveOutcome::ambiguous) {
            ++summary.diverted;
            summary.diverted_indices.push_back(i);
            continue;
          }
          f.object = EntityRef{r.id};
        } catch (const std::exception& e) {
          ++summary.rejected;
          summary.errors.push_back({i, e.what()});
          continue;
        }
      }
    }
    if (p) {
      const auto key = make_key(f, ontology);
      auto it = pending_by_key.find(key);
      const bool unchanged = !is_tombstone(f.status) &&
                             (it != pending_by_key.end() ? same_fact(pending[it->second], f)
                                                         : same_as_latest(view, key, f));
      if (unchanged) {
        ++summary.unchanged;
        continue;
      }
      if (is_tombstone(f.status) || !check_fact(kg, f.subject, f.predicate, f.object))
        pending_by_key[key] = pending.size();
    }
    pending.push_back(std::move(f));
    pending_index.push_back(i);
  }

  if (!pending.empty()) {
    auto result = log.append(pending, run_id, at, kg);
    summary.appended = result.rows.size();
    summary.rejected += result.errors.size();
    for (auto& e : result.errors) {
      e.index = pending_index[e.index];
      summary.errors.push_back(std::move(e));
    }
    summary.rows = std::move(result.rows);
  }
  return summary;
}

std::string_view to_string(DeliveryMode m) { return m == DeliveryMode::batch ? "batch" : "stream"; }

double DeliveryRecord::latency_minutes() const {
  const auto from = origin_event_time.value_or(enqueued_at);
  return double((delivered_at - from).count()) / 60.0;
}

Json to_json(const DeliveryRecord& r) {
  Json j = {{"key", to_json(r.key)},
            {"version", r.version},
            {"mode", to_string(r.mode)},
            {"enqueued_at", format_timestamp(r.enqueued_at)},
            {"delivered_at", format_timestamp(r.delivered_at)}};
  if (r.origin_event_time) j["origin_event_time"] = format_timestamp(*r.origin_event_time);
  return j;
}

DeliveryRecord delivery_record_from_json(const Json& j) {
  DeliveryRecord r;
  r.key = fact_key_from_json(j.at("key"));
  r.version = j.at("version").get<std::uint64_t>();
  r.mode = j.value("mode", std::string("stream")) == "batch" ? DeliveryMode::batch
                                                             : DeliveryMode::stream;
  r.enqueued_at = parse_timestamp(j.at("enqueued_at").get<std::string>());
  r.delivered_at = parse_timestamp(j.at("delivered_at").get<std::string>());
  if (j.contains("origin_event_time"))
    r.origin_event_time = parse_timestamp(j.at("origin_event_time").get<std::string>());
  return r;
}

Json to_json(const SlaReport& r) {
  return {{"mode", to_string(r.mode)},       {"deliveries", r.deliveries},
          {"p50_minutes", r.p50_minutes},    {"p99_minutes", r.p99_minutes},
          {"max_minutes", r.max_minutes},    {"violations", r.violations},
          {"sla_minutes", r.sla_minutes}};
}

SlaReport compute_sla(const std::vector<DeliveryRecord>& records, double sla_minutes,
                      DeliveryMode mode) {
  SlaReport r;
  r.mode = mode;
  r.sla_minutes = sla_minutes;
  r.deliveries = records.size();
  if (records.empty()) return r;
  std::vector<double> lat;
  lat.reserve(records.size());
  for (const auto& rec : records) lat.push_back(rec.latency_minutes());
  std::sort(lat.begin(), lat.end());
  auto nearest_rank = [&](double pct) {
    auto rank = std::size_t(std::ceil(pct / 100.0 * double(lat.size())));
    rank = std::clamp<std::size_t>(rank, 1, lat.size());
    return lat[rank - 1];
  };
  r.p50_minutes = nearest_rank(50);
  r.p99_minutes = nearest_rank(99);
  r.max_minutes = lat.back();
  r.violations = std::size_t(std::count_if(lat.begin(), lat.end(),
                                           [&](double m) { return m > sla_minutes; }));
  return r;
}

Json to_json(const StreamItem& s) {
  Json j = {{"fact", to_json(s.fact)}, {"enqueued_at", format_timestamp(s.enqueued_at)}};
  if (s.origin_event_time) j["origin_event_time"] = format_timestamp(*s.origin_event_time);
  return j;
}

StreamItem stream_item_from_json(const Json& j) {
  StreamItem s;
  s.fact = fact_from_json(j.at("fact"));
  s.enqueued_at = parse_timestamp(j.at("enqueued_at").get<std::string>());
  if (j.contains("origin_event_time"))
    s.origin_event_time = parse_timestamp(j.at("origin_event_time").get<std::string>());
  return s;
}

StreamIngestor::StreamIngestor(KnowledgeGraph& kg, FactLog& log, const Clock& clock,
                               std::string run_id,
                               std::optional<std::filesystem::path> metrics_path)
    : kg_(kg), log_(log), clock_(clock), run_id_(std::move(run_id)) {
  if (metrics_path) metrics_.emplace(*metrics_path, make_header("odke.deliveries", 1));
}

IngestSummary StreamIngestor::deliver(const StreamItem& item) {
  auto s = ingest_batch(std::span<const Fact>(&item.fact, 1), kg_, log_, run_id_, clock_.now());
  const auto delivered = clock_.now();
  for (const auto& row : s.rows) {
    DeliveryRecord rec;
    rec.key = row.key;
    rec.version = row.version;
    rec.mode = DeliveryMode::stream;
    rec.enqueued_at = item.enqueued_at;
    rec.delivered_at = std::max(delivered, item.enqueued_at);
    rec.origin_event_time = item.origin_event_time;
    if (metrics_) {
      metrics_->write(to_json(rec));
      metrics_->flush();
    }
    records_.push_back(std::move(rec));
  }
  summary_ += s;
  return s;
}

IngestSummary StreamIngestor::drain_available(FactQueue& queue) {
  IngestSummary s;
  while (auto item = queue.try_pop()) s += deliver(*item);
  return s;
}

IngestSummary StreamIngestor::drain(FactQueue& queue) {
  IngestSummary s;
  while (auto item = queue.pop()) s += deliver(*item);
  return s;
}

SlaReport StreamIngestor::report(double sla_minutes) const {
  return compute_sla(records_, sla_minutes, DeliveryMode::stream);
}

SlaReport ingest_stream(FactQueue& queue, KnowledgeGraph& kg, FactLog& log, double sla_minutes,
                        const Clock& clock, std::string run_id) {
  StreamIngestor ingestor(kg, log, clock, std::move(run_id));
  ingestor.drain(queue);
  return ingestor.report(sla_minutes);
}

Json to_json(const ThroughputResult& r) {
  return {{"documents", r.documents},
          {"facts", r.facts},
          {"workers", r.workers},
          {"seconds", r.seconds},
          {"facts_per_minute", r.facts_per_minute}};
}

ThroughputResult measure_throughput(const Corpus& corpus, const RuleSet& rules,
                                    const KnowledgeGraph& kg, std::size_t workers,
                                    const LocaleRegistry* locales) {
  ThroughputResult r;
  r.workers = std::max<std::size_t>(1, workers);
  const auto docs = corpus.latest_documents();
  r.documents = docs.size();
  if (docs.empty()) return r;

  std::vector<std::size_t> counts(docs.size(), 0);
  ExtractContext ctx{"throughput", Timestamp{}, locales};
  const auto start = std::chrono::steady_clock::now();
  parallel_for(docs.size(), r.workers, [&](std::size_t i) {
    const Document& doc = *docs[i];
    auto subject = doc.subject_hint;
    if (!subject) subject = kg.entity_for_url(doc.url);
    if (!subject) return;
    std::size_t n = 0;
    for (const auto& c : extract_infobox(doc, rules, *subject, ctx))
      if (normalize(c, kg, locales).normalized) ++n;
    counts[i] = n;
  });
  const auto elapsed = std::chrono::steady_clock::now() - start;
  r.seconds = std::chrono::duration<double>(elapsed).count();
  for (auto n : counts) r.facts += n;
  r.facts_per_minute = r.seconds > 0 ? double(r.facts) / r.seconds * 60.0 : 0.0;
  return r;
}

}  // namespace odke
