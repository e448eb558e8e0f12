#include "odke/orchestrator/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "odke/worker_pool.hpp"

namespace odke {

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const ValidationError& e) {
    throw StageError(name, e.what(), true);
  } catch (const ParseError& e) {
    throw StageError(name, e.what(), true);
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::optional<EntityId> subject_of(const Document& doc, const KnowledgeGraph& kg) {
  if (doc.subject_hint) return doc.subject_hint;
  return kg.entity_for_url(doc.url);
}

std::string fact_label(const EntityId& s, std::string_view p, const Value& v) {
  return s.str() + " " + std::string(p) + " " + canonical(v);
}

}  // namespace

Runtime open_runtime(const PipelineConfig& config) {
  config.validate();
  Runtime rt;
  rt.config = config;
  std::filesystem::create_directories(config.work_dir);
  stage("load", [&] {
    rt.kg = std::make_unique<KnowledgeGraph>(load_ontology(config.ontology));
    for (auto& e : load_entities(config.entities)) rt.kg->add_entity(std::move(e));
    rt.kg->attach_journal(config.entity_journal_path());
    rt.corpus = load_corpus(config.corpus);
    rt.rules = compile_rules(config.rules, rt.kg->ontology());
    if (config.query_templates) rt.query_templates = load_query_templates(*config.query_templates);
    if (config.question_templates) rt.questions = load_question_templates(*config.question_templates);
    if (config.locales) rt.locales.load_directory(*config.locales);
    if (config.link_rules) rt.link_rules = load_link_rules(*config.link_rules, rt.kg->ontology());
    rt.log = std::make_unique<FactLog>(config.log_path());
    rt.tasks = std::make_unique<TaskStore>(config.curation_journal_path());
    if (config.model)
      rt.model = std::make_unique<HttpModelClient>(config.model->host, config.model->port,
                                                   config.model->timeout);
    return 0;
  });
  return rt;
}

std::vector<GoldenFact> load_golden(const std::filesystem::path& path) {
  NdjsonReader reader(path, "odke.golden", 1);
  std::vector<GoldenFact> out;
  Json j;
  while (reader.next(j)) {
    try {
      out.push_back({EntityId(j.at("subject").get<std::string>()),
                     j.at("predicate").get<std::string>(), value_from_json(j.at("value"))});
    } catch (const std::exception& e) {
      throw ParseError(e.what(), reader.line(), reader.offset());
    }
  }
  return out;
}

GoldenComparison compare_golden(const LatestView& view, const std::vector<GoldenFact>& golden) {
  std::set<std::string> expected;
  for (const auto& g : golden) expected.insert(fact_label(g.subject, g.predicate, g.value));
  std::set<std::string> actual;
  for (const auto& [key, e] : view.entries())
    actual.insert(fact_label(e.fact.subject, e.fact.predicate, e.fact.object));
  GoldenComparison c;
  c.expected = expected.size();
  c.actual = actual.size();
  std::set_difference(expected.begin(), expected.end(), actual.begin(), actual.end(),
                      std::back_inserter(c.missing));
  std::set_difference(actual.begin(), actual.end(), expected.begin(), expected.end(),
                      std::back_inserter(c.unexpected));
  c.matched = c.expected - c.missing.size();
  c.precision = c.actual ? double(c.matched) / double(c.actual) : (c.expected ? 0.0 : 1.0);
  c.recall = c.expected ? double(c.matched) / double(c.expected) : 1.0;
  return c;
}

std::vector<CandidateFact> extract_document(const Document& doc, const EntityId& subject,
                                            const RuleSet& rules, const ExtractContext& ctx,
                                            const std::optional<std::set<std::string>>& predicates) {
  auto out = extract_infobox(doc, rules, subject, ctx);
  auto links = extract_links(doc, rules, subject, ctx);
  out.insert(out.end(), std::make_move_iterator(links.begin()), std::make_move_iterator(links.end()));
  if (predicates)
    std::erase_if(out, [&](const CandidateFact& c) { return !predicates->count(c.predicate); });
  return out;
}

CorroborationOutcome corroborate(std::vector<CandidateFact> candidates, const KnowledgeGraph& kg,
                                 const ScoringConfig& scoring, const LocaleRegistry* locales) {
  CorroborationOutcome out;
  std::set<std::string> seen;
  std::vector<NormalizedCandidate> normalized;
  for (auto& c : candidates) {
    const auto identity = c.subject.str() + '\x1f' + c.predicate + '\x1f' + c.extractor_id + '\x1f' +
                          c.raw_span.source_url + '\x1f' + c.raw_span.revision_id + '\x1f' +
                          to_json(c.raw_span).dump() + '\x1f' + c.raw_text;
    if (!seen.insert(identity).second) continue;
    auto r = normalize(c, kg, locales);
    if (!r.normalized) {
      ++out.normalization_failures;
      continue;
    }
    const bool unresolved = std::holds_alternative<Text>(r.normalized->value) &&
                            kg.ontology().predicate(c.predicate).value_kind == ValueKind::entity_ref;
    if (!unresolved && check_fact(kg, c.subject, c.predicate, r.normalized->value)) {
      ++out.type_violations;
      continue;
    }
    normalized.push_back(std::move(*r.normalized));
  }
  auto clusters = cluster(std::move(normalized), scoring.merge_threshold);
  out.clusters = clusters.size();
  out.scored = score_and_rank(clusters, scoring, kg.ontology());
  return out;
}

Json to_json(const RunReport& r) {
  Json routed = Json::object();
  for (const auto& [k, v] : r.routed) routed[k] = v;
  Json j = {{"run_id", r.run_id},
            {"tasks", r.tasks},
            {"search_tasks_without_template", r.search_tasks_without_template},
            {"documents", r.documents},
            {"candidates", r.candidates},
            {"model_deferred", r.model_deferred},
            {"normalization_failures", r.normalization_failures},
            {"type_violations", r.type_violations},
            {"clusters", r.clusters},
            {"routed", routed},
            {"ingest", to_json(r.ingest)},
            {"curation_tasks", r.curation_tasks},
            {"decisions_applied", r.decisions_applied},
            {"extraction_seconds", r.extraction_seconds},
            {"facts_per_minute", r.facts_per_minute},
            {"elapsed_seconds", r.elapsed_seconds}};
  if (r.golden) {
    j["golden"] = {{"expected", r.golden->expected},   {"actual", r.golden->actual},
                   {"matched", r.golden->matched},     {"precision", r.golden->precision},
                   {"recall", r.golden->recall},       {"missing", r.golden->missing},
                   {"unexpected", r.golden->unexpected}};
  }
  return j;
}

namespace {

struct WorkUnit {
  EntityId subject;
  const Document* doc = nullptr;
  bool all = false;
  std::set<std::string> predicates;
  std::vector<std::string> model_predicates;

  std::optional<std::set<std::string>> filter() const {
    if (all) return std::nullopt;
    return predicates;
  }
};

void add_unit(std::map<std::tuple<std::string, std::string, std::string>, WorkUnit>& units,
              const EntityId& subject, const Document* doc, const std::string& predicate,
              bool model) {
  auto& u = units[{subject.str(), doc->url, doc->revision_id}];
  u.subject = subject;
  u.doc = doc;
  if (predicate == kAllPredicates) {
    u.all = true;
    return;
  }
  u.predicates.insert(predicate);
  if (model && std::find(u.model_predicates.begin(), u.model_predicates.end(), predicate) ==
                   u.model_predicates.end())
    u.model_predicates.push_back(predicate);
}

}  // namespace

RunReport run_batch(Runtime& rt, const Clock& clock) {
  const auto started = std::chrono::steady_clock::now();
  auto& kg = *rt.kg;
  const auto& cfg = rt.config;
  const auto now = clock.now();
  RunReport report;
  report.run_id = "batch-" + format_timestamp(now);
  const LocaleRegistry* locales = &rt.locales;

  report.decisions_applied = stage("curation", [&] {
    return apply_decisions(*rt.tasks, kg, *rt.log, now).applied;
  });

  // Initiator.
  std::vector<ExtractionTask> tasks = stage("initiator", [&] {
    std::vector<ExtractionTask> all;
    const std::set<std::string> languages(cfg.languages.begin(), cfg.languages.end());
    if (cfg.full_scan) {
      for (const Document* doc : rt.corpus.latest_documents()) {
        if (!languages.count(doc->language)) continue;
        auto subject = subject_of(*doc, kg);
        if (!subject || !kg.find(*subject)) continue;
        ExtractionTask t;
        t.subject = *subject;
        t.subject_name = kg.find(*subject)->canonical_name;
        t.predicate = std::string(kAllPredicates);
        t.urls = {doc->url};
        t.language = doc->language;
        t.reason = TaskReason::full_scan;
        t.created_at = now;
        all.push_back(std::move(t));
      }
    }
    const auto view = rt.log->latest();
    if (!cfg.targets.empty()) {
      for (auto& t : profile_gaps(kg, view, cfg.targets, now)) all.push_back(std::move(t));
      ExtractContext ctx{report.run_id, now, locales};
      auto values = [&](const Document& doc, const EntityId& subject, const std::string& p) {
        std::vector<Value> out;
        for (const auto& c : extract_document(doc, subject, rt.rules, ctx, std::set{p}))
          if (auto n = normalize(c, kg, locales); n.normalized) out.push_back(n.normalized->value);
        return out;
      };
      auto [stale, stats] = detect_stale(kg, view, rt.corpus, cfg.targets, values, now);
      for (auto& t : stale) all.push_back(std::move(t));
    }
    if (cfg.escalations)
      for (auto& t : load_tasks(*cfg.escalations)) all.push_back(std::move(t));
    return all;
  });
  for (const auto& t : tasks) ++report.tasks[std::string(to_string(t.reason))];

  // Retriever.
  std::map<std::tuple<std::string, std::string, std::string>, WorkUnit> unit_map;
  stage("retriever", [&] {
    std::optional<SearchIndex> index;
    for (const auto& task : tasks) {
      const bool model = rt.model && !task.wildcard() && rt.questions.find(task.predicate, task.language);
      if (!task.search_based()) {
        for (const Document* doc : retrieve_crawl(task, rt.corpus).documents)
          add_unit(unit_map, task.subject, doc, task.predicate, model);
        continue;
      }
      std::vector<std::string> queries;
      try {
        queries = generate_queries(task, rt.query_templates);
      } catch (const ValidationError&) {
        ++report.search_tasks_without_template;
        continue;
      }
      if (!index) index = SearchIndex::build(rt.corpus);
      std::set<std::string> urls;
      for (const auto& q : queries)
        for (const auto& hit : index->search(q, cfg.search_k)) urls.insert(hit.url);
      for (const auto& url : urls) {
        const Document* doc = rt.corpus.latest(url);
        if (!doc) continue;
        auto subject = subject_of(*doc, kg);
        if (subject && *subject == task.subject)
          add_unit(unit_map, task.subject, doc, task.predicate, model);
      }
    }
    return 0;
  });
  std::vector<WorkUnit> units;
  for (auto& [k, u] : unit_map) units.push_back(std::move(u));
  report.documents = units.size();

  // Extractors.
  const auto extraction_start = std::chrono::steady_clock::now();
  std::vector<std::vector<CandidateFact>> per_unit(units.size());
  std::vector<std::size_t> deferred(units.size(), 0);
  stage("extractors", [&] {
    ExtractContext ctx{report.run_id, now, locales};
    parallel_for(units.size(), cfg.workers, [&](std::size_t i) {
      const auto& u = units[i];
      per_unit[i] = extract_document(*u.doc, u.subject, rt.rules, ctx, u.filter());
    });
    // The model client is called serially.
    for (std::size_t i = 0; i < units.size(); ++i) {
      const auto& u = units[i];
      if (!rt.model) break;
      for (const auto& p : u.model_predicates) {
        ExtractionTask t;
        t.subject = u.subject;
        t.subject_name = kg.find(u.subject) ? kg.find(u.subject)->canonical_name : u.subject.str();
        t.predicate = p;
        t.language = u.doc->language;
        std::vector<PassageRef> passages;
        for (const auto& passage : u.doc->passages) passages.push_back({u.doc, &passage});
        auto r = model_extract(*rt.model, rt.questions, kg.ontology(), t, passages, ctx);
        if (r.deferred) ++deferred[i];
        for (auto& c : r.candidates) per_unit[i].push_back(std::move(c));
      }
    }
    return 0;
  });
  std::vector<CandidateFact> candidates;
  for (auto& v : per_unit)
    candidates.insert(candidates.end(), std::make_move_iterator(v.begin()),
                      std::make_move_iterator(v.end()));
  for (auto d : deferred) report.model_deferred += d;
  report.candidates = candidates.size();
  report.extraction_seconds = seconds_since(extraction_start);
  report.facts_per_minute =
      report.extraction_seconds > 0 ? double(report.candidates) / report.extraction_seconds * 60.0 : 0;

  // Corroborator.
  auto outcome = stage("corroborator", [&] {
    return corroborate(std::move(candidates), kg, cfg.scoring, locales);
  });
  report.normalization_failures = outcome.normalization_failures;
  report.type_violations = outcome.type_violations;
  report.clusters = outcome.clusters;

  // Ingestion.
  stage("ingestion", [&] {
    std::vector<Fact> facts;
    std::vector<std::size_t> origin;
    for (std::size_t i = 0; i < outcome.scored.size(); ++i) {
      const auto& s = outcome.scored[i];
      if (s.route != Route::auto_ingest) continue;
      facts.push_back(s.fact);
      origin.push_back(i);
    }
    report.ingest = ingest_batch(facts, kg, *rt.log, report.run_id, now);
    for (auto i : report.ingest.diverted_indices) outcome.scored[origin[i]].route = Route::curation;
    return 0;
  });
  for (const auto& s : outcome.scored) ++report.routed[std::string(to_string(s.route))];

  // Curation tasks and report.
  const auto view = rt.log->latest();
  report.curation_tasks = stage("curation", [&] {
    std::size_t added = 0;
    for (auto& t : generate_tasks(outcome.scored, kg, view, rt.corpus, now, report.run_id))
      if (rt.tasks->add(std::move(t))) ++added;
    return added;
  });
  stage("report", [&] {
    write_view(view, cfg.view_path());
    if (cfg.golden) report.golden = compare_golden(view, load_golden(*cfg.golden));
    return 0;
  });
  report.elapsed_seconds = seconds_since(started);
  NdjsonWriter metrics(cfg.metrics_path(), make_header("odke.runs", 1));
  metrics.write(Json{{"batch", to_json(report)}});
  return report;
}

Json to_json(const StreamReport& r) {
  return {{"sla", to_json(r.sla)},
          {"ingest", to_json(r.ingest)},
          {"events", r.events},
          {"vandalism_filtered", r.vandalism_filtered},
          {"events_skipped", r.events_skipped},
          {"polls", r.polls},
          {"curation_tasks", r.curation_tasks},
          {"filtered_by_priority", r.filtered_by_priority}};
}

StreamReport run_stream(Runtime& rt, ManualClock& clock, const StreamOptions& options) {
  const auto& cfg = rt.config;
  auto& kg = *rt.kg;
  StreamReport report;
  const Feed feed = stage("feed", [&] { return load_feed(*cfg.feed); });
  const auto& events = feed.events();
  report.events = events.size();
  if (events.empty()) {
    report.sla = compute_sla({}, cfg.sla_minutes);
    return report;
  }

  // Visibility time per event, after injected delays.
  std::vector<std::pair<Timestamp, std::size_t>> arrivals;
  for (std::size_t i = 0; i < events.size(); ++i) {
    auto t = events[i].event_time;
    if (auto it = options.injected_delay_minutes.find(i); it != options.injected_delay_minutes.end())
      t += Minutes(it->second);
    arrivals.emplace_back(t, i);
  }
  std::stable_sort(arrivals.begin(), arrivals.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  const Minutes interval(cfg.poll_interval_minutes);
  const auto first = arrivals.front().first;
  auto tick = Timestamp(std::chrono::floor<Minutes>(first.time_since_epoch()) -
                        std::chrono::floor<Minutes>(first.time_since_epoch()) % interval);
  if (tick < first) tick += interval;

  const std::set<std::string> priority(cfg.stream_predicates.begin(), cfg.stream_predicates.end());
  FactQueue queue(cfg.queue_capacity,
                  FactQueue::Spill{cfg.work_dir / "queue.spill", [](const StreamItem& s) { return to_json(s); },
                                   [](const Json& j) { return stream_item_from_json(j); }});
  StreamIngestor ingestor(kg, *rt.log, clock, "stream", cfg.deliveries_path());

  std::size_t next = 0;
  while (next < arrivals.size()) {
    clock.set(tick);
    ++report.polls;
    std::vector<ChangeEvent> batch;
    while (next < arrivals.size() && arrivals[next].first <= tick)
      batch.push_back(events[arrivals[next++].second]);
    const auto clean = filter_vandalism(batch);
    report.vandalism_filtered += batch.size() - clean.size();

    std::vector<ScoredFact> curation;
    for (const auto& event : clean) {
      try {
        const auto et = tasks_from_events({event}, rt.corpus, kg, tick);
        if (et.tasks.empty()) {
          ++report.events_skipped;
          continue;
        }
        const auto& task = et.tasks.front();
        const Document* doc = rt.corpus.find(event.url, event.revision_id);
        if (!doc) doc = rt.corpus.latest(event.url);
        ExtractContext ctx{"stream-" + format_timestamp(tick), tick, &rt.locales};
        auto outcome = corroborate(extract_document(*doc, task.subject, rt.rules, ctx, std::nullopt),
                                   kg, cfg.scoring, &rt.locales);
        for (auto& s : outcome.scored) {
          if (s.route == Route::curation) curation.push_back(s);
          if (s.route != Route::auto_ingest) continue;
          if (!priority.empty() && !priority.count(s.fact.predicate)) {
            ++report.filtered_by_priority;
            continue;
          }
          queue.push(StreamItem{std::move(s.fact), tick, event.event_time});
        }
      } catch (const std::exception&) {
        ++report.events_skipped;
      }
    }
    clock.advance(Minutes(cfg.processing_minutes));
    ingestor.drain_available(queue);
    for (auto& t : generate_tasks(curation, kg, rt.log->latest(), rt.corpus, clock.now(), "stream"))
      if (rt.tasks->add(std::move(t))) ++report.curation_tasks;
    tick += interval;
  }
  queue.close();
  ingestor.drain(queue);
  report.ingest = ingestor.summary();
  report.sla = ingestor.report(cfg.sla_minutes);
  NdjsonWriter metrics(cfg.metrics_path(), make_header("odke.runs", 1));
  metrics.write(Json{{"stream", to_json(report)}});
  return report;
}

Json to_json(const InferenceReport& r) {
  return {{"inferred", r.inferred},
          {"corrections", r.corrections},
          {"missing_condition", r.missing_condition},
          {"appended", r.ingest.appended},
          {"ingest", to_json(r.ingest)}};
}

InferenceReport run_link_inference(Runtime& rt, Timestamp now) {
  InferenceReport report;
  const auto view = rt.log->latest();
  const InferenceContext ctx{"infer-" + format_timestamp(now), now};
  auto completeness = infer_completeness(view, rt.link_rules, rt.kg->ontology(), ctx);
  auto corrections = infer_correctness(view, rt.link_rules, rt.kg->ontology(), ctx,
                                       rt.config.correction_min_confidence);
  report.inferred = completeness.facts.size();
  report.corrections = corrections.size();
  report.missing_condition = completeness.missing_condition;
  std::vector<InferredFact> all = std::move(completeness.facts);
  for (auto& c : corrections) all.push_back(std::move(c.inferred));
  report.ingest = apply_inferred(all, *rt.kg, *rt.log, ctx.run_id, now);
  return report;
}

IngestSummary import_facts(Runtime& rt, const std::filesystem::path& path, Timestamp now) {
  std::vector<Fact> facts = stage("load", [&] {
    std::vector<Fact> out;
    NdjsonReader reader(path, "odke.facts", 1);
    Json j;
    while (reader.next(j)) {
      try {
        out.push_back(fact_from_json(j));
      } catch (const std::exception& e) {
        throw ParseError(e.what(), reader.line(), reader.offset());
      }
    }
    return out;
  });
  return stage("ingestion", [&] { return ingest_batch(facts, *rt.kg, *rt.log, "import", now); });
}

Json to_json(const StatsReport& r) {
  return {{"entities", r.entities},         {"log_rows", r.log_rows},
          {"view_facts", r.view_facts},     {"by_status", r.by_status},
          {"by_predicate", r.by_predicate}, {"tasks_pending", r.tasks_pending},
          {"tasks_decided", r.tasks_decided}, {"runs", r.runs}};
}

StatsReport collect_stats(const Runtime& rt) {
  StatsReport s;
  s.entities = rt.kg->size();
  s.log_rows = rt.log->size();
  const auto view = rt.log->latest();
  s.view_facts = view.size();
  for (const auto& [key, e] : view.entries()) {
    ++s.by_status[std::string(to_string(e.fact.status))];
    ++s.by_predicate[e.fact.predicate];
  }
  const auto cs = rt.tasks->stats();
  s.tasks_pending = cs.pending;
  s.tasks_decided = cs.decided;
  if (std::filesystem::exists(rt.config.metrics_path())) {
    NdjsonReader reader(rt.config.metrics_path(), "odke.runs", 1);
    Json j;
    while (reader.next(j)) ++s.runs;
  }
  return s;
}

}  // namespace odke
