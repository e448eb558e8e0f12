#include "odke/curation/curation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace odke {

namespace {

std::string task_id_for(const EntityId& subject, std::string_view predicate,
                        const std::vector<std::string>& cluster_ids) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  mix(subject.str());
  mix(predicate);
  for (const auto& id : cluster_ids) mix(id);
  char buf[20];
  std::snprintf(buf, sizeof buf, "t%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

std::string window(const std::string& text, std::size_t start, std::size_t end) {
  start = std::min(start, text.size());
  end = std::clamp(end, start, text.size());
  std::size_t from = start > kSnippetRadius ? start - kSnippetRadius : 0;
  std::size_t to = std::min(text.size(), end + kSnippetRadius);
  while (from > 0 && continuation(static_cast<unsigned char>(text[from]))) --from;
  while (to < text.size() && continuation(static_cast<unsigned char>(text[to]))) ++to;
  return text.substr(from, to - from);
}

}  // namespace

std::string provenance_snippet(const Corpus& corpus, const Provenance& p) {
  const Document* doc = corpus.find(p.source_url, p.revision_id);
  if (!doc) return {};
  if (const auto* s = std::get_if<InfoboxSpan>(&p.span)) {
    if (s->row >= doc->infobox.size()) return {};
    const auto& row = doc->infobox[s->row];
    return row.key + ": " + window(row.raw_value, s->start, s->end);
  }
  if (const auto* s = std::get_if<PassageSpan>(&p.span)) {
    const auto* passage = doc->find_passage(s->passage_id);
    if (!passage) return {};
    return window(passage->text, s->start, s->end);
  }
  return {};
}

std::vector<CurationTask> generate_tasks(const std::vector<ScoredFact>& scored,
                                         const KnowledgeGraph& kg, const LatestView& view,
                                         const Corpus& corpus, Timestamp now,
                                         std::string_view run_id) {
  std::map<std::pair<EntityId, std::string>, std::vector<const ScoredFact*>> groups;
  for (const auto& s : scored) groups[{s.fact.subject, s.fact.predicate}].push_back(&s);

  std::vector<CurationTask> out;
  for (auto& [sp, members] : groups) {
    if (std::none_of(members.begin(), members.end(),
                     [](const ScoredFact* s) { return s->route == Route::curation; }))
      continue;
    std::sort(members.begin(), members.end(),
              [](const ScoredFact* a, const ScoredFact* b) { return a->rank < b->rank; });
    CurationTask task;
    task.predicate = sp.second;
    task.created_at = now;
    task.run_id = std::string(run_id);
    task.subject.id = sp.first;
    if (const Entity* e = kg.find(sp.first)) {
      task.subject.name = e->canonical_name;
      for (const auto& a : e->aliases) task.subject.aliases.push_back(a.name);
      task.subject.types.assign(e->types.begin(), e->types.end());
      task.subject.description = e->description;
    }
    for (const ViewEntry* v : view.by_subject(sp.first)) {
      if (task.subject.facts.size() >= kContextFacts) break;
      task.subject.facts.push_back(v->fact);
    }
    std::vector<std::string> ids;
    for (const ScoredFact* s : members) {
      if (s->route == Route::drop) continue;
      ClusterOption c;
      c.cluster_id = s->cluster.id();
      c.value = s->fact.object;
      c.score = s->score;
      c.rank = s->rank;
      c.support = s->cluster.support();
      c.route = std::string(to_string(s->route));
      c.provenance = s->fact.provenance;
      for (const auto& p : c.provenance) c.snippets.push_back(provenance_snippet(corpus, p));
      ids.push_back(c.cluster_id);
      task.clusters.push_back(std::move(c));
    }
    if (task.clusters.empty()) continue;
    std::sort(ids.begin(), ids.end());
    task.task_id = task_id_for(sp.first, sp.second, ids);
    out.push_back(std::move(task));
  }
  return out;
}

namespace {

Provenance curator_provenance(const Decision& d) {
  Provenance p;
  p.source_url = "curator:" + d.curator_id;
  p.extractor_id = "curator";
  p.extracted_at = d.decided_at;
  p.pipeline_run_id = "decision:" + d.task_id;
  return p;
}

std::vector<Fact> decision_facts(const CurationTask& task, const Decision& d) {
  std::vector<Fact> facts;
  auto base = [&](const Value& v) {
    Fact f;
    f.subject = task.subject.id;
    f.predicate = task.predicate;
    f.object = v;
    return f;
  };
  switch (d.verdict) {
    case Verdict::accept: {
      auto it = std::find_if(task.clusters.begin(), task.clusters.end(),
                             [&](const ClusterOption& c) { return c.cluster_id == d.cluster_id; });
      if (it == task.clusters.end()) throw ValidationError("unknown cluster " + d.cluster_id);
      Fact f = base(it->value);
      f.confidence = 1.0;
      f.status = FactStatus::curated_accepted;
      f.provenance = it->provenance;
      f.provenance.push_back(curator_provenance(d));
      facts.push_back(std::move(f));
      break;
    }
    case Verdict::amend: {
      if (!d.amended) throw ValidationError("amend without value");
      Fact f = base(*d.amended);
      f.confidence = 1.0;
      f.status = FactStatus::curated_accepted;
      for (const auto& c : task.clusters)
        f.provenance.insert(f.provenance.end(), c.provenance.begin(), c.provenance.end());
      f.provenance.push_back(curator_provenance(d));
      facts.push_back(std::move(f));
      break;
    }
    case Verdict::reject_all:
      for (const auto& c : task.clusters) {
        Fact f = base(c.value);
        f.confidence = 0.0;
        f.status = FactStatus::curated_rejected;
        f.provenance = {curator_provenance(d)};
        facts.push_back(std::move(f));
      }
      break;
  }
  return facts;
}

}  // namespace

ApplyResult apply_decisions(const std::vector<Decision>& decisions, const TaskStore& store,
                            KnowledgeGraph& kg, FactLog& log, Timestamp at) {
  ApplyResult out;
  for (const auto& d : decisions) {
    const auto run = "decision:" + d.task_id;
    if (log.has_run(run)) {
      ++out.skipped;
      continue;
    }
    const auto task = store.get(d.task_id);
    if (!task) {
      out.errors.emplace_back(d.task_id, "no such task");
      continue;
    }
    if (task->status != TaskStatus::decided) {
      out.errors.emplace_back(d.task_id, "task is not decided");
      continue;
    }
    std::vector<Fact> facts;
    try {
      facts = decision_facts(*task, d);
    } catch (const std::exception& e) {
      out.errors.emplace_back(d.task_id, e.what());
      continue;
    }
    auto s = ingest_batch(facts, kg, log, run, at);
    for (const auto& e : s.errors) out.errors.emplace_back(d.task_id, e.message);
    if (s.appended > 0) ++out.applied;
    out.summary += s;
  }
  return out;
}

ApplyResult apply_decisions(const TaskStore& store, KnowledgeGraph& kg, FactLog& log,
                            Timestamp at) {
  std::vector<Decision> decisions;
  for (const auto& t : store.all())
    if (t.decision) decisions.push_back(*t.decision);
  std::sort(decisions.begin(), decisions.end(), [](const Decision& a, const Decision& b) {
    return std::tie(a.decided_at, a.task_id) < std::tie(b.decided_at, b.task_id);
  });
  return apply_decisions(decisions, store, kg, log, at);
}

}  // namespace odke
