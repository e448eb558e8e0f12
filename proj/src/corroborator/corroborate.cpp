#include "odke/corroborator/corroborate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "odke/text.hpp"

namespace odke {

LinkResult link_mention(std::string_view mention, const std::set<EntityId>& allowed_types,
                        const KnowledgeGraph& kg) {
  LinkResult r;
  const auto name = text::collapse_whitespace(mention);
  if (name.empty()) return r;
  for (const auto& id : kg.lookup_name(name)) {
    const Entity* e = kg.find(id);
    if (e && kg.ontology().satisfies(e->types, allowed_types)) r.candidates.push_back(id);
  }
  std::sort(r.candidates.begin(), r.candidates.end());
  r.candidates.erase(std::unique(r.candidates.begin(), r.candidates.end()), r.candidates.end());
  if (r.candidates.size() == 1) {
    r.outcome = LinkOutcome::unique;
    r.id = r.candidates.front();
    r.candidates.clear();
  } else if (r.candidates.size() > 1) {
    r.outcome = LinkOutcome::ambiguous;
  }
  return r;
}

namespace {

const Text* as_text(const Value& v) { return std::get_if<Text>(&v); }

std::string upper(std::string s) {
  for (auto& ch : s) ch = char(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

}  // namespace

NormalizeResult normalize(const CandidateFact& c, const KnowledgeGraph& kg,
                          const LocaleRegistry* locales) {
  NormalizeResult out;
  const Predicate* p = kg.ontology().find_predicate(c.predicate);
  if (!p) {
    out.error = "unknown predicate " + c.predicate;
    return out;
  }
  const auto& locale = locales ? locales->get(c.language) : LocaleTable::builtin(c.language);
  NormalizedCandidate n{c, c.value, LinkOutcome::not_applicable, {}};
  const Text* t = as_text(c.value);
  auto fail = [&](std::string why) {
    out.error = std::move(why) + ": '" + c.raw_text + "'";
    return out;
  };

  switch (p->value_kind) {
    case ValueKind::quantity: {
      std::optional<Quantity> q;
      if (const auto* v = std::get_if<Quantity>(&c.value)) q = *v;
      else if (t) q = parse_quantity(t->text, locale);
      if (!q) return fail("unparseable quantity");
      if (!unit_info(q->unit)) return fail("unknown unit " + q->unit);
      n.value = canonical_quantity(*q);
      break;
    }
    case ValueKind::date: {
      std::optional<DateValue> d;
      if (const auto* v = std::get_if<DateValue>(&c.value)) d = *v;
      else if (t) d = parse_date(t->text, locale);
      if (!d) return fail("unparseable date");
      try {
        n.value = DateValue::parse_iso(d->iso());
      } catch (const std::exception& e) {
        return fail(e.what());
      }
      break;
    }
    case ValueKind::money: {
      std::optional<Money> m;
      if (const auto* v = std::get_if<Money>(&c.value)) m = *v;
      else if (t) m = parse_money(t->text, locale);
      if (!m) return fail("unparseable amount");
      m->currency = upper(m->currency);
      n.value = *m;
      break;
    }
    case ValueKind::string: {
      if (!t) return fail("expected text");
      auto s = text::collapse_whitespace(t->text);
      if (s.empty()) return fail("empty text");
      n.value = Text{std::move(s), t->language};
      break;
    }
    case ValueKind::external_id: {
      std::optional<ExternalId> x;
      if (const auto* v = std::get_if<ExternalId>(&c.value)) x = *v;
      if (!x) return fail("expected external id");
      x->id = text::collapse_whitespace(x->id);
      if (x->id.empty()) return fail("empty external id");
      n.value = *x;
      break;
    }
    case ValueKind::entity_ref: {
      if (std::holds_alternative<EntityRef>(c.value)) break;
      if (!t) return fail("expected entity");
      if (!c.link_url.empty()) {
        if (auto id = kg.entity_for_url(c.link_url)) {
          n.value = EntityRef{*id};
          n.link = LinkOutcome::unique;
          break;
        }
      }
      auto mention = text::collapse_whitespace(t->text);
      if (mention.empty()) return fail("empty mention");
      const auto linked = link_mention(mention, p->allowed_object_types, kg);
      n.link = linked.outcome;
      if (linked.outcome == LinkOutcome::unique) {
        n.value = EntityRef{linked.id};
      } else {
        n.value = Text{std::move(mention), t->language};
        n.link_candidates = linked.candidates;
      }
      break;
    }
  }
  n.candidate.value = n.value;
  out.normalized = std::move(n);
  return out;
}

std::size_t FactCluster::distinct_sources() const {
  std::set<std::string> urls;
  for (const auto& m : members) urls.insert(m.candidate.raw_span.source_url);
  return urls.size();
}

Timestamp FactCluster::earliest_extraction() const {
  Timestamp t = Timestamp::max();
  for (const auto& m : members) t = std::min(t, m.candidate.raw_span.extracted_at);
  return t;
}

std::string FactCluster::id() const { return canonical(value); }

namespace {

std::string member_order_key(const NormalizedCandidate& n) {
  return to_json(n.candidate.raw_span).dump() + '\x1f' + n.candidate.raw_text;
}

struct Group {
  std::string canonical_value;
  Value value;
  std::vector<NormalizedCandidate> members;
};

}  // namespace

std::vector<FactCluster> cluster(std::vector<NormalizedCandidate> candidates,
                                 double merge_threshold) {
  std::map<std::pair<EntityId, std::string>, std::map<std::string, Group>> grouped;
  for (auto& n : candidates) {
    auto& g = grouped[{n.candidate.subject, n.candidate.predicate}];
    auto key = canonical(n.value);
    auto& group = g[key];
    if (group.members.empty()) {
      group.canonical_value = key;
      group.value = n.value;
    }
    group.members.push_back(std::move(n));
  }

  std::vector<FactCluster> out;
  for (auto& [sp, groups] : grouped) {
    std::vector<Group> plain;
    std::vector<Group> quantities;
    for (auto& [key, g] : groups)
      (std::holds_alternative<Quantity>(g.value) ? quantities : plain).push_back(std::move(g));

    // Single-linkage merge of neighbouring magnitudes with the same unit.
    std::sort(quantities.begin(), quantities.end(), [](const Group& a, const Group& b) {
      const auto& qa = std::get<Quantity>(a.value);
      const auto& qb = std::get<Quantity>(b.value);
      return std::tie(qa.unit, qa.magnitude) < std::tie(qb.unit, qb.magnitude);
    });
    std::vector<std::vector<Group*>> chains;
    for (std::size_t i = 0; i < quantities.size(); ++i) {
      if (i > 0) {
        const auto& prev = std::get<Quantity>(quantities[i - 1].value);
        const auto& cur = std::get<Quantity>(quantities[i].value);
        if (prev.unit == cur.unit &&
            relative_difference(prev.magnitude, cur.magnitude) <= merge_threshold) {
          chains.back().push_back(&quantities[i]);
          continue;
        }
      }
      chains.push_back({&quantities[i]});
    }
    for (auto& chain : chains) {
      Group* lead = chain.front();
      for (Group* g : chain)
        if (g->members.size() > lead->members.size()) lead = g;  // ties keep the smaller magnitude
      Group merged{lead->canonical_value, lead->value, {}};
      for (Group* g : chain)
        for (auto& m : g->members) merged.members.push_back(std::move(m));
      plain.push_back(std::move(merged));
    }

    std::sort(plain.begin(), plain.end(), [](const Group& a, const Group& b) {
      return a.canonical_value < b.canonical_value;
    });
    for (auto& g : plain) {
      FactCluster c;
      c.subject = sp.first;
      c.predicate = sp.second;
      c.value = g.value;
      c.members = std::move(g.members);
      std::stable_sort(c.members.begin(), c.members.end(),
                       [](const NormalizedCandidate& a, const NormalizedCandidate& b) {
                         return member_order_key(a) < member_order_key(b);
                       });
      c.ambiguous = std::any_of(c.members.begin(), c.members.end(), [](const auto& m) {
        return m.link == LinkOutcome::ambiguous;
      });
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::string_view to_string(Route r) {
  switch (r) {
    case Route::auto_ingest: return "auto";
    case Route::curation: return "curation";
    case Route::drop: return "drop";
  }
  return "drop";
}

double ScoringConfig::weight_for(std::string_view extractor_id) const {
  const auto type = extractor_id.substr(0, extractor_id.find(':'));
  auto it = base_weights.find(type);
  return it == base_weights.end() ? 0.0 : it->second;
}

void ScoringConfig::validate() const {
  if (!(0.0 <= curation_floor && curation_floor < auto_threshold && auto_threshold <= 1.0))
    throw ValidationError("thresholds must satisfy 0 <= curation_floor < auto_threshold <= 1");
  for (const auto& [type, w] : base_weights)
    if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("base weight for " + type + " outside [0,1]");
  if (!(merge_threshold >= 0.0)) throw ValidationError("negative merge threshold");
}

double HeuristicScorer::score(const FactCluster& cluster, std::size_t evidence_total) const {
  if (evidence_total == 0) return 0;
  double best = 0;
  for (const auto& m : cluster.members)
    best = std::max(best, config_.weight_for(m.candidate.extractor_id) * m.candidate.extractor_score);
  const double ratio = std::min(1.0, double(cluster.support()) / double(evidence_total));
  return std::clamp(best * ratio, 0.0, 1.0);
}

Route route_for(double score, std::size_t rank, const Predicate& predicate, bool ambiguous,
                const ScoringConfig& config) {
  if (predicate.sensitive || ambiguous) return Route::curation;
  if (score >= config.auto_threshold && (rank == 1 || !predicate.functional))
    return Route::auto_ingest;
  if (score >= config.curation_floor) return Route::curation;
  return Route::drop;
}

Json to_json(const ScoredFact& s) {
  return {{"fact", to_json(s.fact)},
          {"score", s.score},
          {"rank", s.rank},
          {"route", to_string(s.route)},
          {"cluster", s.cluster.id()},
          {"support", s.cluster.support()},
          {"distinct_sources", s.cluster.distinct_sources()},
          {"ambiguous", s.cluster.ambiguous}};
}

std::vector<ScoredFact> score_and_rank(const std::vector<FactCluster>& clusters,
                                       const ScoringConfig& config, const Ontology& ontology,
                                       const Scorer* scorer) {
  HeuristicScorer fallback(config);
  if (!scorer) scorer = &fallback;

  std::map<std::pair<EntityId, std::string>, std::vector<const FactCluster*>> groups;
  for (const auto& c : clusters) groups[{c.subject, c.predicate}].push_back(&c);

  std::vector<ScoredFact> out;
  for (const auto& [sp, members] : groups) {
    const Predicate& predicate = ontology.predicate(sp.second);
    std::size_t total = 0;
    for (const auto* c : members)
      total = predicate.functional ? total + c->support() : std::max(total, c->support());

    std::vector<ScoredFact> ranked;
    for (const auto* c : members) {
      ScoredFact s;
      s.cluster = *c;
      s.score = scorer->score(*c, total);
      ranked.push_back(std::move(s));
    }
    std::sort(ranked.begin(), ranked.end(), [](const ScoredFact& a, const ScoredFact& b) {
      if (a.score != b.score) return a.score > b.score;
      const auto da = a.cluster.distinct_sources(), db = b.cluster.distinct_sources();
      if (da != db) return da > db;
      const auto ea = a.cluster.earliest_extraction(), eb = b.cluster.earliest_extraction();
      if (ea != eb) return ea < eb;
      return a.cluster.id() < b.cluster.id();
    });
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      auto& s = ranked[i];
      s.rank = i + 1;
      s.route = route_for(s.score, s.rank, predicate, s.cluster.ambiguous, config);
      s.fact.subject = s.cluster.subject;
      s.fact.predicate = s.cluster.predicate;
      s.fact.object = s.cluster.value;
      s.fact.confidence = s.score;
      s.fact.language = s.cluster.members.front().candidate.language;
      s.fact.status = FactStatus::candidate;
      for (const auto& m : s.cluster.members)
        if (std::find(s.fact.provenance.begin(), s.fact.provenance.end(), m.candidate.raw_span) ==
            s.fact.provenance.end())
          s.fact.provenance.push_back(m.candidate.raw_span);
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace odke
