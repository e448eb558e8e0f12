#include "odke/extractors/extract.hpp"

#include <algorithm>

#include "odke/text.hpp"

namespace odke {

namespace {

const LocaleTable& locale_for(const ExtractContext& ctx, std::string_view language) {
  return ctx.locales ? ctx.locales->get(language) : LocaleTable::builtin(language);
}

Provenance make_provenance(const Document& doc, Span span, std::string extractor_id,
                           const ExtractContext& ctx) {
  Provenance p;
  p.source_url = doc.url;
  p.revision_id = doc.revision_id;
  p.span = std::move(span);
  p.extractor_id = std::move(extractor_id);
  p.extracted_at = ctx.now;
  p.pipeline_run_id = ctx.run_id;
  return p;
}

double canonical_magnitude(const CandidateFact& c) {
  if (const auto* q = std::get_if<Quantity>(&c.value)) return to_canonical(*q).magnitude;
  return 0;
}

}  // namespace

Json to_json(const CandidateFact& c) {
  Json j = {{"subject", c.subject.str()},
            {"predicate", c.predicate},
            {"provenance", to_json(c.raw_span)},
            {"raw_text", c.raw_text},
            {"value", to_json(c.value)},
            {"extractor", c.extractor_id},
            {"score", c.extractor_score},
            {"lang", c.language}};
  if (c.metric) j["metric"] = true;
  if (c.extractor_index) j["extractor_index"] = c.extractor_index;
  if (c.needs_resolution) j["needs_resolution"] = true;
  if (!c.link_url.empty()) j["url"] = c.link_url;
  return j;
}

CandidateFact candidate_from_json(const Json& j) {
  CandidateFact c;
  c.subject = EntityId(j.at("subject").get<std::string>());
  c.predicate = j.at("predicate").get<std::string>();
  c.raw_span = provenance_from_json(j.at("provenance"));
  c.raw_text = j.at("raw_text").get<std::string>();
  c.value = value_from_json(j.at("value"));
  c.extractor_id = j.at("extractor").get<std::string>();
  c.extractor_score = j.at("score").get<double>();
  c.language = j.value("lang", std::string());
  c.metric = j.value("metric", false);
  c.extractor_index = j.value("extractor_index", std::size_t{0});
  c.needs_resolution = j.value("needs_resolution", false);
  c.link_url = j.value("url", std::string());
  return c;
}

Value construct_value(const ValueExtractor& extractor, std::string_view captured,
                      const LocaleTable& locale, std::string_view language) {
  const std::string raw(captured);
  switch (extractor.kind) {
    case ValueConstructor::quantity: {
      if (auto q = parse_quantity(raw, locale)) return *q;
      if (!extractor.unit.empty())
        if (auto n = parse_number(text::collapse_whitespace(raw), locale))
          return Quantity{*n, extractor.unit};
      break;
    }
    case ValueConstructor::date:
      if (auto d = parse_date(raw, locale)) return *d;
      break;
    case ValueConstructor::money:
      if (auto m = parse_money(raw, locale)) return *m;
      break;
    case ValueConstructor::external_id: {
      auto id = text::collapse_whitespace(raw);
      if (!id.empty()) return ExternalId{std::move(id), extractor.scheme};
      break;
    }
    case ValueConstructor::text:
    case ValueConstructor::entity_mention:
      break;
  }
  return Text{text::collapse_whitespace(raw), std::string(language)};
}

std::vector<CandidateFact> aggregate_row(std::vector<CandidateFact> candidates,
                                         AggregatorPolicy policy) {
  if (candidates.size() <= 1) return candidates;
  switch (policy) {
    case AggregatorPolicy::all_values:
      return candidates;
    case AggregatorPolicy::single: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < candidates.size(); ++i) {
        const auto& b = candidates[best];
        const auto& c = candidates[i];
        if (c.extractor_score > b.extractor_score ||
            (c.extractor_score == b.extractor_score && c.extractor_index < b.extractor_index))
          best = i;
      }
      return {std::move(candidates[best])};
    }
    case AggregatorPolicy::metric_preference: {
      std::vector<double> cm;
      for (const auto& c : candidates) {
        const auto* q = std::get_if<Quantity>(&c.value);
        if (!q) return candidates;  // something unparsed: leave it to the corroborator
        cm.push_back(canonical_magnitude(c));
      }
      double worst = 0;
      for (std::size_t i = 0; i < cm.size(); ++i)
        for (std::size_t k = i + 1; k < cm.size(); ++k)
          worst = std::max(worst, relative_difference(cm[i], cm[k]));
      if (worst > kMetricAgreement) return candidates;
      auto metric = std::find_if(candidates.begin(), candidates.end(),
                                 [](const CandidateFact& c) { return c.metric; });
      return {std::move(metric == candidates.end() ? candidates.front() : *metric)};
    }
  }
  return candidates;
}

std::vector<CandidateFact> extract_infobox(const Document& doc, const RuleSet& rules,
                                           const EntityId& subject, const ExtractContext& ctx) {
  std::vector<CandidateFact> out;
  const auto& locale = locale_for(ctx, doc.language);
  for (std::size_t r = 0; r < doc.infobox.size(); ++r) {
    const auto& row = doc.infobox[r];
    for (const ExtractionRule* rule : rules.rules_for(doc.language, row.key, false)) {
      std::vector<CandidateFact> row_candidates;
      for (std::size_t x = 0; x < rule->extractors.size(); ++x) {
        const auto& ex = rule->extractors[x];
        for (auto it = std::sregex_iterator(row.raw_value.begin(), row.raw_value.end(), ex.regex);
             it != std::sregex_iterator(); ++it) {
          const auto& m = *it;
          if (!m[ex.group].matched || m.length(ex.group) == 0) continue;
          const auto start = std::size_t(m.position(ex.group));
          const auto end = start + std::size_t(m.length(ex.group));
          CandidateFact c;
          c.subject = subject;
          c.predicate = rule->predicate;
          c.raw_text = row.raw_value.substr(start, end - start);
          c.raw_span = make_provenance(doc, InfoboxSpan{r, row.key, start, end},
                                       "pattern:" + rule->rule_id, ctx);
          c.value = construct_value(ex, c.raw_text, locale, doc.language);
          c.extractor_id = c.raw_span.extractor_id;
          c.extractor_score = rule->score;
          c.language = doc.language;
          c.metric = ex.metric;
          c.extractor_index = x;
          c.needs_resolution = ex.kind == ValueConstructor::entity_mention;
          row_candidates.push_back(std::move(c));
        }
      }
      for (auto& c : aggregate_row(std::move(row_candidates), rule->aggregator))
        out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<CandidateFact> extract_links(const Document& doc, const RuleSet& rules,
                                         const EntityId& subject, const ExtractContext& ctx) {
  std::vector<CandidateFact> out;
  for (std::size_t r = 0; r < doc.infobox.size(); ++r) {
    const auto& row = doc.infobox[r];
    if (row.hyperlinks.empty()) continue;
    for (const ExtractionRule* rule : rules.rules_for(doc.language, row.key, true)) {
      for (const auto& link : row.hyperlinks) {
        CandidateFact c;
        c.subject = subject;
        c.predicate = rule->predicate;
        c.raw_text = row.raw_value.substr(link.start, link.end - link.start);
        c.raw_span = make_provenance(doc, InfoboxSpan{r, row.key, link.start, link.end},
                                     "link:" + rule->rule_id, ctx);
        c.extractor_id = c.raw_span.extractor_id;
        c.extractor_score = rule->score;
        c.language = doc.language;
        if (link.entity) {
          c.value = EntityRef{*link.entity};
        } else {
          c.value = Text{text::collapse_whitespace(c.raw_text), doc.language};
          c.needs_resolution = true;
          c.link_url = link.url;
        }
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

std::optional<TypeViolation> validate_types(const CandidateFact& candidate,
                                            const KnowledgeGraph& kg) {
  return check_fact(kg, candidate.subject, candidate.predicate, candidate.value);
}

std::optional<std::string> span_text(const Document& doc, const Span& span) {
  if (const auto* s = std::get_if<InfoboxSpan>(&span)) {
    if (s->row >= doc.infobox.size()) return std::nullopt;
    const auto& v = doc.infobox[s->row].raw_value;
    if (s->start > s->end || s->end > v.size()) return std::nullopt;
    return v.substr(s->start, s->end - s->start);
  }
  if (const auto* s = std::get_if<PassageSpan>(&span)) {
    const auto* p = doc.find_passage(s->passage_id);
    if (!p || s->start > s->end || s->end > p->text.size()) return std::nullopt;
    return p->text.substr(s->start, s->end - s->start);
  }
  return std::nullopt;
}

}  // namespace odke
