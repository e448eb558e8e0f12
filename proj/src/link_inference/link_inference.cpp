#include "odke/link_inference/link_inference.hpp"

#include <fstream>
#include <set>

namespace odke {

std::string_view to_string(InferenceKind k) {
  switch (k) {
    case InferenceKind::symmetric: return "symmetric";
    case InferenceKind::inverse: return "inverse";
    case InferenceKind::conditional_inverse: return "conditional_inverse";
  }
  return "symmetric";
}

InferenceKind inference_kind_from_string(std::string_view s) {
  for (auto k : {InferenceKind::symmetric, InferenceKind::inverse,
                 InferenceKind::conditional_inverse})
    if (to_string(k) == s) return k;
  throw ValidationError("unknown inference kind '" + std::string(s) + "'");
}

double default_confidence_factor(InferenceKind k) {
  switch (k) {
    case InferenceKind::symmetric: return 1.0;
    case InferenceKind::inverse: return 0.99;
    case InferenceKind::conditional_inverse: return 0.98;
  }
  return 1.0;
}

void validate_rule(const LinkInferenceRule& r, const Ontology& ontology) {
  auto fail = [&](const std::string& why) {
    throw ValidationError("link rule " + r.rule_id + ": " + why);
  };
  if (r.rule_id.empty()) throw ValidationError("link rule without rule_id");
  auto require_entity = [&](const std::string& id) {
    const auto* p = ontology.find_predicate(id);
    if (!p) fail("unknown predicate '" + id + "'");
    if (p->value_kind != ValueKind::entity_ref) fail(id + " is not an entity predicate");
  };
  require_entity(r.source);
  if (!(r.confidence_factor > 0.0 && r.confidence_factor <= 1.0))
    fail("confidence_factor outside (0,1]");
  switch (r.kind) {
    case InferenceKind::symmetric:
      if (r.target != r.source) fail("symmetric rule needs source == target");
      break;
    case InferenceKind::inverse:
      require_entity(r.target);
      break;
    case InferenceKind::conditional_inverse:
      if (r.condition_predicate.empty() || r.condition_targets.empty())
        fail("conditional rule without condition");
      if (!ontology.find_predicate(r.condition_predicate))
        fail("unknown condition predicate '" + r.condition_predicate + "'");
      for (const auto& [value, target] : r.condition_targets) require_entity(target);
      break;
  }
}

std::vector<LinkInferenceRule> load_link_rules(const std::filesystem::path& path,
                                               const Ontology& ontology) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open link rules " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (j.value("schema", "") != "odke.link_rules" || j.value("version", 0) != 1)
    throw ParseError(path.string() + ": expected schema odke.link_rules version 1");
  std::vector<LinkInferenceRule> rules;
  std::set<std::string> ids;
  for (const auto& r : j.at("rules")) {
    LinkInferenceRule rule;
    rule.rule_id = r.value("rule_id", std::string());
    rule.kind = inference_kind_from_string(r.at("kind").get<std::string>());
    rule.source = r.at("source").get<std::string>();
    rule.target = r.value("target", rule.kind == InferenceKind::symmetric ? rule.source : "");
    if (r.contains("condition")) {
      rule.condition_predicate = r["condition"].at("predicate").get<std::string>();
      for (const auto& [value, target] : r["condition"].at("targets").items())
        rule.condition_targets[value] = target.get<std::string>();
    }
    rule.confidence_factor = r.value("confidence_factor", default_confidence_factor(rule.kind));
    rule.correction = r.value("correction", false);
    validate_rule(rule, ontology);
    if (!ids.insert(rule.rule_id).second)
      throw ValidationError("duplicate link rule id " + rule.rule_id);
    rules.push_back(std::move(rule));
  }
  return rules;
}

namespace {

InferredFact make_inferred(const ViewEntry& source, const FactKey& source_key,
                           const LinkInferenceRule& rule, const std::string& target,
                           const InferenceContext& ctx) {
  const auto& object = std::get<EntityRef>(source.fact.object);
  InferredFact f;
  f.rule_id = rule.rule_id;
  f.derived_from = source_key;
  f.fact.subject = object.id;
  f.fact.predicate = target;
  f.fact.object = EntityRef{source.fact.subject};
  f.fact.confidence = source.fact.confidence * rule.confidence_factor;
  f.fact.language = source.fact.language;
  f.fact.status = FactStatus::inferred;
  Provenance p;
  p.source_url = "inference:" + rule.rule_id;
  p.extractor_id = std::string(kLinkInferenceExtractor);
  p.extracted_at = ctx.now;
  p.pipeline_run_id = ctx.run_id;
  f.fact.provenance.push_back(std::move(p));
  return f;
}

// Target predicate for one source fact, or nullopt (with `missing` set when the
// condition value is absent or undeclared).
std::optional<std::string> target_for(const LinkInferenceRule& rule, const LatestView& view,
                                      const EntityId& source_subject, bool& missing) {
  missing = false;
  if (rule.kind != InferenceKind::conditional_inverse) return rule.target;
  const auto values = view.by_subject_predicate(source_subject, rule.condition_predicate);
  if (values.empty()) {
    missing = true;
    return std::nullopt;
  }
  auto it = rule.condition_targets.find(display(values.front()->fact.object));
  if (it == rule.condition_targets.end()) {
    missing = true;
    return std::nullopt;
  }
  return it->second;
}

// Beats: higher confidence, then smaller canonical value.
bool preferred(const InferredFact& a, const InferredFact& b) {
  if (a.fact.confidence != b.fact.confidence) return a.fact.confidence > b.fact.confidence;
  return canonical(a.fact.object) < canonical(b.fact.object);
}

}  // namespace

CompletenessResult infer_completeness(const LatestView& view,
                                      const std::vector<LinkInferenceRule>& rules,
                                      const Ontology& ontology, const InferenceContext& ctx) {
  CompletenessResult out;
  std::map<FactKey, InferredFact> chosen;  // by target key
  for (const auto& rule : rules) {
    for (const ViewEntry* e : view.by_predicate(rule.source)) {
      if (!std::holds_alternative<EntityRef>(e->fact.object)) continue;
      bool missing = false;
      const auto target = target_for(rule, view, e->fact.subject, missing);
      if (!target) {
        if (missing) ++out.missing_condition;
        continue;
      }
      const auto* tp = ontology.find_predicate(*target);
      if (!tp) continue;
      auto inferred = make_inferred(*e, make_key(e->fact, ontology), rule, *target, ctx);
      const auto& b = inferred.fact.subject;
      if (tp->functional) {
        if (!view.by_subject_predicate(b, *target).empty()) continue;
      } else if (view.contains_value(b, *target, inferred.fact.object)) {
        continue;
      }
      const auto key = make_key(inferred.fact, ontology);
      auto it = chosen.find(key);
      if (it == chosen.end()) chosen.emplace(key, std::move(inferred));
      else if (preferred(inferred, it->second)) it->second = std::move(inferred);
    }
  }
  for (auto& [key, f] : chosen) out.facts.push_back(std::move(f));
  return out;
}

std::vector<Correction> infer_correctness(const LatestView& view,
                                          const std::vector<LinkInferenceRule>& rules,
                                          const Ontology& ontology, const InferenceContext& ctx,
                                          double min_confidence) {
  std::map<FactKey, Correction> chosen;
  for (const auto& rule : rules) {
    if (!rule.correction) continue;
    for (const ViewEntry* e : view.by_predicate(rule.source)) {
      if (e->fact.confidence < min_confidence) continue;
      if (!std::holds_alternative<EntityRef>(e->fact.object)) continue;
      bool missing = false;
      const auto target = target_for(rule, view, e->fact.subject, missing);
      if (!target) continue;
      const auto* tp = ontology.find_predicate(*target);
      if (!tp || !tp->functional) continue;
      auto inferred = make_inferred(*e, make_key(e->fact, ontology), rule, *target, ctx);
      const auto existing = view.by_subject_predicate(inferred.fact.subject, *target);
      if (existing.empty()) continue;
      const ViewEntry* current = existing.front();
      if (canonical(current->fact.object) == canonical(inferred.fact.object)) continue;
      if (!(inferred.fact.confidence > current->fact.confidence)) continue;
      const auto key = make_key(inferred.fact, ontology);
      Correction c{std::move(inferred), key, current->fact.confidence};
      auto it = chosen.find(key);
      if (it == chosen.end()) chosen.emplace(key, std::move(c));
      else if (preferred(c.inferred, it->second.inferred)) it->second = std::move(c);
    }
  }
  std::vector<Correction> out;
  for (auto& [key, c] : chosen) out.push_back(std::move(c));
  return out;
}

IngestSummary apply_inferred(const std::vector<InferredFact>& facts, KnowledgeGraph& kg,
                             FactLog& log, std::string_view run_id, Timestamp at) {
  std::vector<Fact> plain;
  plain.reserve(facts.size());
  for (const auto& f : facts) plain.push_back(f.fact);
  return ingest_batch(plain, kg, log, run_id, at);
}

}  // namespace odke
