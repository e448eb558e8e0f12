#include "odke/extractors/rules.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "odke/text.hpp"

namespace odke {

std::string_view to_string(ValueConstructor c) {
  switch (c) {
    case ValueConstructor::quantity: return "quantity";
    case ValueConstructor::date: return "date";
    case ValueConstructor::money: return "money";
    case ValueConstructor::text: return "text";
    case ValueConstructor::external_id: return "external_id";
    case ValueConstructor::entity_mention: return "entity_mention";
  }
  return "text";
}

ValueConstructor value_constructor_from_string(std::string_view s) {
  for (auto c : {ValueConstructor::quantity, ValueConstructor::date, ValueConstructor::money,
                 ValueConstructor::text, ValueConstructor::external_id,
                 ValueConstructor::entity_mention})
    if (to_string(c) == s) return c;
  throw ValidationError("unknown value constructor '" + std::string(s) + "'");
}

ValueKind produced_kind(ValueConstructor c) {
  switch (c) {
    case ValueConstructor::quantity: return ValueKind::quantity;
    case ValueConstructor::date: return ValueKind::date;
    case ValueConstructor::money: return ValueKind::money;
    case ValueConstructor::text: return ValueKind::string;
    case ValueConstructor::external_id: return ValueKind::external_id;
    case ValueConstructor::entity_mention: return ValueKind::entity_ref;
  }
  return ValueKind::string;
}

std::string_view to_string(AggregatorPolicy p) {
  switch (p) {
    case AggregatorPolicy::single: return "single";
    case AggregatorPolicy::metric_preference: return "metric_preference";
    case AggregatorPolicy::all_values: return "all_values";
  }
  return "all_values";
}

AggregatorPolicy aggregator_policy_from_string(std::string_view s) {
  for (auto p : {AggregatorPolicy::single, AggregatorPolicy::metric_preference,
                 AggregatorPolicy::all_values})
    if (to_string(p) == s) return p;
  throw ValidationError("unknown aggregator '" + std::string(s) + "'");
}

bool ExtractionRule::matches_key(std::string_view key) const {
  const auto k = text::to_lower(text::collapse_whitespace(key));
  if (std::find(keys.begin(), keys.end(), k) != keys.end()) return true;
  return key_regex && std::regex_match(k, *key_regex);
}

RuleCompileError::RuleCompileError(std::vector<std::string> rule_ids, const std::string& details)
    : ValidationError(details), rule_ids_(std::move(rule_ids)) {}

void RuleSet::add(ExtractionRule rule) {
  const auto index = rules_.size();
  for (const auto& k : rule.keys) by_key_[{rule.language, k}].push_back(index);
  if (rule.key_regex) patterned_.push_back(index);
  rules_.push_back(std::move(rule));
}

std::vector<const ExtractionRule*> RuleSet::rules_for(std::string_view language,
                                                      std::string_view key, bool link) const {
  const auto k = text::to_lower(text::collapse_whitespace(key));
  std::vector<std::size_t> hits;
  for (const std::string& lang : {std::string(language), std::string("*")}) {
    auto it = by_key_.find({lang, k});
    if (it != by_key_.end()) hits.insert(hits.end(), it->second.begin(), it->second.end());
    if (language == "*") break;
  }
  for (auto i : patterned_) {
    const auto& r = rules_[i];
    if ((r.language == language || r.language == "*") && r.matches_key(k)) hits.push_back(i);
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  std::vector<const ExtractionRule*> out;
  for (auto i : hits)
    if (rules_[i].link == link) out.push_back(&rules_[i]);
  return out;
}

namespace {

ExtractionRule compile_one(const Json& j, const std::string& doc_language, const Ontology& ontology,
                           std::vector<std::string>& problems) {
  ExtractionRule r;
  r.rule_id = j.value("rule_id", std::string());
  if (r.rule_id.empty()) throw ValidationError("rule without rule_id");
  r.language = j.value("language", doc_language);
  if (r.language.empty()) problems.push_back("missing language");
  for (const auto& k : j.value("keys", Json::array()))
    r.keys.push_back(text::to_lower(text::collapse_whitespace(k.get<std::string>())));
  if (j.contains("key_pattern")) {
    r.key_pattern = j.at("key_pattern").get<std::string>();
    try {
      r.key_regex.emplace(*r.key_pattern, std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& e) {
      problems.push_back("invalid key_pattern: " + std::string(e.what()));
    }
  }
  if (r.keys.empty() && !r.key_pattern) problems.push_back("no keys or key_pattern");
  r.predicate = j.value("predicate", std::string());
  r.link = j.value("link", false);
  r.score = j.value("score", kDefaultPatternScore);
  if (!(r.score >= 0.0 && r.score <= 1.0)) problems.push_back("score outside [0,1]");
  r.aggregator = aggregator_policy_from_string(j.value("aggregator", std::string("all_values")));

  const Predicate* p = ontology.find_predicate(r.predicate);
  if (!p) problems.push_back("unknown predicate '" + r.predicate + "'");
  if (p && r.link && p->value_kind != ValueKind::entity_ref)
    problems.push_back("link rule targets non-entity predicate " + r.predicate);

  for (const auto& e : j.value("extractors", Json::array())) {
    ValueExtractor x;
    x.pattern = e.at("pattern").get<std::string>();
    x.kind = value_constructor_from_string(e.at("kind").get<std::string>());
    x.group = e.value("group", 0u);
    x.metric = e.value("metric", false);
    x.unit = e.value("unit", std::string());
    x.scheme = e.value("scheme", std::string());
    try {
      x.regex = std::regex(x.pattern, std::regex::ECMAScript | std::regex::icase);
      if (x.group > x.regex.mark_count())
        problems.push_back("group " + std::to_string(x.group) + " absent from pattern " + x.pattern);
    } catch (const std::regex_error& err) {
      problems.push_back("invalid regex '" + x.pattern + "': " + err.what());
    }
    if (p && produced_kind(x.kind) != p->value_kind)
      problems.push_back("extractor kind " + std::string(to_string(x.kind)) +
                         " does not match predicate kind " + std::string(to_string(p->value_kind)));
    if (p && x.kind == ValueConstructor::quantity && !x.unit.empty()) {
      const auto info = unit_info(x.unit);
      if (!info) problems.push_back("unknown unit " + x.unit);
      else if (p->unit_dimension && info->dimension != *p->unit_dimension)
        problems.push_back("unit " + x.unit + " is not a " + *p->unit_dimension);
    }
    r.extractors.push_back(std::move(x));
  }
  if (!r.link && r.extractors.empty()) problems.push_back("no value extractors");
  if (r.aggregator == AggregatorPolicy::metric_preference && p &&
      p->value_kind != ValueKind::quantity)
    problems.push_back("metric_preference on a non-quantity predicate");
  return r;
}

}  // namespace

RuleSet compile_rule_documents(const std::vector<Json>& documents, const Ontology& ontology) {
  RuleSet set;
  std::vector<std::string> failed;
  std::ostringstream details;
  for (const auto& doc : documents) {
    if (doc.value("schema", "") != "odke.rules" || doc.value("version", 0) != 1)
      throw ParseError("rule document must declare schema odke.rules version 1");
    const auto language = doc.value("language", std::string());
    const auto& rules = doc.value("rules", Json::array());
    if (rules.empty())
      set.warnings.push_back("rule document for '" + language + "' contains no rules");
    for (const auto& j : rules) {
      std::vector<std::string> problems;
      ExtractionRule r;
      const auto id = j.value("rule_id", std::string("<unnamed>"));
      try {
        r = compile_one(j, language, ontology, problems);
      } catch (const std::exception& e) {
        problems.push_back(e.what());
      }
      if (!problems.empty()) {
        failed.push_back(id);
        details << "rule " << id << ":";
        for (const auto& msg : problems) details << " " << msg << ";";
        details << "\n";
        continue;
      }
      set.add(std::move(r));
    }
  }
  if (!failed.empty()) throw RuleCompileError(failed, details.str());
  return set;
}

RuleSet compile_rules(const std::vector<std::filesystem::path>& files, const Ontology& ontology) {
  std::vector<Json> docs;
  std::vector<std::string> warnings;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw ParseError("cannot open rule file " + f.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    if (text::collapse_whitespace(buffer.str()).empty()) {
      warnings.push_back("rule file " + f.string() + " is empty");
      continue;
    }
    try {
      docs.push_back(Json::parse(buffer.str()));
    } catch (const Json::exception& e) {
      throw ParseError(f.string() + ": " + e.what());
    }
  }
  auto set = compile_rule_documents(docs, ontology);
  set.warnings.insert(set.warnings.begin(), warnings.begin(), warnings.end());
  return set;
}

}  // namespace odke
