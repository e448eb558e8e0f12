#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "odke/error.hpp"
#include "odke/kg/ontology.hpp"
#include "odke/ndjson.hpp"

namespace odke {

// How a captured substring becomes a Value.
enum class ValueConstructor { quantity, date, money, text, external_id, entity_mention };

std::string_view to_string(ValueConstructor c);
ValueConstructor value_constructor_from_string(std::string_view s);
ValueKind produced_kind(ValueConstructor c);

struct ValueExtractor {
  std::string pattern;
  std::regex regex;
  ValueConstructor kind = ValueConstructor::text;
  unsigned group = 0;       // capture group holding the value; 0 = whole match
  bool metric = false;      // preferred source under metric_preference
  std::string unit;         // fallback unit for bare numbers
  std::string scheme;       // external_id scheme
};

enum class AggregatorPolicy { single, metric_preference, all_values };

std::string_view to_string(AggregatorPolicy p);
AggregatorPolicy aggregator_policy_from_string(std::string_view s);

inline constexpr double kDefaultPatternScore = 0.95;

struct ExtractionRule {
  std::string rule_id;
  std::string language;              // tag or "*"
  std::vector<std::string> keys;     // lowercased literals
  std::optional<std::string> key_pattern;
  std::optional<std::regex> key_regex;
  std::string predicate;
  std::vector<ValueExtractor> extractors;
  AggregatorPolicy aggregator = AggregatorPolicy::all_values;
  double score = kDefaultPatternScore;
  bool link = false;                 // hyperlink rule: reads link targets, no extractors needed

  bool matches_key(std::string_view key) const;
};

class RuleCompileError : public ValidationError {
 public:
  RuleCompileError(std::vector<std::string> rule_ids, const std::string& details);
  const std::vector<std::string>& rule_ids() const noexcept { return rule_ids_; }

 private:
  std::vector<std::string> rule_ids_;
};

// Immutable after compile_rules.
class RuleSet {
 public:
  void add(ExtractionRule rule);

  // Rules of `language` or "*" whose key matcher accepts `key`, in compile order.
  std::vector<const ExtractionRule*> rules_for(std::string_view language, std::string_view key,
                                               bool link) const;
  const std::vector<ExtractionRule>& rules() const noexcept { return rules_; }
  std::size_t size() const noexcept { return rules_.size(); }
  bool empty() const noexcept { return rules_.empty(); }

  std::vector<std::string> warnings;

 private:
  std::vector<ExtractionRule> rules_;
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> by_key_;
  std::vector<std::size_t> patterned_;
};

// Rule document:
// {"schema":"odke.rules","version":1,"language":"en","rules":[
//   {"rule_id":..., "keys":[...] | "key_pattern":..., "predicate":...,
//    "extractors":[{"pattern":..., "kind":..., "group":1, "metric":true, "unit":..., "scheme":...}],
//    "aggregator":"single|metric_preference|all_values", "score":0.95, "link":false}]}
// A rule's own "language" overrides the document's. All failing rules are
// reported together in one RuleCompileError.
RuleSet compile_rules(const std::vector<std::filesystem::path>& files, const Ontology& ontology);
RuleSet compile_rule_documents(const std::vector<Json>& documents, const Ontology& ontology);

}  // namespace odke
