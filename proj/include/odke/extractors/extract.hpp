#pragma once

#include <optional>
#include <string>
#include <vector>

#include "odke/corpus/corpus.hpp"
#include "odke/extractors/rules.hpp"
#include "odke/kg/fact.hpp"
#include "odke/kg/graph.hpp"
#include "odke/normalize/parse.hpp"

namespace odke {

struct CandidateFact {
  EntityId subject;
  std::string predicate;
  Provenance raw_span;
  std::string raw_text;           // document substring at raw_span
  Value value;                    // typed when the constructor parsed it, else Text(raw_text)
  std::string extractor_id;
  double extractor_score = 0;
  std::string language;
  bool metric = false;
  std::size_t extractor_index = 0;  // position within the rule
  bool needs_resolution = false;    // entity mention or url awaiting linking
  std::string link_url;             // raw url target of a link candidate
};

Json to_json(const CandidateFact& c);
CandidateFact candidate_from_json(const Json& j);

struct ExtractContext {
  std::string run_id;
  Timestamp now{};
  const LocaleRegistry* locales = nullptr;  // null: built-in tables
};

// Applies a value constructor to a captured substring. Entity mentions and
// unparseable text come back as Text.
Value construct_value(const ValueExtractor& extractor, std::string_view captured,
                      const LocaleTable& locale, std::string_view language);

// Per-row candidates, aggregated per rule.
std::vector<CandidateFact> extract_infobox(const Document& doc, const RuleSet& rules,
                                           const EntityId& subject, const ExtractContext& ctx);

// Metric/imperial agreement tolerance for metric_preference.
inline constexpr double kMetricAgreement = 0.02;

std::vector<CandidateFact> aggregate_row(std::vector<CandidateFact> candidates,
                                         AggregatorPolicy policy);

// Hyperlink targets of rows matched by link rules. Entity targets become
// EntityRef values; raw urls become Text(anchor) flagged for resolution.
std::vector<CandidateFact> extract_links(const Document& doc, const RuleSet& rules,
                                         const EntityId& subject, const ExtractContext& ctx);

std::optional<TypeViolation> validate_types(const CandidateFact& candidate,
                                            const KnowledgeGraph& kg);

// Document text at a provenance span; nullopt when the span does not resolve.
std::optional<std::string> span_text(const Document& doc, const Span& span);

}  // namespace odke
