#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "odke/ingestion/ingest.hpp"
#include "odke/kg/fact_log.hpp"

namespace odke {

enum class InferenceKind { symmetric, inverse, conditional_inverse };

std::string_view to_string(InferenceKind k);
InferenceKind inference_kind_from_string(std::string_view s);

struct LinkInferenceRule {
  std::string rule_id;
  InferenceKind kind = InferenceKind::symmetric;
  std::string source;
  std::string target;  // symmetric / inverse
  // conditional_inverse: the source subject's value of condition_predicate
  // (displayed form, e.g. "Q6581097") selects the target predicate.
  std::string condition_predicate;
  std::map<std::string, std::string> condition_targets;
  double confidence_factor = 1.0;
  bool correction = false;  // also used by the correctness pass
};

double default_confidence_factor(InferenceKind k);

// Throws ValidationError naming the rule.
void validate_rule(const LinkInferenceRule& rule, const Ontology& ontology);

// {"schema":"odke.link_rules","version":1,"rules":[{"rule_id","kind","source","target",
//   "condition":{"predicate":...,"targets":{value: predicate}},"confidence_factor","correction"}]}
std::vector<LinkInferenceRule> load_link_rules(const std::filesystem::path& path,
                                               const Ontology& ontology);

struct InferredFact {
  Fact fact;  // status inferred
  FactKey derived_from;
  std::string rule_id;
};

struct CompletenessResult {
  std::vector<InferredFact> facts;
  std::size_t missing_condition = 0;
};

struct InferenceContext {
  std::string run_id;
  Timestamp now{};
};

// Targets are emitted only when absent: for functional targets the subject
// must have no value at all, otherwise the exact edge must be missing. When
// several sources infer different values for one functional target, the
// highest confidence wins (ties: smaller canonical value).
CompletenessResult infer_completeness(const LatestView& view,
                                      const std::vector<LinkInferenceRule>& rules,
                                      const Ontology& ontology, const InferenceContext& ctx);

struct Correction {
  InferredFact inferred;
  FactKey replaced;
  double replaced_confidence = 0;
};

inline constexpr double kDefaultCorrectionMinConfidence = 0.9;

// Correction rules applied to facts with confidence >= min_confidence. An
// inferred functional edge replaces a different existing value only when its
// confidence is strictly greater.
std::vector<Correction> infer_correctness(const LatestView& view,
                                          const std::vector<LinkInferenceRule>& rules,
                                          const Ontology& ontology, const InferenceContext& ctx,
                                          double min_confidence = kDefaultCorrectionMinConfidence);

IngestSummary apply_inferred(const std::vector<InferredFact>& facts, KnowledgeGraph& kg,
                             FactLog& log, std::string_view run_id, Timestamp at);

}  // namespace odke
