#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "odke/extractors/extract.hpp"
#include "odke/kg/graph.hpp"
#include "odke/normalize/parse.hpp"

namespace odke {

enum class LinkOutcome { not_applicable, unique, ambiguous, none };

struct LinkResult {
  LinkOutcome outcome = LinkOutcome::none;
  EntityId id;
  std::vector<EntityId> candidates;
};

// Exact case-insensitive name/alias match restricted to entities whose types
// satisfy `allowed_types` (empty = any).
LinkResult link_mention(std::string_view text, const std::set<EntityId>& allowed_types,
                        const KnowledgeGraph& kg);

struct NormalizedCandidate {
  CandidateFact candidate;
  Value value;
  LinkOutcome link = LinkOutcome::not_applicable;
  std::vector<EntityId> link_candidates;  // when ambiguous
};

struct NormalizeResult {
  std::optional<NormalizedCandidate> normalized;
  std::string error;
};

// Quantities → canonical unit rounded to one decimal; dates and money parsed
// from language-specific surface forms when not yet typed; text trimmed and
// whitespace-collapsed; entity mentions linked. Idempotent on its output value.
NormalizeResult normalize(const CandidateFact& candidate, const KnowledgeGraph& kg,
                          const LocaleRegistry* locales = nullptr);

struct FactCluster {
  EntityId subject;
  std::string predicate;
  Value value;
  std::vector<NormalizedCandidate> members;
  bool ambiguous = false;

  std::size_t support() const noexcept { return members.size(); }
  std::size_t distinct_sources() const;
  Timestamp earliest_extraction() const;
  std::string id() const;  // stable: canonical value
};

inline constexpr double kDefaultMergeThreshold = 0.01;

// Exact grouping by normalized value per (subject, predicate); quantities whose
// relative difference to a neighbour is within `merge_threshold` are merged.
// Output ordered by (subject, predicate, canonical value).
std::vector<FactCluster> cluster(std::vector<NormalizedCandidate> candidates,
                                 double merge_threshold = kDefaultMergeThreshold);

enum class Route { auto_ingest, curation, drop };
std::string_view to_string(Route r);

struct ScoringConfig {
  double auto_threshold = 0.8;
  double curation_floor = 0.4;
  std::map<std::string, double, std::less<>> base_weights{
      {"pattern", 1.0}, {"link", 1.0}, {"model", 0.7}};
  double merge_threshold = kDefaultMergeThreshold;

  double weight_for(std::string_view extractor_id) const;
  void validate() const;  // throws ValidationError
};

// Score of one cluster given the evidence total of its (subject, predicate).
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual double score(const FactCluster& cluster, std::size_t evidence_total) const = 0;
};

// max(base_weight × extractor_score) × support / evidence_total.
class HeuristicScorer : public Scorer {
 public:
  explicit HeuristicScorer(ScoringConfig config) : config_(std::move(config)) {}
  double score(const FactCluster& cluster, std::size_t evidence_total) const override;

 private:
  ScoringConfig config_;
};

struct ScoredFact {
  Fact fact;
  double score = 0;
  std::size_t rank = 0;
  Route route = Route::drop;
  FactCluster cluster;
};

Json to_json(const ScoredFact& s);

// Evidence total is every candidate of the (subject, predicate) for functional
// predicates, and the best-supported cluster's support for multi-valued ones.
std::vector<ScoredFact> score_and_rank(const std::vector<FactCluster>& clusters,
                                       const ScoringConfig& config, const Ontology& ontology,
                                       const Scorer* scorer = nullptr);

Route route_for(double score, std::size_t rank, const Predicate& predicate, bool ambiguous,
                const ScoringConfig& config);

}  // namespace odke
