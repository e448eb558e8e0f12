#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "odke/kg/ontology.hpp"
#include "odke/kg/value.hpp"

namespace odke {

enum class CreatedBy { seed, ingestion };

struct Alias {
  std::string name;
  std::string language;
};

struct Entity {
  EntityId id;
  std::string canonical_name;
  std::vector<Alias> aliases;
  std::set<EntityId> types;
  CreatedBy created_by = CreatedBy::seed;
  std::vector<std::string> sitelinks;  // crawl-index urls describing this entity
  std::string description;
};

Json to_json(const Entity& e);
Entity entity_from_json(const Json& j);

enum class ResolveOutcome { existing, created, ambiguous };

struct ResolveResult {
  ResolveOutcome outcome = ResolveOutcome::existing;
  EntityId id;                       // empty when ambiguous
  std::vector<EntityId> candidates;  // populated when ambiguous, sorted
};

enum class ViolationCode {
  unknown_predicate,
  unknown_subject,
  subject_type,
  value_kind,
  unit_dimension,
  unknown_object,
  object_type,
  invalid_value,
};

struct TypeViolation {
  ViolationCode code;
  std::string message;
};

// Entities and ontology. Readers may run concurrently with resolve_entity.
class KnowledgeGraph {
 public:
  explicit KnowledgeGraph(Ontology ontology);

  const Ontology& ontology() const noexcept { return ontology_; }

  // Throws ValidationError on duplicate id, empty name, or a reserved-prefix
  // id given to a seed entity.
  void add_entity(Entity e);

  // Stable pointer; entities are never mutated or removed.
  const Entity* find(const EntityId& id) const;
  std::size_t size() const;
  std::vector<EntityId> entity_ids() const;
  std::vector<EntityId> entities_of_type(const EntityId& cls) const;

  // Case-insensitive exact match on canonical name or any alias.
  std::vector<EntityId> lookup_name(std::string_view name) const;
  std::optional<EntityId> entity_for_url(std::string_view url) const;

  bool has_type(const EntityId& entity, const EntityId& cls) const;

  // external_id known → that entity; else unique case-insensitive name/alias
  // match among type-compatible entities; ≥2 matches → ambiguous; none → a new
  // "odke:<n>" entity typed with type_hint. Throws ValidationError on an empty
  // name, or when creation is needed without a type hint.
  ResolveResult resolve_entity(std::string_view name, const std::vector<Alias>& aliases,
                               const std::optional<EntityId>& type_hint,
                               const std::optional<EntityId>& external_id = std::nullopt);

  // Replays entities created by earlier runs, then journals new ones there.
  void attach_journal(const std::filesystem::path& path);

 private:
  void index_locked(const Entity& e);

  Ontology ontology_;
  std::map<EntityId, std::unique_ptr<Entity>> entities_;
  std::unordered_map<std::string, std::vector<EntityId>> by_name_;
  std::unordered_map<std::string, EntityId> by_url_;
  std::uint64_t next_internal_ = 1;
  std::optional<std::filesystem::path> journal_;
  mutable std::unique_ptr<std::shared_mutex> mutex_ = std::make_unique<std::shared_mutex>();
};

// Seed entities: header {"schema":"odke.entities","version":1}, one Entity per line.
std::vector<Entity> load_entities(const std::filesystem::path& path);

// Ontology constraint check for a (subject, predicate, value) triple.
std::optional<TypeViolation> check_fact(const KnowledgeGraph& kg, const EntityId& subject,
                                        std::string_view predicate, const Value& value);

}  // namespace odke
