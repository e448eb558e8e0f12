#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "odke/kg/value.hpp"

namespace odke {

struct Predicate {
  std::string id;    // "P2048"
  std::string name;  // "height"
  ValueKind value_kind = ValueKind::string;
  std::optional<std::string> unit_dimension;  // "length", "mass", ...
  bool functional = false;
  std::set<EntityId> allowed_subject_types;  // empty: unconstrained
  std::set<EntityId> allowed_object_types;   // entity_ref only; empty: unconstrained
  bool sensitive = false;
};

struct OntologyClass {
  EntityId id;
  std::string name;
  std::vector<EntityId> parents;
};

// Predicates plus a class hierarchy; type constraints are satisfied by
// subclasses of an allowed class.
class Ontology {
 public:
  void add_class(OntologyClass cls);
  void add_predicate(Predicate p);

  const Predicate* find_predicate(std::string_view id) const;
  // Throws ValidationError for unknown ids.
  const Predicate& predicate(std::string_view id) const;
  const OntologyClass* find_class(const EntityId& id) const;

  // Reflexive, transitive subclass test.
  bool is_a(const EntityId& cls, const EntityId& ancestor) const;
  // True when `allowed` is empty or some type is_a some allowed class.
  bool satisfies(const std::set<EntityId>& types, const std::set<EntityId>& allowed) const;

  const std::map<std::string, Predicate, std::less<>>& predicates() const { return predicates_; }
  const std::map<EntityId, OntologyClass>& classes() const { return classes_; }

 private:
  std::map<std::string, Predicate, std::less<>> predicates_;
  std::map<EntityId, OntologyClass> classes_;
};

// Newline-delimited, header {"schema":"odke.ontology","version":1}; records are
// {"class": {...}} or {"predicate": {...}}.
Ontology load_ontology(const std::filesystem::path& path);

Json to_json(const Predicate& p);
Predicate predicate_from_json(const Json& j);

}  // namespace odke
