#include "odke/kg/ontology.hpp"

#include "odke/error.hpp"

namespace odke {

namespace {

std::set<EntityId> id_set(const Json& j, std::string_view field) {
  std::set<EntityId> out;
  if (!j.contains(field)) return out;
  for (const auto& s : j.at(std::string(field))) out.emplace(s.get<std::string>());
  return out;
}

Json id_array(const std::set<EntityId>& ids) {
  Json a = Json::array();
  for (const auto& id : ids) a.push_back(id.str());
  return a;
}

}  // namespace

void Ontology::add_class(OntologyClass cls) {
  if (cls.id.empty()) throw ValidationError("ontology class with empty id");
  const auto id = cls.id;
  if (!classes_.emplace(id, std::move(cls)).second)
    throw ValidationError("duplicate ontology class " + id.str());
}

void Ontology::add_predicate(Predicate p) {
  if (p.id.empty()) throw ValidationError("predicate with empty id");
  if (p.value_kind != ValueKind::entity_ref && !p.allowed_object_types.empty())
    throw ValidationError("predicate " + p.id + ": object type constraints require entity_ref");
  if (p.unit_dimension && p.value_kind != ValueKind::quantity)
    throw ValidationError("predicate " + p.id + ": unit dimension requires quantity");
  if (p.unit_dimension && canonical_unit(*p.unit_dimension).empty())
    throw ValidationError("predicate " + p.id + ": unknown unit dimension " + *p.unit_dimension);
  const auto id = p.id;
  if (!predicates_.emplace(id, std::move(p)).second)
    throw ValidationError("duplicate predicate " + id);
}

const Predicate* Ontology::find_predicate(std::string_view id) const {
  auto it = predicates_.find(id);
  return it == predicates_.end() ? nullptr : &it->second;
}

const Predicate& Ontology::predicate(std::string_view id) const {
  if (const auto* p = find_predicate(id)) return *p;
  throw ValidationError("unknown predicate " + std::string(id));
}

const OntologyClass* Ontology::find_class(const EntityId& id) const {
  auto it = classes_.find(id);
  return it == classes_.end() ? nullptr : &it->second;
}

bool Ontology::is_a(const EntityId& cls, const EntityId& ancestor) const {
  std::vector<EntityId> stack{cls};
  std::set<EntityId> seen;
  while (!stack.empty()) {
    EntityId current = std::move(stack.back());
    stack.pop_back();
    if (current == ancestor) return true;
    if (!seen.insert(current).second) continue;
    if (const auto* c = find_class(current))
      for (const auto& parent : c->parents) stack.push_back(parent);
  }
  return false;
}

bool Ontology::satisfies(const std::set<EntityId>& types, const std::set<EntityId>& allowed) const {
  if (allowed.empty()) return true;
  for (const auto& t : types)
    for (const auto& a : allowed)
      if (is_a(t, a)) return true;
  return false;
}

Json to_json(const Predicate& p) {
  Json j{{"id", p.id},
         {"name", p.name},
         {"value_kind", to_string(p.value_kind)},
         {"functional", p.functional},
         {"sensitive", p.sensitive},
         {"subject_types", id_array(p.allowed_subject_types)},
         {"object_types", id_array(p.allowed_object_types)}};
  if (p.unit_dimension) j["unit_dimension"] = *p.unit_dimension;
  return j;
}

Predicate predicate_from_json(const Json& j) {
  Predicate p;
  p.id = j.at("id").get<std::string>();
  p.name = j.value("name", p.id);
  p.value_kind = value_kind_from_string(j.at("value_kind").get<std::string>());
  if (j.contains("unit_dimension")) p.unit_dimension = j.at("unit_dimension").get<std::string>();
  p.functional = j.value("functional", false);
  p.sensitive = j.value("sensitive", false);
  p.allowed_subject_types = id_set(j, "subject_types");
  p.allowed_object_types = id_set(j, "object_types");
  return p;
}

Ontology load_ontology(const std::filesystem::path& path) {
  Ontology ontology;
  NdjsonReader reader(path, "odke.ontology");
  Json record;
  while (reader.next(record)) {
    try {
      if (record.contains("class")) {
        const auto& c = record.at("class");
        OntologyClass cls{EntityId(c.at("id").get<std::string>()), c.value("name", std::string{}),
                          {}};
        for (const auto& parent : c.value("parents", Json::array()))
          cls.parents.emplace_back(parent.get<std::string>());
        ontology.add_class(std::move(cls));
      } else if (record.contains("predicate")) {
        ontology.add_predicate(predicate_from_json(record.at("predicate")));
      } else {
        throw ParseError("expected 'class' or 'predicate' record", reader.line(), reader.offset());
      }
    } catch (const Json::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), reader.line(), reader.offset());
    } catch (const ValidationError& e) {
      throw ParseError(path.string() + ": " + e.what(), reader.line(), reader.offset());
    }
  }
  return ontology;
}

}  // namespace odke
