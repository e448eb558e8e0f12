#include "odke/kg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "odke/error.hpp"
#include "odke/text.hpp"

namespace odke {

Json to_json(const Entity& e) {
  Json aliases = Json::array();
  for (const auto& a : e.aliases) aliases.push_back(Json{{"name", a.name}, {"lang", a.language}});
  Json types = Json::array();
  for (const auto& t : e.types) types.push_back(t.str());
  Json j{{"id", e.id.str()},
         {"name", e.canonical_name},
         {"aliases", aliases},
         {"types", types},
         {"created_by", e.created_by == CreatedBy::seed ? "seed" : "ingestion"}};
  if (!e.sitelinks.empty()) j["sitelinks"] = e.sitelinks;
  if (!e.description.empty()) j["description"] = e.description;
  return j;
}

Entity entity_from_json(const Json& j) {
  Entity e;
  e.id = EntityId(j.at("id").get<std::string>());
  e.canonical_name = j.at("name").get<std::string>();
  for (const auto& a : j.value("aliases", Json::array()))
    e.aliases.push_back({a.at("name").get<std::string>(), a.value("lang", std::string{})});
  for (const auto& t : j.value("types", Json::array())) e.types.emplace(t.get<std::string>());
  e.created_by = j.value("created_by", std::string("seed")) == "ingestion" ? CreatedBy::ingestion
                                                                           : CreatedBy::seed;
  e.sitelinks = j.value("sitelinks", std::vector<std::string>{});
  e.description = j.value("description", std::string{});
  return e;
}

KnowledgeGraph::KnowledgeGraph(Ontology ontology) : ontology_(std::move(ontology)) {}

void KnowledgeGraph::index_locked(const Entity& e) {
  auto add_name = [&](const std::string& name) {
    auto& ids = by_name_[text::to_lower(name)];
    if (std::find(ids.begin(), ids.end(), e.id) == ids.end()) ids.push_back(e.id);
  };
  add_name(e.canonical_name);
  for (const auto& a : e.aliases) add_name(a.name);
  for (const auto& url : e.sitelinks) by_url_.emplace(url, e.id);
  if (e.id.is_internal()) {
    const auto n = std::stoull(e.id.str().substr(EntityId::kInternalPrefix.size()));
    next_internal_ = std::max<std::uint64_t>(next_internal_, n + 1);
  }
}

void KnowledgeGraph::add_entity(Entity e) {
  if (e.id.empty()) throw ValidationError("entity with empty id");
  if (e.canonical_name.empty()) throw ValidationError("entity " + e.id.str() + " has empty name");
  if (e.created_by == CreatedBy::seed && e.id.is_internal())
    throw ValidationError("seed entity uses reserved prefix: " + e.id.str());
  if (e.created_by == CreatedBy::ingestion && e.types.empty())
    throw ValidationError("ingested entity " + e.id.str() + " has no type");
  std::unique_lock lock(*mutex_);
  if (entities_.contains(e.id)) throw ValidationError("duplicate entity " + e.id.str());
  auto owned = std::make_unique<Entity>(std::move(e));
  index_locked(*owned);
  const auto id = owned->id;
  entities_.emplace(id, std::move(owned));
}

const Entity* KnowledgeGraph::find(const EntityId& id) const {
  std::shared_lock lock(*mutex_);
  auto it = entities_.find(id);
  return it == entities_.end() ? nullptr : it->second.get();
}

std::size_t KnowledgeGraph::size() const {
  std::shared_lock lock(*mutex_);
  return entities_.size();
}

std::vector<EntityId> KnowledgeGraph::entity_ids() const {
  std::shared_lock lock(*mutex_);
  std::vector<EntityId> out;
  out.reserve(entities_.size());
  for (const auto& [id, _] : entities_) out.push_back(id);
  return out;
}

std::vector<EntityId> KnowledgeGraph::entities_of_type(const EntityId& cls) const {
  std::shared_lock lock(*mutex_);
  std::vector<EntityId> out;
  for (const auto& [id, e] : entities_)
    if (std::any_of(e->types.begin(), e->types.end(),
                    [&](const EntityId& t) { return ontology_.is_a(t, cls); }))
      out.push_back(id);
  return out;
}

std::vector<EntityId> KnowledgeGraph::lookup_name(std::string_view name) const {
  std::shared_lock lock(*mutex_);
  auto it = by_name_.find(text::to_lower(text::collapse_whitespace(name)));
  if (it == by_name_.end()) return {};
  auto ids = it->second;
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::optional<EntityId> KnowledgeGraph::entity_for_url(std::string_view url) const {
  std::shared_lock lock(*mutex_);
  auto it = by_url_.find(std::string(url));
  if (it == by_url_.end()) return std::nullopt;
  return it->second;
}

bool KnowledgeGraph::has_type(const EntityId& entity, const EntityId& cls) const {
  const Entity* e = find(entity);
  if (!e) return false;
  return std::any_of(e->types.begin(), e->types.end(),
                     [&](const EntityId& t) { return ontology_.is_a(t, cls); });
}

ResolveResult KnowledgeGraph::resolve_entity(std::string_view name,
                                             const std::vector<Alias>& aliases,
                                             const std::optional<EntityId>& type_hint,
                                             const std::optional<EntityId>& external_id) {
  const std::string clean = text::collapse_whitespace(name);
  if (clean.empty()) throw ValidationError("resolve_entity: empty name");
  if (external_id && !external_id->empty() && find(*external_id))
    return {ResolveOutcome::existing, *external_id, {}};

  std::set<EntityId> matches;
  auto collect = [&](std::string_view n) {
    for (auto& id : lookup_name(n)) {
      if (type_hint && !has_type(id, *type_hint)) continue;
      matches.insert(std::move(id));
    }
  };
  collect(clean);
  for (const auto& a : aliases) collect(a.name);

  if (matches.size() == 1) return {ResolveOutcome::existing, *matches.begin(), {}};
  if (matches.size() > 1)
    return {ResolveOutcome::ambiguous, EntityId{}, {matches.begin(), matches.end()}};

  if (!type_hint) throw ValidationError("cannot create untyped entity '" + clean + "'");
  std::unique_lock lock(*mutex_);
  Entity e;
  e.id = EntityId::internal(next_internal_);
  e.canonical_name = clean;
  e.aliases = aliases;
  e.types = {*type_hint};
  e.created_by = CreatedBy::ingestion;
  if (journal_) {
    NdjsonWriter writer(*journal_, make_header("odke.entities", 1));
    writer.write(to_json(e));
    writer.flush();
  }
  auto owned = std::make_unique<Entity>(std::move(e));
  index_locked(*owned);
  const auto id = owned->id;
  entities_.emplace(id, std::move(owned));
  return {ResolveOutcome::created, id, {}};
}

void KnowledgeGraph::attach_journal(const std::filesystem::path& path) {
  if (std::filesystem::exists(path))
    for (auto& e : load_entities(path))
      if (!find(e.id)) add_entity(std::move(e));
  std::unique_lock lock(*mutex_);
  journal_ = path;
}

std::vector<Entity> load_entities(const std::filesystem::path& path) {
  std::vector<Entity> out;
  NdjsonReader reader(path, "odke.entities");
  Json record;
  while (reader.next(record)) {
    try {
      out.push_back(entity_from_json(record));
    } catch (const Json::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), reader.line(), reader.offset());
    }
  }
  return out;
}

std::optional<TypeViolation> check_fact(const KnowledgeGraph& kg, const EntityId& subject,
                                        std::string_view predicate, const Value& value) {
  const Ontology& ontology = kg.ontology();
  const Predicate* p = ontology.find_predicate(predicate);
  if (!p)
    return TypeViolation{ViolationCode::unknown_predicate,
                         "unknown predicate " + std::string(predicate)};
  const Entity* s = kg.find(subject);
  if (!s) return TypeViolation{ViolationCode::unknown_subject, "unknown subject " + subject.str()};
  if (!ontology.satisfies(s->types, p->allowed_subject_types))
    return TypeViolation{ViolationCode::subject_type,
                         "subject " + subject.str() + " is not an allowed type for " + p->id};
  const ValueKind kind = kind_of(value);
  if (kind != p->value_kind)
    return TypeViolation{ViolationCode::value_kind, p->id + " expects " +
                                                        std::string(to_string(p->value_kind)) +
                                                        ", got " + std::string(to_string(kind))};
  if (const auto* q = std::get_if<Quantity>(&value)) {
    if (!std::isfinite(q->magnitude))
      return TypeViolation{ViolationCode::invalid_value, "non-finite quantity"};
    const auto info = unit_info(q->unit);
    const std::string_view dimension = info ? info->dimension : std::string_view{};
    const std::string expected = p->unit_dimension.value_or("count");
    if (dimension != expected)
      return TypeViolation{ViolationCode::unit_dimension,
                           p->id + " expects a " + expected + " unit, got '" + q->unit + "'"};
  }
  if (const auto* r = std::get_if<EntityRef>(&value)) {
    const Entity* o = kg.find(r->id);
    if (!o) return TypeViolation{ViolationCode::unknown_object, "unknown object " + r->id.str()};
    if (!ontology.satisfies(o->types, p->allowed_object_types))
      return TypeViolation{ViolationCode::object_type,
                           "object " + r->id.str() + " is not an allowed type for " + p->id};
  }
  if (const auto* t = std::get_if<Text>(&value); t && t->text.empty())
    return TypeViolation{ViolationCode::invalid_value, "empty text value"};
  return std::nullopt;
}

}  // namespace odke
