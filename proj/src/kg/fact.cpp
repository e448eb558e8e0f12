#include "odke/kg/fact.hpp"

#include <array>

#include "odke/error.hpp"

namespace odke {

namespace {

constexpr std::array<std::string_view, 6> kStatusNames = {
    "candidate", "auto_ingested", "curated_accepted", "curated_rejected", "retracted", "inferred"};

Json span_to_json(const Span& span) {
  if (const auto* p = std::get_if<PassageSpan>(&span))
    return Json{{"passage", p->passage_id}, {"start", p->start}, {"end", p->end}};
  if (const auto* r = std::get_if<InfoboxSpan>(&span))
    return Json{{"row", r->row}, {"key", r->key}, {"start", r->start}, {"end", r->end}};
  return nullptr;
}

Span span_from_json(const Json& j) {
  if (j.is_null()) return std::monostate{};
  if (j.contains("passage"))
    return PassageSpan{j.at("passage").get<std::string>(), j.at("start").get<std::size_t>(),
                       j.at("end").get<std::size_t>()};
  return InfoboxSpan{j.at("row").get<std::size_t>(), j.at("key").get<std::string>(),
                     j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
}

}  // namespace

std::string_view to_string(FactStatus s) { return kStatusNames[static_cast<std::size_t>(s)]; }

FactStatus fact_status_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kStatusNames.size(); ++i)
    if (kStatusNames[i] == s) return static_cast<FactStatus>(i);
  throw ParseError("unknown fact status: " + std::string(s));
}

std::string FactKey::to_string() const {
  std::string out = subject.str() + "|" + predicate;
  if (value) out += "|" + *value;
  return out;
}

FactKey make_key(const Fact& fact, const Ontology& ontology) {
  const Predicate* p = ontology.find_predicate(fact.predicate);
  FactKey key{fact.subject, fact.predicate, std::nullopt};
  if (!p || !p->functional) key.value = canonical(fact.object);
  return key;
}

Json to_json(const Provenance& p) {
  return Json{{"url", p.source_url},
              {"revision", p.revision_id},
              {"span", span_to_json(p.span)},
              {"extractor", p.extractor_id},
              {"extracted_at", format_timestamp(p.extracted_at)},
              {"run", p.pipeline_run_id}};
}

Provenance provenance_from_json(const Json& j) {
  Provenance p;
  p.source_url = j.value("url", std::string{});
  p.revision_id = j.value("revision", std::string{});
  p.span = span_from_json(j.value("span", Json(nullptr)));
  p.extractor_id = j.at("extractor").get<std::string>();
  p.extracted_at = parse_timestamp(j.at("extracted_at").get<std::string>());
  p.pipeline_run_id = j.value("run", std::string{});
  return p;
}

Json to_json(const Fact& f) {
  Json prov = Json::array();
  for (const auto& p : f.provenance) prov.push_back(to_json(p));
  return Json{{"subject", f.subject.str()},   {"predicate", f.predicate},
              {"object", to_json(f.object)},  {"confidence", f.confidence},
              {"provenance", prov},           {"lang", f.language},
              {"status", to_string(f.status)}};
}

Fact fact_from_json(const Json& j) {
  Fact f;
  f.subject = EntityId(j.at("subject").get<std::string>());
  f.predicate = j.at("predicate").get<std::string>();
  f.object = value_from_json(j.at("object"));
  f.confidence = j.at("confidence").get<double>();
  for (const auto& p : j.at("provenance")) f.provenance.push_back(provenance_from_json(p));
  f.language = j.value("lang", std::string{});
  f.status = fact_status_from_string(j.at("status").get<std::string>());
  return f;
}

Json to_json(const FactKey& k) {
  Json j{{"s", k.subject.str()}, {"p", k.predicate}};
  if (k.value) j["v"] = *k.value;
  return j;
}

FactKey fact_key_from_json(const Json& j) {
  FactKey k{EntityId(j.at("s").get<std::string>()), j.at("p").get<std::string>(), std::nullopt};
  if (j.contains("v")) k.value = j.at("v").get<std::string>();
  return k;
}

Json to_json(const VersionedFactRow& r) {
  return Json{{"key", to_json(r.key)},
              {"version", r.version},
              {"fact", to_json(r.fact)},
              {"appended_at", format_timestamp(r.appended_at)},
              {"run", r.run_id}};
}

VersionedFactRow row_from_json(const Json& j) {
  VersionedFactRow r;
  r.key = fact_key_from_json(j.at("key"));
  r.version = j.at("version").get<std::uint64_t>();
  r.fact = fact_from_json(j.at("fact"));
  r.appended_at = parse_timestamp(j.at("appended_at").get<std::string>());
  r.run_id = j.value("run", std::string{});
  return r;
}

}  // namespace odke
