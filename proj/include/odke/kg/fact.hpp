#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "odke/kg/ontology.hpp"
#include "odke/kg/value.hpp"
#include "odke/ndjson.hpp"
#include "odke/time.hpp"

namespace odke {

enum class FactStatus {
  candidate,
  auto_ingested,
  curated_accepted,
  curated_rejected,
  retracted,
  inferred,
};

std::string_view to_string(FactStatus s);
FactStatus fact_status_from_string(std::string_view s);

// Rejected and retracted versions are tombstones: they never appear in the
// latest view and they hide earlier versions carrying the same value.
constexpr bool is_tombstone(FactStatus s) {
  return s == FactStatus::curated_rejected || s == FactStatus::retracted;
}

// Byte offsets into a passage's UTF-8 text.
struct PassageSpan {
  std::string passage_id;
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const PassageSpan&) const = default;
};

// Byte offsets into an infobox row's raw value.
struct InfoboxSpan {
  std::size_t row = 0;
  std::string key;
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const InfoboxSpan&) const = default;
};

using Span = std::variant<std::monostate, PassageSpan, InfoboxSpan>;

struct Provenance {
  std::string source_url;
  std::string revision_id;
  Span span;
  std::string extractor_id;  // "pattern:<rule>", "link:<rule>", "model:<client>", ...
  Timestamp extracted_at{};
  std::string pipeline_run_id;
  bool operator==(const Provenance&) const = default;
};

inline constexpr std::string_view kLinkInferenceExtractor = "link_inference";

struct Fact {
  EntityId subject;
  std::string predicate;
  Value object;
  double confidence = 0;
  std::vector<Provenance> provenance;
  std::string language;
  FactStatus status = FactStatus::candidate;
  bool operator==(const Fact&) const = default;
};

// Version identity: functional predicates key on (subject, predicate);
// multi-valued ones add the canonical object value.
struct FactKey {
  EntityId subject;
  std::string predicate;
  std::optional<std::string> value;

  std::string to_string() const;
  auto operator<=>(const FactKey&) const = default;
};

FactKey make_key(const Fact& fact, const Ontology& ontology);

struct VersionedFactRow {
  FactKey key;
  std::uint64_t version = 0;
  Fact fact;
  Timestamp appended_at{};
  std::string run_id;
};

Json to_json(const Provenance& p);
Provenance provenance_from_json(const Json& j);
Json to_json(const Fact& f);
Fact fact_from_json(const Json& j);
Json to_json(const FactKey& k);
FactKey fact_key_from_json(const Json& j);
Json to_json(const VersionedFactRow& r);
VersionedFactRow row_from_json(const Json& j);

}  // namespace odke
