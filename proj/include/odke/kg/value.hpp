#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "odke/ndjson.hpp"

namespace odke {

// Either an external global id ("Q8991894") or an internal id "odke:<n>".
class EntityId {
 public:
  static constexpr std::string_view kInternalPrefix = "odke:";

  EntityId() = default;
  explicit EntityId(std::string id) : id_(std::move(id)) {}

  static EntityId internal(std::uint64_t counter) {
    return EntityId(std::string(kInternalPrefix) + std::to_string(counter));
  }

  const std::string& str() const noexcept { return id_; }
  bool empty() const noexcept { return id_.empty(); }
  bool is_internal() const noexcept { return id_.starts_with(kInternalPrefix); }

  auto operator<=>(const EntityId&) const = default;

 private:
  std::string id_;
};

enum class ValueKind { entity_ref, quantity, date, money, string, external_id };

std::string_view to_string(ValueKind kind);
ValueKind value_kind_from_string(std::string_view s);

struct EntityRef {
  EntityId id;
  bool operator==(const EntityRef&) const = default;
};

struct Quantity {
  double magnitude = 0;
  std::string unit;
  bool operator==(const Quantity&) const = default;
};

enum class DatePrecision { year, month, day };

struct DateValue {
  int year = 0;
  unsigned month = 0;  // 0 unless precision >= month
  unsigned day = 0;    // 0 unless precision == day
  DatePrecision precision = DatePrecision::day;

  // "1942-11-20", "1942-11" or "1942".
  std::string iso() const;
  // Throws ParseError on lexically or calendrically invalid input.
  static DateValue parse_iso(std::string_view s);
  bool operator==(const DateValue&) const = default;
};

struct Money {
  std::int64_t minor_units = 0;
  std::string currency;  // ISO-4217
  bool operator==(const Money&) const = default;
};

struct Text {
  std::string text;
  std::string language;
  bool operator==(const Text&) const = default;
};

struct ExternalId {
  std::string id;
  std::string scheme;
  bool operator==(const ExternalId&) const = default;
};

using Value = std::variant<EntityRef, Quantity, DateValue, Money, Text, ExternalId>;

ValueKind kind_of(const Value& v);

// Stable string form used for keys, equality of normalized values and
// deterministic ordering. Text compares by content only.
std::string canonical(const Value& v);

// Human-readable rendering ("213 cm", "1942-11-20", "Q18419").
std::string display(const Value& v);

Json to_json(const Value& v);
Value value_from_json(const Json& j);

// Unit registry. Conversions use exact constants (1 in = 2.54 cm, 1 ft = 30.48 cm,
// 1 lb = 0.45359237 kg).
struct UnitInfo {
  std::string_view symbol;
  std::string_view dimension;  // "length", "mass", "count"
  double to_canonical;         // multiply to reach the dimension's canonical unit
};

std::optional<UnitInfo> unit_info(std::string_view unit);
std::string_view canonical_unit(std::string_view dimension);
// Exact conversion, no rounding. Unknown unit → returned unchanged.
Quantity to_canonical(const Quantity& q);

// Relative difference |a-b| / min(|a|,|b|); 0 when equal, +inf when one side is 0.
double relative_difference(double a, double b);

}  // namespace odke

template <>
struct std::hash<odke::EntityId> {
  std::size_t operator()(const odke::EntityId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
