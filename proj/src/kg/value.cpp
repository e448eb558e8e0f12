#include "odke/kg/value.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "odke/error.hpp"

namespace odke {

namespace {

constexpr std::array<std::string_view, 6> kKindNames = {"entity_ref", "quantity", "date",
                                                        "money",      "string",   "external_id"};

constexpr std::array<UnitInfo, 10> kUnits = {{
    {"cm", "length", 1.0},
    {"m", "length", 100.0},
    {"mm", "length", 0.1},
    {"km", "length", 100000.0},
    {"in", "length", 2.54},
    {"ft", "length", 30.48},
    {"kg", "mass", 1.0},
    {"g", "mass", 0.001},
    {"lb", "mass", 0.45359237},
    {"1", "count", 1.0},
}};

std::string format_number(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string_view precision_name(DatePrecision p) {
  switch (p) {
    case DatePrecision::year: return "year";
    case DatePrecision::month: return "month";
    case DatePrecision::day: return "day";
  }
  return "day";
}

DatePrecision precision_from_string(std::string_view s) {
  if (s == "year") return DatePrecision::year;
  if (s == "month") return DatePrecision::month;
  if (s == "day") return DatePrecision::day;
  throw ParseError("unknown date precision: " + std::string(s));
}

int parse_digits(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw ParseError("bad ISO-8601 date: " + std::string(s));
  return v;
}

}  // namespace

std::string_view to_string(ValueKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

ValueKind value_kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == s) return static_cast<ValueKind>(i);
  throw ParseError("unknown value kind: " + std::string(s));
}

std::string DateValue::iso() const {
  char buf[32];
  switch (precision) {
    case DatePrecision::year: std::snprintf(buf, sizeof buf, "%04d", year); break;
    case DatePrecision::month: std::snprintf(buf, sizeof buf, "%04d-%02u", year, month); break;
    case DatePrecision::day:
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
      break;
  }
  return buf;
}

DateValue DateValue::parse_iso(std::string_view s) {
  DateValue d;
  if (s.size() == 4) {
    d.year = parse_digits(s);
    d.precision = DatePrecision::year;
    return d;
  }
  if (s.size() == 7 && s[4] == '-') {
    d.year = parse_digits(s.substr(0, 4));
    d.month = unsigned(parse_digits(s.substr(5, 2)));
    d.precision = DatePrecision::month;
    if (d.month < 1 || d.month > 12) throw ParseError("bad month: " + std::string(s));
    return d;
  }
  if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
    d.year = parse_digits(s.substr(0, 4));
    d.month = unsigned(parse_digits(s.substr(5, 2)));
    d.day = unsigned(parse_digits(s.substr(8, 2)));
    d.precision = DatePrecision::day;
    namespace chr = std::chrono;
    if (!chr::year_month_day{chr::year{d.year}, chr::month{d.month}, chr::day{d.day}}.ok())
      throw ParseError("invalid calendar date: " + std::string(s));
    return d;
  }
  throw ParseError("bad ISO-8601 date: " + std::string(s));
}

ValueKind kind_of(const Value& v) {
  return std::visit(
      [](const auto& x) -> ValueKind {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, EntityRef>) return ValueKind::entity_ref;
        else if constexpr (std::is_same_v<T, Quantity>) return ValueKind::quantity;
        else if constexpr (std::is_same_v<T, DateValue>) return ValueKind::date;
        else if constexpr (std::is_same_v<T, Money>) return ValueKind::money;
        else if constexpr (std::is_same_v<T, Text>) return ValueKind::string;
        else return ValueKind::external_id;
      },
      v);
}

std::string canonical(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, EntityRef>) return "e:" + x.id.str();
        else if constexpr (std::is_same_v<T, Quantity>)
          return "q:" + format_number(x.magnitude) + " " + x.unit;
        else if constexpr (std::is_same_v<T, DateValue>) return "d:" + x.iso();
        else if constexpr (std::is_same_v<T, Money>)
          return "m:" + std::to_string(x.minor_units) + " " + x.currency;
        else if constexpr (std::is_same_v<T, Text>) return "t:" + x.text;
        else return "x:" + x.scheme + ":" + x.id;
      },
      v);
}

std::string display(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, EntityRef>) return x.id.str();
        else if constexpr (std::is_same_v<T, Quantity>)
          return format_number(x.magnitude) + " " + x.unit;
        else if constexpr (std::is_same_v<T, DateValue>) return x.iso();
        else if constexpr (std::is_same_v<T, Money>) {
          const auto whole = x.minor_units / 100, cents = std::llabs(x.minor_units % 100);
          char buf[64];
          std::snprintf(buf, sizeof buf, "%lld.%02lld %s", static_cast<long long>(whole),
                        static_cast<long long>(cents), x.currency.c_str());
          return buf;
        } else if constexpr (std::is_same_v<T, Text>) return x.text;
        else return x.scheme + ":" + x.id;
      },
      v);
}

Json to_json(const Value& v) {
  return std::visit(
      [](const auto& x) -> Json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, EntityRef>) return Json{{"entity", x.id.str()}};
        else if constexpr (std::is_same_v<T, Quantity>)
          return Json{{"quantity", x.magnitude}, {"unit", x.unit}};
        else if constexpr (std::is_same_v<T, DateValue>)
          return Json{{"date", x.iso()}, {"precision", precision_name(x.precision)}};
        else if constexpr (std::is_same_v<T, Money>)
          return Json{{"money", x.minor_units}, {"currency", x.currency}};
        else if constexpr (std::is_same_v<T, Text>)
          return Json{{"text", x.text}, {"lang", x.language}};
        else return Json{{"external_id", x.id}, {"scheme", x.scheme}};
      },
      v);
}

Value value_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("value must be an object");
  try {
    if (j.contains("entity")) {
      EntityRef r{EntityId(j.at("entity").get<std::string>())};
      if (r.id.empty()) throw ParseError("empty entity id");
      return r;
    }
    if (j.contains("quantity")) {
      Quantity q{j.at("quantity").get<double>(), j.at("unit").get<std::string>()};
      if (!std::isfinite(q.magnitude)) throw ParseError("quantity magnitude not finite");
      return q;
    }
    if (j.contains("date")) {
      DateValue d = DateValue::parse_iso(j.at("date").get<std::string>());
      if (j.contains("precision") &&
          precision_from_string(j.at("precision").get<std::string>()) != d.precision)
        throw ParseError("date precision does not match ISO form");
      return d;
    }
    if (j.contains("money"))
      return Money{j.at("money").get<std::int64_t>(), j.at("currency").get<std::string>()};
    if (j.contains("text"))
      return Text{j.at("text").get<std::string>(), j.value("lang", std::string{})};
    if (j.contains("external_id"))
      return ExternalId{j.at("external_id").get<std::string>(), j.value("scheme", std::string{})};
  } catch (const Json::exception& e) {
    throw ParseError(std::string("bad value: ") + e.what());
  }
  throw ParseError("unrecognised value: " + j.dump());
}

std::optional<UnitInfo> unit_info(std::string_view unit) {
  for (const auto& u : kUnits)
    if (u.symbol == unit) return u;
  return std::nullopt;
}

std::string_view canonical_unit(std::string_view dimension) {
  if (dimension == "length") return "cm";
  if (dimension == "mass") return "kg";
  if (dimension == "count") return "1";
  return {};
}

Quantity to_canonical(const Quantity& q) {
  const auto info = unit_info(q.unit);
  if (!info) return q;
  return Quantity{q.magnitude * info->to_canonical, std::string(canonical_unit(info->dimension))};
}

double relative_difference(double a, double b) {
  if (a == b) return 0.0;
  const double lo = std::min(std::fabs(a), std::fabs(b));
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return std::fabs(a - b) / lo;
}

}  // namespace odke
