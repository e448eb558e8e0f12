#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "odke/kg/value.hpp"

namespace odke {

// Per-language surface-form tables used by the value parsers.
struct LocaleTable {
  std::string language;
  char decimal_separator = '.';
  char thousands_separator = ',';
  std::map<std::string, unsigned, std::less<>> months;    // lowercased name → 1..12
  std::map<std::string, double, std::less<>> scales;      // "million" → 1e6
  std::map<std::string, std::string, std::less<>> currencies;  // "$" → "USD"

  static const LocaleTable& builtin(std::string_view language);  // "en", "es"; else "en"
};

// {"schema":"odke.locale","version":1,"language":...,"decimal":...,"thousands":...,
//  "months":{...},"scales":{...},"currencies":{...}}
LocaleTable load_locale(const std::filesystem::path& path);

// Locale lookup with built-in fallback; data files override the built-ins.
class LocaleRegistry {
 public:
  void add(LocaleTable table);
  void load_directory(const std::filesystem::path& dir);
  const LocaleTable& get(std::string_view language) const;

 private:
  std::map<std::string, LocaleTable, std::less<>> tables_;
};

std::optional<double> parse_number(std::string_view text, const LocaleTable& locale);

// First quantity expression in `text`: "2.13 m", "211 cm", "6 ft 0 in",
// "6'11\"", "109 kg", "240 lb". Feet+inches come back as total inches.
std::optional<Quantity> parse_quantity(std::string_view text, const LocaleTable& locale);

// "November 20, 1942", "20 November 1942", "20 de noviembre de 1942",
// "1942-11-20", "November 1942", "1942".
std::optional<DateValue> parse_date(std::string_view text, const LocaleTable& locale);

// "$1.5 million", "US$ 2,000", "1,5 millones de dólares", "€3 billion".
std::optional<Money> parse_money(std::string_view text, const LocaleTable& locale);

// Canonical unit, magnitude rounded to one decimal.
Quantity canonical_quantity(const Quantity& q);

}  // namespace odke
