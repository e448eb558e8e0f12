#include "odke/normalize/parse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>

#include "odke/error.hpp"
#include "odke/ndjson.hpp"
#include "odke/text.hpp"

namespace odke {

namespace {

LocaleTable make_english() {
  LocaleTable t;
  t.language = "en";
  const char* names[] = {"january", "february", "march",     "april",   "may",      "june",
                         "july",    "august",   "september", "october", "november", "december"};
  for (unsigned i = 0; i < 12; ++i) {
    t.months[names[i]] = i + 1;
    t.months[std::string(names[i]).substr(0, 3)] = i + 1;
  }
  t.months["sept"] = 9;
  t.scales = {{"thousand", 1e3}, {"million", 1e6}, {"billion", 1e9}, {"trillion", 1e12}};
  t.currencies = {{"$", "USD"},     {"us$", "USD"},   {"usd", "USD"},   {"dollars", "USD"},
                  {"€", "EUR"},     {"eur", "EUR"},   {"euros", "EUR"}, {"£", "GBP"},
                  {"gbp", "GBP"},   {"pounds sterling", "GBP"}};
  return t;
}

LocaleTable make_spanish() {
  LocaleTable t;
  t.language = "es";
  t.decimal_separator = ',';
  t.thousands_separator = '.';
  const char* names[] = {"enero", "febrero", "marzo",      "abril",   "mayo",      "junio",
                         "julio", "agosto",  "septiembre", "octubre", "noviembre", "diciembre"};
  for (unsigned i = 0; i < 12; ++i) {
    t.months[names[i]] = i + 1;
    t.months[std::string(names[i]).substr(0, 3)] = i + 1;
  }
  t.months["setiembre"] = 9;
  t.scales = {{"mil", 1e3}, {"millón", 1e6}, {"millones", 1e6}, {"mil millones", 1e9},
              {"billón", 1e12}, {"billones", 1e12}};
  t.currencies = {{"$", "USD"},       {"us$", "USD"},     {"usd", "USD"}, {"dólares", "USD"},
                  {"dolares", "USD"}, {"€", "EUR"},       {"eur", "EUR"}, {"euros", "EUR"},
                  {"£", "GBP"},       {"libras", "GBP"}};
  return t;
}

// Matches a digit run with separators; interpretation depends on the locale.
const std::string kNumber = R"((\d+(?:[.,]\d+)*))";

std::optional<unsigned> month_of(std::string_view word, const LocaleTable& locale) {
  std::string w = text::to_lower(word);
  while (!w.empty() && w.back() == '.') w.pop_back();
  auto it = locale.months.find(w);
  if (it == locale.months.end()) return std::nullopt;
  return it->second;
}

std::optional<DateValue> make_date(int y, unsigned m, unsigned d) {
  using namespace std::chrono;
  if (!year_month_day{year{y}, month{m}, day{d}}.ok()) return std::nullopt;
  return DateValue{y, m, d, DatePrecision::day};
}

std::string_view unit_symbol(std::string_view word) {
  static const std::map<std::string, std::string_view, std::less<>> kAliases = {
      {"cm", "cm"},     {"centimetres", "cm"}, {"centimeters", "cm"}, {"centímetros", "cm"},
      {"m", "m"},       {"metres", "m"},       {"meters", "m"},       {"metros", "m"},
      {"mm", "mm"},     {"km", "km"},          {"in", "in"},          {"inches", "in"},
      {"inch", "in"},   {"ft", "ft"},          {"feet", "ft"},        {"foot", "ft"},
      {"kg", "kg"},     {"kilograms", "kg"},   {"kilogramos", "kg"},  {"g", "g"},
      {"lb", "lb"},     {"lbs", "lb"},         {"pounds", "lb"},      {"libras", "lb"},
  };
  auto it = kAliases.find(text::to_lower(word));
  return it == kAliases.end() ? std::string_view{} : it->second;
}

}  // namespace

const LocaleTable& LocaleTable::builtin(std::string_view language) {
  static const LocaleTable en = make_english();
  static const LocaleTable es = make_spanish();
  return language == "es" ? es : en;
}

LocaleTable load_locale(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open locale table " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (j.value("schema", "") != "odke.locale" || j.value("version", 0) != 1)
    throw ParseError(path.string() + ": expected schema odke.locale version 1");
  LocaleTable t;
  t.language = j.at("language").get<std::string>();
  const auto dec = j.value("decimal", std::string("."));
  const auto thou = j.value("thousands", std::string(","));
  if (dec.size() != 1 || thou.size() != 1) throw ParseError(path.string() + ": bad separators");
  t.decimal_separator = dec[0];
  t.thousands_separator = thou[0];
  const Json months = j.value("months", Json::object());
  for (const auto& [k, v] : months.items())
    t.months[text::to_lower(k)] = v.get<unsigned>();
  const Json scales = j.value("scales", Json::object());
  for (const auto& [k, v] : scales.items())
    t.scales[text::to_lower(k)] = v.get<double>();
  const Json currencies = j.value("currencies", Json::object());
  for (const auto& [k, v] : currencies.items())
    t.currencies[text::to_lower(k)] = v.get<std::string>();
  return t;
}

void LocaleRegistry::add(LocaleTable table) {
  auto lang = table.language;
  tables_[lang] = std::move(table);
}

void LocaleRegistry::load_directory(const std::filesystem::path& dir) {
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".json") add(load_locale(entry.path()));
}

const LocaleTable& LocaleRegistry::get(std::string_view language) const {
  auto it = tables_.find(language);
  if (it != tables_.end()) return it->second;
  return LocaleTable::builtin(language);
}

std::optional<double> parse_number(std::string_view raw, const LocaleTable& locale) {
  std::string s(raw);
  const char dec = locale.decimal_separator;
  const char thou = locale.thousands_separator;
  // A lone foreign separator followed by other than three digits is a decimal point
  // ("2.13" in a decimal-comma locale).
  if (s.find(dec) == std::string::npos) {
    const auto pos = s.find(thou);
    if (pos != std::string::npos && s.find(thou, pos + 1) == std::string::npos &&
        s.size() - pos - 1 != 3)
      s[pos] = dec;
  }
  std::string cleaned;
  for (char c : s) {
    if (c == thou) continue;
    cleaned += c == dec ? '.' : c;
  }
  if (cleaned.empty() || cleaned.find_first_not_of("0123456789.") != std::string::npos ||
      std::count(cleaned.begin(), cleaned.end(), '.') > 1)
    return std::nullopt;
  try {
    return std::stod(cleaned);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<Quantity> parse_quantity(std::string_view text_in, const LocaleTable& locale) {
  static const std::regex feet_inches(
      kNumber + R"(\s*(?:ft|feet|foot|')\s*(?:)" + kNumber + R"(\s*(?:in|inches|inch|"|''))?)",
      std::regex::icase);
  static const std::regex with_unit(kNumber + R"(\s*([A-Za-z\xC3\xAD]+)\b)");
  const std::string s(text_in);

  std::smatch fm, um;
  const bool has_feet = std::regex_search(s, fm, feet_inches);
  const bool has_unit = [&] {
    for (auto it = std::sregex_iterator(s.begin(), s.end(), with_unit); it != std::sregex_iterator();
         ++it) {
      const auto sym = unit_symbol((*it)[2].str());
      if (!sym.empty() && sym != "ft") {
        um = *it;
        return true;
      }
    }
    return false;
  }();

  if (has_feet && (!has_unit || fm.position(0) <= um.position(0))) {
    const auto ft = parse_number(fm[1].str(), locale);
    if (!ft) return std::nullopt;
    double inches = *ft * 12.0;
    if (fm[2].matched) {
      const auto in = parse_number(fm[2].str(), locale);
      if (!in) return std::nullopt;
      inches += *in;
    }
    return Quantity{inches, "in"};
  }
  if (has_unit) {
    const auto n = parse_number(um[1].str(), locale);
    if (!n) return std::nullopt;
    return Quantity{*n, std::string(unit_symbol(um[2].str()))};
  }
  return std::nullopt;
}

std::optional<DateValue> parse_date(std::string_view text_in, const LocaleTable& locale) {
  static const std::regex iso(R"((\d{4})-(\d{2})-(\d{2}))");
  static const std::regex day_month_year(
      R"((\d{1,2})\.?\s+(?:de\s+|of\s+)?([^\s\d,.()]+)\.?,?\s+(?:de\s+|del\s+)?(\d{4}))",
      std::regex::icase);
  static const std::regex month_day_year(R"(([^\s\d,.()]+)\.?\s+(\d{1,2}),?\s+(\d{4}))");
  static const std::regex month_year(R"(([^\s\d,.()]+)\.?,?\s+(?:de\s+|del\s+)?(\d{4}))",
                                     std::regex::icase);
  static const std::regex year_only(R"((?:^|[^\d])(\d{4})(?:[^\d]|$))");
  const std::string s(text_in);
  std::smatch m;

  if (std::regex_search(s, m, iso))
    return make_date(std::stoi(m[1]), unsigned(std::stoi(m[2])), unsigned(std::stoi(m[3])));
  for (auto it = std::sregex_iterator(s.begin(), s.end(), day_month_year);
       it != std::sregex_iterator(); ++it)
    if (auto mo = month_of((*it)[2].str(), locale))
      return make_date(std::stoi((*it)[3]), *mo, unsigned(std::stoi((*it)[1])));
  for (auto it = std::sregex_iterator(s.begin(), s.end(), month_day_year);
       it != std::sregex_iterator(); ++it)
    if (auto mo = month_of((*it)[1].str(), locale))
      return make_date(std::stoi((*it)[3]), *mo, unsigned(std::stoi((*it)[2])));
  for (auto it = std::sregex_iterator(s.begin(), s.end(), month_year);
       it != std::sregex_iterator(); ++it)
    if (auto mo = month_of((*it)[1].str(), locale))
      return DateValue{std::stoi((*it)[2]), *mo, 0, DatePrecision::month};
  if (std::regex_search(s, m, year_only))
    return DateValue{std::stoi(m[1]), 0, 0, DatePrecision::year};
  return std::nullopt;
}

std::optional<Money> parse_money(std::string_view text_in, const LocaleTable& locale) {
  const std::string s = text::to_lower(text_in);
  static const std::regex amount(kNumber);
  std::smatch m;
  if (!std::regex_search(s, m, amount)) return std::nullopt;
  const auto value = parse_number(m[1].str(), locale);
  if (!value) return std::nullopt;

  const std::string before = s.substr(0, std::size_t(m.position(0)));
  const std::string after = m.suffix().str();

  // Longest scale word directly after the number.
  double scale = 1.0;
  std::size_t scale_len = 0;
  const auto rest = text::collapse_whitespace(after);
  for (const auto& [word, factor] : locale.scales)
    if (word.size() > scale_len && rest.starts_with(word) &&
        (rest.size() == word.size() || rest[word.size()] == ' ')) {
      scale = factor;
      scale_len = word.size();
    }

  std::string currency;
  std::size_t best = 0;
  for (const auto& [symbol, code] : locale.currencies) {
    const bool found = before.find(symbol) != std::string::npos ||
                       after.find(symbol) != std::string::npos;
    if (found && symbol.size() > best) {
      currency = code;
      best = symbol.size();
    }
  }
  if (currency.empty()) return std::nullopt;
  return Money{std::llround(*value * scale * 100.0), currency};
}

Quantity canonical_quantity(const Quantity& q) {
  Quantity c = to_canonical(q);
  c.magnitude = std::round(c.magnitude * 10.0) / 10.0;
  if (c.magnitude == 0.0) c.magnitude = 0.0;
  return c;
}

}  // namespace odke
