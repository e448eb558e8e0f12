#include "odke/normalize/parse.hpp"

#include "support.hpp"

using namespace odke;
using namespace odke::test;

namespace {

const LocaleTable& en() { return LocaleTable::builtin("en"); }
const LocaleTable& es() { return LocaleTable::builtin("es"); }

}  // namespace

TEST_CASE("dates") {
  CHECK(parse_date("November 20, 1942", en()) == DateValue::parse_iso("1942-11-20"));
  CHECK(parse_date("20 November 1942", en()) == DateValue::parse_iso("1942-11-20"));
  CHECK(parse_date("1942-11-20", en()) == DateValue::parse_iso("1942-11-20"));
  CHECK(parse_date("20 de noviembre de 1942", es()) == DateValue::parse_iso("1942-11-20"));
  CHECK(parse_date("November 1942", en()) == DateValue::parse_iso("1942-11"));
  CHECK(parse_date("1942", en()) == DateValue::parse_iso("1942"));
  CHECK(parse_date("4 August 1961 (age 62)", en()) == DateValue::parse_iso("1961-08-04"));
  CHECK_FALSE(parse_date("February 30, 1942", en()));
  CHECK_FALSE(parse_date("sometime", en()));
}

TEST_CASE("quantities") {
  CHECK(canonical_quantity(*parse_quantity("2.13 m", en())) == Quantity{213.0, "cm"});
  CHECK(canonical_quantity(*parse_quantity("211 cm", en())) == Quantity{211.0, "cm"});
  CHECK(canonical_quantity(*parse_quantity("2,13 m", es())) == Quantity{213.0, "cm"});

  const auto imperial = parse_quantity("6 ft 0 in", en());
  REQUIRE(imperial);
  CHECK(to_canonical(*imperial).magnitude == doctest::Approx(182.88));
  CHECK(canonical_quantity(*imperial) == Quantity{182.9, "cm"});
  CHECK(to_canonical(*parse_quantity("6'11\"", en())).magnitude == doctest::Approx(83 * 2.54));

  CHECK(canonical_quantity(*parse_quantity("109 kg", en())).unit == "kg");
  CHECK(to_canonical(*parse_quantity("240 lb", en())).magnitude == doctest::Approx(240 * 0.45359237));
  CHECK_FALSE(parse_quantity("tall", en()));
}

TEST_CASE("numbers honour locale separators") {
  CHECK(parse_number("1,234,567", en()) == 1234567.0);
  CHECK(parse_number("1.234.567", es()) == 1234567.0);
  CHECK(parse_number("3,5", es()) == 3.5);
  CHECK(parse_number("3.5", en()) == 3.5);
}

TEST_CASE("money") {
  CHECK(parse_money("$1.5 million", en()) == Money{150000000, "USD"});
  CHECK(parse_money("US$ 2,000", en()) == Money{200000, "USD"});
  CHECK(parse_money("1,5 millones de dólares", es()) == Money{150000000, "USD"});
  CHECK(parse_money("€3 billion", en()) == Money{300000000000, "EUR"});
  CHECK_FALSE(parse_money("rich", en()));
}

TEST_CASE("canonical quantity is a fixpoint") {
  std::mt19937_64 rng(5);
  const char* units[] = {"cm", "m", "in", "ft", "kg", "lb", "mm"};
  for (int i = 0; i < 2000; ++i) {
    const Quantity q{double(rng() % 100000) / 37.0, units[rng() % std::size(units)]};
    const auto once = canonical_quantity(q);
    CHECK(canonical_quantity(once) == once);
  }
}

TEST_CASE("locale files match the built-in tables") {
  LocaleRegistry registry;
  registry.load_directory(data_dir() / "locale");
  for (const char* lang : {"en", "es"}) {
    const auto& file = registry.get(lang);
    const auto& builtin = LocaleTable::builtin(lang);
    CHECK(file.decimal_separator == builtin.decimal_separator);
    CHECK(file.thousands_separator == builtin.thousands_separator);
    CHECK(file.months.size() >= 12);
  }
  CHECK(registry.get("xx").language == "en");
}
