#include "odke/initiator/initiator.hpp"

#include <numeric>

#include "odke/ingestion/ingest.hpp"
#include "support.hpp"

using namespace odke;
using namespace odke::test;

namespace {

Document page(const std::string& url, const char* time, const std::string& height) {
  Document d;
  d.url = url;
  d.language = "en";
  d.revision_id = time;
  d.revision_time = at(time);
  d.infobox.push_back({"Height", height, {}});
  return d;
}

// Reads the Height row as whole centimetres.
std::vector<Value> height_of(const Document& d, const EntityId&, const std::string&) {
  std::vector<Value> out;
  for (const auto& row : d.infobox)
    if (row.key == "Height") out.push_back(cm(std::stod(row.raw_value)));
  return out;
}

}  // namespace

TEST_CASE("profile_gaps") {
  TempDir dir;
  auto kg = make_kg();
  for (auto id : {"Q1", "Q2", "Q3"}) kg->add_entity(make_entity(id, std::string("P ") + id, kHuman));
  FactLog log(dir / "facts.log");
  std::vector<Fact> facts{make_fact("Q1", "P2048", cm(180)), make_fact("Q2", "P2048", cm(190))};
  log.append(facts, "run", at("2024-01-01"), *kg);
  const std::vector<Target> height{{EntityId(kHuman), "P2048"}};

  SUBCASE("one person lacking height → one task") {
    auto tasks = profile_gaps(*kg, log.latest(), height, at("2024-02-01"));
    REQUIRE(tasks.size() == 1);
    CHECK(tasks[0].subject.str() == "Q3");
    CHECK(tasks[0].predicate == "P2048");
    CHECK(tasks[0].reason == TaskReason::missing);
    CHECK(tasks[0].search_based());
  }
  SUBCASE("all covered → no tasks") {
    std::vector<Fact> more{make_fact("Q3", "P2048", cm(170))};
    log.append(more, "run2", at("2024-01-02"), *kg);
    CHECK(profile_gaps(*kg, log.latest(), height, at("2024-02-01")).empty());
  }
  SUBCASE("date of birth target covers every person") {
    auto tasks = profile_gaps(*kg, log.latest(), {{EntityId(kHuman), "P569"}}, at("2024-02-01"));
    CHECK(tasks.size() == 3);
  }
  SUBCASE("unknown predicate") {
    CHECK_THROWS_AS(profile_gaps(*kg, log.latest(), {{EntityId(kHuman), "P0"}}, at("2024-02-01")),
                    ValidationError);
  }
  SUBCASE("ingesting the produced gaps never increases the task count") {
    const auto before = profile_gaps(*kg, log.latest(), height, at("2024-02-01")).size();
    std::vector<Fact> fill{make_fact("Q3", "P2048", cm(175))};
    ingest_batch(fill, *kg, log, "fill", at("2024-02-02"));
    CHECK(profile_gaps(*kg, log.latest(), height, at("2024-02-03")).size() <= before);
  }
}

TEST_CASE("detect_stale") {
  TempDir dir;
  auto kg = make_kg();
  kg->add_entity(make_entity("Q1", "Stale", kHuman, {"u1"}));
  kg->add_entity(make_entity("Q2", "Fresh", kHuman, {"u2"}));
  kg->add_entity(make_entity("Q3", "Newer KG", kHuman, {"u3"}));
  FactLog log(dir / "facts.log");
  std::vector<Fact> facts{make_fact("Q1", "P2048", cm(180)), make_fact("Q2", "P2048", cm(190)),
                          make_fact("Q3", "P2048", cm(200))};
  log.append(facts, "run", at("2023-01-01"), *kg);
  Corpus corpus;
  corpus.add(page("u1", "2023-03-11", "181"));  // differs, newer
  corpus.add(page("u2", "2023-06-01", "190"));  // equal
  corpus.add(page("u3", "2022-06-01", "205"));  // differs, older
  const std::vector<Target> height{{EntityId(kHuman), "P2048"}};

  auto [tasks, report] = detect_stale(*kg, log.latest(), corpus, height, height_of, at("2023-04-01"));
  REQUIRE(tasks.size() == 1);
  CHECK(tasks[0].subject.str() == "Q1");
  CHECK(tasks[0].reason == TaskReason::stale);
  CHECK(tasks[0].urls == std::vector<std::string>{"u1"});
  const auto& stats = report.per_target.at(height[0]);
  CHECK(stats.stale == 1);
  CHECK(stats.lags_days == std::vector<std::int64_t>{69});
  CHECK(*stats.mean_lag_days() == doctest::Approx(69.0));
}

TEST_CASE("staleness mean lag equals an independent scan") {
  TempDir dir;
  auto kg = make_kg();
  FactLog log(dir / "facts.log");
  Corpus corpus;
  std::vector<Fact> facts;
  std::vector<std::int64_t> expected;
  std::mt19937_64 rng(3);
  const auto base = at("2023-01-01");
  for (int i = 0; i < 40; ++i) {
    const std::string id = "Q" + std::to_string(1000 + i);
    kg->add_entity(make_entity(id, "Person " + std::to_string(i), kHuman, {"u" + id}));
    facts.push_back(make_fact(id, "P2048", cm(180)));
    const auto days = std::int64_t(rng() % 200);
    Document d = page("u" + id, "2023-01-01", i % 3 == 0 ? "180" : "181");
    d.revision_time = base + std::chrono::hours(24 * days + 5);
    corpus.add(d);
    if (i % 3 != 0 && days > 0) expected.push_back(days);
  }
  log.append(facts, "run", base, *kg);
  const std::vector<Target> height{{EntityId(kHuman), "P2048"}};
  auto [tasks, report] = detect_stale(*kg, log.latest(), corpus, height, height_of, base);
  const auto& stats = report.per_target.at(height[0]);
  CHECK(stats.stale == expected.size());
  const double mean = std::accumulate(expected.begin(), expected.end(), 0.0) / double(expected.size());
  CHECK(*stats.mean_lag_days() == doctest::Approx(mean));
}

TEST_CASE("tasks_from_events") {
  auto kg = make_kg();
  kg->add_entity(make_entity("Q1", "Person", kHuman, {"u1"}));
  Corpus corpus;
  corpus.add(page("u1", "2024-01-01", "180"));

  auto one = tasks_from_events({ChangeEvent{"u1", "r", at("2024-01-02"), {}}}, corpus, *kg,
                               at("2024-01-03"));
  REQUIRE(one.tasks.size() == 1);
  CHECK(one.tasks[0].wildcard());
  CHECK(one.tasks[0].urls == std::vector<std::string>{"u1"});
  CHECK(one.tasks[0].reason == TaskReason::change_event);
  CHECK(*one.tasks[0].origin_event_time == at("2024-01-02"));

  auto missing = tasks_from_events({ChangeEvent{"nope", "r", at("2024-01-02"), {}}}, corpus, *kg,
                                   at("2024-01-03"));
  CHECK(missing.tasks.empty());
  CHECK(missing.skipped == 1);
}

TEST_CASE("200-event fixture yields 200 tasks in event order") {
  const auto corpus = load_corpus(fixture("stream") / "corpus.ndjson");
  auto kg = make_kg();
  for (auto& e : load_entities(fixture("stream") / "entities.ndjson"))
    if (!kg->find(e.id)) kg->add_entity(e);
  const auto feed = load_feed(fixture("stream") / "feed.ndjson");
  auto out = tasks_from_events(feed.events(), corpus, *kg, at("2024-06-01"));
  REQUIRE(out.tasks.size() == 200);
  for (std::size_t i = 0; i < 200; ++i) {
    CHECK(out.tasks[i].urls[0] == feed.events()[i].url);
    CHECK(*out.tasks[i].origin_event_time == feed.events()[i].event_time);
  }
}

TEST_CASE("task file round trip") {
  TempDir dir;
  ExtractionTask t;
  t.subject = EntityId("Q1");
  t.subject_name = "Ana";
  t.subject_aliases = {{"Anita", "es"}};
  t.predicate = "P569";
  t.reason = TaskReason::escalation;
  t.created_at = at("2024-01-01");
  save_tasks({t}, dir / "tasks.ndjson");
  auto back = load_tasks(dir / "tasks.ndjson");
  REQUIRE(back.size() == 1);
  CHECK(back[0].subject == t.subject);
  CHECK(back[0].subject_aliases.at(0).name == "Anita");
  CHECK(back[0].reason == TaskReason::escalation);
}
