#include "odke/orchestrator/pipeline.hpp"

#include <sys/wait.h>

#include "support.hpp"

using namespace odke;
using namespace odke::test;

namespace {

PipelineConfig fixture_config(const std::string& name, const TempDir& work) {
  auto c = load_config(fixture(name) / "config.json");
  c.work_dir = work.path() / "work";
  return c;
}

// Copy of a fixture config with absolute paths, so it can live elsewhere.
std::filesystem::path relocated_config(const std::string& name, const TempDir& dir, const Json& edits = {}) {
  std::ifstream in(fixture(name) / "config.json");
  Json j = Json::parse(in);
  const auto base = fixture(name);
  for (auto& [k, v] : j.items()) {
    if (v.is_string() && k != "now" && k != "schema") v = (base / v.get<std::string>()).lexically_normal().string();
    if (k == "rules")
      for (auto& r : v) r = (base / r.get<std::string>()).lexically_normal().string();
  }
  j["work_dir"] = (dir.path() / "work").string();
  if (edits.is_object()) j.merge_patch(edits);
  const auto out = dir / "config.json";
  std::ofstream(out) << j.dump(2);
  return out;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(ODKE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string l; std::getline(in, l);) n += !l.empty();
  return n;
}

}  // namespace

TEST_CASE("config validation") {
  TempDir dir;
  auto c = fixture_config("golden", dir);
  CHECK_NOTHROW(c.validate());

  SUBCASE("missing rule file") {
    c.rules.push_back(dir / "nope.json");
    CHECK_THROWS_AS(c.validate(), ValidationError);
    CHECK_THROWS_AS(open_runtime(c), ValidationError);
  }
  SUBCASE("no rules") {
    c.rules.clear();
    CHECK_THROWS_AS(c.validate(), ValidationError);
  }
  SUBCASE("stream without feed") {
    c.mode = PipelineMode::stream;
    c.feed.reset();
    CHECK_THROWS_AS(c.validate(), ValidationError);
  }
  SUBCASE("thresholds out of order") {
    c.scoring.curation_floor = 0.9;
    c.scoring.auto_threshold = 0.5;
    CHECK_THROWS_AS(c.validate(), ValidationError);
  }
  SUBCASE("zero workers") {
    c.workers = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
  }
  SUBCASE("json round trip") {
    const auto again = config_from_json(to_json(c), dir.path());
    CHECK(again.rules == c.rules);
    CHECK(again.targets.size() == c.targets.size());
    CHECK(again.scoring.auto_threshold == c.scoring.auto_threshold);
    CHECK(again.now == c.now);
  }
  SUBCASE("unknown schema") {
    CHECK_THROWS(config_from_json(Json{{"schema", "other"}, {"version", 1}}, dir.path()));
  }
}

TEST_CASE("golden batch run") {
  TempDir dir;
  const auto c = fixture_config("golden", dir);
  const auto golden = load_golden(*c.golden);
  REQUIRE(golden.size() == 171);

  auto rt = open_runtime(c);
  ManualClock clock(*c.now);
  const auto first = run_batch(rt, clock);
  REQUIRE(first.golden);
  CHECK(first.golden->exact());
  CHECK(first.golden->matched == 171);
  CHECK(first.golden->precision == 1.0);
  CHECK(first.golden->recall == 1.0);
  CHECK(first.type_violations == 0);
  CHECK(first.ingest.appended == 171);

  const auto rows = lines(c.log_path());
  const auto second = run_batch(rt, clock);
  CHECK(second.ingest.appended == 0);
  CHECK(second.golden->exact());
  CHECK(lines(c.log_path()) == rows);

  // A fresh runtime over the same work dir sees the same view.
  auto reopened = open_runtime(c);
  CHECK(compare_golden(reopened.log->latest(), golden).exact());
}

TEST_CASE("multi-worker batch equals single worker") {
  TempDir one, four;
  auto c1 = fixture_config("golden", one);
  auto c4 = fixture_config("golden", four);
  c4.workers = 4;
  auto rt1 = open_runtime(c1);
  auto rt4 = open_runtime(c4);
  ManualClock k1(*c1.now), k4(*c4.now);
  run_batch(rt1, k1);
  run_batch(rt4, k4);
  const auto v1 = rt1.log->latest();
  const auto v4 = rt4.log->latest();
  REQUIRE(v1.size() == v4.size());
  for (const auto& [key, e] : v1.entries()) {
    const auto* other = v4.find(key);
    REQUIRE(other);
    CHECK(other->fact.object == e.fact.object);
  }
}

TEST_CASE("compare_golden reports both directions") {
  TempDir dir;
  auto kg = make_kg();
  kg->add_entity(make_entity("Q1", "A", kHuman));
  FactLog log(dir / "facts.log");
  const std::vector<Fact> seed{make_fact("Q1", "P2048", cm(180))};
  log.append(seed, "seed", at("2024-01-01"), *kg);
  const std::vector<GoldenFact> golden{{EntityId("Q1"), "P2048", cm(181)}};
  const auto r = compare_golden(log.latest(), golden);
  CHECK_FALSE(r.exact());
  CHECK(r.matched == 0);
  CHECK(r.missing.size() == 1);
  CHECK(r.unexpected.size() == 1);
}

TEST_CASE("conflict fixture routes one value to curation") {
  TempDir dir;
  const auto c = fixture_config("conflict", dir);
  auto rt = open_runtime(c);
  ManualClock clock(*c.now);
  const auto r = run_batch(rt, clock);
  CHECK(r.curation_tasks == 1);
  CHECK(r.ingest.appended == 1);
  const auto page = rt.tasks->page(TaskStatus::pending, 1, 10);
  REQUIRE(page.size() == 1);
  REQUIRE(page[0].clusters.size() >= 1);
  bool has_211 = false;
  for (const auto& cl : page[0].clusters) has_211 |= cl.value == cm(211);
  CHECK(has_211);
  const auto view = rt.log->latest();
  bool auto_213 = false;
  for (const auto& [key, e] : view.entries())
    if (e.fact.predicate == "P2048") auto_213 = e.fact.object == cm(213);
  CHECK(auto_213);
}

TEST_CASE("stream run") {
  TempDir dir;
  auto c = fixture_config("stream", dir);
  c.mode = PipelineMode::stream;

  SUBCASE("fixture meets the latency target") {
    auto rt = open_runtime(c);
    ManualClock clock(*c.now);
    const auto r = run_stream(rt, clock);
    CHECK(r.events == 200);
    CHECK(r.sla.deliveries > 0);
    CHECK(r.sla.p99_minutes <= 240);
    CHECK(r.sla.violations == 0);
    CHECK(lines(c.deliveries_path()) == r.sla.deliveries + 1);
  }
  SUBCASE("one event held back five hours is the only violation") {
    auto rt = open_runtime(c);
    ManualClock clock(*c.now);
    StreamOptions options;
    options.injected_delay_minutes[10] = 300;
    const auto r = run_stream(rt, clock, options);
    CHECK(r.sla.violations == 1);
  }
  SUBCASE("empty feed") {
    const auto feed = dir / "empty.ndjson";
    std::ofstream(feed) << R"({"schema":"odke.feed","version":1})" << '\n';
    c.feed = feed;
    auto rt = open_runtime(c);
    ManualClock clock(*c.now);
    const auto r = run_stream(rt, clock);
    CHECK(r.events == 0);
    CHECK(r.ingest.total() == 0);
    CHECK(r.sla.deliveries == 0);
    CHECK(r.sla.violations == 0);
  }
  SUBCASE("anonymous edit followed by a clean edit of the same page") {
    const auto feed = dir / "pair.ndjson";
    std::ofstream(feed) << R"({"schema":"odke.feed","version":1})" << '\n'
                        << R"({"flags":["anonymous"],"revision":"r1","time":"2024-05-01T00:03:00Z","url":"https://en.example.org/wiki/Streamville_1"})"
                        << '\n'
                        << R"({"flags":[],"revision":"r1","time":"2024-05-01T00:05:00Z","url":"https://en.example.org/wiki/Streamville_1"})"
                        << '\n';
    c.feed = feed;
    auto rt = open_runtime(c);
    ManualClock clock(*c.now);
    const auto r = run_stream(rt, clock);
    CHECK(r.events == 2);
    CHECK(r.vandalism_filtered == 1);
    CHECK(r.ingest.appended == 1);
    CHECK(r.sla.violations == 0);
  }
}

TEST_CASE("family fixture: import then infer") {
  TempDir dir;
  const auto c = fixture_config("family", dir);
  auto rt = open_runtime(c);
  const auto imported = import_facts(rt, fixture("family") / "facts.ndjson", *c.now);
  CHECK(imported.appended > 0);
  CHECK(imported.rejected == 0);
  const auto first = run_link_inference(rt, *c.now);
  CHECK(first.ingest.appended == 4);
  const auto second = run_link_inference(rt, *c.now);
  CHECK(second.ingest.appended == 0);
  CHECK(second.inferred == 0);
}

TEST_CASE("materialize is deterministic") {
  TempDir dir;
  const auto c = fixture_config("golden", dir);
  auto rt = open_runtime(c);
  ManualClock clock(*c.now);
  run_batch(rt, clock);
  const auto a = dir / "a.ndjson";
  const auto b = dir / "b.ndjson";
  write_view(materialize_latest(c.log_path()), a);
  write_view(materialize_latest(c.log_path()), b);
  CHECK(read_file(a) == read_file(b));
  CHECK(lines(a) >= 171);
}

TEST_CASE("stats") {
  TempDir dir;
  const auto c = fixture_config("golden", dir);
  auto rt = open_runtime(c);
  auto empty = collect_stats(rt);
  CHECK(empty.log_rows == 0);
  CHECK(empty.view_facts == 0);
  CHECK(empty.tasks_pending == 0);
  CHECK(empty.entities > 0);
  ManualClock clock(*c.now);
  run_batch(rt, clock);
  auto full = collect_stats(rt);
  CHECK(full.log_rows == 171);
  CHECK(full.view_facts == 171);
  std::size_t by_predicate = 0;
  for (const auto& [p, n] : full.by_predicate) by_predicate += n;
  CHECK(by_predicate == full.view_facts);
}

TEST_CASE("cli exit codes") {
  TempDir dir;
  SUBCASE("golden run succeeds and a rerun appends nothing") {
    const auto cfg = relocated_config("golden", dir);
    CHECK(cli("run-batch -c " + cfg.string()) == 0);
    const auto rows = lines(dir / "work" / "facts.log");
    CHECK(cli("run-batch -c " + cfg.string()) == 0);
    CHECK(lines(dir / "work" / "facts.log") == rows);
    CHECK(cli("materialize -c " + cfg.string()) == 0);
    CHECK(std::filesystem::exists(dir / "work" / "view.ndjson"));
    CHECK(cli("stats -c " + cfg.string()) == 0);
  }
  SUBCASE("golden mismatch exits 3") {
    std::ifstream in(fixture("golden") / "golden.ndjson");
    std::ofstream out(dir / "golden.ndjson");
    std::string line;
    std::getline(in, line);
    out << line << '\n';
    std::getline(in, line);  // drop one expected fact
    while (std::getline(in, line)) out << line << '\n';
    out.close();
    const auto cfg = relocated_config("golden", dir, Json{{"golden", (dir / "golden.ndjson").string()}});
    CHECK(cli("run-batch -c " + cfg.string()) == 3);
  }
  SUBCASE("missing rule file exits 1") {
    const auto cfg = relocated_config("golden", dir, Json{{"rules", {(dir / "missing.json").string()}}});
    CHECK(cli("run-batch -c " + cfg.string()) == 1);
  }
  SUBCASE("malformed config exits 1") {
    std::ofstream(dir / "bad.json") << "{not json";
    CHECK(cli("run-batch -c " + (dir / "bad.json").string()) == 1);
  }
  SUBCASE("no subcommand is a usage error") { CHECK(cli("") != 0); }
  SUBCASE("stream and infer") {
    const auto stream = relocated_config("stream", dir);
    CHECK(cli("run-stream -c " + stream.string()) == 0);
    TempDir fam;
    const auto family = relocated_config("family", fam);
    CHECK(cli("import -c " + family.string() + " " + (fixture("family") / "facts.ndjson").string()) == 0);
    CHECK(cli("infer-links -c " + family.string()) == 0);
    CHECK(cli("apply-decisions -c " + family.string()) == 0);
  }
}
