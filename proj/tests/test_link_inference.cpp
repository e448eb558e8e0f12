#include "odke/link_inference/link_inference.hpp"

#include "oracles.hpp"
#include "support.hpp"

using namespace odke;
using namespace odke::test;

namespace {

struct Graph {
  TempDir dir;
  std::unique_ptr<KnowledgeGraph> kg = make_kg();
  std::unique_ptr<FactLog> log;
  std::vector<LinkInferenceRule> rules;
  InferenceContext ctx{"infer", at("2024-04-01")};

  Graph() {
    log = std::make_unique<FactLog>(dir / "facts.log");
    rules = load_link_rules(data_dir() / "link_rules.json", kg->ontology());
  }
  void person(const std::string& id) { kg->add_entity(make_entity(id, "Person " + id, kHuman)); }
  void add(std::vector<Fact> facts) {
    auto r = log->append(facts, "seed", at("2024-01-01"), *kg);
    REQUIRE(r.errors.empty());
  }
  CompletenessResult complete() { return infer_completeness(log->latest(), rules, kg->ontology(), ctx); }
  std::vector<Correction> correct() { return infer_correctness(log->latest(), rules, kg->ontology(), ctx); }
};

std::set<oracle::Edge> as_edges(const std::vector<InferredFact>& facts) {
  std::set<oracle::Edge> out;
  for (const auto& f : facts)
    out.insert({f.fact.subject.str(), f.fact.predicate, std::get<EntityRef>(f.fact.object).id.str(),
                f.fact.confidence});
  return out;
}

}  // namespace

TEST_CASE("rule file loads and validates") {
  Graph g;
  CHECK(g.rules.size() == 5);
  const auto& onto = g.kg->ontology();
  LinkInferenceRule bad{"asym", InferenceKind::symmetric, "P26", "P40", "", {}, 1.0, false};
  CHECK_THROWS_AS(validate_rule(bad, onto), ValidationError);
  LinkInferenceRule no_condition{"cond", InferenceKind::conditional_inverse, "P40", "", "", {}, 0.98, false};
  CHECK_THROWS_AS(validate_rule(no_condition, onto), ValidationError);
  LinkInferenceRule literal{"lit", InferenceKind::inverse, "P2048", "P26", "", {}, 0.99, false};
  CHECK_THROWS_AS(validate_rule(literal, onto), ValidationError);
  CHECK(default_confidence_factor(InferenceKind::symmetric) == 1.0);
  CHECK(default_confidence_factor(InferenceKind::inverse) == 0.99);
  CHECK(default_confidence_factor(InferenceKind::conditional_inverse) == 0.98);
}

TEST_CASE("completeness examples") {
  Graph g;
  for (auto id : {"Q1", "Q2", "Q3", "Q4"}) g.person(id);

  SUBCASE("spouse reverse is inferred") {
    g.add({make_fact("Q1", "P26", entity("Q2"))});
    auto r = g.complete();
    REQUIRE(r.facts.size() == 1);
    CHECK(r.facts[0].fact.subject.str() == "Q2");
    CHECK(r.facts[0].fact.predicate == "P26");
    CHECK(r.facts[0].fact.object == entity("Q1"));
    CHECK(r.facts[0].fact.status == FactStatus::inferred);
    CHECK(r.facts[0].fact.confidence == doctest::Approx(0.95));
    CHECK(r.facts[0].rule_id == "spouse-symmetric");
  }
  SUBCASE("child of a male parent gets a father") {
    g.add({make_fact("Q1", "P21", entity(kMale)), make_fact("Q1", "P40", entity("Q3"))});
    auto r = g.complete();
    REQUIRE(r.facts.size() == 1);
    CHECK(r.facts[0].fact.subject.str() == "Q3");
    CHECK(r.facts[0].fact.predicate == "P22");
    CHECK(r.facts[0].fact.confidence == doctest::Approx(0.95 * 0.98));
  }
  SUBCASE("child of a female parent gets a mother; unknown gender is counted") {
    g.add({make_fact("Q1", "P21", entity(kFemale)), make_fact("Q1", "P40", entity("Q3")),
           make_fact("Q2", "P40", entity("Q4"))});
    auto r = g.complete();
    REQUIRE(r.facts.size() == 1);
    CHECK(r.facts[0].fact.predicate == "P25");
    CHECK(r.missing_condition == 1);
  }
  SUBCASE("father gives the parent a child") {
    g.add({make_fact("Q3", "P22", entity("Q1"))});
    auto r = g.complete();
    REQUIRE(r.facts.size() == 1);
    CHECK(r.facts[0].fact.subject.str() == "Q1");
    CHECK(r.facts[0].fact.predicate == "P40");
    CHECK(r.facts[0].fact.object == entity("Q3"));
  }
  SUBCASE("reverse already present → nothing") {
    g.add({make_fact("Q1", "P26", entity("Q2")), make_fact("Q2", "P26", entity("Q1"))});
    CHECK(g.complete().facts.empty());
  }
}

TEST_CASE("apply and rerun") {
  Graph g;
  for (int i = 0; i < 8; ++i) g.person("Q" + std::to_string(10 + i));
  g.add({make_fact("Q10", "P26", entity("Q11")), make_fact("Q12", "P26", entity("Q13")),
         make_fact("Q14", "P26", entity("Q15")), make_fact("Q16", "P26", entity("Q17"))});
  auto first = g.complete();
  REQUIRE(first.facts.size() == 4);
  const auto before = read_file(g.log->path());
  auto s = apply_inferred(first.facts, *g.kg, *g.log, "infer", at("2024-04-01"));
  CHECK(s.appended == 4);
  const auto after = read_file(g.log->path());
  CHECK(after.compare(0, before.size(), before) == 0);
  for (const auto& r : s.rows) CHECK(r.fact.status == FactStatus::inferred);
  CHECK(g.complete().facts.empty());
}

TEST_CASE("correctness examples") {
  Graph g;
  g.kg->add_entity(make_entity("Q600", "City A", kCity));
  g.kg->add_entity(make_entity("Q601", "County B", kCounty));
  g.kg->add_entity(make_entity("Q602", "County C", kCounty));

  SUBCASE("confident containment corrects a weak located-in") {
    g.add({make_fact("Q601", "P150", entity("Q600"), 0.95), make_fact("Q600", "P131", entity("Q602"), 0.7)});
    auto c = g.correct();
    REQUIRE(c.size() == 1);
    CHECK(c[0].inferred.fact.subject.str() == "Q600");
    CHECK(c[0].inferred.fact.object == entity("Q601"));
    CHECK(c[0].replaced_confidence == doctest::Approx(0.7));
    CHECK(c[0].inferred.fact.confidence > c[0].replaced_confidence);
    CHECK(g.complete().facts.empty());

    std::vector<InferredFact> apply{c[0].inferred};
    apply_inferred(apply, *g.kg, *g.log, "correct", at("2024-04-02"));
    const FactKey key{EntityId("Q600"), "P131", std::nullopt};
    CHECK(g.log->latest().find(key)->fact.object == entity("Q601"));
    CHECK(g.log->latest().find(key)->version == 2);
    CHECK(g.correct().empty());
  }
  SUBCASE("existing value at least as confident is kept") {
    g.add({make_fact("Q601", "P150", entity("Q600"), 0.95), make_fact("Q600", "P131", entity("Q602"), 0.95)});
    CHECK(g.correct().empty());
  }
  SUBCASE("low-confidence sources are not used for correction") {
    g.add({make_fact("Q601", "P150", entity("Q600"), 0.85), make_fact("Q600", "P131", entity("Q602"), 0.5)});
    CHECK(g.correct().empty());
  }
  SUBCASE("no conflict → correction pass emits nothing") {
    g.add({make_fact("Q601", "P150", entity("Q600"), 0.95)});
    CHECK(g.correct().empty());
    CHECK(g.complete().facts.size() == 1);
  }
}

TEST_CASE("1k-entity graph matches the brute-force closure") {
  Graph g;
  std::mt19937_64 rng(1234);
  auto facts = family_graph(rng, *g.kg);
  g.add(facts);

  const auto& onto = g.kg->ontology();
  const auto view = g.log->latest();
  const auto existing = oracle::edges(view);

  auto got = g.complete();
  const auto expect = oracle::completeness_closure(existing, g.rules, onto);
  CHECK(got.facts.size() > 100);
  CHECK(as_edges(got.facts) == expect);

  auto corrections = g.correct();
  std::set<oracle::CorrectionEdge> got_corrections;
  for (const auto& c : corrections) {
    CHECK(c.inferred.fact.confidence > c.replaced_confidence);
    got_corrections.insert({{c.inferred.fact.subject.str(), c.inferred.fact.predicate,
                             std::get<EntityRef>(c.inferred.fact.object).id.str(),
                             c.inferred.fact.confidence},
                            c.replaced_confidence});
  }
  CHECK(got_corrections == oracle::correction_closure(existing, g.rules, onto, kDefaultCorrectionMinConfidence));

  const auto before = read_file(g.log->path());
  auto s = apply_inferred(got.facts, *g.kg, *g.log, "infer", at("2024-04-01"));
  CHECK(s.appended == got.facts.size());
  CHECK(read_file(g.log->path()).compare(0, before.size(), before) == 0);
  CHECK(g.complete().facts.empty());

  const auto closed = g.log->latest();
  std::set<std::pair<std::string, std::string>> spouses;
  for (const auto& e : oracle::edges(closed))
    if (e.predicate == "P26") spouses.insert({e.subject, e.object});
  for (const auto& [a, b] : spouses) CHECK(spouses.count({b, a}) == 1);
}
