#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "odke/error.hpp"
#include "odke/kg/fact_log.hpp"
#include "odke/kg/graph.hpp"
#include "odke/kg/ontology.hpp"
#include "odke/time.hpp"

namespace odke::test {

inline std::filesystem::path data_dir() { return ODKE_TEST_DATA_DIR; }
inline std::filesystem::path fixture(const std::string& name) {
  return data_dir() / "fixtures" / name;
}

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "odke-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Timestamp at(const char* s) { return parse_timestamp(s); }

inline Ontology ontology() { return load_ontology(data_dir() / "ontology.ndjson"); }

inline constexpr const char* kHuman = "Q5";
inline constexpr const char* kCity = "Q515";
inline constexpr const char* kCounty = "Q28575";
inline constexpr const char* kCountry = "Q6256";
inline constexpr const char* kMale = "Q6581097";
inline constexpr const char* kFemale = "Q6581072";

inline Entity make_entity(const std::string& id, const std::string& name, const std::string& type,
                          std::vector<std::string> sitelinks = {}) {
  Entity e;
  e.id = EntityId(id);
  e.canonical_name = name;
  e.types = {EntityId(type)};
  e.sitelinks = std::move(sitelinks);
  return e;
}

// Ontology plus the two gender entities.
inline std::unique_ptr<KnowledgeGraph> make_kg() {
  auto kg = std::make_unique<KnowledgeGraph>(ontology());
  kg->add_entity(make_entity(kMale, "male", "Q48277"));
  kg->add_entity(make_entity(kFemale, "female", "Q48277"));
  return kg;
}

inline Provenance prov(const std::string& url = "https://en.example.org/wiki/X",
                       const std::string& extractor = "pattern:test",
                       Timestamp when = Timestamp{}) {
  Provenance p;
  p.source_url = url;
  p.revision_id = "r1";
  p.extractor_id = extractor;
  p.extracted_at = when;
  p.pipeline_run_id = "test";
  return p;
}

inline Fact make_fact(const std::string& subject, const std::string& predicate, Value value,
                      double confidence = 0.95, FactStatus status = FactStatus::auto_ingested) {
  Fact f;
  f.subject = EntityId(subject);
  f.predicate = predicate;
  f.object = std::move(value);
  f.confidence = confidence;
  f.provenance = {prov()};
  f.language = "en";
  f.status = status;
  return f;
}

inline Value entity(const std::string& id) { return EntityRef{EntityId(id)}; }
inline Value cm(double v) { return Quantity{v, "cm"}; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Random family/geography graph: `people` humans with genders, spouses,
// children, fathers and mothers; counties containing cities; cities located
// in counties. Fathers are male and mothers female, so one hop of the
// shipped link rules reaches a fixpoint.
inline std::vector<Fact> family_graph(std::mt19937_64& rng, KnowledgeGraph& kg, int people = 800,
                                      int cities = 150, int counties = 50) {
  auto pid = [](int i) { return "Q8" + std::to_string(100000 + i); };
  auto cid = [](int i) { return "Q86" + std::to_string(10000 + i); };
  auto kid = [](int i) { return "Q87" + std::to_string(10000 + i); };
  for (int i = 0; i < people; ++i) kg.add_entity(make_entity(pid(i), "Person " + pid(i), kHuman));
  for (int i = 0; i < cities; ++i) kg.add_entity(make_entity(cid(i), "City", kCity));
  for (int i = 0; i < counties; ++i) kg.add_entity(make_entity(kid(i), "County", kCounty));

  const double confs[] = {0.6, 0.8, 0.92, 0.95, 0.99};
  auto conf = [&] { return confs[rng() % std::size(confs)]; };
  std::vector<int> males, females;
  std::vector<Fact> facts;
  for (int i = 0; i < people; ++i) {
    const int gender = int(rng() % 5);  // 0 unknown, odd male, even female
    if (gender == 0) continue;
    (gender % 2 ? males : females).push_back(i);
    facts.push_back(make_fact(pid(i), "P21", entity(gender % 2 ? kMale : kFemale), conf()));
  }
  for (int i = 0; i < people; ++i) {
    if (rng() % 3 == 0) facts.push_back(make_fact(pid(i), "P26", entity(pid(int(rng() % people))), conf()));
    for (int c = int(rng() % 3); c > 0; --c)
      facts.push_back(make_fact(pid(i), "P40", entity(pid(int(rng() % people))), conf()));
    if (rng() % 6 == 0 && !males.empty())
      facts.push_back(make_fact(pid(i), "P22", entity(pid(males[rng() % males.size()])), conf()));
    if (rng() % 6 == 0 && !females.empty())
      facts.push_back(make_fact(pid(i), "P25", entity(pid(females[rng() % females.size()])), conf()));
  }
  for (int i = 0; i < counties; ++i)
    for (int c = int(rng() % 4); c > 0; --c)
      facts.push_back(make_fact(kid(i), "P150", entity(cid(int(rng() % cities))), conf()));
  for (int i = 0; i < cities; ++i)
    if (rng() % 2) facts.push_back(make_fact(cid(i), "P131", entity(kid(int(rng() % counties))), conf()));
  return facts;
}

}  // namespace odke::test
