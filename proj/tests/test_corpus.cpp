#include "odke/corpus/corpus.hpp"

#include "odke/ndjson.hpp"
#include "support.hpp"

using namespace odke;
using namespace odke::test;

namespace {

ChangeEvent event(const std::string& url, const char* t, std::set<EditorFlag> flags = {}) {
  return ChangeEvent{url, "r", at(t), std::move(flags)};
}

}  // namespace

TEST_CASE("load_corpus") {
  SUBCASE("golden fixture has 50 documents") {
    CHECK(load_corpus(fixture("golden") / "corpus.ndjson").size() == 50);
  }
  SUBCASE("header only → empty corpus") {
    TempDir dir;
    { NdjsonWriter w(dir / "c.ndjson", make_header("odke.corpus", 1)); }
    CHECK(load_corpus(dir / "c.ndjson").size() == 0);
  }
  SUBCASE("duplicate (url, revision) is a load error with its line") {
    TempDir dir;
    {
      NdjsonWriter w(dir / "c.ndjson", make_header("odke.corpus", 1));
      Json doc = {{"url", "u"}, {"lang", "en"}, {"revision", "r1"},
                  {"revision_time", "2024-01-01T00:00:00Z"}, {"infobox", Json::array()}};
      w.write(doc);
      w.write(doc);
    }
    try {
      load_corpus(dir / "c.ndjson");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("hyperlink outside its row is rejected") {
    Json doc = {{"url", "u"}, {"lang", "en"}, {"revision", "r1"},
                {"revision_time", "2024-01-01T00:00:00Z"},
                {"infobox", {{{"key", "k"}, {"value", "abc"},
                              {"links", {{{"start", 1}, {"end", 9}, {"entity", "Q1"}}}}}}}};
    CHECK_THROWS_AS(document_from_json(doc), ParseError);
  }
  SUBCASE("wrong schema header") {
    TempDir dir;
    { NdjsonWriter w(dir / "c.ndjson", make_header("odke.feed", 1)); }
    CHECK_THROWS_AS(load_corpus(dir / "c.ndjson"), ParseError);
  }
}

TEST_CASE("latest revision selection") {
  Corpus c;
  for (auto [rev, t] : {std::pair{"r1", "2024-01-01"}, {"r3", "2024-03-01"}, {"r2", "2024-02-01"}}) {
    Document d;
    d.url = "u";
    d.language = "en";
    d.revision_id = rev;
    d.revision_time = at(t);
    c.add(d);
  }
  CHECK(c.latest("u")->revision_id == "r3");
  CHECK(c.revisions("u").size() == 3);
  CHECK(c.find("u", "r2")->revision_time == at("2024-02-01"));
  CHECK(c.latest("missing") == nullptr);
}

TEST_CASE("poll_feed") {
  const auto feed = load_feed(fixture("stream") / "feed.ndjson");
  const auto& all = feed.events();
  REQUIRE(all.size() == 200);
  CHECK(poll_feed(feed, all.back().event_time).empty());
  const auto everything = poll_feed(feed, Timestamp{});
  CHECK(everything == all);

  SUBCASE("split at any point loses and duplicates nothing") {
    for (std::size_t i = 0; i < all.size(); i += 17) {
      const auto t = all[i].event_time;
      auto after = poll_feed(feed, t);
      std::vector<ChangeEvent> before;
      for (const auto& e : all)
        if (e.event_time <= t) before.push_back(e);
      before.insert(before.end(), after.begin(), after.end());
      CHECK(before == all);
    }
  }
  SUBCASE("equal timestamps keep feed order") {
    Feed f({event("a", "2024-01-01"), event("b", "2024-01-01")});
    auto out = poll_feed(f, Timestamp{});
    REQUIRE(out.size() == 2);
    CHECK(out[0].url == "a");
    CHECK(out[1].url == "b");
  }
  SUBCASE("out-of-order feed is rejected") {
    CHECK_THROWS_AS(Feed({event("a", "2024-01-02"), event("b", "2024-01-01")}), ParseError);
  }
}

TEST_CASE("filter_vandalism") {
  const auto reverted = event("a", "2024-01-01T00:00:00Z", {EditorFlag::reverted});
  const auto anon = event("b", "2024-01-01T00:01:00Z", {EditorFlag::anonymous});
  const auto later = event("b", "2024-01-01T00:02:00Z");
  const auto clean = event("c", "2024-01-01T00:03:00Z");
  const auto lone_anon = event("d", "2024-01-01T00:04:00Z", {EditorFlag::anonymous});

  CHECK(filter_vandalism({reverted}).empty());
  CHECK(filter_vandalism({anon, later}) == std::vector{later});
  CHECK(filter_vandalism({clean}) == std::vector{clean});
  CHECK(filter_vandalism({lone_anon}) == std::vector{lone_anon});

  const std::vector<ChangeEvent> batch{reverted, anon, clean, later, lone_anon};
  const auto once = filter_vandalism(batch);
  CHECK(once == std::vector{clean, later, lone_anon});
  CHECK(filter_vandalism(once) == once);
}
