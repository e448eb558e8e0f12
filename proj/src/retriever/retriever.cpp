#include "odke/retriever/retriever.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

#include "odke/error.hpp"
#include "odke/ndjson.hpp"
#include "odke/text.hpp"

namespace odke {

namespace {

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

CrawlResult retrieve_crawl(const ExtractionTask& task, const Corpus& corpus) {
  CrawlResult result;
  for (const auto& url : task.urls) {
    if (const Document* doc = corpus.latest(url))
      result.documents.push_back(doc);
    else
      result.missing_urls.push_back(url);
  }
  return result;
}

std::vector<QueryTemplate> load_query_templates(const std::filesystem::path& path) {
  std::vector<QueryTemplate> out;
  NdjsonReader reader(path, "odke.query_templates");
  Json record;
  while (reader.next(record)) {
    try {
      QueryTemplate t{record.at("predicate").get<std::string>(),
                      record.value("lang", std::string("en")),
                      record.at("pattern").get<std::string>(),
                      record.value("phrase", std::string{})};
      if (t.pattern.find("{subject}") == std::string::npos)
        throw ParseError("template pattern lacks {subject}: " + t.pattern);
      out.push_back(std::move(t));
    } catch (const Json::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), reader.line(), reader.offset());
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what(), reader.line(), reader.offset());
    }
  }
  return out;
}

std::vector<std::string> generate_queries(const ExtractionTask& task,
                                          const std::vector<QueryTemplate>& templates) {
  std::vector<const QueryTemplate*> matching;
  for (const auto& t : templates)
    if (t.predicate == task.predicate && t.language == task.language) matching.push_back(&t);
  if (matching.empty())
    throw ValidationError("no query template for predicate " + task.predicate + " (" +
                          task.language + ")");
  if (matching.size() > kMaxQueryTemplates) matching.resize(kMaxQueryTemplates);

  std::vector<std::string> names;
  std::set<std::string> seen_names;
  auto add_name = [&](const std::string& n) {
    const auto clean = text::collapse_whitespace(n);
    if (clean.empty() || names.size() >= kMaxQueryAliases) return;
    if (seen_names.insert(text::to_lower(clean)).second) names.push_back(clean);
  };
  add_name(task.subject_name);
  for (const auto& a : task.subject_aliases) add_name(a.name);

  std::vector<std::string> queries;
  std::set<std::string> seen;
  for (const auto* t : matching)
    for (const auto& name : names) {
      auto q = replace_all(replace_all(t->pattern, "{subject}", name), "{predicate_phrase}",
                           t->predicate_phrase);
      q = text::collapse_whitespace(q);
      if (seen.insert(q).second) queries.push_back(std::move(q));
    }
  return queries;
}

std::string indexed_text(const Document& doc) {
  std::string out;
  for (const auto& row : doc.infobox) {
    out += row.key;
    out += '\n';
    out += row.raw_value;
    out += '\n';
  }
  for (const auto& p : doc.passages) {
    out += p.text;
    out += '\n';
  }
  return out;
}

SearchIndex SearchIndex::build(const Corpus& corpus) {
  SearchIndex index;
  const auto docs = corpus.latest_documents();
  for (std::uint32_t i = 0; i < docs.size(); ++i) {
    const auto tokens = text::tokenize(indexed_text(*docs[i]));
    std::map<std::string, std::uint32_t> tf;
    for (const auto& t : tokens) ++tf[t];
    index.urls_.push_back(docs[i]->url);
    index.lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
    for (const auto& [term, count] : tf) index.postings_[term].push_back({i, count});
  }
  return index;
}

std::vector<SearchHit> SearchIndex::search(std::string_view query, std::size_t k) const {
  if (k == 0) throw ValidationError("search: k must be >= 1");
  auto terms = text::tokenize(query);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

  const double n = static_cast<double>(urls_.size());
  std::unordered_map<std::uint32_t, SearchHit> hits;
  for (const auto& term : terms) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double idf = std::log(1.0 + n / static_cast<double>(it->second.size()));
    for (const auto& posting : it->second) {
      auto& hit = hits[posting.doc];
      hit.score += posting.tf * idf / std::sqrt(static_cast<double>(lengths_[posting.doc]));
      hit.matched_terms.push_back(term);
    }
  }
  std::vector<SearchHit> out;
  out.reserve(hits.size());
  for (auto& [doc, hit] : hits) {
    hit.url = urls_[doc];
    out.push_back(std::move(hit));
  }
  std::sort(out.begin(), out.end(), [](const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.url < b.url;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

std::string SearchIndex::serialize() const {
  std::ostringstream out;
  out << "odke-index 1\n" << urls_.size() << '\n';
  for (std::size_t i = 0; i < urls_.size(); ++i) out << lengths_[i] << ' ' << urls_[i] << '\n';
  out << postings_.size() << '\n';
  for (const auto& [term, list] : postings_) {
    out << term << ' ' << list.size();
    for (const auto& p : list) out << ' ' << p.doc << ':' << p.tf;
    out << '\n';
  }
  return out.str();
}

SearchIndex SearchIndex::deserialize(std::string_view data) {
  std::istringstream in{std::string(data)};
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "odke-index" || version != 1) throw ParseError("not an odke index artifact");
  SearchIndex index;
  std::size_t docs = 0;
  in >> docs;
  for (std::size_t i = 0; i < docs; ++i) {
    std::uint32_t len = 0;
    std::string url;
    in >> len;
    in.get();
    std::getline(in, url);
    index.lengths_.push_back(len);
    index.urls_.push_back(std::move(url));
  }
  std::size_t terms = 0;
  in >> terms;
  for (std::size_t i = 0; i < terms; ++i) {
    std::string term;
    std::size_t count = 0;
    in >> term >> count;
    auto& list = index.postings_[term];
    for (std::size_t j = 0; j < count; ++j) {
      std::uint32_t doc = 0, tf = 0;
      char colon = 0;
      in >> doc >> colon >> tf;
      if (colon != ':' || doc >= docs) throw ParseError("corrupt posting for term " + term);
      list.push_back({doc, tf});
    }
  }
  if (!in) throw ParseError("truncated index artifact");
  return index;
}

}  // namespace odke
