#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "odke/corpus/corpus.hpp"
#include "odke/initiator/initiator.hpp"

namespace odke {

struct CrawlResult {
  std::vector<const Document*> documents;
  std::vector<std::string> missing_urls;

  bool empty_evidence() const noexcept { return documents.empty(); }
};

// Newest revision of every task url present in the corpus.
CrawlResult retrieve_crawl(const ExtractionTask& task, const Corpus& corpus);

struct QueryTemplate {
  std::string predicate;
  std::string language;
  std::string pattern;           // must contain {subject}; may contain {predicate_phrase}
  std::string predicate_phrase;  // substituted for {predicate_phrase}
};

// Header {"schema":"odke.query_templates","version":1}; one template per line.
// Throws ParseError when a pattern lacks {subject}.
std::vector<QueryTemplate> load_query_templates(const std::filesystem::path& path);

inline constexpr std::size_t kMaxQueryAliases = 3;
inline constexpr std::size_t kMaxQueryTemplates = 2;

// Substitutes the subject's surface forms (canonical name then aliases,
// deduplicated case-insensitively, at most 3) into the first two templates
// matching (predicate, language). Throws ValidationError when none match.
std::vector<std::string> generate_queries(const ExtractionTask& task,
                                          const std::vector<QueryTemplate>& templates);

struct SearchHit {
  std::string url;
  double score = 0;
  std::vector<std::string> matched_terms;
};

// Inverted index over the latest revision of each url: tokenized passages and
// infobox keys/values. Immutable after build; concurrent searches are safe.
//
// score(d, q) = Σ_{t ∈ distinct(q)} tf(t, d) · ln(1 + N / df(t)) / sqrt(|d|)
// where |d| is the document's token count. Ties break on url.
class SearchIndex {
 public:
  struct Posting {
    std::uint32_t doc;
    std::uint32_t tf;
  };

  static SearchIndex build(const Corpus& corpus);

  std::vector<SearchHit> search(std::string_view query, std::size_t k) const;

  std::size_t document_count() const noexcept { return urls_.size(); }
  const std::vector<std::string>& urls() const noexcept { return urls_; }
  const std::vector<std::uint32_t>& lengths() const noexcept { return lengths_; }
  const std::map<std::string, std::vector<Posting>>& postings() const noexcept {
    return postings_;
  }

  // Text artifact, header "odke-index 1"; byte-identical for identical corpora.
  std::string serialize() const;
  static SearchIndex deserialize(std::string_view data);

 private:
  std::vector<std::string> urls_;
  std::vector<std::uint32_t> lengths_;
  std::map<std::string, std::vector<Posting>> postings_;
};

// Indexed text for one document: infobox keys and values, then passages.
std::string indexed_text(const Document& doc);

}  // namespace odke
