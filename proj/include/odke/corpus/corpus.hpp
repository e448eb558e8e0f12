#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "odke/kg/value.hpp"
#include "odke/time.hpp"

namespace odke {

struct Hyperlink {
  std::size_t start = 0;  // byte offsets into the row's raw_value
  std::size_t end = 0;
  std::optional<EntityId> entity;  // global id target
  std::string url;                 // raw url target when no entity is known
};

struct InfoboxRow {
  std::string key;
  std::string raw_value;
  std::vector<Hyperlink> hyperlinks;
};

struct Passage {
  std::string id;
  std::string text;
};

using Table = std::vector<std::vector<std::string>>;

// Pre-parsed page snapshot.
struct Document {
  std::string url;
  std::string language;
  std::string revision_id;
  Timestamp revision_time{};
  std::optional<EntityId> subject_hint;
  std::vector<InfoboxRow> infobox;
  std::vector<Passage> passages;
  std::vector<Table> tables;

  const Passage* find_passage(std::string_view id) const;
};

Json to_json(const Document& d);
// Throws ParseError when hyperlink spans fall outside their row.
Document document_from_json(const Json& j);

// Read-only after load; safe for concurrent readers.
class Corpus {
 public:
  Corpus() = default;
  // Throws ParseError on duplicate (url, revision_id).
  void add(Document doc);

  std::size_t size() const noexcept { return documents_.size(); }
  const std::vector<Document>& documents() const noexcept { return documents_; }

  // Revision with the greatest revision_time for `url` (ties: later in file).
  const Document* latest(std::string_view url) const;
  const Document* find(std::string_view url, std::string_view revision_id) const;
  std::vector<const Document*> revisions(std::string_view url) const;
  // Latest revision of every url, in url order.
  std::vector<const Document*> latest_documents() const;

 private:
  std::vector<Document> documents_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_url_;
  std::set<std::pair<std::string, std::string>> revisions_seen_;
};

// Header {"schema":"odke.corpus","version":1}; one Document per line.
Corpus load_corpus(const std::filesystem::path& path);

enum class EditorFlag { anonymous, reverted, bot };

struct ChangeEvent {
  std::string url;
  std::string revision_id;
  Timestamp event_time{};
  std::set<EditorFlag> editor_flags;
  bool operator==(const ChangeEvent&) const = default;
};

Json to_json(const ChangeEvent& e);
ChangeEvent change_event_from_json(const Json& j);

// Change feed; event_time is non-decreasing in file order.
class Feed {
 public:
  Feed() = default;
  explicit Feed(std::vector<ChangeEvent> events);  // throws ParseError if out of order

  const std::vector<ChangeEvent>& events() const noexcept { return events_; }

 private:
  std::vector<ChangeEvent> events_;
};

// Header {"schema":"odke.feed","version":1}; one ChangeEvent per line.
Feed load_feed(const std::filesystem::path& path);

// Events with event_time > since, in feed order.
std::vector<ChangeEvent> poll_feed(const Feed& feed, Timestamp since);

// Returns true when an event should be dropped. Receives the whole batch and
// the event's position so heuristics can look ahead.
using VandalismPredicate =
    std::function<bool(const std::vector<ChangeEvent>& batch, std::size_t index)>;

// Drops reverted edits, and anonymous edits superseded by a later edit of the
// same url within the batch.
bool default_vandalism_rule(const std::vector<ChangeEvent>& batch, std::size_t index);

std::vector<ChangeEvent> filter_vandalism(const std::vector<ChangeEvent>& events,
                                          const VandalismPredicate& is_vandal = default_vandalism_rule);

}  // namespace odke
