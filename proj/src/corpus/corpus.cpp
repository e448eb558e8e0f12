#include "odke/corpus/corpus.hpp"

#include <algorithm>

#include "odke/error.hpp"
#include "odke/ndjson.hpp"

namespace odke {

namespace {

std::string_view flag_name(EditorFlag f) {
  switch (f) {
    case EditorFlag::anonymous: return "anonymous";
    case EditorFlag::reverted: return "reverted";
    case EditorFlag::bot: return "bot";
  }
  return "";
}

EditorFlag flag_from_string(std::string_view s) {
  if (s == "anonymous") return EditorFlag::anonymous;
  if (s == "reverted") return EditorFlag::reverted;
  if (s == "bot") return EditorFlag::bot;
  throw ParseError("unknown editor flag: " + std::string(s));
}

}  // namespace

const Passage* Document::find_passage(std::string_view id) const {
  for (const auto& p : passages)
    if (p.id == id) return &p;
  return nullptr;
}

Json to_json(const Document& d) {
  Json infobox = Json::array();
  for (const auto& row : d.infobox) {
    Json links = Json::array();
    for (const auto& h : row.hyperlinks) {
      Json l{{"start", h.start}, {"end", h.end}};
      if (h.entity) l["entity"] = h.entity->str();
      if (!h.url.empty()) l["url"] = h.url;
      links.push_back(std::move(l));
    }
    infobox.push_back(Json{{"key", row.key}, {"value", row.raw_value}, {"links", links}});
  }
  Json passages = Json::array();
  for (const auto& p : d.passages) passages.push_back(Json{{"id", p.id}, {"text", p.text}});
  Json j{{"url", d.url},
         {"lang", d.language},
         {"revision", d.revision_id},
         {"revision_time", format_timestamp(d.revision_time)},
         {"infobox", infobox},
         {"passages", passages},
         {"tables", d.tables}};
  if (d.subject_hint) j["subject"] = d.subject_hint->str();
  return j;
}

Document document_from_json(const Json& j) {
  Document d;
  d.url = j.at("url").get<std::string>();
  d.language = j.at("lang").get<std::string>();
  d.revision_id = j.at("revision").get<std::string>();
  d.revision_time = parse_timestamp(j.at("revision_time").get<std::string>());
  if (j.contains("subject")) d.subject_hint = EntityId(j.at("subject").get<std::string>());
  for (const auto& r : j.value("infobox", Json::array())) {
    InfoboxRow row{r.at("key").get<std::string>(), r.at("value").get<std::string>(), {}};
    for (const auto& l : r.value("links", Json::array())) {
      Hyperlink h;
      h.start = l.at("start").get<std::size_t>();
      h.end = l.at("end").get<std::size_t>();
      if (l.contains("entity")) h.entity = EntityId(l.at("entity").get<std::string>());
      h.url = l.value("url", std::string{});
      if (h.start > h.end || h.end > row.raw_value.size())
        throw ParseError("hyperlink span outside row '" + row.key + "' in " + d.url);
      if (!h.entity && h.url.empty())
        throw ParseError("hyperlink without target in row '" + row.key + "' in " + d.url);
      row.hyperlinks.push_back(std::move(h));
    }
    d.infobox.push_back(std::move(row));
  }
  for (const auto& p : j.value("passages", Json::array()))
    d.passages.push_back({p.at("id").get<std::string>(), p.at("text").get<std::string>()});
  if (j.contains("tables")) d.tables = j.at("tables").get<std::vector<Table>>();
  return d;
}

void Corpus::add(Document doc) {
  if (!revisions_seen_.emplace(doc.url, doc.revision_id).second)
    throw ParseError("duplicate revision " + doc.revision_id + " for " + doc.url);
  by_url_[doc.url].push_back(documents_.size());
  documents_.push_back(std::move(doc));
}

const Document* Corpus::latest(std::string_view url) const {
  auto it = by_url_.find(url);
  if (it == by_url_.end()) return nullptr;
  const Document* best = nullptr;
  for (auto idx : it->second)
    if (!best || documents_[idx].revision_time >= best->revision_time) best = &documents_[idx];
  return best;
}

const Document* Corpus::find(std::string_view url, std::string_view revision_id) const {
  auto it = by_url_.find(url);
  if (it == by_url_.end()) return nullptr;
  for (auto idx : it->second)
    if (documents_[idx].revision_id == revision_id) return &documents_[idx];
  return nullptr;
}

std::vector<const Document*> Corpus::revisions(std::string_view url) const {
  std::vector<const Document*> out;
  auto it = by_url_.find(url);
  if (it == by_url_.end()) return out;
  for (auto idx : it->second) out.push_back(&documents_[idx]);
  return out;
}

std::vector<const Document*> Corpus::latest_documents() const {
  std::vector<const Document*> out;
  out.reserve(by_url_.size());
  for (const auto& [url, _] : by_url_) out.push_back(latest(url));
  return out;
}

Corpus load_corpus(const std::filesystem::path& path) {
  Corpus corpus;
  NdjsonReader reader(path, "odke.corpus");
  Json record;
  while (reader.next(record)) {
    try {
      corpus.add(document_from_json(record));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what(), reader.line(), reader.offset());
    } catch (const Json::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), reader.line(), reader.offset());
    }
  }
  return corpus;
}

Json to_json(const ChangeEvent& e) {
  Json flags = Json::array();
  for (auto f : e.editor_flags) flags.push_back(flag_name(f));
  return Json{{"url", e.url},
              {"revision", e.revision_id},
              {"time", format_timestamp(e.event_time)},
              {"flags", flags}};
}

ChangeEvent change_event_from_json(const Json& j) {
  ChangeEvent e;
  e.url = j.at("url").get<std::string>();
  e.revision_id = j.value("revision", std::string{});
  e.event_time = parse_timestamp(j.at("time").get<std::string>());
  for (const auto& f : j.value("flags", Json::array()))
    e.editor_flags.insert(flag_from_string(f.get<std::string>()));
  return e;
}

Feed::Feed(std::vector<ChangeEvent> events) : events_(std::move(events)) {
  for (std::size_t i = 1; i < events_.size(); ++i)
    if (events_[i].event_time < events_[i - 1].event_time)
      throw ParseError("feed event " + std::to_string(i + 1) + " is earlier than its predecessor");
}

Feed load_feed(const std::filesystem::path& path) {
  std::vector<ChangeEvent> events;
  NdjsonReader reader(path, "odke.feed");
  Json record;
  while (reader.next(record)) {
    try {
      events.push_back(change_event_from_json(record));
    } catch (const std::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), reader.line(), reader.offset());
    }
    if (events.size() > 1 && events.back().event_time < events[events.size() - 2].event_time)
      throw ParseError(path.string() + ": event_time decreases", reader.line(), reader.offset());
  }
  return Feed(std::move(events));
}

std::vector<ChangeEvent> poll_feed(const Feed& feed, Timestamp since) {
  const auto& events = feed.events();
  auto first = std::upper_bound(events.begin(), events.end(), since,
                                [](Timestamp t, const ChangeEvent& e) { return t < e.event_time; });
  return {first, events.end()};
}

bool default_vandalism_rule(const std::vector<ChangeEvent>& batch, std::size_t index) {
  const ChangeEvent& e = batch[index];
  if (e.editor_flags.contains(EditorFlag::reverted)) return true;
  if (e.editor_flags.contains(EditorFlag::anonymous))
    for (std::size_t j = index + 1; j < batch.size(); ++j)
      if (batch[j].url == e.url) return true;
  return false;
}

std::vector<ChangeEvent> filter_vandalism(const std::vector<ChangeEvent>& events,
                                          const VandalismPredicate& is_vandal) {
  std::vector<ChangeEvent> kept;
  for (std::size_t i = 0; i < events.size(); ++i)
    if (!is_vandal(events, i)) kept.push_back(events[i]);
  return kept;
}

}  // namespace odke
