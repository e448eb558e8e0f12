#include "odke/kg/fact_log.hpp"

#include <unistd.h>

#include <algorithm>
#include <cinttypes>
#include <cmath>

#include <zlib.h>

#include "odke/error.hpp"

namespace odke {

namespace {

constexpr std::string_view kLogSchema = "odke.factlog";

std::string checksum(const std::string& payload) {
  const auto crc = ::crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
                           static_cast<uInt>(payload.size()));
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

std::optional<std::string> validate_fact(const Fact& fact, const KnowledgeGraph& kg) {
  if (!(fact.confidence >= 0.0 && fact.confidence <= 1.0))
    return "confidence outside [0,1]";
  if (fact.provenance.empty()) return "fact has no provenance";
  if (fact.status == FactStatus::inferred &&
      std::none_of(fact.provenance.begin(), fact.provenance.end(), [](const Provenance& p) {
        return p.extractor_id == kLinkInferenceExtractor;
      }))
    return "inferred fact without link_inference provenance";
  if (is_tombstone(fact.status)) return std::nullopt;
  if (auto violation = check_fact(kg, fact.subject, fact.predicate, fact.object))
    return violation->message;
  return std::nullopt;
}

}  // namespace

const ViewEntry* LatestView::find(const FactKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<const ViewEntry*> LatestView::by_subject(const EntityId& subject) const {
  std::vector<const ViewEntry*> out;
  for (auto it = entries_.lower_bound(FactKey{subject, {}, std::nullopt});
       it != entries_.end() && it->first.subject == subject; ++it)
    out.push_back(&it->second);
  return out;
}

std::vector<const ViewEntry*> LatestView::by_subject_predicate(const EntityId& subject,
                                                               std::string_view predicate) const {
  std::vector<const ViewEntry*> out;
  for (auto it = entries_.lower_bound(FactKey{subject, std::string(predicate), std::nullopt});
       it != entries_.end() && it->first.subject == subject && it->first.predicate == predicate;
       ++it)
    out.push_back(&it->second);
  return out;
}

std::vector<const ViewEntry*> LatestView::by_predicate(std::string_view predicate) const {
  std::vector<const ViewEntry*> out;
  for (const auto& [key, entry] : entries_)
    if (key.predicate == predicate) out.push_back(&entry);
  return out;
}

bool LatestView::contains_value(const EntityId& subject, std::string_view predicate,
                                const Value& value) const {
  const auto wanted = canonical(value);
  for (const auto* e : by_subject_predicate(subject, predicate))
    if (canonical(e->fact.object) == wanted) return true;
  return false;
}

LatestView materialize_latest(std::span<const VersionedFactRow> rows) {
  std::map<FactKey, std::vector<const VersionedFactRow*>> by_key;
  for (const auto& row : rows) by_key[row.key].push_back(&row);

  LatestView::Map out;
  for (auto& [key, versions] : by_key) {
    std::sort(versions.begin(), versions.end(),
              [](const auto* a, const auto* b) { return a->version < b->version; });
    std::set<std::string> rejected;
    for (auto it = versions.rbegin(); it != versions.rend(); ++it) {
      const VersionedFactRow& row = **it;
      std::string value = canonical(row.fact.object);
      if (is_tombstone(row.fact.status)) {
        rejected.insert(std::move(value));
        continue;
      }
      if (rejected.contains(value)) continue;
      out.emplace(key, ViewEntry{row.fact, row.version, row.appended_at});
      break;
    }
  }
  return LatestView(std::move(out));
}

std::string encode_row(const VersionedFactRow& row) {
  Json j = to_json(row);
  j["crc"] = checksum(j.dump());
  return j.dump();
}

std::vector<VersionedFactRow> read_log(const std::filesystem::path& path) {
  std::vector<VersionedFactRow> rows;
  std::map<FactKey, std::uint64_t> last_version;
  NdjsonReader reader(path, kLogSchema);
  Json record;
  while (reader.next(record)) {
    auto corrupt = [&](const std::string& why) {
      return ParseError(path.string() + ": corrupt row: " + why, reader.line(), reader.offset());
    };
    if (!record.is_object() || !record.contains("crc")) throw corrupt("missing checksum");
    const std::string stored = record["crc"].get<std::string>();
    record.erase("crc");
    if (checksum(record.dump()) != stored) throw corrupt("checksum mismatch");
    VersionedFactRow row;
    try {
      row = row_from_json(record);
    } catch (const std::exception& e) {
      throw corrupt(e.what());
    }
    if (row.key.subject != row.fact.subject || row.key.predicate != row.fact.predicate)
      throw corrupt("key does not match fact");
    auto& last = last_version[row.key];
    if (row.version != last + 1)
      throw corrupt("version " + std::to_string(row.version) + " after " + std::to_string(last));
    last = row.version;
    rows.push_back(std::move(row));
  }
  return rows;
}

LatestView materialize_latest(const std::filesystem::path& log_path) {
  const auto rows = read_log(log_path);
  return materialize_latest(rows);
}

void write_view(const LatestView& view, const std::filesystem::path& path) {
  NdjsonWriter writer(path, make_header("odke.view", 1), /*truncate=*/true);
  for (const auto& [key, entry] : view.entries())
    writer.write(Json{{"key", to_json(key)},
                      {"version", entry.version},
                      {"appended_at", format_timestamp(entry.appended_at)},
                      {"fact", to_json(entry.fact)}});
  writer.flush();
}

LatestView read_view(const std::filesystem::path& path) {
  LatestView::Map entries;
  NdjsonReader reader(path, "odke.view");
  Json record;
  while (reader.next(record)) {
    try {
      entries.emplace(fact_key_from_json(record.at("key")),
                      ViewEntry{fact_from_json(record.at("fact")),
                                record.at("version").get<std::uint64_t>(),
                                parse_timestamp(record.at("appended_at").get<std::string>())});
    } catch (const Json::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), reader.line(), reader.offset());
    }
  }
  return LatestView(std::move(entries));
}

FactLog::FactLog(std::filesystem::path path) : path_(std::move(path)) {
  const bool fresh = !std::filesystem::exists(path_) || std::filesystem::file_size(path_) == 0;
  if (!fresh) {
    rows_ = read_log(path_);
    for (const auto& row : rows_) {
      versions_[row.key] = row.version;
      runs_.insert(row.run_id);
    }
  }
  file_ = std::fopen(path_.c_str(), "ab");
  if (!file_) throw Error("cannot open fact log " + path_.string());
  if (fresh) {
    const std::string header = make_header(kLogSchema, 1).dump() + "\n";
    std::fwrite(header.data(), 1, header.size(), file_);
    std::fflush(file_);
    ::fsync(::fileno(file_));
  }
}

FactLog::~FactLog() {
  if (file_) std::fclose(file_);
}

AppendResult FactLog::append(std::span<const Fact> facts, std::string_view run_id, Timestamp at,
                             const KnowledgeGraph& kg) {
  AppendResult result;
  if (facts.empty()) return result;
  std::lock_guard lock(mutex_);
  std::string buffer;
  for (std::size_t i = 0; i < facts.size(); ++i) {
    if (auto error = validate_fact(facts[i], kg)) {
      result.errors.push_back({i, *error});
      continue;
    }
    VersionedFactRow row;
    row.key = make_key(facts[i], kg.ontology());
    row.version = ++versions_[row.key];
    row.fact = facts[i];
    row.appended_at = at;
    row.run_id = std::string(run_id);
    buffer += encode_row(row);
    buffer += '\n';
    result.rows.push_back(std::move(row));
  }
  if (result.rows.empty()) return result;
  if (std::fwrite(buffer.data(), 1, buffer.size(), file_) != buffer.size() ||
      std::fflush(file_) != 0 || ::fsync(::fileno(file_)) != 0)
    throw Error("write to fact log failed: " + path_.string());
  rows_.insert(rows_.end(), result.rows.begin(), result.rows.end());
  runs_.insert(std::string(run_id));
  cached_view_.reset();
  return result;
}

std::vector<VersionedFactRow> FactLog::snapshot() const {
  std::lock_guard lock(mutex_);
  return rows_;
}

LatestView FactLog::latest() const {
  std::lock_guard lock(mutex_);
  if (!cached_view_) cached_view_ = materialize_latest(rows_);
  return *cached_view_;
}

std::uint64_t FactLog::max_version(const FactKey& key) const {
  std::lock_guard lock(mutex_);
  auto it = versions_.find(key);
  return it == versions_.end() ? 0 : it->second;
}

std::size_t FactLog::size() const {
  std::lock_guard lock(mutex_);
  return rows_.size();
}

bool FactLog::has_run(std::string_view run_id) const {
  std::lock_guard lock(mutex_);
  return runs_.find(run_id) != runs_.end();
}

}  // namespace odke
