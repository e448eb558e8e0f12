#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "odke/kg/fact.hpp"
#include "odke/kg/graph.hpp"

namespace odke {

struct ViewEntry {
  Fact fact;
  std::uint64_t version = 0;
  Timestamp appended_at{};
  bool operator==(const ViewEntry&) const = default;
};

// The "latest" materialization: per key, the newest visible version.
class LatestView {
 public:
  using Map = std::map<FactKey, ViewEntry>;

  LatestView() = default;
  explicit LatestView(Map entries) : entries_(std::move(entries)) {}

  const ViewEntry* find(const FactKey& key) const;
  std::vector<const ViewEntry*> by_subject(const EntityId& subject) const;
  std::vector<const ViewEntry*> by_subject_predicate(const EntityId& subject,
                                                     std::string_view predicate) const;
  std::vector<const ViewEntry*> by_predicate(std::string_view predicate) const;
  // True when some entry for (subject, predicate) carries `value`.
  bool contains_value(const EntityId& subject, std::string_view predicate,
                      const Value& value) const;

  const Map& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  bool operator==(const LatestView&) const = default;

 private:
  Map entries_;
};

// Picks, per key, the maximum version that is not a tombstone and whose value
// was not rejected by a later tombstone of the same key.
LatestView materialize_latest(std::span<const VersionedFactRow> rows);

// Reads and verifies a log file (header, per-row checksum, gap-free versions).
// Throws ParseError carrying the line and byte offset of the first bad row.
std::vector<VersionedFactRow> read_log(const std::filesystem::path& path);
LatestView materialize_latest(const std::filesystem::path& log_path);

// View artifact: header {"schema":"odke.view","version":1}, entries in key order.
void write_view(const LatestView& view, const std::filesystem::path& path);
LatestView read_view(const std::filesystem::path& path);

// Checksummed line for one row (without trailing newline).
std::string encode_row(const VersionedFactRow& row);

struct AppendError {
  std::size_t index = 0;  // position in the input batch
  std::string message;
};

struct AppendResult {
  std::vector<VersionedFactRow> rows;
  std::vector<AppendError> errors;
};

// Append-only versioned fact table backed by a newline-delimited file.
// Appends are serialized internally and fsync'd before returning; rows are
// never rewritten.
class FactLog {
 public:
  // Creates the file with a header when absent, otherwise replays and verifies it.
  explicit FactLog(std::filesystem::path path);
  ~FactLog();
  FactLog(const FactLog&) = delete;
  FactLog& operator=(const FactLog&) = delete;

  // Non-tombstone facts must pass check_fact against `kg`; failures are
  // reported per fact while the rest of the batch is still appended.
  AppendResult append(std::span<const Fact> facts, std::string_view run_id, Timestamp at,
                      const KnowledgeGraph& kg);

  std::vector<VersionedFactRow> snapshot() const;
  LatestView latest() const;
  std::uint64_t max_version(const FactKey& key) const;
  std::size_t size() const;
  bool has_run(std::string_view run_id) const;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  mutable std::mutex mutex_;
  std::vector<VersionedFactRow> rows_;
  std::map<FactKey, std::uint64_t> versions_;
  std::set<std::string, std::less<>> runs_;
  mutable std::optional<LatestView> cached_view_;
};

}  // namespace odke
