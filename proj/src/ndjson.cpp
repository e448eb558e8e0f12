#include "odke/ndjson.hpp"

#include "odke/error.hpp"

namespace odke {

Json make_header(std::string_view schema, int version) {
  return Json{{"schema", schema}, {"version", version}};
}

NdjsonReader::NdjsonReader(const std::filesystem::path& path, std::string_view schema,
                           int max_version)
    : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw ParseError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in_, line)) throw ParseError(path.string() + ": missing schema header", 1, 0);
  line_ = 1;
  offset_ = line.size() + 1;
  Json header;
  try {
    header = Json::parse(line);
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": bad schema header: " + e.what(), 1, 0);
  }
  if (!header.is_object() || header.value("schema", "") != schema)
    throw ParseError(path.string() + ": expected schema '" + std::string(schema) + "'", 1, 0);
  version_ = header.value("version", 0);
  if (version_ < 1 || version_ > max_version)
    throw ParseError(path.string() + ": unsupported schema version " + std::to_string(version_),
                     1, 0);
}

bool NdjsonReader::next(Json& record) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    record_offset_ = offset_;
    offset_ += line.size() + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      record = Json::parse(line);
    } catch (const Json::exception& e) {
      throw ParseError(path_.string() + ": malformed record: " + e.what(), line_, record_offset_);
    }
    raw_ = std::move(line);
    return true;
  }
  return false;
}

NdjsonWriter::NdjsonWriter(const std::filesystem::path& path, const Json& header, bool truncate) {
  const bool fresh = truncate || !std::filesystem::exists(path) ||
                     std::filesystem::file_size(path) == 0;
  out_.open(path, truncate ? std::ios::binary | std::ios::trunc
                           : std::ios::binary | std::ios::app);
  if (!out_) throw Error("cannot open for writing: " + path.string());
  if (fresh) out_ << header.dump() << '\n';
}

void NdjsonWriter::write(const Json& record) { out_ << record.dump() << '\n'; }

void NdjsonWriter::flush() { out_.flush(); }

}  // namespace odke
