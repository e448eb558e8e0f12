#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include <json.hpp>

namespace odke {

using Json = nlohmann::json;

// Every newline-delimited file starts with {"schema": "<name>", "version": N}.
Json make_header(std::string_view schema, int version);

// Streams records after validating the header line. Blank lines are skipped.
class NdjsonReader {
 public:
  NdjsonReader(const std::filesystem::path& path, std::string_view schema, int max_version = 1);

  // False at end of file. Throws ParseError with line and byte offset on bad JSON.
  bool next(Json& record);

  int version() const noexcept { return version_; }
  std::size_t line() const noexcept { return line_; }
  // Byte offset of the start of the record most recently returned.
  std::size_t offset() const noexcept { return record_offset_; }
  // Raw text of the record most recently returned.
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
  int version_ = 0;
  std::size_t line_ = 0;
  std::size_t offset_ = 0;
  std::size_t record_offset_ = 0;
  std::string raw_;
};

// Writes `header` when the file is new/empty, then appends lines.
class NdjsonWriter {
 public:
  NdjsonWriter(const std::filesystem::path& path, const Json& header, bool truncate = false);
  void write(const Json& record);
  void flush();

 private:
  std::ofstream out_;
};

}  // namespace odke
