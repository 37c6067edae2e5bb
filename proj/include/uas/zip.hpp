#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace uas {

/// Streaming ZIP writer (deflate, no ZIP64). Every entry carries the DOS
/// timestamp 1980-01-01 00:00 so identical payloads give identical archives.
class ZipWriter {
 public:
  explicit ZipWriter(const std::filesystem::path& path);
  ~ZipWriter();
  ZipWriter(const ZipWriter&) = delete;
  ZipWriter& operator=(const ZipWriter&) = delete;

  void begin_entry(const std::string& name);
  void write(std::string_view data);
  void end_entry();
  /// Writes the central directory. Called by the destructor if omitted, but
  /// errors are only reported when called explicitly.
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct ZipEntryInfo {
  std::string name;
  std::uint16_t method = 0;
  std::uint32_t crc32 = 0;
  std::uint64_t compressed_size = 0;
  std::uint64_t uncompressed_size = 0;
  std::uint64_t local_header_offset = 0;
};

class ZipReader {
 public:
  explicit ZipReader(const std::filesystem::path& path);

  const std::vector<ZipEntryInfo>& entries() const { return entries_; }
  bool contains(std::string_view name) const;

  /// Streams the decompressed entry in chunks; verifies the CRC.
  void stream(std::string_view name, const std::function<void(std::string_view)>& sink) const;
  /// Calls `on_line` for every line (without the trailing newline).
  void for_each_line(std::string_view name, const std::function<void(std::string_view)>& on_line) const;
  std::string read(std::string_view name) const;

 private:
  const ZipEntryInfo& find(std::string_view name) const;

  std::filesystem::path path_;
  std::vector<ZipEntryInfo> entries_;
};

}  // namespace uas
