#include <gtest/gtest.h>

#include <fstream>

#include "support.hpp"
#include "uas/error.hpp"
#include "uas/textio.hpp"
#include "uas/zip.hpp"

using namespace uas;
using uas::testing::TempDir;

namespace {

std::string payload(std::size_t n) {
  std::string s;
  Rng rng(3);
  for (std::size_t i = 0; i < n; ++i) s += std::to_string(rng.index(1000)) + (i % 7 == 6 ? "\n" : ",");
  return s;
}

void write_archive(const std::filesystem::path& p, const std::string& a, const std::string& b) {
  ZipWriter w(p);
  w.begin_entry("a.csv");
  // Written in uneven chunks.
  for (std::size_t i = 0; i < a.size(); i += 4097) w.write(std::string_view(a).substr(i, 4097));
  w.end_entry();
  w.begin_entry("empty.csv");
  w.end_entry();
  w.begin_entry("b.csv");
  w.write(b);
  w.end_entry();
  w.close();
}

}  // namespace

TEST(Zip, RoundTrip) {
  TempDir dir;
  const auto p = dir.path() / "x.zip";
  const std::string a = payload(200000), b = "header\nrow\n";
  write_archive(p, a, b);
  ZipReader r(p);
  ASSERT_EQ(r.entries().size(), 3u);
  EXPECT_EQ(r.entries()[0].name, "a.csv");
  EXPECT_EQ(r.read("a.csv"), a);
  EXPECT_EQ(r.read("empty.csv"), "");
  EXPECT_EQ(r.read("b.csv"), b);
  EXPECT_TRUE(r.contains("b.csv"));
  EXPECT_FALSE(r.contains("c.csv"));
  EXPECT_LT(r.entries()[0].compressed_size, r.entries()[0].uncompressed_size);
  std::vector<std::string> lines;
  r.for_each_line("b.csv", [&](std::string_view l) { lines.emplace_back(l); });
  EXPECT_EQ(lines, (std::vector<std::string>{"header", "row"}));
}

TEST(Zip, ByteIdenticalAcrossWrites) {
  TempDir dir;
  const std::string a = payload(5000);
  write_archive(dir.path() / "1.zip", a, "q\n");
  write_archive(dir.path() / "2.zip", a, "q\n");
  EXPECT_EQ(read_file(dir.path() / "1.zip"), read_file(dir.path() / "2.zip"));
}

TEST(Zip, DetectsCorruption) {
  TempDir dir;
  const auto p = dir.path() / "x.zip";
  write_archive(p, payload(5000), "abc\n");
  std::string bytes = read_file(p);
  const auto entry = ZipReader(p).entries()[0];
  // Flip a byte inside the compressed data of the first entry.
  const std::size_t at = entry.local_header_offset + 30 + entry.name.size() + entry.compressed_size / 2;
  bytes[at] = static_cast<char>(bytes[at] ^ 0x5a);
  write_file(p, bytes);
  EXPECT_THROW(ZipReader(p).read("a.csv"), Error);
  EXPECT_THROW(ZipReader(p).read("missing.csv"), Error);
  write_file(p, "not a zip");
  EXPECT_THROW(ZipReader{p}, Error);
}
