#include "uas/zip.hpp"

#include <array>
#include <cstring>

#include <zlib.h>

#include "uas/error.hpp"

namespace uas {
namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::uint16_t kDosDate1980 = (0 << 9) | (1 << 5) | 1;
constexpr std::uint16_t kDosTime = 0;
constexpr std::uint16_t kMethodStore = 0;
constexpr std::uint16_t kMethodDeflate = 8;
constexpr std::size_t kChunk = 1 << 16;

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint16_t get16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t get32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

struct ZipWriter::Impl {
  std::filesystem::path path;
  std::ofstream out;
  std::vector<ZipEntryInfo> done;
  bool in_entry = false;
  bool closed = false;
  ZipEntryInfo current;
  z_stream zs{};
  std::uint32_t crc = 0;
  std::uint64_t raw_size = 0;
  std::uint64_t packed_size = 0;
  std::vector<unsigned char> buffer = std::vector<unsigned char>(kChunk);

  void fail(const std::string& what) const { throw IoError(path.string() + ": " + what); }

  std::uint64_t offset() {
    const auto pos = out.tellp();
    if (pos < 0) fail("tellp failed");
    return static_cast<std::uint64_t>(pos);
  }

  void emit(const std::string& bytes) {
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail("write failed");
  }

  std::string local_header(const ZipEntryInfo& e) const {
    std::string h;
    put32(h, kLocalSig);
    put16(h, 20);
    put16(h, 0);
    put16(h, e.method);
    put16(h, kDosTime);
    put16(h, kDosDate1980);
    put32(h, e.crc32);
    put32(h, static_cast<std::uint32_t>(e.compressed_size));
    put32(h, static_cast<std::uint32_t>(e.uncompressed_size));
    put16(h, static_cast<std::uint16_t>(e.name.size()));
    put16(h, 0);
    h += e.name;
    return h;
  }

  void pump(int flush) {
    do {
      zs.next_out = buffer.data();
      zs.avail_out = static_cast<uInt>(buffer.size());
      const int rc = deflate(&zs, flush);
      if (rc == Z_STREAM_ERROR) fail("deflate failed");
      const std::size_t produced = buffer.size() - zs.avail_out;
      out.write(reinterpret_cast<const char*>(buffer.data()), static_cast<std::streamsize>(produced));
      if (!out) fail("write failed");
      packed_size += produced;
    } while (zs.avail_out == 0);
  }
};

ZipWriter::ZipWriter(const std::filesystem::path& path) : impl_(std::make_unique<Impl>()) {
  impl_->path = path;
  impl_->out.open(path, std::ios::binary | std::ios::trunc);
  if (!impl_->out) impl_->fail("cannot open for writing");
}

ZipWriter::~ZipWriter() {
  if (impl_ && !impl_->closed) {
    try {
      close();
    } catch (...) {
    }
  }
}

void ZipWriter::begin_entry(const std::string& name) {
  Impl& w = *impl_;
  if (w.in_entry) w.fail("begin_entry while another entry is open");
  if (name.empty() || name.size() > 0xffff) w.fail("invalid entry name");
  w.current = ZipEntryInfo{name, kMethodDeflate, 0, 0, 0, w.offset()};
  w.emit(w.local_header(w.current));
  w.zs = z_stream{};
  if (deflateInit2(&w.zs, 6, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK) w.fail("deflateInit2 failed");
  w.crc = static_cast<std::uint32_t>(crc32(0L, Z_NULL, 0));
  w.raw_size = 0;
  w.packed_size = 0;
  w.in_entry = true;
}

void ZipWriter::write(std::string_view data) {
  Impl& w = *impl_;
  if (!w.in_entry) w.fail("write outside an entry");
  while (!data.empty()) {
    const std::size_t n = std::min<std::size_t>(data.size(), 1u << 30);
    w.crc = static_cast<std::uint32_t>(
        crc32(w.crc, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(n)));
    w.zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    w.zs.avail_in = static_cast<uInt>(n);
    w.pump(Z_NO_FLUSH);
    w.raw_size += n;
    data.remove_prefix(n);
  }
}

void ZipWriter::end_entry() {
  Impl& w = *impl_;
  if (!w.in_entry) w.fail("end_entry without begin_entry");
  w.zs.next_in = nullptr;
  w.zs.avail_in = 0;
  w.pump(Z_FINISH);
  deflateEnd(&w.zs);
  w.in_entry = false;
  if (w.raw_size > 0xfffffffeULL || w.packed_size > 0xfffffffeULL) w.fail("entry exceeds 4 GiB (ZIP64 unsupported)");
  w.current.crc32 = w.crc;
  w.current.compressed_size = w.packed_size;
  w.current.uncompressed_size = w.raw_size;
  const std::uint64_t end = w.offset();
  w.out.seekp(static_cast<std::streamoff>(w.current.local_header_offset));
  w.emit(w.local_header(w.current));
  w.out.seekp(static_cast<std::streamoff>(end));
  w.done.push_back(w.current);
}

void ZipWriter::close() {
  Impl& w = *impl_;
  if (w.closed) return;
  if (w.in_entry) end_entry();
  w.closed = true;
  const std::uint64_t cd_start = w.offset();
  std::string cd;
  for (const auto& e : w.done) {
    put32(cd, kCentralSig);
    put16(cd, 20);  // made by
    put16(cd, 20);  // needed
    put16(cd, 0);
    put16(cd, e.method);
    put16(cd, kDosTime);
    put16(cd, kDosDate1980);
    put32(cd, e.crc32);
    put32(cd, static_cast<std::uint32_t>(e.compressed_size));
    put32(cd, static_cast<std::uint32_t>(e.uncompressed_size));
    put16(cd, static_cast<std::uint16_t>(e.name.size()));
    put16(cd, 0);
    put16(cd, 0);
    put16(cd, 0);
    put16(cd, 0);
    put32(cd, 0);
    put32(cd, static_cast<std::uint32_t>(e.local_header_offset));
    cd += e.name;
  }
  if (cd_start > 0xfffffffeULL) w.fail("archive exceeds 4 GiB (ZIP64 unsupported)");
  std::string end;
  put32(end, kEndSig);
  put16(end, 0);
  put16(end, 0);
  put16(end, static_cast<std::uint16_t>(w.done.size()));
  put16(end, static_cast<std::uint16_t>(w.done.size()));
  put32(end, static_cast<std::uint32_t>(cd.size()));
  put32(end, static_cast<std::uint32_t>(cd_start));
  put16(end, 0);
  w.emit(cd);
  w.emit(end);
  w.out.close();
  if (!w.out) w.fail("close failed");
}

ZipReader::ZipReader(const std::filesystem::path& path) : path_(path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open");
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::uint64_t>(in.tellg());
  const std::uint64_t tail = std::min<std::uint64_t>(size, 22 + 0xffff);
  std::vector<unsigned char> buf(tail);
  in.seekg(static_cast<std::streamoff>(size - tail));
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(tail));
  std::size_t eocd = std::string::npos;
  for (std::size_t i = tail >= 22 ? tail - 22 + 1 : 0; i-- > 0;) {
    if (get32(&buf[i]) == kEndSig) {
      eocd = i;
      break;
    }
  }
  if (eocd == std::string::npos) throw DataIntegrityError(path.string() + ": not a ZIP archive");
  const std::uint16_t count = get16(&buf[eocd + 10]);
  const std::uint32_t cd_size = get32(&buf[eocd + 12]);
  const std::uint32_t cd_offset = get32(&buf[eocd + 16]);
  std::vector<unsigned char> cd(cd_size);
  in.seekg(cd_offset);
  in.read(reinterpret_cast<char*>(cd.data()), cd_size);
  if (!in) throw DataIntegrityError(path.string() + ": truncated central directory");
  std::size_t p = 0;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (p + 46 > cd.size() || get32(&cd[p]) != kCentralSig) {
      throw DataIntegrityError(path.string() + ": corrupt central directory");
    }
    ZipEntryInfo e;
    e.method = get16(&cd[p + 10]);
    e.crc32 = get32(&cd[p + 16]);
    e.compressed_size = get32(&cd[p + 20]);
    e.uncompressed_size = get32(&cd[p + 24]);
    const std::uint16_t name_len = get16(&cd[p + 28]);
    const std::uint16_t extra_len = get16(&cd[p + 30]);
    const std::uint16_t comment_len = get16(&cd[p + 32]);
    e.local_header_offset = get32(&cd[p + 42]);
    if (p + 46 + name_len > cd.size()) throw DataIntegrityError(path.string() + ": corrupt entry name");
    e.name.assign(reinterpret_cast<const char*>(&cd[p + 46]), name_len);
    entries_.push_back(std::move(e));
    p += 46u + name_len + extra_len + comment_len;
  }
}

bool ZipReader::contains(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return true;
  }
  return false;
}

const ZipEntryInfo& ZipReader::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e;
  }
  throw DataIntegrityError(path_.string() + ": missing entry " + std::string(name));
}

void ZipReader::stream(std::string_view name, const std::function<void(std::string_view)>& sink) const {
  const ZipEntryInfo& e = find(name);
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw IoError(path_.string() + ": cannot open");
  std::array<unsigned char, 30> lh{};
  in.seekg(static_cast<std::streamoff>(e.local_header_offset));
  in.read(reinterpret_cast<char*>(lh.data()), lh.size());
  if (!in || get32(lh.data()) != kLocalSig) throw DataIntegrityError(path_.string() + ": bad local header");
  in.seekg(static_cast<std::streamoff>(e.local_header_offset + 30 + get16(&lh[26]) + get16(&lh[28])));

  std::uint32_t crc = static_cast<std::uint32_t>(crc32(0L, Z_NULL, 0));
  std::uint64_t produced = 0;
  std::vector<char> in_buf(kChunk);
  std::vector<char> out_buf(kChunk);
  std::uint64_t remaining = e.compressed_size;
  const auto deliver = [&](const char* data, std::size_t n) {
    crc = static_cast<std::uint32_t>(crc32(crc, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n)));
    produced += n;
    sink(std::string_view(data, n));
  };

  if (e.method == kMethodStore) {
    while (remaining > 0) {
      const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(remaining, in_buf.size()));
      in.read(in_buf.data(), static_cast<std::streamsize>(n));
      if (!in) throw DataIntegrityError(path_.string() + ": truncated entry " + e.name);
      deliver(in_buf.data(), n);
      remaining -= n;
    }
  } else if (e.method == kMethodDeflate) {
    z_stream zs{};
    if (inflateInit2(&zs, -15) != Z_OK) throw DataIntegrityError("inflateInit2 failed");
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
      if (zs.avail_in == 0) {
        if (remaining == 0) break;
        const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(remaining, in_buf.size()));
        in.read(in_buf.data(), static_cast<std::streamsize>(n));
        if (!in) {
          inflateEnd(&zs);
          throw DataIntegrityError(path_.string() + ": truncated entry " + e.name);
        }
        remaining -= n;
        zs.next_in = reinterpret_cast<Bytef*>(in_buf.data());
        zs.avail_in = static_cast<uInt>(n);
      }
      zs.next_out = reinterpret_cast<Bytef*>(out_buf.data());
      zs.avail_out = static_cast<uInt>(out_buf.size());
      rc = inflate(&zs, Z_NO_FLUSH);
      if (rc != Z_OK && rc != Z_STREAM_END) {
        inflateEnd(&zs);
        throw DataIntegrityError(path_.string() + ": corrupt deflate stream in " + e.name);
      }
      const std::size_t n = out_buf.size() - zs.avail_out;
      if (n > 0) deliver(out_buf.data(), n);
    }
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw DataIntegrityError(path_.string() + ": truncated deflate stream in " + e.name);
  } else {
    throw DataIntegrityError(path_.string() + ": unsupported compression method " + std::to_string(e.method));
  }
  if (produced != e.uncompressed_size || crc != e.crc32) {
    throw DataIntegrityError(path_.string() + ": CRC or size mismatch in " + e.name);
  }
}

void ZipReader::for_each_line(std::string_view name, const std::function<void(std::string_view)>& on_line) const {
  std::string pending;
  stream(name, [&](std::string_view chunk) {
    std::size_t start = 0;
    while (true) {
      const std::size_t nl = chunk.find('\n', start);
      if (nl == std::string_view::npos) {
        pending.append(chunk.substr(start));
        break;
      }
      if (pending.empty()) {
        on_line(chunk.substr(start, nl - start));
      } else {
        pending.append(chunk.substr(start, nl - start));
        on_line(pending);
        pending.clear();
      }
      start = nl + 1;
    }
  });
  if (!pending.empty()) on_line(pending);
}

std::string ZipReader::read(std::string_view name) const {
  std::string out;
  stream(name, [&](std::string_view chunk) { out.append(chunk); });
  return out;
}

}  // namespace uas
