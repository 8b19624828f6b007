// Copyright 2026 The fairkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fair/bag/archive.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstring>
#include <ctime>

#include "fair/common/error.hpp"

namespace fair::bag::archive {
namespace {

constexpr std::size_t kBlock = 512;

void put_octal(char* field, std::size_t width, std::uint64_t value) {
  // width includes the trailing NUL
  std::string digits(width - 1, '0');
  for (std::size_t i = width - 1; i-- > 0;) {
    digits[i] = static_cast<char>('0' + (value & 7));
    value >>= 3;
  }
  if (value != 0) {
    fail(Errc::IoFailure, "value too large for tar header field");
  }
  std::memcpy(field, digits.data(), width - 1);
  field[width - 1] = '\0';
}

std::uint64_t get_octal(const char* field, std::size_t width) {
  std::uint64_t v = 0;
  std::size_t i = 0;
  while (i < width && (field[i] == ' ' || field[i] == '\0')) ++i;
  for (; i < width && field[i] >= '0' && field[i] <= '7'; ++i) {
    v = (v << 3) | static_cast<std::uint64_t>(field[i] - '0');
  }
  return v;
}

std::string tar_header(std::string_view name, std::uint64_t size, std::int64_t mtime, char type) {
  std::string h(kBlock, '\0');
  std::memcpy(h.data(), name.data(), std::min<std::size_t>(name.size(), 100));
  put_octal(&h[100], 8, 0644);
  put_octal(&h[108], 8, 0);
  put_octal(&h[116], 8, 0);
  put_octal(&h[124], 12, size);
  put_octal(&h[136], 12, static_cast<std::uint64_t>(mtime));
  std::memset(&h[148], ' ', 8);
  h[156] = type;
  std::memcpy(&h[257], "ustar", 6);
  std::memcpy(&h[263], "00", 2);
  unsigned sum = 0;
  for (unsigned char c : h) sum += c;
  char chk[8];
  std::snprintf(chk, sizeof chk, "%06o", sum);
  std::memcpy(&h[148], chk, 7);
  h[155] = ' ';
  return h;
}

void pad_block(std::string& out) {
  const auto rem = out.size() % kBlock;
  if (rem != 0) out.append(kBlock - rem, '\0');
}

bool needs_pax(std::string_view path) {
  if (path.size() >= 100) return true;
  return std::any_of(path.begin(), path.end(),
                     [](char c) { return static_cast<unsigned char>(c) >= 0x80 || c == '\n' || c == '\r'; });
}

std::string pax_record(std::string_view key, std::string_view value) {
  // "<len> <key>=<value>\n" where len counts the whole record, itself included
  const std::size_t body = 1 + key.size() + 1 + value.size() + 1;
  std::size_t len = body + 1;
  while (std::to_string(len).size() + body != len) {
    len = std::to_string(len).size() + body;
  }
  return std::to_string(len) + " " + std::string(key) + "=" + std::string(value) + "\n";
}

std::uint16_t le16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}
std::uint32_t le32(std::string_view b, std::size_t at) {
  return static_cast<std::uint32_t>(le16(b, at)) | (static_cast<std::uint32_t>(le16(b, at + 2)) << 16);
}
void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}
void put32(std::string& out, std::uint32_t v) {
  put16(out, static_cast<std::uint16_t>(v & 0xffff));
  put16(out, static_cast<std::uint16_t>(v >> 16));
}

std::string deflate_raw(std::string_view in) {
  z_stream zs{};
  if (deflateInit2(&zs, 6, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    fail(Errc::Internal, "deflateInit2 failed");
  }
  std::string out(deflateBound(&zs, static_cast<uLong>(in.size())), '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) {
    fail(Errc::Internal, "deflate did not finish");
  }
  return out;
}

std::string inflate_raw(std::string_view in, std::size_t expected) {
  z_stream zs{};
  if (inflateInit2(&zs, -15) != Z_OK) {
    fail(Errc::Internal, "inflateInit2 failed");
  }
  std::string out(expected, '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  inflateEnd(&zs);
  if ((rc != Z_STREAM_END && !(rc == Z_BUF_ERROR && expected == 0)) || produced != expected) {
    fail(Errc::NotABag, "corrupt deflate stream in zip member");
  }
  return out;
}

void dos_datetime(std::int64_t mtime, std::uint16_t& dos_time, std::uint16_t& dos_date) {
  std::tm tm{};
  const std::time_t tt = static_cast<std::time_t>(mtime);
  gmtime_r(&tt, &tm);
  if (tm.tm_year < 80) {
    dos_time = 0;
    dos_date = (1 << 5) | 1;  // 1980-01-01
    return;
  }
  dos_time = static_cast<std::uint16_t>((tm.tm_hour << 11) | (tm.tm_min << 5) | (tm.tm_sec / 2));
  dos_date = static_cast<std::uint16_t>(((tm.tm_year - 80) << 9) | ((tm.tm_mon + 1) << 5) | tm.tm_mday);
}

}  // namespace

Kind sniff(std::string_view bytes) noexcept {
  if (bytes.size() >= 4 && bytes.substr(0, 4) == std::string_view("PK\x03\x04", 4)) {
    return Kind::zip;
  }
  if (bytes.size() >= 4 && bytes.substr(0, 4) == std::string_view("PK\x05\x06", 4)) {
    return Kind::zip;  // empty archive
  }
  if (bytes.size() >= kBlock && bytes.substr(257, 5) == "ustar") {
    return Kind::tar;
  }
  return Kind::unknown;
}

std::string write_tar(const std::vector<Member>& members, std::int64_t mtime) {
  std::string out;
  for (const auto& m : members) {
    if (needs_pax(m.path)) {
      const std::string records = pax_record("path", m.path);
      const auto ascii = [](std::string s) {
        for (auto& c : s) {
          if (static_cast<unsigned char>(c) >= 0x80 || c == '\n' || c == '\r') c = '_';
        }
        return s;
      };
      out += tar_header(ascii("PaxHeader/" + m.path.substr(0, 60)), records.size(), mtime, 'x');
      out += records;
      pad_block(out);
      out += tar_header(ascii(m.path.substr(0, 99)), m.bytes.size(), mtime, '0');
    } else {
      out += tar_header(m.path, m.bytes.size(), mtime, '0');
    }
    out += m.bytes;
    pad_block(out);
  }
  out.append(2 * kBlock, '\0');
  return out;
}

std::vector<Member> read_tar(std::string_view bytes) {
  std::vector<Member> out;
  std::string pending_path;
  std::size_t pos = 0;
  while (pos + kBlock <= bytes.size()) {
    const char* h = bytes.data() + pos;
    if (std::all_of(h, h + kBlock, [](char c) { return c == '\0'; })) {
      break;
    }
    unsigned sum = 0;
    for (std::size_t i = 0; i < kBlock; ++i) {
      sum += (i >= 148 && i < 156) ? ' ' : static_cast<unsigned char>(h[i]);
    }
    if (sum != get_octal(h + 148, 8)) {
      fail(Errc::NotABag, "tar header checksum mismatch at offset " + std::to_string(pos));
    }
    const auto size = get_octal(h + 124, 12);
    const char type = h[156];
    std::string name(h, strnlen(h, 100));
    if (std::memcmp(h + 257, "ustar", 5) == 0 && h[345] != '\0') {
      name = std::string(h + 345, strnlen(h + 345, 155)) + "/" + name;
    }
    pos += kBlock;
    if (pos + size > bytes.size()) {
      fail(Errc::NotABag, "truncated tar member " + name);
    }
    const std::string_view body = bytes.substr(pos, size);
    pos += (size + kBlock - 1) / kBlock * kBlock;

    if (type == 'x') {
      std::size_t p = 0;
      while (p < body.size()) {
        const auto sp = body.find(' ', p);
        if (sp == std::string_view::npos) break;
        const auto len = std::stoul(std::string(body.substr(p, sp - p)));
        const auto rec = body.substr(sp + 1, len - (sp - p) - 2);
        const auto eq = rec.find('=');
        if (eq != std::string_view::npos && rec.substr(0, eq) == "path") {
          pending_path = std::string(rec.substr(eq + 1));
        }
        p += len;
      }
    } else if (type == 'L') {
      pending_path = std::string(body.data(), strnlen(body.data(), body.size()));
    } else if (type == '0' || type == '\0') {
      if (!pending_path.empty()) {
        name = std::move(pending_path);
        pending_path.clear();
      }
      out.push_back(Member{std::move(name), std::string(body)});
    } else {
      pending_path.clear();  // directories, links, global headers
    }
  }
  return out;
}

std::string write_zip(const std::vector<Member>& members, std::int64_t mtime) {
  std::uint16_t dtime = 0;
  std::uint16_t ddate = 0;
  dos_datetime(mtime, dtime, ddate);

  std::string out;
  std::string central;
  for (const auto& m : members) {
    if (m.bytes.size() > 0xfffffffeULL || out.size() > 0xfffffffeULL) {
      fail(Errc::IoFailure, "zip64 archives are not supported");
    }
    const auto crc = static_cast<std::uint32_t>(
        crc32(0, reinterpret_cast<const Bytef*>(m.bytes.data()), static_cast<uInt>(m.bytes.size())));
    const std::string packed = deflate_raw(m.bytes);
    const auto offset = static_cast<std::uint32_t>(out.size());

    put32(out, 0x04034b50);
    put16(out, 20);
    put16(out, 0x0800);  // UTF-8 names
    put16(out, 8);
    put16(out, dtime);
    put16(out, ddate);
    put32(out, crc);
    put32(out, static_cast<std::uint32_t>(packed.size()));
    put32(out, static_cast<std::uint32_t>(m.bytes.size()));
    put16(out, static_cast<std::uint16_t>(m.path.size()));
    put16(out, 0);
    out += m.path;
    out += packed;

    put32(central, 0x02014b50);
    put16(central, (3 << 8) | 20);  // made by unix
    put16(central, 20);
    put16(central, 0x0800);
    put16(central, 8);
    put16(central, dtime);
    put16(central, ddate);
    put32(central, crc);
    put32(central, static_cast<std::uint32_t>(packed.size()));
    put32(central, static_cast<std::uint32_t>(m.bytes.size()));
    put16(central, static_cast<std::uint16_t>(m.path.size()));
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put32(central, 0100644u << 16);
    put32(central, offset);
    central += m.path;
  }
  const auto cd_offset = static_cast<std::uint32_t>(out.size());
  out += central;
  put32(out, 0x06054b50);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint16_t>(members.size()));
  put16(out, static_cast<std::uint16_t>(members.size()));
  put32(out, static_cast<std::uint32_t>(central.size()));
  put32(out, cd_offset);
  put16(out, 0);
  return out;
}

std::vector<Member> read_zip(std::string_view bytes) {
  if (bytes.size() < 22) {
    fail(Errc::NotABag, "zip archive too short");
  }
  std::size_t eocd = std::string_view::npos;
  const std::size_t lowest = bytes.size() > 22 + 0xffff ? bytes.size() - 22 - 0xffff : 0;
  for (std::size_t i = bytes.size() - 22 + 1; i-- > lowest;) {
    if (le32(bytes, i) == 0x06054b50) {
      eocd = i;
      break;
    }
  }
  if (eocd == std::string_view::npos) {
    fail(Errc::NotABag, "zip end of central directory not found");
  }
  const auto count = le16(bytes, eocd + 10);
  std::size_t p = le32(bytes, eocd + 16);
  std::vector<Member> out;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (p + 46 > bytes.size() || le32(bytes, p) != 0x02014b50) {
      fail(Errc::NotABag, "corrupt zip central directory");
    }
    const auto method = le16(bytes, p + 10);
    const auto crc = le32(bytes, p + 16);
    const auto csize = le32(bytes, p + 20);
    const auto usize = le32(bytes, p + 24);
    const auto nlen = le16(bytes, p + 28);
    const auto xlen = le16(bytes, p + 30);
    const auto clen = le16(bytes, p + 32);
    const auto local = le32(bytes, p + 42);
    std::string name(bytes.substr(p + 46, nlen));
    p += 46 + nlen + xlen + clen;

    if (local + 30 > bytes.size() || le32(bytes, local) != 0x04034b50) {
      fail(Errc::NotABag, "corrupt zip local header for " + name);
    }
    const auto data_at = local + 30 + le16(bytes, local + 26) + le16(bytes, local + 28);
    if (data_at + csize > bytes.size()) {
      fail(Errc::NotABag, "truncated zip member " + name);
    }
    if (!name.empty() && name.back() == '/') {
      continue;
    }
    const auto raw = bytes.substr(data_at, csize);
    std::string data;
    if (method == 0) {
      data = std::string(raw);
    } else if (method == 8) {
      data = inflate_raw(raw, usize);
    } else {
      fail(Errc::NotABag, "unsupported zip compression method " + std::to_string(method));
    }
    const auto got = static_cast<std::uint32_t>(
        crc32(0, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
    if (got != crc) {
      fail(Errc::NotABag, "zip member CRC mismatch: " + name);
    }
    out.push_back(Member{std::move(name), std::move(data)});
  }
  return out;
}

}  // namespace fair::bag::archive
