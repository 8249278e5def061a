#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "cwmap/featuremaps.hpp"

namespace cwmap {

namespace {

constexpr char kMagic[] = "CWGRID1\n";
constexpr size_t kMagicLen = 8;
constexpr int kChannels = 5;
constexpr uint64_t kCrcPoly = 0x42F0E1EBA9EA3693ull;  // ECMA-182

const std::array<uint64_t, 256>& crc_table() {
  static const std::array<uint64_t, 256> table = [] {
    std::array<uint64_t, 256> t{};
    for (int i = 0; i < 256; ++i) {
      uint64_t crc = uint64_t(i) << 56;
      for (int b = 0; b < 8; ++b)
        crc = (crc & 0x8000000000000000ull) ? (crc << 1) ^ kCrcPoly : crc << 1;
      t[i] = crc;
    }
    return t;
  }();
  return table;
}

void append_f32_le(std::vector<uint8_t>& buf, float v) {
  uint32_t u;
  std::memcpy(&u, &v, 4);
  buf.push_back(uint8_t(u));
  buf.push_back(uint8_t(u >> 8));
  buf.push_back(uint8_t(u >> 16));
  buf.push_back(uint8_t(u >> 24));
}

float read_f32_le(const uint8_t* p) {
  uint32_t u = uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
               uint32_t(p[3]) << 24;
  float v;
  std::memcpy(&v, &u, 4);
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Err::IoError, "cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

uint64_t crc64_ecma(const uint8_t* data, size_t len) {
  const auto& table = crc_table();
  uint64_t crc = 0;
  for (size_t i = 0; i < len; ++i)
    crc = (crc << 8) ^ table[uint8_t(crc >> 56) ^ data[i]];
  return crc;
}

void write_grids(const std::string& path, const FeatureMaps& maps) {
  const GridSpec& g = maps.spec();
  const Grid* channels[kChannels] = {&maps.seg, &maps.dt, &maps.angle_x, &maps.angle_y,
                                     &maps.angle_mask};
  for (const Grid* ch : channels)
    if (ch->spec != g || ch->values.size() != size_t(g.width_px) * g.height_px)
      fail(Err::ShapeMismatch, "channel dimensions disagree");

  std::vector<uint8_t> payload;
  payload.reserve(size_t(g.width_px) * g.height_px * kChannels * 4);
  for (const Grid* ch : channels)
    for (float v : ch->values) append_f32_le(payload, v);
  uint64_t crc = crc64_ecma(payload.data(), payload.size());

  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Err::IoError, "cannot open " + path + " for writing");
  f.write(kMagic, kMagicLen);
  char header[64];
  int n = std::snprintf(header, sizeof header, "%d %d %d\n", g.width_px, g.height_px,
                        kChannels);
  f.write(header, n);
  f.write(reinterpret_cast<const char*>(payload.data()), payload.size());
  uint8_t trailer[8];
  for (int i = 0; i < 8; ++i) trailer[i] = uint8_t(crc >> (8 * i));
  f.write(reinterpret_cast<const char*>(trailer), 8);
  if (!f) fail(Err::IoError, "write failed on " + path);
}

void read_grid_header(const std::string& path, int& width_px, int& height_px,
                      int& channels) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(Err::IoError, "cannot open " + path);
  char magic[kMagicLen];
  if (!f.read(magic, kMagicLen) || std::memcmp(magic, kMagic, kMagicLen) != 0)
    fail(Err::BadMagic, path + " is not a grid container");
  std::string header;
  if (!std::getline(f, header)) fail(Err::TruncatedFile, path + ": missing header line");
  if (std::sscanf(header.c_str(), "%d %d %d", &width_px, &height_px, &channels) != 3 ||
      width_px <= 0 || height_px <= 0 || channels <= 0)
    fail(Err::ParseError, path + ": bad header '" + header + "'");
}

FeatureMaps read_grids(const std::string& path, const GridSpec& spec) {
  std::string blob = read_file(path);
  if (blob.size() < kMagicLen || std::memcmp(blob.data(), kMagic, kMagicLen) != 0)
    fail(Err::BadMagic, path + " is not a grid container");
  size_t header_end = blob.find('\n', kMagicLen);
  if (header_end == std::string::npos) fail(Err::TruncatedFile, path + ": missing header");
  int w = 0, h = 0, c = 0;
  std::string header = blob.substr(kMagicLen, header_end - kMagicLen);
  if (std::sscanf(header.c_str(), "%d %d %d", &w, &h, &c) != 3 || w <= 0 || h <= 0)
    fail(Err::ParseError, path + ": bad header '" + header + "'");
  if (c != kChannels)
    fail(Err::ParseError, path + ": expected " + std::to_string(kChannels) +
                              " channels, found " + std::to_string(c));
  if (w != spec.width_px || h != spec.height_px)
    fail(Err::GridMismatch, path + ": stored " + std::to_string(w) + "x" +
                                std::to_string(h) + ", expected " +
                                std::to_string(spec.width_px) + "x" +
                                std::to_string(spec.height_px));

  const size_t plane = size_t(w) * size_t(h);
  const size_t payload_len = plane * kChannels * 4;
  const size_t body = header_end + 1;
  if (blob.size() < body + payload_len + 8)
    fail(Err::TruncatedFile, path + ": payload cut short");
  const uint8_t* payload = reinterpret_cast<const uint8_t*>(blob.data()) + body;

  uint64_t stored = 0;
  for (int i = 0; i < 8; ++i)
    stored |= uint64_t(uint8_t(blob[body + payload_len + i])) << (8 * i);
  if (crc64_ecma(payload, payload_len) != stored)
    fail(Err::ChecksumMismatch, path + ": payload checksum does not match");

  FeatureMaps maps{Grid(spec), Grid(spec), Grid(spec), Grid(spec), Grid(spec)};
  Grid* channels[kChannels] = {&maps.seg, &maps.dt, &maps.angle_x, &maps.angle_y,
                               &maps.angle_mask};
  for (int ch = 0; ch < kChannels; ++ch) {
    const uint8_t* base = payload + size_t(ch) * plane * 4;
    for (size_t i = 0; i < plane; ++i)
      channels[ch]->values[i] = read_f32_le(base + i * 4);
  }
  return maps;
}

void export_pgm(const Grid& grid, const std::string& path, double scale) {
  if (!(scale > 0.0)) fail(Err::InvalidInterval, "scale must be positive");
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Err::IoError, "cannot open " + path + " for writing");
  f << "P5\n" << grid.spec.width_px << " " << grid.spec.height_px << "\n255\n";
  std::vector<uint8_t> row(grid.spec.width_px);
  for (int r = 0; r < grid.spec.height_px; ++r) {
    for (int c = 0; c < grid.spec.width_px; ++c) {
      double v = std::floor(255.0 * grid.at(r, c) / scale + 0.5);
      row[c] = uint8_t(std::min(std::max(v, 0.0), 255.0));
    }
    f.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  if (!f) fail(Err::IoError, "write failed on " + path);
}

}  // namespace cwmap
