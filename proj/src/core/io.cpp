#include "fpe/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace fpe::io {
namespace {

std::string offset_msg(std::size_t offset, const std::string& what) {
  return "byte offset " + std::to_string(offset) + ": " + what;
}

std::uint32_t load_u32_le(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

void store_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xffu));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xffu));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xffu));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xffu));
}

template <typename Field>
std::vector<std::uint8_t> encode_field(std::string_view magic, const Field& field) {
  std::vector<std::uint8_t> out;
  out.reserve(12 + field.size() * 4);
  out.insert(out.end(), magic.begin(), magic.end());
  store_u32_le(out, static_cast<std::uint32_t>(field.width()));
  store_u32_le(out, static_cast<std::uint32_t>(field.height()));
  for (float v : field.pixels()) store_u32_le(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

template <typename Field>
Field decode_field(std::string_view magic, std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeader = 12;
  if (bytes.size() < 4) throw ParseError(offset_msg(bytes.size(), "truncated magic"));
  if (std::memcmp(bytes.data(), magic.data(), 4) != 0) {
    throw ParseError(offset_msg(0, "bad magic, expected " + std::string(magic)));
  }
  if (bytes.size() < kHeader) throw ParseError(offset_msg(bytes.size(), "truncated header"));
  const std::uint32_t w = load_u32_le(bytes, 4);
  const std::uint32_t h = load_u32_le(bytes, 8);
  if (w == 0) throw ParseError(offset_msg(4, "width is zero"));
  if (h == 0) throw ParseError(offset_msg(8, "height is zero"));
  constexpr std::uint64_t kMaxSide = static_cast<std::uint64_t>(std::numeric_limits<int>::max());
  if (w > kMaxSide) throw ParseError(offset_msg(4, "width overflows"));
  if (h > kMaxSide) throw ParseError(offset_msg(8, "height overflows"));
  const std::uint64_t count = static_cast<std::uint64_t>(w) * h;
  if (count > (std::numeric_limits<std::uint64_t>::max() - kHeader) / 4 ||
      count > std::numeric_limits<std::size_t>::max() / 4) {
    throw ParseError(offset_msg(4, "dimensions overflow"));
  }
  const std::uint64_t expected = kHeader + count * 4;
  if (bytes.size() < expected) {
    throw ParseError(offset_msg(bytes.size(), "truncated payload, expected " +
                                                  std::to_string(expected) + " bytes"));
  }
  if (bytes.size() > expected) {
    throw ParseError(offset_msg(static_cast<std::size_t>(expected), "trailing bytes"));
  }
  std::vector<float> values(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t at = kHeader + i * 4;
    const float v = std::bit_cast<float>(load_u32_le(bytes, at));
    if (!std::isfinite(v)) throw ParseError(offset_msg(at, "non-finite value"));
    values[i] = v;
  }
  return Field(static_cast<int>(w), static_cast<int>(h), std::move(values));
}

std::string line_msg(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_real(std::string_view token, std::size_t line) {
  double v = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v, std::chars_format::general);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw ParseError(line_msg(line, "invalid number '" + std::string(token) + "'"));
  }
  return v;
}

void append_real(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

// libpng reports failures through png_image::message.
void check_png(png_image& image, int ok, const std::filesystem::path& path, const char* op) {
  if (!ok || PNG_IMAGE_FAILED(image)) {
    std::string msg = std::string(op) + " " + path.string() + ": " + image.message;
    png_image_free(&image);
    throw ParseError(msg);
  }
}

}  // namespace

GrayImage read_gray_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  check_png(image, png_image_begin_read_from_file(&image, path.c_str()), path, "read");
  image.format = PNG_FORMAT_GRAY;
  if (image.width == 0 || image.height == 0 ||
      image.width > static_cast<png_uint_32>(std::numeric_limits<int>::max()) ||
      image.height > static_cast<png_uint_32>(std::numeric_limits<int>::max())) {
    png_image_free(&image);
    throw ParseError("read " + path.string() + ": unsupported dimensions");
  }
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  check_png(image, png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr), path,
            "read");
  return GrayImage(static_cast<int>(image.width), static_cast<int>(image.height),
                   std::move(buffer));
}

void write_gray_png(const std::filesystem::path& path, const GrayImage& img) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  check_png(image,
            png_image_write_to_file(&image, path.c_str(), 0, img.pixels().data(), 0, nullptr),
            path, "write");
}

SegmentationMask mask_from_gray(const GrayImage& image) {
  SegmentationMask mask(image.width(), image.height(), 0);
  for (std::size_t i = 0; i < image.size(); ++i) mask.pixels()[i] = image.pixels()[i] >= 128;
  return mask;
}

SegmentationMask read_mask_png(const std::filesystem::path& path) {
  return mask_from_gray(read_gray_png(path));
}

void write_mask_png(const std::filesystem::path& path, const SegmentationMask& mask) {
  GrayImage img(mask.width(), mask.height(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) img.pixels()[i] = mask.pixels()[i] ? 255 : 0;
  write_gray_png(path, img);
}

GrayImage to_gray(const EnhancedImage& image) {
  GrayImage img(image.width(), image.height(), 0);
  for (std::size_t i = 0; i < image.size(); ++i) {
    const float v = std::clamp(image.pixels()[i], 0.0f, 1.0f);
    img.pixels()[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  return img;
}

void write_enhanced_png(const std::filesystem::path& path, const EnhancedImage& image) {
  write_gray_png(path, to_gray(image));
}

std::vector<std::uint8_t> encode_orientation(const OrientationField& field) {
  return encode_field(kOrientationMagic, field);
}
std::vector<std::uint8_t> encode_frequency(const FrequencyMap& field) {
  return encode_field(kFrequencyMagic, field);
}
OrientationField decode_orientation(std::span<const std::uint8_t> bytes) {
  return decode_field<OrientationField>(kOrientationMagic, bytes);
}
FrequencyMap decode_frequency(std::span<const std::uint8_t> bytes) {
  return decode_field<FrequencyMap>(kFrequencyMagic, bytes);
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

OrientationField read_orientation(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  try {
    return decode_orientation(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_orientation(const std::filesystem::path& path, const OrientationField& field) {
  write_bytes(path, encode_orientation(field));
}

FrequencyMap read_frequency(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  try {
    return decode_frequency(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_frequency(const std::filesystem::path& path, const FrequencyMap& field) {
  write_bytes(path, encode_frequency(field));
}

std::string format_minutiae(const MinutiaSet& minutiae) {
  std::string out = "MIN1 " + std::to_string(minutiae.size()) + "\n";
  for (const auto& m : minutiae) {
    append_real(out, m.x);
    out += ' ';
    append_real(out, m.y);
    out += ' ';
    append_real(out, m.direction);
    out += m.kind == MinutiaKind::Ending ? " E\n" : " B\n";
  }
  return out;
}

MinutiaSet parse_minutiae(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  if (lines.empty()) throw ParseError(line_msg(1, "missing MIN1 header"));

  const auto header = split_fields(lines[0]);
  if (header.size() != 2 || header[0] != "MIN1") {
    throw ParseError(line_msg(1, "expected 'MIN1 <count>'"));
  }
  std::size_t count = 0;
  {
    const auto* end = header[1].data() + header[1].size();
    const auto [ptr, ec] = std::from_chars(header[1].data(), end, count);
    if (ec != std::errc{} || ptr != end) throw ParseError(line_msg(1, "invalid count"));
  }
  if (lines.size() - 1 < count) {
    throw ParseError(line_msg(lines.size() + 1, "truncated, expected " + std::to_string(count) +
                                                    " minutiae"));
  }

  MinutiaSet out;
  out.reserve(count);
  for (std::size_t i = 1; i <= count; ++i) {
    const auto fields = split_fields(lines[i]);
    if (fields.size() != 4) throw ParseError(line_msg(i + 1, "expected 4 fields"));
    Minutia m;
    m.x = parse_real(fields[0], i + 1);
    m.y = parse_real(fields[1], i + 1);
    m.direction = normalize_direction(parse_real(fields[2], i + 1));
    if (fields[3] == "E") {
      m.kind = MinutiaKind::Ending;
    } else if (fields[3] == "B") {
      m.kind = MinutiaKind::Bifurcation;
    } else {
      throw ParseError(line_msg(i + 1, "kind must be E or B"));
    }
    out.push_back(m);
  }
  for (std::size_t i = count + 1; i < lines.size(); ++i) {
    if (!split_fields(lines[i]).empty()) throw ParseError(line_msg(i + 1, "unexpected content"));
  }
  return out;
}

MinutiaSet read_minutiae(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  try {
    return parse_minutiae(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_minutiae(const std::filesystem::path& path, const MinutiaSet& minutiae) {
  const std::string text = format_minutiae(minutiae);
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace fpe::io
