// SPDX-License-Identifier: Apache-2.0
#include "ledit/image_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace ledit {

namespace {

void write_bytes(std::ofstream& out, const void* data, std::size_t n) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n));
}

std::vector<unsigned char> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return std::vector<unsigned char>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

float to_le_float(float v) { return v; }  // little-endian host assumed (checked at startup below)

struct EndiannessCheck {
  EndiannessCheck() {
    const std::uint32_t probe = 1;
    if (*reinterpret_cast<const unsigned char*>(&probe) != 1)
      throw std::runtime_error("big-endian hosts are not supported by the PFM/checkpoint writers");
  }
};
const EndiannessCheck endianness_check;

void push_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

std::uint32_t read_u32(const unsigned char* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

void append_chunk(std::vector<unsigned char>& png, const char type[4],
                  const std::vector<unsigned char>& payload) {
  push_u32(png, static_cast<std::uint32_t>(payload.size()));
  const std::size_t crc_start = png.size();
  png.insert(png.end(), type, type + 4);
  png.insert(png.end(), payload.begin(), payload.end());
  const uLong crc = crc32(0L, png.data() + crc_start, static_cast<uInt>(png.size() - crc_start));
  push_u32(png, static_cast<std::uint32_t>(crc));
}

std::vector<unsigned char> deflate_bytes(const std::vector<unsigned char>& raw) {
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> out(bound);
  if (compress2(out.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw std::runtime_error("png: deflate failed");
  out.resize(bound);
  return out;
}

std::vector<unsigned char> inflate_bytes(const std::vector<unsigned char>& compressed,
                                         std::size_t expected) {
  std::vector<unsigned char> out(expected);
  uLongf dest_len = static_cast<uLongf>(expected);
  if (uncompress(out.data(), &dest_len, compressed.data(), static_cast<uLong>(compressed.size())) != Z_OK ||
      dest_len != expected)
    throw std::runtime_error("png: inflate failed");
  return out;
}

void write_png_impl(const std::string& path, int width, int height, int channels, int bit_depth,
                    const std::vector<unsigned char>& raw_scanlines) {
  std::vector<unsigned char> png = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<unsigned char> ihdr;
  push_u32(ihdr, static_cast<std::uint32_t>(width));
  push_u32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.push_back(static_cast<unsigned char>(bit_depth));
  ihdr.push_back(channels == 3 ? 2 : 0);  // color type: truecolor or grayscale
  ihdr.push_back(0);                      // deflate
  ihdr.push_back(0);                      // filter method
  ihdr.push_back(0);                      // no interlace
  append_chunk(png, "IHDR", ihdr);
  append_chunk(png, "IDAT", deflate_bytes(raw_scanlines));
  append_chunk(png, "IEND", {});

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  write_bytes(out, png.data(), png.size());
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

void write_pfm(const std::string& path, const Image& image) {
  if (image.channels != 1 && image.channels != 3)
    throw std::invalid_argument("write_pfm: only 1- or 3-channel images");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << (image.channels == 3 ? "PF" : "Pf") << "\n"
      << image.width << " " << image.height << "\n"
      << "-1.0\n";
  for (int y = image.height - 1; y >= 0; --y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < image.channels; ++c) {
        const float v = to_le_float(static_cast<float>(image.at(y, x, c)));
        write_bytes(out, &v, sizeof(float));
      }
}

Image read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string magic;
  int width = 0, height = 0;
  double scale = 0.0;
  in >> magic >> width >> height >> scale;
  if ((magic != "PF" && magic != "Pf") || width <= 0 || height <= 0)
    throw std::runtime_error("read_pfm: invalid header in " + path);
  if (scale >= 0.0) throw std::runtime_error("read_pfm: big-endian PFM not supported");
  in.get();  // single whitespace after the scale line

  const int channels = magic == "PF" ? 3 : 1;
  Image image(height, width, channels);
  std::vector<float> row(static_cast<std::size_t>(width) * channels);
  for (int y = height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) throw std::runtime_error("read_pfm: truncated data in " + path);
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) image.at(y, x, c) = row[static_cast<std::size_t>(x) * channels + c];
  }
  return image;
}

void write_png(const std::string& path, const Image& image) {
  if (image.channels != 1 && image.channels != 3)
    throw std::invalid_argument("write_png: only 1- or 3-channel images");
  const int ch = image.channels;
  std::vector<unsigned char> raw;
  raw.reserve(static_cast<std::size_t>(image.height) * (1 + static_cast<std::size_t>(image.width) * ch));
  for (int y = 0; y < image.height; ++y) {
    raw.push_back(0);  // filter: none
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < ch; ++c) {
        const double v = std::clamp(image.at(y, x, c), 0.0, 1.0);
        raw.push_back(static_cast<unsigned char>(std::lround(v * 255.0)));
      }
  }
  write_png_impl(path, image.width, image.height, ch, 8, raw);
}

void write_mask_png(const std::string& path, const EditMask& mask) {
  const Image& g = mask.grid;
  if (g.channels != 1) throw std::invalid_argument("write_mask_png: mask must be single-channel");
  const int rowbytes = (g.width + 7) / 8;
  std::vector<unsigned char> raw;
  raw.reserve(static_cast<std::size_t>(g.height) * (1 + rowbytes));
  for (int y = 0; y < g.height; ++y) {
    raw.push_back(0);
    unsigned char packed = 0;
    int bits = 0;
    for (int x = 0; x < g.width; ++x) {
      packed = static_cast<unsigned char>((packed << 1) | (g.at(y, x, 0) != 0.0 ? 1 : 0));
      if (++bits == 8) {
        raw.push_back(packed);
        packed = 0;
        bits = 0;
      }
    }
    if (bits > 0) raw.push_back(static_cast<unsigned char>(packed << (8 - bits)));
  }
  write_png_impl(path, g.width, g.height, 1, 1, raw);
}

Image read_png(const std::string& path) {
  const std::vector<unsigned char> bytes = read_file_bytes(path);
  static const unsigned char signature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() < 8 || std::memcmp(bytes.data(), signature, 8) != 0)
    throw std::runtime_error("read_png: not a PNG file: " + path);

  int width = 0, height = 0, bit_depth = 0, color_type = 0;
  std::vector<unsigned char> idat;
  std::size_t pos = 8;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t len = read_u32(&bytes[pos]);
    const std::string type(reinterpret_cast<const char*>(&bytes[pos + 4]), 4);
    if (pos + 12 + len > bytes.size()) throw std::runtime_error("read_png: truncated chunk");
    const unsigned char* payload = &bytes[pos + 8];
    if (type == "IHDR") {
      width = static_cast<int>(read_u32(payload));
      height = static_cast<int>(read_u32(payload + 4));
      bit_depth = payload[8];
      color_type = payload[9];
      if (payload[12] != 0) throw std::runtime_error("read_png: interlaced PNG not supported");
    } else if (type == "IDAT") {
      idat.insert(idat.end(), payload, payload + len);
    } else if (type == "IEND") {
      break;
    }
    pos += 12 + len;
  }
  if (width <= 0 || height <= 0) throw std::runtime_error("read_png: missing IHDR");
  int channels = 0;
  if (color_type == 0) channels = 1;
  else if (color_type == 2) channels = 3;
  else if (color_type == 6) channels = 4;
  else throw std::runtime_error("read_png: unsupported color type");
  if (bit_depth != 8 && !(bit_depth == 1 && color_type == 0))
    throw std::runtime_error("read_png: unsupported bit depth");

  const int rowbytes = bit_depth == 1 ? (width + 7) / 8 : width * channels;
  const std::size_t expected = static_cast<std::size_t>(height) * (1 + rowbytes);
  std::vector<unsigned char> raw = inflate_bytes(idat, expected);

  // Undo scanline filters in place.
  const int bpp = bit_depth == 1 ? 1 : channels;
  std::vector<unsigned char> prev_row(static_cast<std::size_t>(rowbytes), 0);
  std::vector<unsigned char> row(static_cast<std::size_t>(rowbytes));
  Image image(height, width, channels == 4 ? 3 : channels);
  for (int y = 0; y < height; ++y) {
    const unsigned char filter = raw[static_cast<std::size_t>(y) * (1 + rowbytes)];
    const unsigned char* src = &raw[static_cast<std::size_t>(y) * (1 + rowbytes) + 1];
    for (int i = 0; i < rowbytes; ++i) {
      const int a = i >= bpp ? row[i - bpp] : 0;
      const int b = prev_row[i];
      const int c = i >= bpp ? prev_row[i - bpp] : 0;
      int v = src[i];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += paeth(a, b, c); break;
        default: throw std::runtime_error("read_png: unknown filter");
      }
      row[i] = static_cast<unsigned char>(v & 0xff);
    }
    if (bit_depth == 1) {
      for (int x = 0; x < width; ++x) {
        const int bit = (row[x / 8] >> (7 - x % 8)) & 1;
        image.at(y, x, 0) = static_cast<double>(bit);
      }
    } else {
      for (int x = 0; x < width; ++x)
        for (int c2 = 0; c2 < image.channels; ++c2)
          image.at(y, x, c2) = row[static_cast<std::size_t>(x) * channels + c2] / 255.0;
    }
    std::swap(row, prev_row);
  }
  return image;
}

EditMask read_mask_png(const std::string& path, MaskSpace space) {
  Image img = read_png(path);
  if (img.channels != 1) throw std::runtime_error("read_mask_png: mask PNG must be grayscale");
  EditMask mask;
  mask.space = space;
  mask.grid = img;
  mask.grid.data = (img.data >= 0.5).cast<double>();
  return mask;
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << contents;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ledit
