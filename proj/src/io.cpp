#include "sdm/io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>

namespace sdm {

namespace {

// Netpbm header token reader: skips whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

struct PgmHeader {
  int width = 0;
  int height = 0;
  int maxval = 0;
};

PgmHeader read_pgm_header(std::istream& in, const std::string& path) {
  if (next_token(in) != "P5") throw IoError("not a P5 PGM file: " + path);
  PgmHeader h;
  try {
    h.width = std::stoi(next_token(in));
    h.height = std::stoi(next_token(in));
    h.maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw IoError("malformed PGM header in " + path);
  }
  if (h.width <= 0 || h.height <= 0 || h.maxval <= 0 || h.maxval > 65535)
    throw IoError("implausible PGM header in " + path);
  return h;
}

}  // namespace

Image8 read_pgm8(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image: " + path);
  const PgmHeader h = read_pgm_header(in, path);
  if (h.maxval > 255)
    throw IoError("expected an 8-bit PGM, got maxval " +
                  std::to_string(h.maxval) + " in " + path);
  Image8 img(h.width, h.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw IoError("truncated PGM data in " + path);
  return img;
}

void write_pgm8(const std::string& path, const Image8& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image: " + path);
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw IoError("short write to " + path);
}

Image16 read_pgm16(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image: " + path);
  const PgmHeader h = read_pgm_header(in, path);
  if (h.maxval <= 255)
    throw IoError("expected a 16-bit PGM in " + path);
  Image16 img;
  img.width = h.width;
  img.height = h.height;
  img.pixels.resize(static_cast<std::size_t>(h.width) * h.height);
  std::vector<std::uint8_t> raw(img.pixels.size() * 2);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw IoError("truncated PGM data in " + path);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    img.pixels[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  return img;
}

void write_pgm16(const std::string& path, const Image16& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image: " + path);
  out << "P5\n" << image.width << " " << image.height << "\n65535\n";
  std::vector<std::uint8_t> raw(image.pixels.size() * 2);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    raw[2 * i] = static_cast<std::uint8_t>(image.pixels[i] >> 8);
    raw[2 * i + 1] = static_cast<std::uint8_t>(image.pixels[i]);
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("short write to " + path);
}

Image8 read_png_gray(const std::string& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str()))
    throw IoError("cannot read PNG " + path + ": " + png.message);
  png.format = PNG_FORMAT_GRAY;
  Image8 img(static_cast<int>(png.width), static_cast<int>(png.height));
  if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw IoError("cannot decode PNG " + path + ": " + message);
  }
  return img;
}

Image8 load_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open image: " + path);
  char magic[2] = {0, 0};
  probe.read(magic, 2);
  probe.close();
  if (magic[0] == 'P' && magic[1] == '5') return read_pgm8(path);
  return read_png_gray(path);
}

void write_pfm(const std::string& path, const std::vector<float>& data,
               int width, int height) {
  if (static_cast<std::size_t>(width) * height != data.size())
    throw IoError("PFM dimensions do not match the buffer");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write PFM: " + path);
  out << "Pf\n" << width << " " << height << "\n-1.0\n";
  // Rows run bottom-up; the negative scale above marks little-endian data.
  for (int y = height - 1; y >= 0; --y)
    out.write(reinterpret_cast<const char*>(
                  data.data() + static_cast<std::size_t>(y) * width),
              static_cast<std::streamsize>(width * sizeof(float)));
  if (!out) throw IoError("short write to " + path);
}

std::vector<float> read_pfm(const std::string& path, int& width, int& height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open PFM: " + path);
  const std::string magic = next_token(in);
  if (magic != "Pf")
    throw IoError("not a single-channel PFM: " + path);
  double scale = 0.0;
  try {
    width = std::stoi(next_token(in));
    height = std::stoi(next_token(in));
    scale = std::stod(next_token(in));
  } catch (const std::exception&) {
    throw IoError("malformed PFM header in " + path);
  }
  if (width <= 0 || height <= 0 || scale == 0.0)
    throw IoError("implausible PFM header in " + path);
  if (scale > 0.0)
    throw IoError("big-endian PFM is not supported: " + path);
  std::vector<float> data(static_cast<std::size_t>(width) * height);
  for (int y = height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(data.data() +
                                    static_cast<std::size_t>(y) * width),
            static_cast<std::streamsize>(width * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(width * sizeof(float)))
      throw IoError("truncated PFM data in " + path);
  }
  return data;
}

}  // namespace sdm
