#include "tdm/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace tdm {

namespace {

// Skips whitespace and '#' comment lines between header tokens.
std::string next_token(std::istream& in) {
  std::string tok;
  for (;;) {
    int c = in.get();
    if (c == EOF) throw std::runtime_error("unexpected end of header");
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      continue;
    }
    if (std::isspace(c)) continue;
    tok.push_back(static_cast<char>(c));
    break;
  }
  for (;;) {
    int c = in.get();
    if (c == EOF || std::isspace(c)) break;
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

void write_pgm(const std::string& path, const Image& img, int maxval) {
  if (maxval != 255 && maxval != 65535)
    throw std::invalid_argument("write_pgm: maxval must be 255 or 65535");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
  const int w = img.n1(), h = img.n2();
  out << "P5\n" << w << " " << h << "\n" << maxval << "\n";
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      const double v = std::clamp(img(i, j), 0.0, 1.0);
      const long q = std::lround(v * maxval);
      if (maxval == 255) {
        const unsigned char b = static_cast<unsigned char>(q);
        out.write(reinterpret_cast<const char*>(&b), 1);
      } else {
        const unsigned char hi = static_cast<unsigned char>(q >> 8);
        const unsigned char lo = static_cast<unsigned char>(q & 0xff);
        out.write(reinterpret_cast<const char*>(&hi), 1);
        out.write(reinterpret_cast<const char*>(&lo), 1);
      }
    }
  if (!out) throw std::runtime_error("write_pgm: write failed for " + path);
}

Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pgm: cannot open " + path);
  if (next_token(in) != "P5") throw std::runtime_error("read_pgm: not a P5 file");
  const int w = std::stoi(next_token(in));
  const int h = std::stoi(next_token(in));
  const int maxval = std::stoi(next_token(in));
  if (w < 2 || h < 2 || maxval <= 0 || maxval > 65535)
    throw std::runtime_error("read_pgm: bad header in " + path);
  Image img(w, h);
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> row(static_cast<size_t>(w) * bytes);
  for (int j = 0; j < h; ++j) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!in) throw std::runtime_error("read_pgm: truncated raster in " + path);
    for (int i = 0; i < w; ++i) {
      const unsigned q = bytes == 1
                             ? row[i]
                             : (static_cast<unsigned>(row[2 * i]) << 8) | row[2 * i + 1];
      img(i, j) = static_cast<double>(q) / maxval;
    }
  }
  return img;
}

void write_pfm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pfm: cannot open " + path);
  const int w = img.n1(), h = img.n2();
  out << "Pf\n" << w << " " << h << "\n-1.0\n";
  std::vector<float> row(static_cast<size_t>(w));
  for (int j = h - 1; j >= 0; --j) {
    for (int i = 0; i < w; ++i) row[static_cast<size_t>(i)] = static_cast<float>(img(i, j));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("write_pfm: write failed for " + path);
}

Image read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pfm: cannot open " + path);
  if (next_token(in) != "Pf") throw std::runtime_error("read_pfm: not a grayscale PFM");
  const int w = std::stoi(next_token(in));
  const int h = std::stoi(next_token(in));
  const double scale = std::stod(next_token(in));
  if (scale >= 0) throw std::runtime_error("read_pfm: big-endian PFM not supported");
  Image img(w, h);
  std::vector<float> row(static_cast<size_t>(w));
  for (int j = h - 1; j >= 0; --j) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) throw std::runtime_error("read_pfm: truncated raster in " + path);
    for (int i = 0; i < w; ++i) img(i, j) = row[static_cast<size_t>(i)];
  }
  return img;
}

}  // namespace tdm
