#pragma once
// Rasterization of recurrence matrices onto a fixed image side, plus PGM/PNG
// export. Nearest-neighbor center sampling: pixel (r, c) reads matrix cell
// (floor((r + 0.5) n / S), floor((c + 0.5) n / S)); identity when n == S.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <zlib.h>

#include "hrx/recurrence/recurrence.hpp"
#include "hrx/util/text.hpp"

namespace hrx {

struct RecurrencePlot {
  int side = 64;
  std::vector<std::uint8_t> pixels;  // side*side, values in {0,1}
  double epsilon = 0.0;
  std::size_t source_n = 0;

  std::uint8_t at(int r, int c) const {
    return pixels[static_cast<std::size_t>(r) * side + c];
  }
};

inline RecurrencePlot rasterize(const RecurrenceMatrix& rm, int side) {
  if (side < 1) throw std::invalid_argument("rasterize: side must be >= 1");
  if (rm.n < 1) throw std::invalid_argument("rasterize: empty matrix");
  RecurrencePlot plot;
  plot.side = side;
  plot.epsilon = rm.epsilon;
  plot.source_n = rm.n;
  plot.pixels.resize(static_cast<std::size_t>(side) * side);
  const std::size_t n = rm.n;
  std::vector<std::size_t> src(static_cast<std::size_t>(side));
  for (int r = 0; r < side; ++r) {
    auto s = static_cast<std::size_t>((2 * r + 1) * n / (2 * side));
    src[static_cast<std::size_t>(r)] = s < n ? s : n - 1;
  }
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c)
      plot.pixels[static_cast<std::size_t>(r) * side + c] =
          rm.at(src[static_cast<std::size_t>(r)], src[static_cast<std::size_t>(c)]);
  return plot;
}

inline void write_pgm(const RecurrencePlot& plot, const std::string& path) {
  std::string out = "P5\n" + std::to_string(plot.side) + " " +
                    std::to_string(plot.side) + "\n255\n";
  out.reserve(out.size() + plot.pixels.size());
  for (std::uint8_t v : plot.pixels) out.push_back(static_cast<char>(v ? 255 : 0));
  write_file(path, out);
}

namespace detail {

inline void png_append_u32(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>((v >> 24) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>(v & 0xff));
}

inline void png_chunk(std::string& out, const char type[4], const std::string& data) {
  png_append_u32(out, static_cast<std::uint32_t>(data.size()));
  std::string body(type, 4);
  body += data;
  out += body;
  const auto crc = crc32(0, reinterpret_cast<const Bytef*>(body.data()),
                         static_cast<uInt>(body.size()));
  png_append_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace detail

// Minimal 8-bit grayscale PNG writer (filter type 0 rows, zlib deflate).
inline void write_png(const RecurrencePlot& plot, const std::string& path) {
  const int s = plot.side;
  std::string raw;
  raw.reserve(static_cast<std::size_t>(s) * (s + 1));
  for (int r = 0; r < s; ++r) {
    raw.push_back('\0');  // no per-row filtering
    for (int c = 0; c < s; ++c)
      raw.push_back(static_cast<char>(plot.at(r, c) ? 255 : 0));
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::string compressed(bound, '\0');
  if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
                reinterpret_cast<const Bytef*>(raw.data()),
                static_cast<uLong>(raw.size()), 9) != Z_OK)
    throw std::runtime_error("png deflate failed");
  compressed.resize(bound);

  std::string out("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  detail::png_append_u32(ihdr, static_cast<std::uint32_t>(s));
  detail::png_append_u32(ihdr, static_cast<std::uint32_t>(s));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(0);   // grayscale
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // no interlace
  detail::png_chunk(out, "IHDR", ihdr);
  detail::png_chunk(out, "IDAT", compressed);
  detail::png_chunk(out, "IEND", "");
  write_file(path, out);
}

}  // namespace hrx
