#include "f3a/image.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace f3a {
namespace {

std::vector<uint8_t> gray_levels(int rows, int cols, std::span<const double> values) {
  if (rows < 1 || cols < 1 || static_cast<size_t>(rows) * cols != values.size()) {
    throw std::invalid_argument("image shape does not match the value count");
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  std::vector<uint8_t> out(values.size(), 0);
  if (!(range > 1e-12)) return out;
  for (size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<uint8_t>(std::lround(255.0 * (values[i] - *lo) / range));
  }
  return out;
}

std::vector<uint8_t> header(const char* magic, int rows, int cols) {
  const std::string h = std::string(magic) + "\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  return {h.begin(), h.end()};
}

}  // namespace

std::vector<uint8_t> encode_pgm(int rows, int cols, std::span<const double> values) {
  const auto gray = gray_levels(rows, cols, values);
  auto out = header("P5", rows, cols);
  out.insert(out.end(), gray.begin(), gray.end());
  return out;
}

std::vector<uint8_t> encode_overlay_ppm(int rows, int cols, std::span<const double> values,
                                        const IndexSet& selected) {
  const auto gray = gray_levels(rows, cols, values);
  std::vector<char> mark(gray.size(), 0);
  for (Index i : selected) {
    if (i < 0 || static_cast<size_t>(i) >= gray.size()) throw std::invalid_argument("selected index out of range");
    mark[i] = 1;
  }
  auto out = header("P6", rows, cols);
  for (size_t i = 0; i < gray.size(); ++i) {
    out.push_back(mark[i] ? 255 : gray[i]);
    out.push_back(gray[i]);
    out.push_back(gray[i]);
  }
  return out;
}

void write_bytes(const std::filesystem::path& path, std::span<const uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace f3a
