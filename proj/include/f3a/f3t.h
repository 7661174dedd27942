#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace f3a {

// Raised for malformed input files (bad magic, truncation, schema errors).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tensor {
  std::vector<uint32_t> dims;
  std::vector<float> data;  // row-major

  size_t element_count() const;
};

// F3T container, little-endian throughout:
//   "F3TK" | u32 version (=1) | u32 entry count
//   per entry: u16 key length | key bytes (UTF-8) | u8 rank |
//              rank x u32 dims | float32 payload
class F3TContainer {
 public:
  // Throws std::invalid_argument on duplicate keys or a dims/data mismatch.
  void add(std::string key, Tensor tensor);

  const Tensor* find(std::string_view key) const;
  // Throws FormatError naming the key when absent.
  const Tensor& at(std::string_view key) const;

  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }

  std::vector<uint8_t> serialize() const;
  // Throws FormatError on any structural problem, including trailing bytes.
  static F3TContainer parse(std::span<const uint8_t> bytes);

  void write(const std::filesystem::path& path) const;
  static F3TContainer read(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

}  // namespace f3a
