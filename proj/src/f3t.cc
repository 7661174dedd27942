#include "f3a/f3t.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace f3a {
namespace {

constexpr char kMagic[4] = {'F', '3', 'T', 'K'};
constexpr uint32_t kVersion = 1;

class Writer {
 public:
  void bytes(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename T>
  void le(T v) {
    for (size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  std::vector<uint8_t> take() { return std::move(out_); }

 private:
  std::vector<uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> in) : in_(in) {}

  std::span<const uint8_t> bytes(size_t n, const char* what) {
    if (in_.size() - pos_ < n) throw FormatError(std::string("truncated F3T file while reading ") + what);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename T>
  T le(const char* what) {
    auto b = bytes(sizeof(T), what);
    T v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(b[i]) << (8 * i));
    return v;
  }
  size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const uint8_t> in_;
  size_t pos_ = 0;
};

}  // namespace

size_t Tensor::element_count() const {
  size_t n = 1;
  for (uint32_t d : dims) n *= d;
  return n;
}

void F3TContainer::add(std::string key, Tensor tensor) {
  if (key.size() > 0xFFFF) throw std::invalid_argument("F3T key too long");
  if (tensor.dims.size() > 0xFF) throw std::invalid_argument("F3T rank too large");
  if (tensor.element_count() != tensor.data.size()) {
    throw std::invalid_argument("F3T tensor '" + key + "' dims do not match payload");
  }
  if (find(key)) throw std::invalid_argument("duplicate F3T key '" + key + "'");
  entries_.emplace_back(std::move(key), std::move(tensor));
}

const Tensor* F3TContainer::find(std::string_view key) const {
  for (const auto& [k, t] : entries_) {
    if (k == key) return &t;
  }
  return nullptr;
}

const Tensor& F3TContainer::at(std::string_view key) const {
  if (const Tensor* t = find(key)) return *t;
  throw FormatError("F3T container has no tensor '" + std::string(key) + "'");
}

std::vector<uint8_t> F3TContainer::serialize() const {
  Writer w;
  w.bytes(kMagic, 4);
  w.le<uint32_t>(kVersion);
  w.le<uint32_t>(static_cast<uint32_t>(entries_.size()));
  for (const auto& [key, t] : entries_) {
    w.le<uint16_t>(static_cast<uint16_t>(key.size()));
    w.bytes(key.data(), key.size());
    w.le<uint8_t>(static_cast<uint8_t>(t.dims.size()));
    for (uint32_t d : t.dims) w.le<uint32_t>(d);
    for (float f : t.data) w.le<uint32_t>(std::bit_cast<uint32_t>(f));
  }
  return w.take();
}

F3TContainer F3TContainer::parse(std::span<const uint8_t> bytes) {
  Reader r(bytes);
  auto magic = r.bytes(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw FormatError("bad F3T magic bytes");
  const uint32_t version = r.le<uint32_t>("version");
  if (version != kVersion) throw FormatError("unsupported F3T version " + std::to_string(version));
  const uint32_t count = r.le<uint32_t>("entry count");
  F3TContainer c;
  for (uint32_t e = 0; e < count; ++e) {
    const uint16_t len = r.le<uint16_t>("key length");
    auto kb = r.bytes(len, "key");
    std::string key(kb.begin(), kb.end());
    Tensor t;
    const uint8_t rank = r.le<uint8_t>("rank");
    for (uint8_t d = 0; d < rank; ++d) t.dims.push_back(r.le<uint32_t>("dims"));
    size_t n = std::find(t.dims.begin(), t.dims.end(), 0u) != t.dims.end() ? 0 : 1;
    for (uint32_t d : t.dims) {
      if (n == 0) break;
      if (n > r.remaining() / 4 / d) throw FormatError("F3T payload for '" + key + "' exceeds file size");
      n *= d;
    }
    if (n * 4 > r.remaining()) throw FormatError("F3T payload for '" + key + "' exceeds file size");
    t.data.resize(n);
    for (size_t i = 0; i < n; ++i) t.data[i] = std::bit_cast<float>(r.le<uint32_t>("payload"));
    if (c.find(key)) throw FormatError("duplicate F3T key '" + key + "'");
    c.entries_.emplace_back(std::move(key), std::move(t));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after last F3T entry");
  return c;
}

void F3TContainer::write(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

F3TContainer F3TContainer::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(bytes);
}

}  // namespace f3a
