#include "f3a/embedding.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "f3a/f3t.h"
#include "f3a/rng.h"

namespace f3a {
namespace {

std::vector<std::string> lowercase_words(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

}  // namespace

std::vector<double> normalized(std::vector<double> v) {
  double n2 = 0.0;
  for (double x : v) n2 += x * x;
  if (n2 > 0.0) {
    const double inv = 1.0 / std::sqrt(n2);
    for (double& x : v) x *= inv;
  }
  return v;
}

std::vector<double> desk_word_vector(std::string_view word, int dim) {
  Rng rng(fnv1a64(word));
  std::vector<double> v(dim);
  for (double& x : v) x = rng.gaussian();
  return normalized(std::move(v));
}

EmbeddingProvider EmbeddingProvider::desk_hash(int dim) {
  if (dim < 1) throw std::invalid_argument("embedding dimension must be >= 1");
  EmbeddingProvider p;
  p.mode_ = Mode::kDeskHash;
  p.dim_ = dim;
  return p;
}

EmbeddingProvider EmbeddingProvider::from_table(std::map<std::string, std::vector<double>> table) {
  if (table.empty()) throw std::invalid_argument("embedding table is empty");
  EmbeddingProvider p;
  p.mode_ = Mode::kFileBacked;
  p.dim_ = static_cast<int>(table.begin()->second.size());
  for (auto& [key, vec] : table) {
    if (static_cast<int>(vec.size()) != p.dim_ || p.dim_ == 0) {
      throw std::invalid_argument("embedding '" + key + "' has inconsistent dimension");
    }
    p.table_.emplace(key, normalized(std::move(vec)));
  }
  return p;
}

EmbeddingProvider EmbeddingProvider::from_file(const std::filesystem::path& path) {
  const F3TContainer c = F3TContainer::read(path);
  std::map<std::string, std::vector<double>> table;
  for (const auto& [key, t] : c.entries()) {
    if (t.dims.size() != 1) throw FormatError("embedding '" + key + "' must be a rank-1 tensor");
    table.emplace(key, std::vector<double>(t.data.begin(), t.data.end()));
  }
  if (table.empty()) throw FormatError("embedding file " + path.string() + " has no entries");
  try {
    return from_table(std::move(table));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

std::vector<double> EmbeddingProvider::embed(std::string_view text) const {
  auto words = lowercase_words(text);
  if (words.empty()) throw std::invalid_argument("cannot embed empty text");
  if (mode_ == Mode::kFileBacked) {
    auto it = table_.find(text);
    if (it == table_.end()) throw MissingEmbeddingError(std::string(text));
    return it->second;
  }
  // Pool in sorted word order so the sum is independent of word order.
  std::sort(words.begin(), words.end());
  std::vector<double> acc(dim_, 0.0);
  for (const auto& w : words) {
    const auto v = desk_word_vector(w, dim_);
    for (int d = 0; d < dim_; ++d) acc[d] += v[d];
  }
  const double inv = 1.0 / static_cast<double>(words.size());
  for (double& x : acc) x *= inv;
  return normalized(std::move(acc));
}

}  // namespace f3a
