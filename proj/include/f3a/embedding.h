#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace f3a {

class MissingEmbeddingError : public std::runtime_error {
 public:
  explicit MissingEmbeddingError(const std::string& key)
      : std::runtime_error("no embedding for key '" + key + "'"), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// Text embedder E(text). Two modes:
//   desk_hash   - each lowercase whitespace word seeds an Rng with its FNV-1a
//                 hash, draws dim Gaussians, and is unit-normalized; word
//                 vectors are mean-pooled and normalized again.
//   file_backed - exact-match lookup in an F3T container of rank-1 tensors.
class EmbeddingProvider {
 public:
  enum class Mode { kDeskHash, kFileBacked };

  static EmbeddingProvider desk_hash(int dim);
  static EmbeddingProvider from_file(const std::filesystem::path& path);
  static EmbeddingProvider from_table(std::map<std::string, std::vector<double>> table);

  Mode mode() const { return mode_; }
  int dim() const { return dim_; }

  std::vector<double> embed(std::string_view text) const;

 private:
  EmbeddingProvider() = default;

  Mode mode_ = Mode::kDeskHash;
  int dim_ = 0;
  std::map<std::string, std::vector<double>, std::less<>> table_;
};

// Unit vector for a single lowercase word under desk_hash.
std::vector<double> desk_word_vector(std::string_view word, int dim);

// v / ||v||; zero vectors are returned unchanged.
std::vector<double> normalized(std::vector<double> v);

}  // namespace f3a
