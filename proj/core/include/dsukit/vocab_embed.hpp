#pragma once

// Vocabulary extension for DSU tokens. New embedding rows are drawn from a
// multivariate Gaussian whose mean is the average original embedding and
// whose covariance is the population covariance of the original embeddings
// times a small scale (1e-5 by default).
//
// Embedding file layout (little-endian):
//   "SPEM" | version u32 = 1 | V u64 | d u32 |
//   V x (u32 byte length, UTF-8 token) | V*d f32 row-major

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dsukit/matrix.hpp"

namespace dsukit {

inline constexpr double kDefaultEmbeddingInitScale = 1e-5;

struct EmbeddingTable {
  std::vector<std::string> tokens;
  Matrix vectors;  // V x d

  std::size_t size() const noexcept { return tokens.size(); }
  std::size_t dim() const noexcept { return vectors.cols(); }

  // Unique tokens, row count == token count, finite values.
  void validate() const;

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;
};

struct GaussianInitSpec {
  std::vector<double> mean;        // d
  std::vector<double> covariance;  // d x d row-major, already scaled
  double scale = kDefaultEmbeddingInitScale;
  std::uint64_t seed = 0;

  std::size_t dim() const noexcept { return mean.size(); }
};

GaussianInitSpec fit_gaussian(const EmbeddingTable& table, double scale = kDefaultEmbeddingInitScale,
                              std::uint64_t seed = 0);

enum class CovarianceFactor { cholesky, cholesky_jittered, diagonal };

struct ExtendReport {
  CovarianceFactor factor = CovarianceFactor::cholesky;
  double jitter = 0.0;
  std::size_t added = 0;
};

// Appends one row per new token; original rows are copied unchanged.
EmbeddingTable extend_vocab(const EmbeddingTable& table, const std::vector<std::string>& new_tokens,
                            const GaussianInitSpec& spec, ExtendReport* report = nullptr);

// "<extra_id_{base}>" .. "<extra_id_{base + k - 1}>"
std::vector<std::string> unit_token_names(std::size_t k, std::int64_t index_base = 0);

std::string encode_embeddings(const EmbeddingTable& table);
EmbeddingTable decode_embeddings(std::string_view bytes);
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable load_embeddings(const std::filesystem::path& path);

// Interchange form: one UTF-8 token per line plus a raw little-endian f32
// V x d matrix; d is inferred from the matrix size.
EmbeddingTable import_plain_embeddings(const std::filesystem::path& tokens_path,
                                       const std::filesystem::path& matrix_path);
void export_plain_embeddings(const EmbeddingTable& table, const std::filesystem::path& tokens_path,
                             const std::filesystem::path& matrix_path);

}  // namespace dsukit
