#pragma once

// k-means codebook training (Lloyd's algorithm over a re-iterable feature
// stream) and nearest-centroid assignment.
//
// Codebook file layout (little-endian):
//   "SPKM" | version u32 = 1 | k u32 | dim u32 | k*dim f32 row-major |
//   metadata length u64 | metadata JSON (UTF-8)
// with metadata {"iterations_run", "final_inertia", "feature_source"}.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dsukit/dsu_codec.hpp"
#include "dsukit/feature_io.hpp"
#include "dsukit/manifest.hpp"
#include "dsukit/matrix.hpp"

namespace dsukit {

inline constexpr std::size_t kDefaultCodebookSize = 5000;

struct Codebook {
  Matrix centroids;  // k x dim
  int iterations_run = 0;
  double final_inertia = 0.0;
  std::string feature_source;

  std::size_t k() const noexcept { return centroids.rows(); }
  std::size_t dim() const noexcept { return centroids.cols(); }

  friend bool operator==(const Codebook&, const Codebook&) = default;
};

// A feature corpus that can be traversed any number of times in a fixed
// order. Each call to for_each is one pass.
class FeatureSource {
 public:
  virtual ~FeatureSource() = default;
  virtual void for_each(const std::function<void(const FeatureSequence&)>& fn) const = 0;
};

class InMemoryFeatures final : public FeatureSource {
 public:
  explicit InMemoryFeatures(std::span<const FeatureSequence> sequences) : sequences_(sequences) {}
  void for_each(const std::function<void(const FeatureSequence&)>& fn) const override;

 private:
  std::span<const FeatureSequence> sequences_;
};

// Streams feature files named by manifest rows, re-reading them every pass.
// Relative feature paths resolve against base_dir.
class ManifestFeatures final : public FeatureSource {
 public:
  ManifestFeatures(Manifest records, std::filesystem::path base_dir, bool normalize = false);
  void for_each(const std::function<void(const FeatureSequence&)>& fn) const override;

 private:
  Manifest records_;
  std::filesystem::path base_dir_;
  bool normalize_;
};

enum class KMeansInit { kmeanspp, random };

struct KMeansOptions {
  std::size_t k = kDefaultCodebookSize;
  int max_iters = 100;
  double tol = 1e-4;  // relative inertia decrease
  std::uint64_t seed = 0;
  KMeansInit init = KMeansInit::kmeanspp;
  // Candidates per k-means++ step, best kept; 0 means 2 + floor(ln k).
  std::size_t local_trials = 0;
  // Independent restarts (seeds derived from seed); lowest inertia wins.
  int n_init = 1;
  // Worker threads for the assignment step; results do not depend on it.
  unsigned workers = 1;
  // > 0 switches to mini-batch updates. Approximate: the per-iteration
  // inertia guarantee of Lloyd's algorithm no longer holds.
  std::size_t minibatch_size = 0;
  // When non-empty (k x dim), used as the starting centroids instead of init.
  Matrix initial_centroids;
  std::string feature_source;
};

struct KMeansTrace {
  // Inertia of each assignment step, before the centroid update.
  std::vector<double> inertia;
  std::size_t frames = 0;
  std::size_t reseeded_clusters = 0;
};

Codebook train_kmeans(const FeatureSource& data, const KMeansOptions& options, KMeansTrace* trace = nullptr);

// Nearest centroid by squared Euclidean distance; ties go to the lower index.
DsuSequence assign(const Codebook& codebook, const FeatureSequence& seq, unsigned workers = 1);

// Sum of squared distances from every frame to its nearest centroid.
double inertia(const Codebook& codebook, const FeatureSource& data, unsigned workers = 1);

std::string encode_codebook(const Codebook& cb);
Codebook decode_codebook(std::string_view bytes);
void save_codebook(const Codebook& cb, const std::filesystem::path& path);
Codebook load_codebook(const std::filesystem::path& path);

std::string_view to_string(KMeansInit init);
KMeansInit kmeans_init_from_string(std::string_view name);

}  // namespace dsukit
