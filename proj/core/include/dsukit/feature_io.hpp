#pragma once

// Continuous feature frames: the per-utterance binary file format and a
// deterministic synthetic generator standing in for a neural feature
// extractor.
//
// Feature file layout (all integers and reals little-endian):
//
//   offset  size  field
//   0       4     magic "SPFE"
//   4       4     version (u32) = 1
//   8       4     dim (u32), >= 1
//   12      4     reserved (u32) = 0, aligns frame_count
//   16      8     frame_count (u64)
//   24      ...   frame_count * dim IEEE-754 binary32, row-major

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dsukit/matrix.hpp"

namespace dsukit {

inline constexpr double kDefaultFrameRateHz = 50.0;
inline constexpr std::size_t kFeatureHeaderBytes = 24;

struct FeatureSequence {
  std::string utterance_id;
  Matrix frames;  // T x D
  double frame_rate_hz = kDefaultFrameRateHz;

  std::size_t frame_count() const noexcept { return frames.rows(); }
  std::size_t dim() const noexcept { return frames.cols(); }
};

// The utterance id of the result is the file stem.
FeatureSequence read_features(const std::filesystem::path& path,
                              double frame_rate_hz = kDefaultFrameRateHz);
void write_features(const FeatureSequence& seq, const std::filesystem::path& path);

// In-memory codec used by the file functions.
std::string encode_features(const FeatureSequence& seq);
FeatureSequence decode_features(std::string_view bytes, std::string utterance_id = {},
                                double frame_rate_hz = kDefaultFrameRateHz);

// Per-utterance mean/variance normalization (off by default in the
// pipeline). Columns with zero variance are only mean-centered.
void normalize_mean_variance(FeatureSequence& seq);

// An ordered set of symbols (Unicode code points) for synthetic features.
class Alphabet {
 public:
  explicit Alphabet(std::string_view utf8_symbols);

  std::size_t size() const noexcept { return symbols_.size(); }
  char32_t symbol(std::size_t index) const { return symbols_.at(index); }
  // Throws Error(Errc::validation) naming the symbol when absent.
  std::size_t index_of(char32_t symbol) const;
  bool contains(char32_t symbol) const;

 private:
  std::u32string symbols_;
};

struct SynthOptions {
  std::size_t dim = 32;
  std::size_t frames_per_symbol = 4;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  double frame_rate_hz = kDefaultFrameRateHz;
};

// Unit-norm anchor for symbol `index`: normal draws from Rng(derive_seed(seed,
// index)), normalized to length 1.
std::vector<float> anchor_vector(std::uint64_t seed, std::size_t index, std::size_t dim);

// Each symbol contributes frames_per_symbol copies of its anchor plus
// i.i.d. N(0, noise_sigma^2) noise. The noise stream is keyed by the seed and
// the transcript, so the output is a pure function of the arguments.
FeatureSequence synth_features(std::string_view utterance_id, std::string_view transcript,
                               const Alphabet& alphabet, const SynthOptions& options);

// Ground-truth symbol index of every frame synth_features would emit.
std::vector<int> synth_frame_labels(std::string_view transcript, const Alphabet& alphabet,
                                    std::size_t frames_per_symbol);

}  // namespace dsukit
