#pragma once
// A small synthetic corpus covering every pipeline stage: 100 utterances of
// text-driven features spread over the eight corpora, a toy embedding table,
// bitext, pseudo-label translations with QE scores, an exclusion list, text
// instructions and an ASR scoring pair, plus the run config.
#include <cstdint>
#include <filesystem>
#include <string>

namespace dsukit {

// 26 lowercase letters, space, apostrophe, period, comma.
inline constexpr std::string_view kDemoAlphabet = "abcdefghijklmnopqrstuvwxyz '.,";

struct DemoOptions {
  std::uint64_t seed = 7;
  std::size_t k = 30;
  std::size_t dim = 32;
  std::size_t frames_per_symbol = 4;
  // Noise sigma as a fraction of the smallest distance between two anchors.
  double noise_factor = 0.01;
  unsigned workers = 1;
};

struct DemoFiles {
  std::filesystem::path config;
  std::filesystem::path manifest;
  double noise_sigma = 0.0;
  std::uint64_t anchor_seed = 0;
};

// Smallest pairwise distance between the first n anchors.
double min_anchor_separation(std::uint64_t seed, std::size_t n, std::size_t dim);

// Writes everything under dir (created if needed); the config's output_dir is
// dir/out.
DemoFiles generate_demo(const std::filesystem::path& dir, const DemoOptions& options = {});

}  // namespace dsukit
