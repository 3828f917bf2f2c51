#include "dsukit/feature_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "dsukit/error.hpp"
#include "dsukit/rng.hpp"
#include "dsukit/utf8.hpp"

namespace dsukit {
namespace {

constexpr char kMagic[4] = {'S', 'P', 'F', 'E'};
constexpr std::uint32_t kVersion = 1;

std::string describe(char32_t cp) {
  std::string s = "'";
  append_utf8(s, cp);
  s += "' (U+";
  static const char* hex = "0123456789ABCDEF";
  std::string digits;
  for (char32_t v = cp; v != 0 || digits.size() < 4; v >>= 4) digits.insert(digits.begin(), hex[v & 0xF]);
  return s + digits + ")";
}

}  // namespace

std::string encode_features(const FeatureSequence& seq) {
  if (!seq.frames.all_finite()) {
    throw Error(Errc::validation, "feature sequence '" + seq.utterance_id + "' contains non-finite values");
  }
  if (seq.dim() == 0) {
    throw Error(Errc::validation, "feature sequence '" + seq.utterance_id + "' has dimension 0");
  }
  std::ostringstream out(std::ios::binary);
  out.write(kMagic, 4);
  detail::put<std::uint32_t>(out, kVersion);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(seq.dim()));
  detail::put<std::uint32_t>(out, 0);
  detail::put<std::uint64_t>(out, seq.frame_count());
  detail::put_floats(out, seq.frames.data());
  return std::move(out).str();
}

FeatureSequence decode_features(std::string_view bytes, std::string utterance_id, double frame_rate_hz) {
  const std::string what = utterance_id.empty() ? std::string("feature data") : "feature file '" + utterance_id + "'";
  if (bytes.size() < kFeatureHeaderBytes) {
    throw Error(Errc::truncation, what + ": file ends at offset " + std::to_string(bytes.size()) +
                                      " inside the " + std::to_string(kFeatureHeaderBytes) + "-byte header");
  }
  std::istringstream in{std::string(bytes), std::ios::binary};
  detail::Reader reader(in, what);
  if (reader.get_string(4, "magic") != std::string_view(kMagic, 4)) {
    throw Error(Errc::format, what + ": bad magic, expected SPFE");
  }
  const auto version = reader.get<std::uint32_t>("version");
  if (version != kVersion) {
    throw Error(Errc::format, what + ": unsupported version " + std::to_string(version));
  }
  const auto dim = reader.get<std::uint32_t>("dim");
  const auto reserved = reader.get<std::uint32_t>("reserved");
  const auto frames = reader.get<std::uint64_t>("frame_count");
  if (dim == 0) throw Error(Errc::format, what + ": dimension 0 in header");
  if (reserved != 0) throw Error(Errc::format, what + ": non-zero reserved header field");

  const std::uint64_t payload = bytes.size() - kFeatureHeaderBytes;
  if (frames > payload / sizeof(float) / dim + 1) {
    // Avoid allocating for a header that claims far more data than exists.
    throw Error(Errc::truncation, what + ": header declares " + std::to_string(frames) +
                                      " frames but payload ends at byte offset " + std::to_string(bytes.size()));
  }
  FeatureSequence seq;
  seq.utterance_id = std::move(utterance_id);
  seq.frame_rate_hz = frame_rate_hz;
  seq.frames = Matrix(static_cast<std::size_t>(frames), dim);
  reader.get_floats(seq.frames.data(), "frame payload");
  if (!reader.at_eof()) {
    throw Error(Errc::format, what + ": trailing bytes after payload at offset " + std::to_string(reader.offset()));
  }
  return seq;
}

FeatureSequence read_features(const std::filesystem::path& path, double frame_rate_hz) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open feature file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_features(buf.str(), path.stem().string(), frame_rate_hz);
}

void write_features(const FeatureSequence& seq, const std::filesystem::path& path) {
  const std::string bytes = encode_features(seq);  // validates before touching the file
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot create feature file " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

void normalize_mean_variance(FeatureSequence& seq) {
  const std::size_t t = seq.frame_count();
  const std::size_t d = seq.dim();
  if (t == 0) return;
  for (std::size_t c = 0; c < d; ++c) {
    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t r = 0; r < t; ++r) {
      const double v = seq.frames(r, c);
      sum += v;
      sq += v * v;
    }
    const double mean = sum / static_cast<double>(t);
    const double var = std::max(0.0, sq / static_cast<double>(t) - mean * mean);
    const double inv_sd = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    for (std::size_t r = 0; r < t; ++r) {
      seq.frames(r, c) = static_cast<float>((seq.frames(r, c) - mean) * inv_sd);
    }
  }
}

Alphabet::Alphabet(std::string_view utf8_symbols) : symbols_(decode_utf8(utf8_symbols)) {
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (symbols_[i] == symbols_[j]) {
        throw Error(Errc::validation, "alphabet repeats symbol " + describe(symbols_[i]));
      }
    }
  }
}

bool Alphabet::contains(char32_t symbol) const {
  return symbols_.find(symbol) != std::u32string::npos;
}

std::size_t Alphabet::index_of(char32_t symbol) const {
  const auto pos = symbols_.find(symbol);
  if (pos == std::u32string::npos) {
    throw Error(Errc::validation, "symbol " + describe(symbol) + " is not in the alphabet");
  }
  return pos;
}

std::vector<float> anchor_vector(std::uint64_t seed, std::size_t index, std::size_t dim) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(index)));
  std::vector<double> v(dim);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm2 += x * x;
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] * inv);
  return out;
}

std::vector<int> synth_frame_labels(std::string_view transcript, const Alphabet& alphabet,
                                    std::size_t frames_per_symbol) {
  std::vector<int> labels;
  for (char32_t cp : decode_utf8(transcript)) {
    const int idx = static_cast<int>(alphabet.index_of(cp));
    labels.insert(labels.end(), frames_per_symbol, idx);
  }
  return labels;
}

FeatureSequence synth_features(std::string_view utterance_id, std::string_view transcript,
                               const Alphabet& alphabet, const SynthOptions& options) {
  if (options.dim == 0) throw Error(Errc::validation, "synthetic feature dimension must be positive");
  if (options.frames_per_symbol == 0) throw Error(Errc::validation, "frames_per_symbol must be positive");
  if (!(options.noise_sigma >= 0.0) || !std::isfinite(options.noise_sigma)) {
    throw Error(Errc::validation, "noise_sigma must be finite and non-negative");
  }
  const auto labels = synth_frame_labels(transcript, alphabet, options.frames_per_symbol);

  std::vector<std::vector<float>> anchors(alphabet.size());
  FeatureSequence seq;
  seq.utterance_id = std::string(utterance_id);
  seq.frame_rate_hz = options.frame_rate_hz;
  seq.frames = Matrix(labels.size(), options.dim);

  Rng noise(derive_seed(derive_seed(options.seed, std::string_view("noise")), transcript));
  for (std::size_t t = 0; t < labels.size(); ++t) {
    auto& anchor = anchors[static_cast<std::size_t>(labels[t])];
    if (anchor.empty()) anchor = anchor_vector(options.seed, static_cast<std::size_t>(labels[t]), options.dim);
    auto row = seq.frames.row(t);
    for (std::size_t c = 0; c < options.dim; ++c) {
      double v = anchor[c];
      if (options.noise_sigma > 0.0) v += options.noise_sigma * noise.normal();
      row[c] = static_cast<float>(v);
    }
  }
  return seq;
}

}  // namespace dsukit
