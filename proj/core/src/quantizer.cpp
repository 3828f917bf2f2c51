#include "dsukit/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Core>

#include "binary_io.hpp"
#include "dsukit/error.hpp"
#include "dsukit/rng.hpp"
#include "jsonl.hpp"
#include "parallel.hpp"

namespace dsukit {
namespace {

constexpr char kMagic[4] = {'S', 'P', 'K', 'M'};
constexpr std::uint32_t kVersion = 1;
// Below this many distance terms per sequence the assignment stays serial.
constexpr std::size_t kParallelWork = std::size_t{1} << 18;

struct Nearest {
  UnitId id = 0;
  double dist = 0.0;
};

template <class T>
Nearest nearest(const T* centroids, std::size_t k, std::size_t dim, std::span<const float> x) {
  Nearest best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t j = 0; j < k; ++j) {
    const T* c = centroids + j * dim;
    double d = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double diff = static_cast<double>(x[i]) - static_cast<double>(c[i]);
      d += diff * diff;
    }
    if (d < best.dist) {
      best.dist = d;
      best.id = static_cast<UnitId>(j);
    }
  }
  return best;
}

// Exact distance to one centroid, accumulated exactly as nearest() does.
template <class T>
double exact_dist(const T* c, std::size_t dim, const float* x) {
  double d = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double diff = static_cast<double>(x[i]) - static_cast<double>(c[i]);
    d += diff * diff;
  }
  return d;
}

// Float GEMM screen for large codebooks. Approximate squared distances come
// from |x|^2 - 2x.c + |c|^2 with the dot products in single precision. Every
// |approx - exact| is bounded by err_j, so any centroid whose exact distance
// could tie or beat the true minimum satisfies approx_j - err_j <= tau, where
// tau = min_m(approx_m + err_m). Those survivors are rescored exactly in index
// order, which reproduces the plain scan bit for bit.
constexpr std::size_t kScreenMinK = 64;
constexpr std::size_t kScreenBlock = 256;

template <class T>
class Screen {
 public:
  using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Screen(const T* centroids, std::size_t k, std::size_t dim) : c_(centroids), k_(k), dim_(dim), cf_(k, dim) {
    cnorm2_.resize(k);
    cnorm_.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double v = static_cast<double>(centroids[j * dim + i]);
        cf_(j, i) = static_cast<float>(v);
        s += v * v;
      }
      cnorm2_[j] = s;
      cnorm_[j] = std::sqrt(s);
    }
    // gamma_d for the float sums plus one rounding of c to float, with slack
    const double u = std::ldexp(1.0, -24);
    const double du = double(dim + 2) * u;
    coef_ = 2.0 * 1.25 * (du / (1.0 - du) + u);
    // double rounding in the norms, the expansion and the exact scan itself
    lin_ = double(dim + 8) * std::ldexp(1.0, -49);
  }

  // Frames [begin, end) of a row-major float table.
  void run(const float* frames, std::size_t begin, std::size_t end, Nearest* out) const {
    RowMat dots;
    std::vector<double> approx(k_), err(k_);
    for (std::size_t b = begin; b < end; b += kScreenBlock) {
      const std::size_t rows = std::min(kScreenBlock, end - b);
      Eigen::Map<const RowMat> xb(frames + b * dim_, Eigen::Index(rows), Eigen::Index(dim_));
      dots.noalias() = xb * cf_.transpose();
      for (std::size_t r = 0; r < rows; ++r) {
        const float* x = frames + (b + r) * dim_;
        double xn2 = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) xn2 += double(x[i]) * double(x[i]);
        const double xn = std::sqrt(xn2);
        double tau = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k_; ++j) {
          approx[j] = xn2 + cnorm2_[j] - 2.0 * double(dots(Eigen::Index(r), Eigen::Index(j)));
          err[j] = coef_ * xn * cnorm_[j] + lin_ * (xn2 + cnorm2_[j]);
          tau = std::min(tau, approx[j] + err[j]);
        }
        Nearest best{0, std::numeric_limits<double>::infinity()};
        if (!std::isfinite(tau)) {
          best = nearest(c_, k_, dim_, std::span<const float>(x, dim_));
        } else {
          for (std::size_t j = 0; j < k_; ++j) {
            if (approx[j] - err[j] > tau) continue;  // NaN falls through to the exact check
            const double d = exact_dist(c_ + j * dim_, dim_, x);
            if (d < best.dist) {
              best.dist = d;
              best.id = static_cast<UnitId>(j);
            }
          }
        }
        out[b + r] = best;
      }
    }
  }

 private:
  const T* c_;
  std::size_t k_, dim_;
  RowMat cf_;
  std::vector<double> cnorm2_, cnorm_;
  double coef_ = 0.0;
  double lin_ = 0.0;
};

template <class T>
void assign_frames(const T* centroids, std::size_t k, std::size_t dim, const FeatureSequence& seq, unsigned workers,
                   std::vector<Nearest>& out) {
  const std::size_t n = seq.frame_count();
  out.resize(n);
  const unsigned w = n * k * dim >= kParallelWork ? workers : 1;
  if (k >= kScreenMinK && n >= 8 && dim > 0) {
    const Screen<T> screen(centroids, k, dim);
    const float* frames = seq.frames.data().data();
    const std::size_t blocks = (n + kScreenBlock - 1) / kScreenBlock;
    detail::parallel_for(blocks, w, [&](std::size_t begin, std::size_t end) {
      screen.run(frames, begin * kScreenBlock, std::min(n, end * kScreenBlock), out.data());
    });
    return;
  }
  detail::parallel_for(n, w, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) out[t] = nearest(centroids, k, dim, seq.frames.row(t));
  });
}

void check_dim(const FeatureSequence& seq, std::size_t dim) {
  if (seq.dim() != dim && seq.frame_count() > 0) {
    throw Error(Errc::validation, "sequence '" + seq.utterance_id + "' has dimension " + std::to_string(seq.dim()) +
                                      ", expected " + std::to_string(dim));
  }
}

// Copies the frames at the given sorted global indices, in index order.
std::vector<std::vector<double>> gather_frames(const FeatureSource& data, const std::vector<std::size_t>& sorted_idx) {
  std::vector<std::vector<double>> out;
  out.reserve(sorted_idx.size());
  std::size_t global = 0;
  std::size_t next = 0;
  data.for_each([&](const FeatureSequence& seq) {
    const std::size_t n = seq.frame_count();
    while (next < sorted_idx.size() && sorted_idx[next] < global + n) {
      const auto row = seq.frames.row(sorted_idx[next] - global);
      out.emplace_back(row.begin(), row.end());
      ++next;
    }
    global += n;
  });
  return out;
}

std::vector<double> init_random(const FeatureSource& data, std::size_t n, std::size_t k, std::size_t dim, Rng& rng) {
  std::vector<std::size_t> picks = sample_without_replacement(n, k, rng);
  std::vector<std::size_t> sorted = picks;
  std::sort(sorted.begin(), sorted.end());
  const auto frames = gather_frames(data, sorted);
  std::vector<double> centroids(k * dim);
  for (std::size_t j = 0; j < k; ++j) {
    const auto pos = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), picks[j]) - sorted.begin());
    std::copy(frames[pos].begin(), frames[pos].end(), centroids.begin() + static_cast<std::ptrdiff_t>(j * dim));
  }
  return centroids;
}

// D^2 draw: index i with probability d2[i] / total.
std::size_t draw_d2(const std::vector<double>& d2, double total, Rng& rng) {
  const double target = rng.uniform01() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < d2.size(); ++i) {
    if (d2[i] > 0.0) last_positive = i;
    acc += d2[i];
    if (acc > target && d2[i] > 0.0) return i;
  }
  return last_positive;
}

// Greedy k-means++: each step draws `trials` D^2 candidates and keeps the
// one that lowers the potential most (ties to the earlier draw).
std::vector<double> init_kmeanspp(const FeatureSource& data, std::size_t n, std::size_t k, std::size_t dim, Rng& rng,
                                  unsigned workers, std::size_t trials) {
  std::vector<double> centroids(k * dim);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::vector<Nearest> scratch;

  auto fold_in = [&](const std::vector<double>& c) {
    std::size_t global = 0;
    data.for_each([&](const FeatureSequence& seq) {
      assign_frames(c.data(), 1, dim, seq, workers, scratch);
      for (std::size_t t = 0; t < scratch.size(); ++t) d2[global + t] = std::min(d2[global + t], scratch[t].dist);
      global += seq.frame_count();
    });
  };

  auto frame_at = [&](std::size_t idx) { return gather_frames(data, {idx})[0]; };

  std::vector<double> chosen = frame_at(static_cast<std::size_t>(rng.below(n)));
  for (std::size_t j = 0;; ++j) {
    std::copy(chosen.begin(), chosen.end(), centroids.begin() + static_cast<std::ptrdiff_t>(j * dim));
    if (j + 1 == k) break;
    fold_in(chosen);

    double total = 0.0;
    for (double v : d2) total += v;
    if (!(total > 0.0)) {
      chosen = frame_at(static_cast<std::size_t>(rng.below(n)));
      continue;
    }
    std::vector<std::size_t> cand(trials);
    for (auto& c : cand) c = draw_d2(d2, total, rng);
    if (trials == 1) {
      chosen = frame_at(cand[0]);
      continue;
    }
    std::vector<std::size_t> sorted = cand;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    const auto frames = gather_frames(data, sorted);
    std::vector<double> flat(frames.size() * dim);
    for (std::size_t c = 0; c < frames.size(); ++c) std::copy(frames[c].begin(), frames[c].end(), flat.begin() + static_cast<std::ptrdiff_t>(c * dim));
    std::vector<double> potential(frames.size(), 0.0);
    std::size_t global = 0;
    data.for_each([&](const FeatureSequence& seq) {
      for (std::size_t c = 0; c < frames.size(); ++c) {
        assign_frames(flat.data() + c * dim, 1, dim, seq, workers, scratch);
        for (std::size_t t = 0; t < scratch.size(); ++t) potential[c] += std::min(d2[global + t], scratch[t].dist);
      }
      global += seq.frame_count();
    });
    std::size_t best = 0;
    double best_pot = std::numeric_limits<double>::infinity();
    for (auto idx : cand) {
      const auto pos = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), idx) - sorted.begin());
      if (potential[pos] < best_pot) {
        best_pot = potential[pos];
        best = pos;
      }
    }
    chosen = frames[best];
  }
  return centroids;
}

// Frames with the largest distance to their assigned centroid, ties to the
// lower global index. Returns (global index, assigned id, coordinates).
struct Far {
  double dist;
  std::size_t index;
  UnitId id;
  std::vector<double> x;
};

std::vector<Far> farthest_frames(const FeatureSource& data, const std::vector<double>& centroids, std::size_t k,
                                 std::size_t dim, std::size_t count, unsigned workers) {
  std::vector<Far> top;
  std::vector<Nearest> near;
  std::size_t global = 0;
  data.for_each([&](const FeatureSequence& seq) {
    assign_frames(centroids.data(), k, dim, seq, workers, near);
    for (std::size_t t = 0; t < near.size(); ++t) {
      const double d = near[t].dist;
      if (top.size() == count && !(d > top.back().dist)) continue;
      const auto row = seq.frames.row(t);
      Far f{d, global + t, near[t].id, std::vector<double>(row.begin(), row.end())};
      auto pos = std::upper_bound(top.begin(), top.end(), f, [](const Far& a, const Far& b) { return a.dist > b.dist; });
      top.insert(pos, std::move(f));
      if (top.size() > count) top.pop_back();
    }
    global += seq.frame_count();
  });
  return top;
}

Codebook finish(std::vector<double>& centroids, std::size_t k, std::size_t dim, int iterations,
                const FeatureSource& data, const KMeansOptions& options) {
  Codebook cb;
  cb.centroids = Matrix(k, dim);
  for (std::size_t i = 0; i < k * dim; ++i) cb.centroids.data()[i] = static_cast<float>(centroids[i]);
  cb.iterations_run = iterations;
  cb.feature_source = options.feature_source;
  cb.final_inertia = inertia(cb, data, options.workers);
  return cb;
}

}  // namespace

void InMemoryFeatures::for_each(const std::function<void(const FeatureSequence&)>& fn) const {
  for (const auto& seq : sequences_) fn(seq);
}

ManifestFeatures::ManifestFeatures(Manifest records, std::filesystem::path base_dir, bool normalize)
    : records_(std::move(records)), base_dir_(std::move(base_dir)), normalize_(normalize) {}

void ManifestFeatures::for_each(const std::function<void(const FeatureSequence&)>& fn) const {
  for (const auto& r : records_) {
    std::filesystem::path p(r.feature_path);
    if (p.is_relative()) p = base_dir_ / p;
    FeatureSequence seq = read_features(p);
    seq.utterance_id = r.id;
    if (normalize_) normalize_mean_variance(seq);
    fn(seq);
  }
}

namespace {

Codebook train_once(const FeatureSource& data, const KMeansOptions& options, KMeansTrace* trace) {
  const std::size_t k = options.k;
  if (k == 0) throw Error(Errc::validation, "k must be positive");
  if (options.max_iters < 1) throw Error(Errc::validation, "max_iters must be positive");
  if (!(options.tol >= 0.0)) throw Error(Errc::validation, "tol must be non-negative");

  std::size_t n = 0;
  std::size_t dim = 0;
  bool any = false;
  data.for_each([&](const FeatureSequence& seq) {
    if (seq.frame_count() == 0) return;
    if (!any) {
      dim = seq.dim();
      any = true;
    }
    check_dim(seq, dim);
    n += seq.frame_count();
  });
  if (n == 0) throw Error(Errc::empty_input, "no feature frames to cluster");
  if (n < k) {
    throw Error(Errc::capacity, "only " + std::to_string(n) + " frames for k = " + std::to_string(k));
  }

  Rng rng(derive_seed(options.seed, std::string_view("kmeans-init")));
  std::vector<double> centroids;
  if (!options.initial_centroids.empty()) {
    if (options.initial_centroids.rows() != k || options.initial_centroids.cols() != dim) {
      throw Error(Errc::validation, "initial centroids must be k x dim");
    }
    const auto init = options.initial_centroids.data();
    centroids.assign(init.begin(), init.end());
  } else if (options.init == KMeansInit::kmeanspp) {
    const std::size_t trials =
        options.local_trials > 0 ? options.local_trials : 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
    centroids = init_kmeanspp(data, n, k, dim, rng, options.workers, trials);
  } else {
    centroids = init_random(data, n, k, dim, rng);
  }
  if (trace) {
    *trace = KMeansTrace{};
    trace->frames = n;
  }

  std::vector<Nearest> near;
  int iterations = 0;

  if (options.minibatch_size > 0) {
    Rng batch_rng(derive_seed(options.seed, std::string_view("kmeans-minibatch")));
    std::vector<double> seen(k, 0.0);
    for (int it = 0; it < options.max_iters; ++it) {
      auto idx = sample_without_replacement(n, options.minibatch_size, batch_rng);
      std::sort(idx.begin(), idx.end());
      const auto batch = gather_frames(data, idx);
      std::vector<float> xf(dim);
      double batch_inertia = 0.0;
      for (const auto& x : batch) {
        for (std::size_t i = 0; i < dim; ++i) xf[i] = static_cast<float>(x[i]);
        const Nearest m = nearest(centroids.data(), k, dim, xf);
        batch_inertia += m.dist;
        seen[m.id] += 1.0;
        const double eta = 1.0 / seen[m.id];
        double* c = centroids.data() + m.id * dim;
        for (std::size_t i = 0; i < dim; ++i) c[i] = (1.0 - eta) * c[i] + eta * x[i];
      }
      iterations = it + 1;
      if (trace) trace->inertia.push_back(batch_inertia);
    }
    return finish(centroids, k, dim, iterations, data, options);
  }

  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < options.max_iters; ++it) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    double total = 0.0;
    data.for_each([&](const FeatureSequence& seq) {
      assign_frames(centroids.data(), k, dim, seq, options.workers, near);
      // Reduction in stream order keeps results independent of worker count.
      for (std::size_t t = 0; t < near.size(); ++t) {
        const auto row = seq.frames.row(t);
        double* s = sums.data() + near[t].id * dim;
        for (std::size_t i = 0; i < dim; ++i) s[i] += row[i];
        ++counts[near[t].id];
        total += near[t].dist;
      }
    });
    iterations = it + 1;
    if (trace) trace->inertia.push_back(total);

    std::vector<std::size_t> empty;
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) empty.push_back(j);
    }
    if (!empty.empty()) {
      const auto far = farthest_frames(data, centroids, k, dim, empty.size(), options.workers);
      for (std::size_t e = 0; e < empty.size() && e < far.size(); ++e) {
        const Far& f = far[e];
        if (!(f.dist > 0.0)) break;
        const std::size_t target = empty[e];
        double* old_sum = sums.data() + f.id * dim;
        double* new_sum = sums.data() + target * dim;
        for (std::size_t i = 0; i < dim; ++i) {
          old_sum[i] -= f.x[i];
          new_sum[i] = f.x[i];
        }
        --counts[f.id];
        counts[target] = 1;
        if (trace) ++trace->reseeded_clusters;
      }
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;
      const double inv = 1.0 / static_cast<double>(counts[j]);
      for (std::size_t i = 0; i < dim; ++i) centroids[j * dim + i] = sums[j * dim + i] * inv;
    }

    if (total == 0.0) break;
    if (std::isfinite(prev) && (total >= prev || (prev - total) < options.tol * prev)) break;
    prev = total;
  }
  return finish(centroids, k, dim, iterations, data, options);
}

}  // namespace

Codebook train_kmeans(const FeatureSource& data, const KMeansOptions& options, KMeansTrace* trace) {
  if (options.n_init < 1) throw Error(Errc::validation, "n_init must be positive");
  if (options.n_init == 1) return train_once(data, options, trace);
  Codebook best;
  KMeansTrace best_trace;
  for (int r = 0; r < options.n_init; ++r) {
    KMeansOptions o = options;
    o.seed = derive_seed(derive_seed(options.seed, std::string_view("kmeans-restart")), static_cast<std::uint64_t>(r));
    KMeansTrace t;
    Codebook cb = train_once(data, o, &t);
    if (r == 0 || cb.final_inertia < best.final_inertia) {
      best = std::move(cb);
      best_trace = std::move(t);
    }
  }
  if (trace) *trace = std::move(best_trace);
  return best;
}

DsuSequence assign(const Codebook& codebook, const FeatureSequence& seq, unsigned workers) {
  if (seq.frame_count() > 0 && seq.dim() != codebook.dim()) {
    throw Error(Errc::validation, "sequence '" + seq.utterance_id + "' has dimension " + std::to_string(seq.dim()) +
                                      " but codebook has " + std::to_string(codebook.dim()));
  }
  std::vector<Nearest> near;
  assign_frames(codebook.centroids.data().data(), codebook.k(), codebook.dim(), seq, workers, near);
  DsuSequence out;
  out.utterance_id = seq.utterance_id;
  out.source_frame_count = seq.frame_count();
  out.ids.reserve(near.size());
  for (const auto& m : near) out.ids.push_back(m.id);
  return out;
}

double inertia(const Codebook& codebook, const FeatureSource& data, unsigned workers) {
  double total = 0.0;
  std::vector<Nearest> near;
  data.for_each([&](const FeatureSequence& seq) {
    check_dim(seq, codebook.dim());
    assign_frames(codebook.centroids.data().data(), codebook.k(), codebook.dim(), seq, workers, near);
    for (const auto& m : near) total += m.dist;
  });
  return total;
}

std::string encode_codebook(const Codebook& cb) {
  if (cb.k() == 0 || cb.dim() == 0) throw Error(Errc::validation, "codebook must have k >= 1 and dim >= 1");
  if (!cb.centroids.all_finite()) throw Error(Errc::validation, "codebook contains non-finite centroids");
  std::ostringstream out(std::ios::binary);
  out.write(kMagic, 4);
  detail::put<std::uint32_t>(out, kVersion);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(cb.k()));
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(cb.dim()));
  detail::put_floats(out, cb.centroids.data());
  detail::json meta;
  meta["iterations_run"] = cb.iterations_run;
  meta["final_inertia"] = cb.final_inertia;
  meta["feature_source"] = cb.feature_source;
  const std::string blob = meta.dump();
  detail::put<std::uint64_t>(out, blob.size());
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  return std::move(out).str();
}

Codebook decode_codebook(std::string_view bytes) {
  std::istringstream in{std::string(bytes), std::ios::binary};
  detail::Reader reader(in, "codebook");
  try {
    if (reader.get_string(4, "magic") != std::string_view(kMagic, 4)) {
      throw Error(Errc::format, "codebook: bad magic, expected SPKM");
    }
  } catch (const Error& e) {
    if (e.code() == Errc::truncation) throw Error(Errc::format, "codebook: file too short for header");
    throw;
  }
  const auto version = reader.get<std::uint32_t>("version");
  if (version != kVersion) throw Error(Errc::format, "codebook: unsupported version " + std::to_string(version));
  const auto k = reader.get<std::uint32_t>("k");
  const auto dim = reader.get<std::uint32_t>("dim");
  if (k == 0 || dim == 0) throw Error(Errc::format, "codebook: k and dim must be positive");
  if (static_cast<std::uint64_t>(k) * dim * sizeof(float) > bytes.size()) {
    throw Error(Errc::truncation, "codebook: header declares more centroids than the file holds");
  }
  Codebook cb;
  cb.centroids = Matrix(k, dim);
  reader.get_floats(cb.centroids.data(), "centroids");
  const auto len = reader.get<std::uint64_t>("metadata length");
  if (len > bytes.size()) throw Error(Errc::truncation, "codebook: metadata length exceeds file size");
  const std::string blob = reader.get_string(static_cast<std::size_t>(len), "metadata");
  if (!reader.at_eof()) throw Error(Errc::format, "codebook: trailing bytes after metadata");
  const auto meta = detail::parse_json(blob, "codebook metadata");
  try {
    cb.iterations_run = meta.value("iterations_run", 0);
    cb.final_inertia = meta.value("final_inertia", 0.0);
    cb.feature_source = meta.value("feature_source", std::string{});
  } catch (const detail::json::exception& e) {
    throw Error(Errc::format, std::string("codebook metadata: ") + e.what());
  }
  return cb;
}

void save_codebook(const Codebook& cb, const std::filesystem::path& path) {
  const std::string bytes = encode_codebook(cb);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot create " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

Codebook load_codebook(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_codebook(buf.str());
}

std::string_view to_string(KMeansInit init) {
  return init == KMeansInit::kmeanspp ? "kmeanspp" : "random";
}

KMeansInit kmeans_init_from_string(std::string_view name) {
  if (name == "kmeanspp" || name == "k-means++") return KMeansInit::kmeanspp;
  if (name == "random") return KMeansInit::random;
  throw Error(Errc::config, "unknown k-means init '" + std::string(name) + "'");
}

}  // namespace dsukit
