#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "dsukit/error.hpp"
#include "dsukit/quantizer.hpp"
#include "dsukit/rng.hpp"
#include "test_util.hpp"

using namespace dsukit;

namespace {

FeatureSequence seq_of(const std::vector<std::vector<float>>& rows, const std::string& id = "s") {
  FeatureSequence s;
  s.utterance_id = id;
  s.frames = Matrix(0, rows.empty() ? 1 : rows[0].size());
  for (const auto& r : rows) s.frames.append_row(r);
  return s;
}

std::vector<FeatureSequence> gaussian_frames(Rng& r, std::size_t seqs, std::size_t frames, std::size_t dim) {
  std::vector<FeatureSequence> out;
  for (std::size_t s = 0; s < seqs; ++s) {
    FeatureSequence f;
    f.frames = Matrix(frames, dim);
    for (auto& v : f.frames.data()) v = static_cast<float>(r.normal());
    out.push_back(std::move(f));
  }
  return out;
}

double sqdist(std::span<const float> a, std::span<const float> b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = double(a[i]) - double(b[i]);
    d += x * x;
  }
  return d;
}

// Exhaustive nearest-centroid scan, first minimum wins.
UnitId brute_nearest(const Matrix& c, std::span<const float> x) {
  UnitId best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < c.rows(); ++j) {
    const double d = sqdist(c.row(j), x);
    if (d < bd) {
      bd = d;
      best = static_cast<UnitId>(j);
    }
  }
  return best;
}

// Minimum k-means objective over every labelling of the points into 2
// non-empty groups.
double brute_two_means(const std::vector<std::vector<double>>& pts) {
  const std::size_t n = pts.size(), d = pts[0].size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
    double cost = 0;
    for (int g = 0; g < 2; ++g) {
      std::vector<double> mean(d, 0.0);
      std::size_t cnt = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (((mask >> i) & 1u) == std::size_t(g)) {
          for (std::size_t k = 0; k < d; ++k) mean[k] += pts[i][k];
          ++cnt;
        }
      }
      for (auto& m : mean) m /= double(cnt);
      for (std::size_t i = 0; i < n; ++i) {
        if (((mask >> i) & 1u) == std::size_t(g)) {
          for (std::size_t k = 0; k < d; ++k) cost += (pts[i][k] - mean[k]) * (pts[i][k] - mean[k]);
        }
      }
    }
    best = std::min(best, cost);
  }
  return best;
}

}  // namespace

TEST_CASE("k = 1 gives the mean") {
  Rng r(1);
  const auto data = gaussian_frames(r, 3, 50, 4);
  KMeansOptions o;
  o.k = 1;
  const auto cb = train_kmeans(InMemoryFeatures(data), o);
  std::vector<double> mean(4, 0.0);
  for (const auto& s : data) {
    for (std::size_t t = 0; t < s.frame_count(); ++t) {
      for (std::size_t i = 0; i < 4; ++i) mean[i] += s.frames(t, i);
    }
  }
  for (std::size_t i = 0; i < 4; ++i) CHECK(cb.centroids(0, i) == doctest::Approx(mean[i] / 150.0).epsilon(1e-6));
}

TEST_CASE("unit square corners with left/right starts") {
  const std::vector<FeatureSequence> data{seq_of({{0, 0}, {0, 1}, {1, 0}, {1, 1}})};
  KMeansOptions o;
  o.k = 2;
  o.initial_centroids = Matrix(2, 2, std::vector<float>{0.1f, 0.2f, 0.9f, 0.7f});
  const auto cb = train_kmeans(InMemoryFeatures(data), o);
  CHECK(cb.centroids(0, 0) == doctest::Approx(0.0));
  CHECK(cb.centroids(0, 1) == doctest::Approx(0.5));
  CHECK(cb.centroids(1, 0) == doctest::Approx(1.0));
  CHECK(cb.centroids(1, 1) == doctest::Approx(0.5));
  // each corner is 0.5 from its centroid: 4 * 0.25
  CHECK(cb.final_inertia == doctest::Approx(1.0));
  CHECK(brute_two_means({{0, 0}, {0, 1}, {1, 0}, {1, 1}}) == doctest::Approx(cb.final_inertia));
}

TEST_CASE("small random sets reach the exhaustive optimum or a Lloyd fixed point") {
  Rng r(21);
  int optimal = 0;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<float>> rows;
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 8; ++i) {
      std::vector<float> p{static_cast<float>(r.normal()), static_cast<float>(r.normal())};
      rows.push_back(p);
      pts.push_back({p[0], p[1]});
    }
    const std::vector<FeatureSequence> data{seq_of(rows)};
    KMeansOptions o;
    o.k = 2;
    o.seed = static_cast<std::uint64_t>(trial);
    o.tol = 0;
    o.n_init = 10;
    const auto cb = train_kmeans(InMemoryFeatures(data), o);
    const double best = brute_two_means(pts);
    CHECK(cb.final_inertia >= best - 1e-6);
    if (cb.final_inertia <= best + 1e-6) ++optimal;
    // fixed point: every centroid is the mean of the points nearest to it
    const auto ids = assign(cb, data[0]).ids;
    for (std::size_t j = 0; j < 2; ++j) {
      double sx = 0, sy = 0;
      int n = 0;
      for (std::size_t i = 0; i < 8; ++i) {
        if (ids[i] == j) {
          sx += rows[i][0];
          sy += rows[i][1];
          ++n;
        }
      }
      if (n == 0) continue;
      CHECK(cb.centroids(j, 0) == doctest::Approx(sx / n).epsilon(1e-5));
      CHECK(cb.centroids(j, 1) == doctest::Approx(sy / n).epsilon(1e-5));
    }
  }
  CHECK(optimal >= 28);
}

TEST_CASE("inertia never increases across Lloyd iterations") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng r(seed);
    const auto data = gaussian_frames(r, 4, 100, 3);
    KMeansOptions o;
    o.k = 8;
    o.seed = seed;
    o.tol = 0;
    o.init = seed % 2 ? KMeansInit::random : KMeansInit::kmeanspp;
    KMeansTrace tr;
    const auto cb = train_kmeans(InMemoryFeatures(data), o, &tr);
    for (std::size_t i = 1; i < tr.inertia.size(); ++i) CHECK(tr.inertia[i] <= tr.inertia[i - 1] * (1 + 1e-12));
    CHECK(cb.final_inertia <= tr.inertia.back() * (1 + 1e-9));
  }
}

TEST_CASE("well separated clusters are recovered exactly") {
  const Alphabet ab("abcdefghijklmnopqrstuvwxyz .,'");
  SynthOptions so;
  so.seed = 99;
  const std::string text = "the quick brown fox jumps over the lazy dog, it's a zebra.";
  std::vector<FeatureSequence> data;
  for (int i = 0; i < 4; ++i) data.push_back(synth_features("u" + std::to_string(i), text, ab, so));
  KMeansOptions o;
  o.k = ab.size();
  o.seed = 5;
  // all 30 symbols must occur
  std::set<char32_t> seen(text.begin(), text.end());
  REQUIRE(seen.size() == 30);
  const auto cb = train_kmeans(InMemoryFeatures(data), o);
  CHECK(cb.final_inertia == 0.0);
  std::map<int, std::set<UnitId>> sym_to_ids;
  std::map<UnitId, std::set<int>> id_to_syms;
  const auto labels = synth_frame_labels(text, ab, so.frames_per_symbol);
  const auto ids = assign(cb, data[0]).ids;
  for (std::size_t t = 0; t < ids.size(); ++t) {
    sym_to_ids[labels[t]].insert(ids[t]);
    id_to_syms[ids[t]].insert(labels[t]);
  }
  CHECK(sym_to_ids.size() == 30);
  CHECK(id_to_syms.size() == 30);
  for (const auto& [s, v] : sym_to_ids) CHECK(v.size() == 1);
}

TEST_CASE("assignment rules") {
  Codebook cb;
  cb.centroids = Matrix(8, 2);
  for (std::size_t j = 0; j < 8; ++j) {
    cb.centroids(j, 0) = static_cast<float>(j);
    cb.centroids(j, 1) = 0.0f;
  }
  CHECK(assign(cb, seq_of({{7, 0}})).ids == std::vector<UnitId>{7});

  Codebook tie;
  tie.centroids = Matrix(6, 1, std::vector<float>{10, 11, -1, 12, 13, 1});
  CHECK(assign(tie, seq_of({{0}})).ids == std::vector<UnitId>{2});

  CHECK_THROWS_AS(assign(cb, seq_of({{1, 2, 3}})), Error);
}

TEST_CASE("assignment agrees with a brute-force scan") {
  Rng r(8);
  Codebook cb;
  cb.centroids = Matrix(50, 6);
  for (auto& v : cb.centroids.data()) v = static_cast<float>(r.normal());
  const auto data = gaussian_frames(r, 1, 100, 6);
  const auto got = assign(cb, data[0], 3).ids;
  REQUIRE(got.size() == 100);
  for (std::size_t t = 0; t < 100; ++t) CHECK(got[t] == brute_nearest(cb.centroids, data[0].frames.row(t)));
}

TEST_CASE("large codebooks match the brute-force scan, ties included") {
  // offsets stress cancellation in the |x|^2 - 2x.c + |c|^2 expansion
  for (const float offset : {0.0f, 1000.0f}) {
    Rng r(21);
    const std::size_t k = 300, dim = 24, n = 700;
    Codebook cb;
    cb.centroids = Matrix(k, dim);
    for (auto& v : cb.centroids.data()) v = offset + static_cast<float>(r.normal());
    // exact duplicates so ties go to the lower index
    for (std::size_t j = 200; j < k; ++j) {
      for (std::size_t i = 0; i < dim; ++i) cb.centroids(j, i) = cb.centroids(j - 200, i);
    }
    FeatureSequence seq;
    seq.frames = Matrix(n, dim);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t a = r.below(k), b = r.below(k);
      for (std::size_t i = 0; i < dim; ++i) {
        float v;
        switch (t % 3) {
          case 0: v = cb.centroids(a, i); break;                                           // on a centroid
          case 1: v = 0.5f * (cb.centroids(a, i) + cb.centroids(b, i)); break;             // near a tie
          default: v = offset + static_cast<float>(r.normal()); break;
        }
        seq.frames(t, i) = v;
      }
    }
    for (unsigned w : {1u, 3u}) {
      const auto got = assign(cb, seq, w).ids;
      REQUIRE(got.size() == n);
      std::size_t mismatches = 0;
      for (std::size_t t = 0; t < n; ++t) mismatches += got[t] != brute_nearest(cb.centroids, seq.frames.row(t));
      CHECK(mismatches == 0);
      for (UnitId id : got) CHECK(id < 200);
    }
  }
}

TEST_CASE("training errors") {
  const std::vector<FeatureSequence> three{seq_of({{0}, {1}, {2}})};
  KMeansOptions o;
  o.k = 4;
  try {
    train_kmeans(InMemoryFeatures(three), o);
    FAIL("expected capacity error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::capacity);
  }
  const std::vector<FeatureSequence> none;
  try {
    train_kmeans(InMemoryFeatures(none), o);
    FAIL("expected empty-input error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_input);
  }
  const std::vector<FeatureSequence> mixed{seq_of({{0, 1}}), seq_of({{0, 1, 2}})};
  o.k = 1;
  CHECK_THROWS_AS(train_kmeans(InMemoryFeatures(mixed), o), Error);
}

TEST_CASE("worker count does not change the codebook") {
  Rng r(4);
  const auto data = gaussian_frames(r, 3, 4000, 16);
  KMeansOptions o;
  o.k = 40;
  o.seed = 1;
  o.max_iters = 5;
  o.workers = 1;
  const auto a = train_kmeans(InMemoryFeatures(data), o);
  o.workers = 4;
  const auto b = train_kmeans(InMemoryFeatures(data), o);
  CHECK(a == b);
  CHECK(assign(a, data[0], 1) == assign(a, data[0], 4));
}

TEST_CASE("mini-batch and restarts") {
  Rng r(12);
  const auto data = gaussian_frames(r, 2, 300, 4);
  KMeansOptions o;
  o.k = 5;
  o.minibatch_size = 64;
  o.max_iters = 20;
  const auto mb = train_kmeans(InMemoryFeatures(data), o);
  CHECK(mb.k() == 5);
  CHECK(mb.centroids.all_finite());

  o.minibatch_size = 0;
  o.n_init = 1;
  const auto one = train_kmeans(InMemoryFeatures(data), o);
  o.n_init = 4;
  const auto best = train_kmeans(InMemoryFeatures(data), o);
  CHECK(best.final_inertia <= one.final_inertia * 1.05);
}

TEST_CASE("manifest streaming matches in-memory data") {
  testutil::TempDir dir("km");
  Rng r(2);
  const auto data = gaussian_frames(r, 3, 30, 4);
  Manifest m;
  for (std::size_t i = 0; i < data.size(); ++i) {
    UtteranceRecord rec;
    rec.id = "u" + std::to_string(i);
    rec.feature_path = rec.id + ".spfe";
    write_features(data[i], dir / rec.feature_path);
    m.push_back(rec);
  }
  KMeansOptions o;
  o.k = 3;
  o.seed = 9;
  CHECK(train_kmeans(ManifestFeatures(m, dir.path()), o) == train_kmeans(InMemoryFeatures(data), o));
}

TEST_CASE("codebook files") {
  testutil::TempDir dir("km");
  Rng r(6);
  for (int i = 0; i < 20; ++i) {
    Codebook cb;
    cb.centroids = Matrix(1 + r.below(10), 1 + r.below(5));
    for (auto& v : cb.centroids.data()) v = static_cast<float>(r.normal());
    cb.iterations_run = static_cast<int>(r.below(100));
    cb.final_inertia = r.uniform01() * 1000;
    cb.feature_source = i % 2 ? "subset.jsonl" : "";
    CHECK(decode_codebook(encode_codebook(cb)) == cb);
  }
  Codebook cb;
  cb.centroids = Matrix(2, 2, 1.5f);
  save_codebook(cb, dir / "c.spkm");
  CHECK(load_codebook(dir / "c.spkm") == cb);

  auto bytes = encode_codebook(cb);
  auto bad = bytes;
  bad[1] = 'X';
  CHECK_THROWS_AS(decode_codebook(bad), Error);
  bad = bytes;
  bad[4] = 9;
  try {
    decode_codebook(bad);
    FAIL("expected format error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::format);
  }
  CHECK_THROWS_AS(decode_codebook(bytes.substr(0, 20)), Error);
}

TEST_CASE("default codebook size") { CHECK(kDefaultCodebookSize == 5000); }
