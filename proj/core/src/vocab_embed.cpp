#include "dsukit/vocab_embed.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "binary_io.hpp"
#include "dsukit/dsu_codec.hpp"
#include "dsukit/error.hpp"
#include "dsukit/log.hpp"
#include "dsukit/rng.hpp"

namespace dsukit {
namespace {

constexpr char kMagic[4] = {'S', 'P', 'E', 'M'};
constexpr std::uint32_t kVersion = 1;
constexpr double kSymmetryTolerance = 1e-8;
constexpr int kJitterRetries = 3;

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot create " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

// Lower-triangular factor L with L * L^T == covariance (+ jitter).
Eigen::MatrixXd factor_covariance(const Eigen::MatrixXd& cov, ExtendReport& report) {
  const auto d = cov.rows();
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    report.factor = CovarianceFactor::cholesky;
    return llt.matrixL();
  }
  const double base = 1e-10 * cov.trace() / static_cast<double>(d);
  double jitter = base;
  for (int attempt = 0; attempt < kJitterRetries && base > 0.0; ++attempt, jitter *= 10.0) {
    Eigen::MatrixXd jittered = cov;
    jittered.diagonal().array() += jitter;
    llt.compute(jittered);
    if (llt.info() == Eigen::Success) {
      report.factor = CovarianceFactor::cholesky_jittered;
      report.jitter = jitter;
      return llt.matrixL();
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  const double min_eig = eig.info() == Eigen::Success ? eig.eigenvalues().minCoeff() : -1.0;
  const double tolerance = std::max(1e-12, 1e-8 * std::abs(cov.trace()) / static_cast<double>(d));
  if (min_eig < -tolerance) {
    throw Error(Errc::numeric, "covariance is not positive semi-definite (min eigenvalue " + std::to_string(min_eig) + ")");
  }
  log_warning("covariance factorization failed after jitter; falling back to diagonal covariance");
  report.factor = CovarianceFactor::diagonal;
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) l(i, i) = std::sqrt(std::max(0.0, cov(i, i)));
  return l;
}

}  // namespace

void EmbeddingTable::validate() const {
  if (vectors.rows() != tokens.size()) {
    throw Error(Errc::validation, "embedding table has " + std::to_string(tokens.size()) + " tokens but " +
                                      std::to_string(vectors.rows()) + " rows");
  }
  std::set<std::string_view> seen;
  for (const auto& t : tokens) {
    if (!seen.insert(t).second) throw Error(Errc::conflict, "duplicate token '" + t + "'");
  }
  if (!vectors.all_finite()) throw Error(Errc::validation, "embedding table contains non-finite values");
}

GaussianInitSpec fit_gaussian(const EmbeddingTable& table, double scale, std::uint64_t seed) {
  if (table.size() < 2) {
    throw Error(Errc::insufficient_data, "need at least 2 embeddings to fit a covariance, got " +
                                             std::to_string(table.size()));
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(Errc::validation, "scale must be positive");
  const auto v = static_cast<Eigen::Index>(table.size());
  const auto d = static_cast<Eigen::Index>(table.dim());
  const Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> rows(
      table.vectors.data().data(), v, d);
  const RowMatrixXd x = rows.cast<double>();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const RowMatrixXd centered = x.rowwise() - mean;
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(v);
  // Exact symmetry regardless of how the product was evaluated.
  cov = (0.5 * (cov + cov.transpose())).eval();
  cov *= scale;

  GaussianInitSpec spec;
  spec.scale = scale;
  spec.seed = seed;
  spec.mean.assign(mean.data(), mean.data() + d);
  spec.covariance.resize(static_cast<std::size_t>(d * d));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) spec.covariance[static_cast<std::size_t>(i * d + j)] = cov(i, j);
  }
  return spec;
}

EmbeddingTable extend_vocab(const EmbeddingTable& table, const std::vector<std::string>& new_tokens,
                            const GaussianInitSpec& spec, ExtendReport* report) {
  table.validate();
  const std::size_t d = table.dim();
  if (spec.dim() != d || spec.covariance.size() != d * d) {
    throw Error(Errc::validation, "Gaussian spec dimension " + std::to_string(spec.dim()) +
                                      " does not match table dimension " + std::to_string(d));
  }
  if (!(spec.scale > 0.0)) throw Error(Errc::validation, "scale must be positive");

  std::set<std::string_view> existing(table.tokens.begin(), table.tokens.end());
  for (const auto& t : new_tokens) {
    if (!existing.insert(t).second) throw Error(Errc::conflict, "token '" + t + "' already exists");
  }

  ExtendReport local;
  ExtendReport& rep = report ? *report : local;
  rep = ExtendReport{};
  rep.added = new_tokens.size();

  EmbeddingTable out = table;
  if (new_tokens.empty()) return out;

  const auto n = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      cov(i, j) = spec.covariance[static_cast<std::size_t>(i * n + j)];
      if (!std::isfinite(cov(i, j))) throw Error(Errc::numeric, "covariance contains non-finite values");
    }
  }
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
    throw Error(Errc::validation, "covariance is not symmetric");
  }
  const Eigen::MatrixXd l = factor_covariance(cov, rep);
  const Eigen::Map<const Eigen::VectorXd> mean(spec.mean.data(), n);

  Rng rng(derive_seed(spec.seed, std::string_view("extend-vocab")));
  Eigen::VectorXd z(n);
  std::vector<float> row(d);
  out.vectors.reserve_rows(table.size() + new_tokens.size());
  for (const auto& token : new_tokens) {
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
    const Eigen::VectorXd sample = mean + l.triangularView<Eigen::Lower>() * z;
    for (std::size_t i = 0; i < d; ++i) row[i] = static_cast<float>(sample(static_cast<Eigen::Index>(i)));
    out.vectors.append_row(row);
    out.tokens.push_back(token);
  }
  return out;
}

std::vector<std::string> unit_token_names(std::size_t k, std::int64_t index_base) {
  std::vector<std::string> names;
  names.reserve(k);
  for (std::size_t i = 0; i < k; ++i) names.push_back(unit_token(static_cast<UnitId>(i), index_base));
  return names;
}

std::string encode_embeddings(const EmbeddingTable& table) {
  table.validate();
  std::ostringstream out(std::ios::binary);
  out.write(kMagic, 4);
  detail::put<std::uint32_t>(out, kVersion);
  detail::put<std::uint64_t>(out, table.size());
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(table.dim()));
  for (const auto& t : table.tokens) {
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(t.size()));
    out.write(t.data(), static_cast<std::streamsize>(t.size()));
  }
  detail::put_floats(out, table.vectors.data());
  return std::move(out).str();
}

EmbeddingTable decode_embeddings(std::string_view bytes) {
  if (bytes.size() < 20) throw Error(Errc::format, "embedding file: too short for header");
  std::istringstream in{std::string(bytes), std::ios::binary};
  detail::Reader reader(in, "embedding file");
  if (reader.get_string(4, "magic") != std::string_view(kMagic, 4)) {
    throw Error(Errc::format, "embedding file: bad magic, expected SPEM");
  }
  const auto version = reader.get<std::uint32_t>("version");
  if (version != kVersion) throw Error(Errc::format, "embedding file: unsupported version " + std::to_string(version));
  const auto v = reader.get<std::uint64_t>("V");
  const auto d = reader.get<std::uint32_t>("d");
  if (v > bytes.size() / 4) throw Error(Errc::format, "embedding file: token count exceeds file size");
  EmbeddingTable table;
  table.tokens.reserve(static_cast<std::size_t>(v));
  for (std::uint64_t i = 0; i < v; ++i) {
    const auto len = reader.get<std::uint32_t>("token length");
    if (len > bytes.size()) throw Error(Errc::truncation, "embedding file: token length exceeds file size");
    table.tokens.push_back(reader.get_string(len, "token"));
  }
  if (v * d * sizeof(float) > bytes.size()) {
    throw Error(Errc::truncation, "embedding file: matrix extends past end of file");
  }
  table.vectors = Matrix(static_cast<std::size_t>(v), d);
  reader.get_floats(table.vectors.data(), "embedding matrix");
  if (!reader.at_eof()) throw Error(Errc::format, "embedding file: trailing bytes, count/dimension mismatch");
  try {
    table.validate();
  } catch (const Error& e) {
    throw Error(Errc::format, std::string("embedding file: ") + e.what());
  }
  return table;
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  write_file(path, encode_embeddings(table));
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  return decode_embeddings(read_file(path));
}

EmbeddingTable import_plain_embeddings(const std::filesystem::path& tokens_path,
                                       const std::filesystem::path& matrix_path) {
  EmbeddingTable table;
  {
    std::ifstream in(tokens_path);
    if (!in) throw Error(Errc::io, "cannot open " + tokens_path.string());
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      table.tokens.push_back(line);
    }
  }
  const std::string raw = read_file(matrix_path);
  const std::size_t v = table.tokens.size();
  if (v == 0) throw Error(Errc::format, "token list " + tokens_path.string() + " is empty");
  if (raw.size() % (v * sizeof(float)) != 0) {
    throw Error(Errc::format, "matrix of " + std::to_string(raw.size()) + " bytes is not a multiple of " +
                                  std::to_string(v) + " rows of f32");
  }
  const std::size_t d = raw.size() / (v * sizeof(float));
  std::istringstream in{raw, std::ios::binary};
  detail::Reader reader(in, matrix_path.string());
  table.vectors = Matrix(v, d);
  reader.get_floats(table.vectors.data(), "matrix");
  table.validate();
  return table;
}

void export_plain_embeddings(const EmbeddingTable& table, const std::filesystem::path& tokens_path,
                             const std::filesystem::path& matrix_path) {
  table.validate();
  for (const auto& t : table.tokens) {
    if (t.find('\n') != std::string::npos) throw Error(Errc::validation, "token contains a newline");
  }
  std::ostringstream toks;
  for (const auto& t : table.tokens) toks << t << '\n';
  write_file(tokens_path, toks.str());
  std::ostringstream mat(std::ios::binary);
  detail::put_floats(mat, table.vectors.data());
  write_file(matrix_path, std::move(mat).str());
}

}  // namespace dsukit
