#include "pursuitlab/problem_gen.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pursuitlab {

namespace {
constexpr std::uint64_t kMatrixTag = 1;
constexpr std::uint64_t kSignalTag = 2;
constexpr std::uint64_t kNoiseTag = 3;
}  // namespace

std::string_view to_string(SignalKind kind) {
  switch (kind) {
    case SignalKind::gaussian: return "gaussian";
    case SignalKind::cars: return "cars";
    case SignalKind::custom: return "custom";
  }
  return "custom";
}

SignalKind signal_kind_from_string(std::string_view name) {
  if (name == "gaussian") return SignalKind::gaussian;
  if (name == "cars") return SignalKind::cars;
  if (name == "custom") return SignalKind::custom;
  throw std::invalid_argument("unknown signal kind '" + std::string(name) +
                              "' (expected gaussian, cars or custom)");
}

double SparseSignal::min_magnitude() const {
  double xi = std::numeric_limits<double>::infinity();
  for (Index i : support)
    if (values(i) != 0.0) xi = std::min(xi, std::abs(values(i)));
  return xi;
}

SparseSignal SparseSignal::from_values(Vector<double> values) {
  SparseSignal out;
  out.support = support_of(values);
  out.values = std::move(values);
  out.kind = SignalKind::custom;
  return out;
}

Matrix<double> gaussian_matrix(Index m, Index n, const RngStream& stream) {
  if (m <= 0 || n <= 0)
    throw std::invalid_argument("gaussian_matrix: dimensions must be positive");
  if (m >= n)
    throw std::invalid_argument("gaussian_matrix: need m < n, got m=" + std::to_string(m) +
                                ", n=" + std::to_string(n));
  Rng rng(stream);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  Matrix<double> phi(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) phi(i, j) = scale * rng.normal();
  return phi;
}

SparseSignal sparse_signal(Index n, Index s, SignalKind kind, const RngStream& stream) {
  if (s <= 0 || s > n)
    throw std::invalid_argument("sparse_signal: need 1 <= s <= n, got s=" + std::to_string(s) +
                                ", n=" + std::to_string(n));
  if (kind == SignalKind::custom)
    throw std::invalid_argument("sparse_signal: custom signals are not generated");
  Rng rng(stream);

  // Partial Fisher-Yates: the first s slots are a uniform s-subset.
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < s; ++i) {
    const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(s));

  SparseSignal out;
  out.kind = kind;
  out.values = Vector<double>::Zero(n);
  // Values are drawn in selection order, then the support is sorted.
  for (Index i : pool) {
    double v = kind == SignalKind::cars ? rng.sign() : rng.normal();
    while (v == 0.0) v = rng.normal();
    out.values(i) = v;
  }
  out.support = IndexSet(std::move(pool));
  return out;
}

MeasurementInstance build_instance(Index m, Index n, Index s, SignalKind kind,
                                   double noise_level, const RngStream& stream) {
  if (s > m)
    throw std::invalid_argument("build_instance: need s <= m, got s=" + std::to_string(s) +
                                ", m=" + std::to_string(m));
  if (!(noise_level >= 0.0) || !std::isfinite(noise_level))
    throw std::invalid_argument("build_instance: noise_level must be finite and >= 0");

  MeasurementInstance inst;
  inst.phi = gaussian_matrix(m, n, stream.substream(kMatrixTag));
  SparseSignal x = sparse_signal(n, s, kind, stream.substream(kSignalTag));
  const Vector<double> clean = inst.phi * x.values;
  inst.noise = Vector<double>::Zero(m);
  if (noise_level > 0.0) {
    Rng rng(stream.substream(kNoiseTag));
    for (Index i = 0; i < m; ++i) inst.noise(i) = rng.normal();
    const double raw = inst.noise.norm();
    if (raw > 0.0) inst.noise *= noise_level * clean.norm() / raw;
  }
  inst.y = clean + inst.noise;
  inst.truth = std::move(x);
  inst.seed = stream.master_seed;
  inst.noise_level = noise_level;
  return inst;
}

MeasurementInstance make_instance(Matrix<double> phi, SparseSignal truth) {
  if (truth.values.size() != phi.cols())
    throw std::invalid_argument("make_instance: signal length does not match matrix columns");
  MeasurementInstance inst;
  inst.y = phi * truth.values;
  inst.noise = Vector<double>::Zero(phi.rows());
  inst.phi = std::move(phi);
  inst.truth = std::move(truth);
  return inst;
}

std::uint64_t instance_hash(const MeasurementInstance& inst) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const double* data, Index count) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < static_cast<std::size_t>(count) * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  feed(inst.phi.data(), inst.phi.size());
  feed(inst.y.data(), inst.y.size());
  return h;
}

}  // namespace pursuitlab
