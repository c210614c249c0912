#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "pursuitlab/rng.hpp"
#include "pursuitlab/types.hpp"

namespace pursuitlab {

enum class SignalKind { gaussian, cars, custom };

std::string_view to_string(SignalKind kind);
SignalKind signal_kind_from_string(std::string_view name);

/// Length-N vector with an explicit support.
struct SparseSignal {
  Vector<double> values;
  IndexSet support;
  SignalKind kind{SignalKind::custom};

  Index sparsity() const { return support.size(); }
  /// ξ: smallest nonzero magnitude.
  double min_magnitude() const;

  /// Wraps an arbitrary vector; the support is its nonzero pattern.
  static SparseSignal from_values(Vector<double> values);
};

/// y = Φ·x + e, plus the provenance needed to regenerate it.
struct MeasurementInstance {
  Matrix<double> phi;
  Vector<double> y;
  std::optional<SparseSignal> truth;
  Vector<double> noise;
  std::uint64_t seed{0};
  double noise_level{0.0};

  Index m() const { return phi.rows(); }
  Index n() const { return phi.cols(); }
};

/// m×n with i.i.d. N(0, 1/m) entries, filled column by column.
Matrix<double> gaussian_matrix(Index m, Index n, const RngStream& stream);

/// Support uniform without replacement; nonzeros N(0,1) or uniform ±1.
SparseSignal sparse_signal(Index n, Index s, SignalKind kind, const RngStream& stream);

/// Fresh matrix, signal and noise from three substreams of `stream`. The noise
/// is Gaussian rescaled so that ‖e‖₂ = noise_level·‖Φx‖₂.
MeasurementInstance build_instance(Index m, Index n, Index s, SignalKind kind,
                                   double noise_level, const RngStream& stream);

/// Noiseless instance around a caller-supplied matrix and signal.
MeasurementInstance make_instance(Matrix<double> phi, SparseSignal truth);

/// FNV-1a over the raw bytes of Φ and y.
std::uint64_t instance_hash(const MeasurementInstance& inst);

}  // namespace pursuitlab
