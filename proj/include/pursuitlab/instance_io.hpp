#pragma once

#include <filesystem>
#include <iosfwd>

#include "pursuitlab/problem_gen.hpp"

namespace pursuitlab {

// Instance container layout (all integers and floats little-endian):
//   bytes 0..7   magic "PLABINST"
//   bytes 8..15  uint64 header length L
//   next L bytes JSON header {m, n, s, kind, seed, noise_level, has_truth}
//   then float64 arrays: Φ (m·n, row-major), y (m), x (n, only if has_truth), e (m)

void write_instance(std::ostream& out, const MeasurementInstance& inst);
MeasurementInstance read_instance(std::istream& in);

void save_instance(const std::filesystem::path& path, const MeasurementInstance& inst);
MeasurementInstance load_instance(const std::filesystem::path& path);

}  // namespace pursuitlab
