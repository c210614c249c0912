#include "pursuitlab/instance_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace pursuitlab {

namespace {

constexpr std::array<char, 8> kMagic{'P', 'L', 'A', 'B', 'I', 'N', 'S', 'T'};
constexpr std::uint64_t kMaxHeader = 1 << 20;

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

void write_u64(std::ostream& out, std::uint64_t v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("instance file truncated");
  return to_little(v);
}

void write_doubles(std::ostream& out, const double* data, Index count) {
  for (Index i = 0; i < count; ++i) write_u64(out, std::bit_cast<std::uint64_t>(data[i]));
}

void read_doubles(std::istream& in, double* data, Index count) {
  for (Index i = 0; i < count; ++i) data[i] = std::bit_cast<double>(read_u64(in));
}

}  // namespace

void write_instance(std::ostream& out, const MeasurementInstance& inst) {
  const Index m = inst.m();
  const Index n = inst.n();
  nlohmann::json header{
      {"m", m},
      {"n", n},
      {"s", inst.truth ? inst.truth->sparsity() : 0},
      {"kind", std::string(to_string(inst.truth ? inst.truth->kind : SignalKind::custom))},
      {"seed", inst.seed},
      {"noise_level", inst.noise_level},
      {"has_truth", inst.truth.has_value()},
  };
  const std::string text = header.dump();
  out.write(kMagic.data(), kMagic.size());
  write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));

  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = inst.phi;
  write_doubles(out, rows.data(), rows.size());
  write_doubles(out, inst.y.data(), m);
  if (inst.truth) write_doubles(out, inst.truth->values.data(), n);
  const Vector<double> noise = inst.noise.size() == m ? inst.noise : Vector<double>::Zero(m);
  write_doubles(out, noise.data(), m);
  if (!out) throw std::runtime_error("failed writing instance");
}

MeasurementInstance read_instance(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error("not an instance file (bad magic)");
  const std::uint64_t length = read_u64(in);
  if (length == 0 || length > kMaxHeader) throw std::runtime_error("instance header length invalid");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw std::runtime_error("instance file truncated");

  const auto header = nlohmann::json::parse(text);
  const Index m = header.at("m").get<Index>();
  const Index n = header.at("n").get<Index>();
  if (m <= 0 || n <= 0) throw std::runtime_error("instance header has non-positive dimensions");

  MeasurementInstance inst;
  inst.seed = header.at("seed").get<std::uint64_t>();
  inst.noise_level = header.at("noise_level").get<double>();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(m, n);
  read_doubles(in, rows.data(), rows.size());
  inst.phi = rows;
  inst.y.resize(m);
  read_doubles(in, inst.y.data(), m);
  if (header.at("has_truth").get<bool>()) {
    Vector<double> x(n);
    read_doubles(in, x.data(), n);
    SparseSignal truth = SparseSignal::from_values(std::move(x));
    truth.kind = signal_kind_from_string(header.at("kind").get<std::string>());
    inst.truth = std::move(truth);
  }
  inst.noise.resize(m);
  read_doubles(in, inst.noise.data(), m);
  return inst;
}

void save_instance(const std::filesystem::path& path, const MeasurementInstance& inst) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_instance(out, inst);
}

MeasurementInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return read_instance(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace pursuitlab
