// SPDX-License-Identifier: Apache-2.0
#include "rsad/checkpoint.hpp"

#include <array>
#include <bit>
#include <fstream>

#include "rsad/error.hpp"

namespace rsad {
namespace {

constexpr std::array<char, 4> kMagic{'R', 'S', 'A', 'D'};
// Upper bounds applied before allocating anything read from disk.
constexpr std::uint32_t kMaxDim = 1u << 20;
constexpr std::uint64_t kMaxBlockEntries = 1ull << 28;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }

  void u32(std::uint32_t v) {
    std::array<char, 4> b{};
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out_.write(b.data(), b.size());
  }

  void f64(double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    std::array<char, 8> b{};
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out_.write(b.data(), b.size());
  }

  void dim(std::size_t v, const char* what) {
    if (v > kMaxDim) throw CheckpointShapeError(std::string(what) + " too large to serialize");
    u32(static_cast<std::uint32_t>(v));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw CheckpointTruncatedError(std::string("checkpoint truncated while reading ") + what);
    }
  }

  std::uint8_t u8(const char* what) {
    char c = 0;
    bytes(&c, 1, what);
    return static_cast<std::uint8_t>(c);
  }

  std::uint32_t u32(const char* what) {
    std::array<unsigned char, 4> b{};
    bytes(reinterpret_cast<char*>(b.data()), b.size(), what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }

  double f64(const char* what) {
    std::array<unsigned char, 8> b{};
    bytes(reinterpret_cast<char*>(b.data()), b.size(), what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(v);
  }

  std::uint32_t dim(const char* what) {
    const std::uint32_t v = u32(what);
    if (v > kMaxDim) {
      throw CheckpointShapeError(std::string("checkpoint declares implausible ") + what + " " +
                                 std::to_string(v));
    }
    return v;
  }

 private:
  std::istream& in_;
};

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  ckpt.params.validate_shapes();
  const ModelConfig& c = ckpt.params.config;
  Writer w(out);
  out.write(kMagic.data(), kMagic.size());
  w.u32(kCheckpointVersion);
  w.dim(c.m, "m");
  w.dim(c.w, "w");
  w.dim(c.h, "h");
  w.dim(c.d, "d");
  w.dim(c.mlp_hidden.size(), "mlp depth");
  for (std::size_t width : c.mlp_hidden) w.dim(width, "mlp width");
  w.u8(c.reverse_decoder ? 1 : 0);
  w.f64(ckpt.weights.alpha);
  w.f64(ckpt.weights.beta);
  w.f64(ckpt.weights.gamma);
  if (ckpt.norm_stats.mean.size() != ckpt.norm_stats.stddev.size()) {
    throw CheckpointShapeError("norm stats mean/stddev length mismatch");
  }
  w.dim(ckpt.norm_stats.mean.size(), "channels");
  for (double v : ckpt.norm_stats.mean) w.f64(v);
  for (double v : ckpt.norm_stats.stddev) w.f64(v);
  const auto blocks = ckpt.params.blocks();
  w.dim(blocks.size(), "block count");
  for (const auto& [name, m] : blocks) {
    w.dim(m->rows(), "rows");
    w.dim(m->cols(), "cols");
    for (double v : m->values()) w.f64(v);
  }
  if (!out) throw CheckpointError("checkpoint write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  Reader r(in);
  std::array<char, 4> magic{};
  r.bytes(magic.data(), magic.size(), "magic");
  if (magic != kMagic) throw CheckpointMagicError("not a checkpoint: bad magic bytes");
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw CheckpointVersionError("checkpoint version " + std::to_string(version) +
                                 " unsupported (expected " +
                                 std::to_string(kCheckpointVersion) + ")");
  }

  ModelConfig c;
  c.m = r.dim("m");
  c.w = r.dim("w");
  c.h = r.dim("h");
  c.d = r.dim("d");
  const std::uint32_t depth = r.dim("mlp depth");
  c.mlp_hidden.clear();
  for (std::uint32_t i = 0; i < depth; ++i) c.mlp_hidden.push_back(r.dim("mlp width"));
  c.reverse_decoder = r.u8("reverse flag") != 0;
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw CheckpointShapeError(std::string("checkpoint config invalid: ") + e.what());
  }

  Checkpoint ckpt;
  ckpt.weights.alpha = r.f64("alpha");
  ckpt.weights.beta = r.f64("beta");
  ckpt.weights.gamma = r.f64("gamma");
  const std::uint32_t channels = r.dim("channels");
  if (channels != c.m) {
    throw CheckpointShapeError("norm stats cover " + std::to_string(channels) +
                               " channels, model expects " + std::to_string(c.m));
  }
  ckpt.norm_stats.mean.resize(channels);
  ckpt.norm_stats.stddev.resize(channels);
  for (double& v : ckpt.norm_stats.mean) v = r.f64("norm mean");
  for (double& v : ckpt.norm_stats.stddev) v = r.f64("norm stddev");

  ckpt.params = ModelParams::zeros(c);
  auto blocks = ckpt.params.blocks();
  const std::uint32_t n_blocks = r.dim("block count");
  if (n_blocks != blocks.size()) {
    throw CheckpointShapeError("checkpoint has " + std::to_string(n_blocks) +
                               " blocks, config implies " + std::to_string(blocks.size()));
  }
  for (auto& [name, m] : blocks) {
    const std::uint32_t rows = r.dim("rows");
    const std::uint32_t cols = r.dim("cols");
    if (rows != m->rows() || cols != m->cols()) {
      throw CheckpointShapeError("block " + name + " declared " + std::to_string(rows) + "x" +
                                 std::to_string(cols) + ", expected " + m->shape_str());
    }
    if (static_cast<std::uint64_t>(rows) * cols > kMaxBlockEntries) {
      throw CheckpointShapeError("block " + name + " too large");
    }
    for (double& v : m->values()) v = r.f64(name.c_str());
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace rsad
