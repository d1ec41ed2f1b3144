#include "sdsr/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "sdsr/core/errors.hpp"

namespace sdsr::nn {

namespace {

constexpr char kMagic[8] = {'S', 'D', 'S', 'R', 'C', 'K', 'P', 'T'};

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ostream& os, uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void write_i32(std::ostream& os, int32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }

void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, uint32_t(s.size()));
  os.write(s.data(), std::streamsize(s.size()));
}

uint32_t read_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
uint64_t read_u64(std::istream& is) {
  uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
int32_t read_i32(std::istream& is) {
  int32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

std::string read_string(std::istream& is) {
  const uint32_t n = read_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), std::streamsize(n));
  return s;
}

CheckpointMeta read_header(std::istream& is, const std::string& path, uint32_t* n_tensors) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw Error(ExitCode::kFailure, "not a checkpoint file: " + path);
  const uint32_t version = read_u32(is);
  if (version != kCheckpointVersion)
    throw Error(ExitCode::kFailure, "unsupported checkpoint version " + std::to_string(version) +
                                        " in " + path);
  CheckpointMeta meta;
  meta.arch_id = read_string(is);
  meta.scale = read_i32(is);
  meta.config_hash = read_u64(is);
  *n_tensors = read_u32(is);
  return meta;
}

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointMeta& meta,
                     const std::vector<Param*>& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ExitCode::kFailure, "cannot write checkpoint: " + path);
  os.write(kMagic, 8);
  write_u32(os, kCheckpointVersion);
  write_string(os, meta.arch_id);
  write_i32(os, meta.scale);
  write_u64(os, meta.config_hash);
  write_u32(os, uint32_t(params.size()));
  for (const Param* p : params) {
    write_string(os, p->name);
    const Shape s = p->value.shape();
    write_i32(os, s.n);
    write_i32(os, s.c);
    write_i32(os, s.h);
    write_i32(os, s.w);
    os.write(reinterpret_cast<const char*>(p->value.data()),
             std::streamsize(sizeof(double) * size_t(p->value.numel())));
  }
  if (!os) throw Error(ExitCode::kFailure, "short write on checkpoint: " + path);
}

CheckpointMeta load_checkpoint(const std::string& path, const std::vector<Param*>& params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingInputError("cannot open checkpoint: " + path);
  uint32_t n_tensors = 0;
  const CheckpointMeta meta = read_header(is, path, &n_tensors);
  if (n_tensors != params.size())
    throw Error(ExitCode::kFailure, "checkpoint " + path + " holds " + std::to_string(n_tensors) +
                                        " tensors, model has " + std::to_string(params.size()));
  for (Param* p : params) {
    const std::string name = read_string(is);
    Shape s;
    s.n = read_i32(is);
    s.c = read_i32(is);
    s.h = read_i32(is);
    s.w = read_i32(is);
    if (name != p->name || !(s == p->value.shape()))
      throw Error(ExitCode::kFailure, "checkpoint tensor mismatch: file has " + name +
                                          s.str() + ", model expects " + p->name +
                                          p->value.shape().str());
    is.read(reinterpret_cast<char*>(p->value.data()),
            std::streamsize(sizeof(double) * size_t(p->value.numel())));
  }
  if (!is) throw Error(ExitCode::kFailure, "truncated checkpoint: " + path);
  return meta;
}

CheckpointMeta peek_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw MissingInputError("cannot open checkpoint: " + path);
  uint32_t n_tensors = 0;
  return read_header(is, path, &n_tensors);
}

}  // namespace sdsr::nn
