#include "compnerf/harness/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace compnerf::harness {

namespace {

constexpr char kMagic[4] = {'C', 'N', 'R', 'F'};

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  check(bool(in), "checkpoint: truncated file");
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<uint64_t>(out, s.size());
  out.write(s.data(), std::streamsize(s.size()));
}

std::string read_string(std::istream& in) {
  const uint64_t n = read_pod<uint64_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), std::streamsize(n));
  check(bool(in), "checkpoint: truncated string");
  return s;
}

void write_reals(std::ostream& out, const std::vector<real>& v) {
  write_pod<uint64_t>(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(real)));
}

std::vector<real> read_reals(std::istream& in) {
  const uint64_t n = read_pod<uint64_t>(in);
  std::vector<real> v(n);
  in.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(real)));
  check(bool(in), "checkpoint: truncated block");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  check(bool(out), "checkpoint: cannot write " + path);
  out.write(kMagic, 4);
  write_pod<uint32_t>(out, Checkpoint::kVersion);
  write_pod<uint8_t>(out, uint8_t(sizeof(real)));
  write_pod<int64_t>(out, ckpt.iteration);
  write_pod<int64_t>(out, ckpt.adam_step);
  write_string(out, ckpt.config_text);
  write_string(out, ckpt.rng_state);
  write_pod<uint64_t>(out, ckpt.blocks.size());
  for (const auto& [name, block] : ckpt.blocks) {
    write_string(out, name);
    write_pod<uint64_t>(out, block.shape.size());
    for (const int64_t d : block.shape) write_pod<int64_t>(out, d);
    write_reals(out, block.data);
    write_pod<uint8_t>(out, block.has_moments ? 1 : 0);
    if (block.has_moments) {
      write_reals(out, block.m);
      write_reals(out, block.v);
    }
  }
  check(bool(out), "checkpoint: write failure on " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check(bool(in), "checkpoint: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  check(bool(in) && std::memcmp(magic, kMagic, 4) == 0,
        "checkpoint: " + path + " is not a checkpoint file");
  const uint32_t version = read_pod<uint32_t>(in);
  check(version == Checkpoint::kVersion,
        "checkpoint: version " + std::to_string(version) + " is not supported (expected " +
            std::to_string(Checkpoint::kVersion) + ")");
  const uint8_t scalar = read_pod<uint8_t>(in);
  check(scalar == sizeof(real), "checkpoint: scalar width " + std::to_string(int(scalar)) +
                                    " does not match this build (" +
                                    std::to_string(sizeof(real)) + ")");
  Checkpoint ckpt;
  ckpt.iteration = read_pod<int64_t>(in);
  ckpt.adam_step = read_pod<int64_t>(in);
  ckpt.config_text = read_string(in);
  ckpt.rng_state = read_string(in);
  const uint64_t n_blocks = read_pod<uint64_t>(in);
  for (uint64_t b = 0; b < n_blocks; ++b) {
    const std::string name = read_string(in);
    CheckpointBlock block;
    const uint64_t ndim = read_pod<uint64_t>(in);
    for (uint64_t d = 0; d < ndim; ++d) block.shape.push_back(read_pod<int64_t>(in));
    block.data = read_reals(in);
    check(int64_t(block.data.size()) == numel(block.shape),
          "checkpoint: block " + name + " size does not match its shape");
    block.has_moments = read_pod<uint8_t>(in) != 0;
    if (block.has_moments) {
      block.m = read_reals(in);
      block.v = read_reals(in);
      check(block.m.size() == block.data.size() && block.v.size() == block.data.size(),
            "checkpoint: moment buffers of " + name + " do not match the parameter shape");
    }
    ckpt.blocks.emplace(name, std::move(block));
  }
  return ckpt;
}

void pack_params(Checkpoint& ckpt, const NamedParams& params, const AdamState* adam) {
  if (adam) {
    check(adam->m.empty() || adam->m.size() == params.size(),
          "pack_params: ADAM state does not align with the parameter list");
    ckpt.adam_step = adam->step_count;
  }
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& [name, p] = params[i];
    CheckpointBlock block;
    block.shape = p.shape();
    block.data.assign(p.data().begin(), p.data().end());
    if (adam && !adam->m.empty()) {
      block.has_moments = true;
      block.m = adam->m[i];
      block.v = adam->v[i];
    }
    ckpt.blocks[name] = std::move(block);
  }
}

void unpack_params(const Checkpoint& ckpt, NamedParams& params, AdamState* adam) {
  if (adam) {
    adam->m.assign(params.size(), {});
    adam->v.assign(params.size(), {});
    adam->step_count = ckpt.adam_step;
  }
  for (size_t i = 0; i < params.size(); ++i) {
    auto& [name, p] = params[i];
    const auto it = ckpt.blocks.find(name);
    check(it != ckpt.blocks.end(), "checkpoint: missing parameter block '" + name + "'");
    const CheckpointBlock& block = it->second;
    check(block.shape == p.shape(), "checkpoint: block '" + name + "' has shape " +
                                        shape_str(block.shape) + ", model expects " +
                                        shape_str(p.shape()));
    std::copy(block.data.begin(), block.data.end(), p.mutable_data().begin());
    if (adam) {
      if (block.has_moments) {
        adam->m[i] = block.m;
        adam->v[i] = block.v;
      } else {
        adam->m[i].assign(block.data.size(), real(0));
        adam->v[i].assign(block.data.size(), real(0));
      }
    }
  }
}

Model model_from_checkpoint(const Checkpoint& ckpt) {
  const Config cfg = Config::from_text(ckpt.config_text);
  Rng rng = Rng::seeded(0);  // overwritten immediately below
  Model model = build_model(cfg, rng);
  NamedParams params = model.all_params();
  // Fill every block the checkpoint carries; GNN blocks may be absent in
  // autoencoder-phase checkpoints.
  for (auto& [name, p] : params) {
    const auto it = ckpt.blocks.find(name);
    if (it == ckpt.blocks.end()) continue;
    check(it->second.shape == p.shape(), "checkpoint: block '" + name + "' has shape " +
                                             shape_str(it->second.shape) +
                                             ", model expects " + shape_str(p.shape()));
    std::copy(it->second.data.begin(), it->second.data.end(), p.mutable_data().begin());
  }
  return model;
}

}  // namespace compnerf::harness
