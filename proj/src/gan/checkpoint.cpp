#include "rlcf/gan/checkpoint.hpp"

#include <bit>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "rlcf/core/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rlcf::gan {
namespace {

constexpr char kMagic[8] = {'R', 'L', 'C', 'F', 'G', 'A', 'N', '\0'};
static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

std::vector<std::pair<std::string, torch::Tensor>> named_state(GeneratorImpl &g) {
  std::vector<std::pair<std::string, torch::Tensor>> out;
  for (const auto &p : g.named_parameters())
    out.emplace_back(p.key(), p.value());
  for (const auto &b : g.named_buffers())
    out.emplace_back(b.key(), b.value());
  return out;
}

json meta_json(const CheckpointMeta &m) {
  return {{"format", "rlcf-generator"},
          {"version", kCheckpointVersion},
          {"architecture", to_json(m.architecture)},
          {"training", to_json(m.training)},
          {"iteration", m.iteration},
          {"manifest_hash", m.manifest_hash},
          {"seed", m.seed}};
}

CheckpointMeta meta_from(const json &h) {
  if (h.value("format", "") != "rlcf-generator")
    throw ConfigError("checkpoint", "not a generator checkpoint");
  if (h.value("version", 0) != kCheckpointVersion)
    throw ConfigError("checkpoint", "unsupported version " + h.value("version", json()).dump());
  CheckpointMeta m;
  m.architecture = architecture_from_json(h.at("architecture"));
  m.training = training_from_json(h.at("training"));
  m.iteration = h.at("iteration").get<std::int64_t>();
  m.manifest_hash = h.at("manifest_hash").get<std::string>();
  m.seed = h.at("seed").get<std::uint64_t>();
  return m;
}

json read_header(std::ifstream &in, const std::string &path) {
  char magic[8];
  std::uint64_t len = 0;
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw ConfigError("checkpoint", path + " is not a generator checkpoint");
  if (!in.read(reinterpret_cast<char *>(&len), sizeof len) || len > (64u << 20))
    throw ConfigError("checkpoint", path + ": bad header length");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len)))
    throw ConfigError("checkpoint", path + ": truncated header");
  try {
    return json::parse(text);
  } catch (const json::exception &e) {
    throw ConfigError("checkpoint", path + ": " + e.what());
  }
}

} // namespace

void save_checkpoint(const std::string &path, GeneratorImpl &generator,
                     const CheckpointMeta &meta) {
  json header = meta_json(meta);
  json table = json::array();
  std::vector<torch::Tensor> payload;
  std::int64_t offset = 0;
  for (const auto &[name, t] : named_state(generator)) {
    auto f = t.detach().to(torch::kCPU, torch::kFloat32).contiguous();
    table.push_back({{"name", name}, {"shape", f.sizes().vec()}, {"offset", offset}});
    offset += f.numel();
    payload.push_back(f);
  }
  header["tensors"] = table;
  const std::string text = header.dump();

  const fs::path target(path);
  if (target.has_parent_path())
    fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot write checkpoint " + tmp.string());
    const std::uint64_t len = text.size();
    out.write(kMagic, 8);
    out.write(reinterpret_cast<const char *>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto &t : payload)
      out.write(static_cast<const char *>(t.data_ptr()),
                static_cast<std::streamsize>(t.numel() * sizeof(float)));
    if (!out)
      throw std::runtime_error("failed writing checkpoint " + tmp.string());
  }
  fs::rename(tmp, target);
}

CheckpointMeta read_checkpoint_meta(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open checkpoint " + path);
  return meta_from(read_header(in, path));
}

LoadedGenerator load_checkpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open checkpoint " + path);
  const json header = read_header(in, path);
  LoadedGenerator out;
  try {
    out.meta = meta_from(header);
  } catch (const json::exception &e) {
    throw ConfigError("checkpoint", path + ": " + e.what());
  }
  out.generator = Generator(out.meta.architecture);

  std::map<std::string, torch::Tensor> slots;
  for (auto &[name, t] : named_state(*out.generator))
    slots.emplace(name, t);
  const auto &table = header.at("tensors");
  if (table.size() != slots.size())
    throw ConfigError("checkpoint", path + ": tensor count does not match the architecture");

  torch::NoGradGuard no_grad;
  for (const auto &entry : table) {
    const auto name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<std::vector<int64_t>>();
    auto it = slots.find(name);
    if (it == slots.end())
      throw ConfigError("checkpoint", path + ": unknown tensor " + name);
    if (it->second.sizes().vec() != shape)
      throw ConfigError("checkpoint", path + ": shape mismatch for " + name);
    auto buf = torch::empty(shape, torch::kFloat32);
    if (!in.read(static_cast<char *>(buf.data_ptr()),
                 static_cast<std::streamsize>(buf.numel() * sizeof(float))))
      throw ConfigError("checkpoint", path + ": truncated weights");
    it->second.copy_(buf);
  }
  out.generator->eval();
  return out;
}

GanTranslator::GanTranslator(const std::string &checkpoint_path, std::string id) {
  auto loaded = load_checkpoint(checkpoint_path);
  generator_ = loaded.generator;
  meta_ = loaded.meta;
  id_ = id.empty() ? fs::path(checkpoint_path).stem().string() : std::move(id);
}

GanTranslator::GanTranslator(Generator generator, CheckpointMeta meta, std::string id)
    : generator_(std::move(generator)), meta_(std::move(meta)), id_(std::move(id)) {}

Translation GanTranslator::translate(const Image &state, ActionId target) const {
  if (target < 0 || target >= num_actions())
    throw std::out_of_range("target action " + std::to_string(target) + " outside 0.." +
                            std::to_string(num_actions() - 1));
  const auto &arch = meta_.architecture;
  const auto dtype = generator_->parameters().front().scalar_type();
  const auto x = image_to_tensor(state, arch).to(dtype);
  const auto a = torch::tensor({static_cast<int64_t>(target)}, torch::kLong);
  std::lock_guard lock(mutex_);
  torch::NoGradGuard no_grad;
  const auto t0 = std::chrono::steady_clock::now();
  Generator g = generator_;
  const auto y = g->forward(x, a);
  const auto t1 = std::chrono::steady_clock::now();
  return {tensor_to_image(y[0], arch), std::chrono::duration<double>(t1 - t0).count()};
}

} // namespace rlcf::gan
