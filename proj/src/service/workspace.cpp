#include "rlcf/service/workspace.hpp"

#include <cstdlib>
#include <fstream>

#include "rlcf/core/error.hpp"
#include "rlcf/core/hash.hpp"
#include "rlcf/core/png.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rlcf::service {
namespace {

bool valid_image_id(const std::string &id) {
  if (id.size() != 16)
    return false;
  for (char c : id)
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')))
      return false;
  return true;
}

} // namespace

ImageStore::ImageStore(fs::path dir, bool write_to_disk)
    : dir_(std::move(dir)), write_to_disk_(write_to_disk) {}

std::string ImageStore::put(const Image &image) { return put_png(png::encode(image)); }

std::string ImageStore::put_png(std::vector<std::uint8_t> bytes) {
  const std::string id = content_id(bytes);
  std::lock_guard lock(mutex_);
  if (write_to_disk_ && !dir_.empty()) {
    const fs::path p = dir_ / (id + ".png");
    if (!fs::exists(p)) {
      fs::create_directories(dir_);
      std::ofstream out(p, std::ios::binary);
      out.write(reinterpret_cast<const char *>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
    }
  } else {
    memory_.emplace(id, std::move(bytes));
  }
  return id;
}

std::optional<std::vector<std::uint8_t>> ImageStore::get(const std::string &id) const {
  if (!valid_image_id(id))
    return std::nullopt;
  {
    std::lock_guard lock(mutex_);
    if (auto it = memory_.find(id); it != memory_.end())
      return it->second;
  }
  if (dir_.empty())
    return std::nullopt;
  std::ifstream in(dir_ / (id + ".png"), std::ios::binary);
  if (!in)
    return std::nullopt;
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

std::optional<Image> ImageStore::get_image(const std::string &id) const {
  auto bytes = get(id);
  if (!bytes)
    return std::nullopt;
  return png::decode(*bytes);
}

Workspace::Workspace(fs::path root) : root_(std::move(root)), images_(root_ / "images", true) {
  for (const char *d :
       {"envs", "agents", "datasets", "checkpoints", "reports", "highlights", "images"})
    fs::create_directories(root_ / d);
  load_index();
}

fs::path Workspace::default_root() {
  if (const char *env = std::getenv("RLCF_WORKSPACE"); env && *env)
    return env;
  return fs::current_path() / "workspace";
}

void Workspace::load_index() {
  const fs::path p = root_ / "index.json";
  if (!fs::exists(p))
    return;
  std::ifstream in(p);
  try {
    const json j = json::parse(in);
    for (const auto &a : j.at("artifacts"))
      artifacts_.push_back({a.at("kind"), a.at("id"), a.at("path"), a.at("sha256"),
                            a.value("meta", json::object())});
  } catch (const json::exception &e) {
    throw ConfigError("index", p.string() + ": " + e.what());
  }
}

void Workspace::save_index() const {
  json arr = json::array();
  for (const auto &a : artifacts_)
    arr.push_back({{"kind", a.kind}, {"id", a.id}, {"path", a.path}, {"sha256", a.sha256},
                   {"meta", a.meta}});
  const fs::path tmp = root_ / "index.json.tmp";
  {
    std::ofstream out(tmp);
    out << json{{"artifacts", arr}}.dump(1) << '\n';
  }
  fs::rename(tmp, root_ / "index.json");
}

const Artifact &Workspace::record(const std::string &kind, const std::string &id,
                                  const fs::path &file, json meta) {
  const fs::path abs = fs::absolute(file);
  Artifact a{kind, id, fs::relative(abs, fs::absolute(root_)).generic_string(),
             file_sha256_hex(abs.string()), meta.is_null() ? json::object() : std::move(meta)};
  for (auto &existing : artifacts_)
    if (existing.kind == kind && existing.id == id) {
      existing = std::move(a);
      save_index();
      return existing;
    }
  artifacts_.push_back(std::move(a));
  save_index();
  return artifacts_.back();
}

std::optional<Artifact> Workspace::find(const std::string &kind, const std::string &id) const {
  for (const auto &a : artifacts_)
    if (a.kind == kind && a.id == id)
      return a;
  return std::nullopt;
}

std::vector<Artifact> Workspace::list(const std::string &kind) const {
  std::vector<Artifact> out;
  for (const auto &a : artifacts_)
    if (a.kind == kind)
      out.push_back(a);
  return out;
}

std::vector<std::string> Workspace::verify() const {
  std::vector<std::string> problems;
  for (const auto &a : artifacts_) {
    const fs::path p = resolve(a);
    if (!fs::exists(p))
      problems.push_back(a.kind + " " + a.id + ": missing " + a.path);
    else if (file_sha256_hex(p.string()) != a.sha256)
      problems.push_back(a.kind + " " + a.id + ": hash mismatch for " + a.path);
  }
  return problems;
}

} // namespace rlcf::service
