#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlcf/core/image.hpp"

namespace rlcf::service {

// Thread-safe content-addressed PNG store. Ids are content_id(PNG bytes).
// Reads fall back to an on-disk directory; writes go to memory unless the
// store was opened writable.
class ImageStore {
public:
  explicit ImageStore(std::filesystem::path dir = {}, bool write_to_disk = false);

  std::string put(const Image &image);
  std::string put_png(std::vector<std::uint8_t> png);
  std::optional<std::vector<std::uint8_t>> get(const std::string &id) const;
  std::optional<Image> get_image(const std::string &id) const;

private:
  std::filesystem::path dir_;
  bool write_to_disk_;
  mutable std::mutex mutex_;
  std::map<std::string, std::vector<std::uint8_t>> memory_;
};

// URL path under which the service exposes a stored image.
inline std::string image_url(const std::string &id) { return "/images/" + id + ".png"; }

struct Artifact {
  std::string kind; // env | agent | dataset | generator | report | highlights
  std::string id;
  std::string path; // relative to the workspace root
  std::string sha256;
  nlohmann::json meta = nlohmann::json::object();
};

// On-disk layout shared by the CLI and the service:
//   envs/ agents/ datasets/ checkpoints/ reports/ highlights/ images/
//   index.json   artifacts with content hashes
class Workspace {
public:
  explicit Workspace(std::filesystem::path root);

  // $RLCF_WORKSPACE, else ./workspace
  static std::filesystem::path default_root();

  const std::filesystem::path &root() const { return root_; }
  std::filesystem::path dir(const std::string &name) const { return root_ / name; }

  // Hashes the file and adds or replaces the index entry.
  const Artifact &record(const std::string &kind, const std::string &id,
                         const std::filesystem::path &file, nlohmann::json meta = {});
  std::optional<Artifact> find(const std::string &kind, const std::string &id) const;
  std::vector<Artifact> list(const std::string &kind) const;
  std::filesystem::path resolve(const Artifact &a) const { return root_ / a.path; }

  // Missing files and hash mismatches; empty when the index is consistent.
  std::vector<std::string> verify() const;

  ImageStore &images() { return images_; }

private:
  void load_index();
  void save_index() const;

  std::filesystem::path root_;
  std::vector<Artifact> artifacts_;
  ImageStore images_;
};

} // namespace rlcf::service
