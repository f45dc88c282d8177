#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace duca {

struct ManifestItem {
  std::string id;
  std::string path;
  std::string label;
  std::optional<int> frame;  // acquisition order, for frame-aware splits
};

// JSON file listing a dataset: a declared class list plus one entry per
// image. Ids must be unique and free of '/', labels drawn from the list.
struct DatasetManifest {
  std::vector<std::string> classes;
  std::vector<ManifestItem> items;

  void validate() const;
  const ManifestItem& item_by_id(const std::string& id) const;

  nlohmann::json to_json() const;
  static DatasetManifest from_json(const nlohmann::json& j);
};

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

}  // namespace duca
