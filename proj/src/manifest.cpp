#include "duca/manifest.hpp"

#include <fstream>
#include <set>

#include "duca/error.hpp"

namespace duca {

void DatasetManifest::validate() const {
  if (classes.empty()) fail(ErrorKind::InvalidInput, "manifest declares no classes");
  std::set<std::string> class_set(classes.begin(), classes.end());
  if (class_set.size() != classes.size()) {
    fail(ErrorKind::InvalidInput, "manifest class list has duplicates");
  }
  std::set<std::string> ids;
  for (const auto& item : items) {
    if (item.id.empty() || item.id.find('/') != std::string::npos) {
      fail(ErrorKind::InvalidInput, "invalid image id: \"" + item.id + "\"");
    }
    if (!ids.insert(item.id).second) {
      fail(ErrorKind::InvalidInput, "duplicate image id: " + item.id);
    }
    if (!class_set.count(item.label)) {
      fail(ErrorKind::InvalidInput,
           "image " + item.id + " has undeclared label \"" + item.label + "\"");
    }
  }
}

const ManifestItem& DatasetManifest::item_by_id(const std::string& id) const {
  for (const auto& item : items) {
    if (item.id == id) return item;
  }
  fail(ErrorKind::InvalidInput, "no manifest item with id " + id);
}

nlohmann::json DatasetManifest::to_json() const {
  nlohmann::json j;
  j["classes"] = classes;
  j["items"] = nlohmann::json::array();
  for (const auto& item : items) {
    nlohmann::json e;
    e["id"] = item.id;
    e["path"] = item.path;
    e["label"] = item.label;
    if (item.frame) e["frame"] = *item.frame;
    j["items"].push_back(std::move(e));
  }
  return j;
}

DatasetManifest DatasetManifest::from_json(const nlohmann::json& j) {
  DatasetManifest m;
  if (!j.contains("classes") || !j.contains("items")) {
    fail(ErrorKind::Format, "manifest JSON needs \"classes\" and \"items\"");
  }
  m.classes = j["classes"].get<std::vector<std::string>>();
  for (const auto& e : j["items"]) {
    ManifestItem item;
    item.id = e.at("id").get<std::string>();
    item.path = e.value("path", std::string{});
    item.label = e.at("label").get<std::string>();
    if (e.contains("frame")) item.frame = e["frame"].get<int>();
    m.items.push_back(std::move(item));
  }
  m.validate();
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::Io, "cannot open manifest " + path.string());
  nlohmann::json j = nlohmann::json::parse(f, nullptr, false);
  if (j.is_discarded()) fail(ErrorKind::Format, path.string() + ": not valid JSON");
  return DatasetManifest::from_json(j);
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) fail(ErrorKind::Io, "cannot write manifest " + path.string());
  f << manifest.to_json().dump(2) << "\n";
}

}  // namespace duca
