#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kpst/landmarks/landmark_set.hpp"

namespace kpst::data {

// Split bookkeeping for the two domains. Ids are file stems, unique within a
// domain; paths are stored relative to the dataset root.
struct DatasetManifest {
  std::vector<std::string> train_x, train_y, test_x, test_y;
  std::map<std::string, std::string> paths_x, paths_y;  // id -> relative path
  std::string root;

  // Scans root/{x,y}/{train,test}/*.png|jpg|jpeg, sorted for determinism.
  static DatasetManifest scan(const std::filesystem::path& root);

  // Disjoint train/test ids per domain; every id has a path.
  void validate() const;

  void save(const std::filesystem::path& path) const;
  static DatasetManifest load(const std::filesystem::path& path);

  std::filesystem::path path_of(const std::string& id, char domain) const;
};

// Landmark cache: id -> 68 points, stored as one JSON document.
struct LandmarkCache {
  std::map<std::string, landmarks::LandmarkSet> entries;

  bool has(const std::string& id) const { return entries.count(id) > 0; }
  std::optional<landmarks::LandmarkSet> find(const std::string& id) const;
  void put(landmarks::LandmarkSet lm);

  void save(const std::filesystem::path& path) const;
  static LandmarkCache load(const std::filesystem::path& path);
};

}  // namespace kpst::data
