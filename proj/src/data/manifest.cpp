#include "kpst/data/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "json.hpp"
#include "kpst/core/errors.hpp"

namespace kpst::data {

namespace {

using nlohmann::json;

bool image_ext(const std::filesystem::path& p) {
  std::string e = p.extension().string();
  for (char& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e == ".png" || e == ".jpg" || e == ".jpeg";
}

void scan_split(const std::filesystem::path& dir, const std::string& rel,
                std::vector<std::string>& ids, std::map<std::string, std::string>& paths) {
  if (!std::filesystem::is_directory(dir)) return;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && image_ext(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::string id = f.stem().string();
    if (paths.count(id)) throw DataError("duplicate image id within domain: " + id);
    ids.push_back(id);
    paths[id] = rel + "/" + f.filename().string();
  }
}

json split_json(const std::vector<std::string>& ids) { return json(ids); }

std::vector<std::string> split_from(const json& j) {
  return j.get<std::vector<std::string>>();
}

}  // namespace

DatasetManifest DatasetManifest::scan(const std::filesystem::path& root) {
  DatasetManifest m;
  m.root = root.string();
  scan_split(root / "x" / "train", "x/train", m.train_x, m.paths_x);
  scan_split(root / "x" / "test", "x/test", m.test_x, m.paths_x);
  scan_split(root / "y" / "train", "y/train", m.train_y, m.paths_y);
  scan_split(root / "y" / "test", "y/test", m.test_y, m.paths_y);
  m.validate();
  return m;
}

void DatasetManifest::validate() const {
  auto check = [](const std::vector<std::string>& train, const std::vector<std::string>& test,
                  const std::map<std::string, std::string>& paths, const char* dom) {
    std::set<std::string> tr(train.begin(), train.end());
    if (tr.size() != train.size()) throw DataError(std::string("duplicate train ids in ") + dom);
    for (const auto& id : test) {
      if (tr.count(id)) throw DataError("id in both train and test of " + std::string(dom) + ": " + id);
    }
    for (const auto& id : train)
      if (!paths.count(id)) throw DataError("missing path for id " + id);
    for (const auto& id : test)
      if (!paths.count(id)) throw DataError("missing path for id " + id);
  };
  check(train_x, test_x, paths_x, "x");
  check(train_y, test_y, paths_y, "y");
}

void DatasetManifest::save(const std::filesystem::path& path) const {
  json j;
  j["root"] = root;
  j["train_x"] = split_json(train_x);
  j["train_y"] = split_json(train_y);
  j["test_x"] = split_json(test_x);
  j["test_y"] = split_json(test_y);
  j["counts"] = {{"train_x", train_x.size()},
                 {"train_y", train_y.size()},
                 {"test_x", test_x.size()},
                 {"test_y", test_y.size()}};
  j["paths_x"] = paths_x;
  j["paths_y"] = paths_y;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("bad manifest " + path.string() + ": " + e.what());
  }
  DatasetManifest m;
  m.root = j.value("root", "");
  m.train_x = split_from(j.at("train_x"));
  m.train_y = split_from(j.at("train_y"));
  m.test_x = split_from(j.at("test_x"));
  m.test_y = split_from(j.at("test_y"));
  m.paths_x = j.at("paths_x").get<std::map<std::string, std::string>>();
  m.paths_y = j.at("paths_y").get<std::map<std::string, std::string>>();
  m.validate();
  return m;
}

std::filesystem::path DatasetManifest::path_of(const std::string& id, char domain) const {
  const auto& paths = domain == 'x' ? paths_x : paths_y;
  auto it = paths.find(id);
  if (it == paths.end()) throw DataError("unknown image id: " + id);
  return std::filesystem::path(root) / it->second;
}

std::optional<landmarks::LandmarkSet> LandmarkCache::find(const std::string& id) const {
  auto it = entries.find(id);
  if (it == entries.end()) return std::nullopt;
  return it->second;
}

void LandmarkCache::put(landmarks::LandmarkSet lm) {
  std::string id = lm.image_id;
  entries[id] = std::move(lm);
}

void LandmarkCache::save(const std::filesystem::path& path) const {
  json j;
  for (const auto& [id, lm] : entries) {
    json pts = json::array();
    for (const auto& p : lm.pts) pts.push_back({p[0], p[1]});
    j[id] = pts;
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump() << "\n";
  }
  std::filesystem::rename(tmp, path);
}

LandmarkCache LandmarkCache::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open landmark cache: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("bad landmark cache " + path.string() + ": " + e.what());
  }
  LandmarkCache cache;
  for (auto it = j.begin(); it != j.end(); ++it) {
    landmarks::LandmarkSet lm;
    lm.image_id = it.key();
    const json& pts = it.value();
    if (pts.size() != 68) throw DataError("landmark cache entry is not 68 points: " + it.key());
    for (int i = 0; i < 68; ++i) {
      lm.set(i, pts[static_cast<size_t>(i)][0].get<float>(),
             pts[static_cast<size_t>(i)][1].get<float>());
    }
    cache.entries[it.key()] = std::move(lm);
  }
  return cache;
}

}  // namespace kpst::data
