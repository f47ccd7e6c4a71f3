#include "kpst/core/config.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "kpst/core/errors.hpp"

namespace kpst {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Every key the pipeline understands. CLI overrides are rejected against this
// list before any work starts.
const std::array<const char*, 38> kKnownKeys = {
    "seed",
    "data.root",
    "data.out",
    "data.canvas",
    "data.crops",
    "sharpen.enabled",
    "sharpen.A",
    "augment.hflip",
    "augment.blur",
    "augment.noise",
    "augment.noise_sigma",
    "augment.blur_sigma",
    "landmarks.dilation_px",
    "landmarks.cache",
    "landmarks.predictor",
    "perceptual.weights",
    "perceptual.seed",
    "perceptual.style_layers",
    "perceptual.content_layer",
    "train.epochs",
    "train.lr0",
    "train.decay_start_fraction",
    "train.batch_size",
    "train.checkpoint_every",
    "train.out",
    "train.resume",
    "train.log",
    "loss.lambda_cy",
    "loss.lambda_l",
    "loss.lambda_h",
    "loss.lambda_s",
    "loss.lambda_c",
    "loss.lambda_adv",
    "ablation.drop",
    "smoke.dir",
    "smoke.epochs",
    "smoke.pairs",
    "smoke.size",
};

}  // namespace

Config Config::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    c.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return c;
}

void Config::set(const std::string& key, const std::string& value) { kv_[key] = value; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

int64_t Config::get_int(const std::string& key, int64_t fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return std::stoll(it->second);
  } catch (...) {
    throw UsageError("config key '" + key + "': not an integer: " + it->second);
  }
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (...) {
    throw UsageError("config key '" + key + "': not a number: " + it->second);
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw UsageError("config key '" + key + "': not a boolean: " + it->second);
}

std::vector<std::string> Config::get_list(const std::string& key,
                                          const std::vector<std::string>& fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::vector<std::string> out;
  std::istringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

void Config::validate_key(const std::string& key) {
  for (const char* k : kKnownKeys) {
    if (key == k) return;
  }
  throw UsageError("unknown config key: " + key);
}

void Config::validate() const {
  for (const auto& [k, v] : kv_) validate_key(k);
}

}  // namespace kpst
