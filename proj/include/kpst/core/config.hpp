#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace kpst {

// Plain-text key=value configuration. Lines starting with '#' are comments.
// Keys are dotted (e.g. "sharpen.A", "train.epochs").
class Config {
 public:
  Config() = default;

  static Config from_file(const std::filesystem::path& path);
  static Config from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key,
                                    const std::vector<std::string>& fallback) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

  // Throws UsageError when a key is not in the known-key registry.
  static void validate_key(const std::string& key);
  // Validates all keys currently set.
  void validate() const;

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace kpst
