#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "kpst/core/tensor.hpp"

namespace kpst {

// Binary container of named float32 tensors plus string metadata.
// Used for network checkpoints and backbone weight files. Writes are
// atomic (temp file then rename).
struct Archive {
  std::map<std::string, Tensor> tensors;
  std::map<std::string, std::string> strings;

  bool has_tensor(const std::string& name) const { return tensors.count(name) > 0; }
  const Tensor& tensor(const std::string& name) const;
  std::string string_or(const std::string& name, const std::string& fallback) const;

  void save(const std::filesystem::path& path) const;
  static Archive load(const std::filesystem::path& path);
};

}  // namespace kpst
