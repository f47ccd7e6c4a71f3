#include "kpst/core/archive.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "kpst/core/errors.hpp"

namespace kpst {

namespace {

constexpr char kMagic[9] = "KPSTAR01";

template <class T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("archive: truncated file");
  return v;
}

void write_str(std::ostream& os, const std::string& s) {
  write_pod<uint64_t>(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_str(std::istream& is) {
  uint64_t n = read_pod<uint64_t>(is);
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (!is) throw IoError("archive: truncated string");
  return s;
}

}  // namespace

const Tensor& Archive::tensor(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw CheckpointError("archive: missing tensor '" + name + "'");
  return it->second;
}

std::string Archive::string_or(const std::string& name, const std::string& fallback) const {
  auto it = strings.find(name);
  return it == strings.end() ? fallback : it->second;
}

void Archive::save(const std::filesystem::path& path) const {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("archive: cannot write " + tmp.string());
    os.write(kMagic, 8);
    write_pod<uint64_t>(os, tensors.size() + strings.size());
    for (const auto& [name, t] : tensors) {
      write_pod<uint8_t>(os, 0);
      write_str(os, name);
      write_pod<uint32_t>(os, static_cast<uint32_t>(t.ndim()));
      for (int i = 0; i < t.ndim(); ++i) write_pod<int32_t>(os, t.dim(i));
      os.write(reinterpret_cast<const char*>(t.data()),
               static_cast<std::streamsize>(t.numel() * sizeof(float)));
    }
    for (const auto& [name, s] : strings) {
      write_pod<uint8_t>(os, 1);
      write_str(os, name);
      write_str(os, s);
    }
    if (!os) throw IoError("archive: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Archive Archive::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("archive: cannot open " + path.string());
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) {
    throw CheckpointError("archive: bad magic in " + path.string());
  }
  Archive a;
  uint64_t n = read_pod<uint64_t>(is);
  for (uint64_t i = 0; i < n; ++i) {
    uint8_t kind = read_pod<uint8_t>(is);
    std::string name = read_str(is);
    if (kind == 0) {
      uint32_t ndim = read_pod<uint32_t>(is);
      std::vector<int> shape(ndim);
      for (uint32_t d = 0; d < ndim; ++d) shape[d] = read_pod<int32_t>(is);
      Tensor t(shape);
      is.read(reinterpret_cast<char*>(t.data()),
              static_cast<std::streamsize>(t.numel() * sizeof(float)));
      if (!is) throw CheckpointError("archive: truncated tensor '" + name + "'");
      a.tensors.emplace(name, std::move(t));
    } else if (kind == 1) {
      a.strings.emplace(name, read_str(is));
    } else {
      throw CheckpointError("archive: unknown entry kind");
    }
  }
  return a;
}

}  // namespace kpst
