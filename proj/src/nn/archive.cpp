#include "mil/nn/archive.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "mil/common.hpp"

namespace mil::nn {

namespace {
constexpr char kMagic[8] = {'M', 'I', 'L', 'T', 'N', 'S', 'R', '1'};
}

void TensorArchive::add(std::string name, Tensor tensor) {
  entries_.emplace_back(std::move(name), std::move(tensor));
}

bool TensorArchive::contains(const std::string& name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return true;
  return false;
}

const Tensor& TensorArchive::get(const std::string& name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return t;
  throw IoError("archive: missing tensor '" + name + "'");
}

void TensorArchive::save(const std::string& path) const {
  nlohmann::json header;
  header["version"] = 1;
  header["meta"] = meta.is_null() ? nlohmann::json::object() : meta;
  nlohmann::json dir = nlohmann::json::array();
  std::int64_t offset = 0;
  for (const auto& [name, tensor] : entries_) {
    dir.push_back({{"name", name}, {"shape", tensor.shape()}, {"offset", offset}});
    offset += tensor.numel();
  }
  header["tensors"] = dir;
  const std::string header_str = header.dump();

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("archive write failed: " + tmp);
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t len = header_str.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const auto& [name, tensor] : entries_)
      out.write(reinterpret_cast<const char*>(tensor.data()),
                static_cast<std::streamsize>(tensor.numel() * sizeof(real_t)));
    if (!out.flush()) throw IoError("archive write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

namespace {

nlohmann::json read_header(std::ifstream& in, const std::string& path) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw IoError("archive: bad magic in " + path);
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string header_str(len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(len));
  if (!in) throw IoError("archive: truncated header in " + path);
  return nlohmann::json::parse(header_str);
}

}  // namespace

TensorArchive TensorArchive::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("archive read failed: " + path);
  const nlohmann::json header = read_header(in, path);

  TensorArchive ar;
  ar.meta = header.value("meta", nlohmann::json::object());
  for (const auto& entry : header.at("tensors")) {
    Tensor t(entry.at("shape").get<std::vector<std::int64_t>>());
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.numel() * sizeof(real_t)));
    if (!in) throw IoError("archive: truncated payload in " + path);
    ar.add(entry.at("name").get<std::string>(), std::move(t));
  }
  return ar;
}

nlohmann::json TensorArchive::peek_meta(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("archive read failed: " + path);
  return read_header(in, path).value("meta", nlohmann::json::object());
}

}  // namespace mil::nn
