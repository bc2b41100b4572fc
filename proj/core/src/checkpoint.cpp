#include "dotin/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "dotin/errors.hpp"

namespace dotin {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

constexpr char kMagic[8] = {'D', 'O', 'T', 'I', 'N', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw IngestionError("checkpoint " + path.string() + " is truncated");
  }
  return value;
}

}  // namespace

void write_checkpoint(const ParameterStore& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string& name = params.name(i);
    const Tensor& v = params.value(i);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint64_t>(out, v.rows());
    put<std::uint64_t>(out, v.cols());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
}

std::vector<std::pair<std::string, Tensor>> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot read checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IngestionError(path.string() + " is not a checkpoint");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw IngestionError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = get<std::uint32_t>(in, path);
  std::vector<std::pair<std::string, Tensor>> blocks;
  for (std::uint32_t b = 0; b < count; ++b) {
    const auto len = get<std::uint32_t>(in, path);
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw IngestionError("checkpoint " + path.string() + " is truncated");
    const auto rows = get<std::uint64_t>(in, path);
    const auto cols = get<std::uint64_t>(in, path);
    Tensor t(rows, cols);
    if (!in.read(reinterpret_cast<char*>(t.data()),
                 static_cast<std::streamsize>(t.size() * sizeof(double)))) {
      throw IngestionError("checkpoint " + path.string() + " is truncated");
    }
    blocks.emplace_back(std::move(name), std::move(t));
  }
  return blocks;
}

void load_checkpoint(ParameterStore& params, const std::filesystem::path& path) {
  auto blocks = read_checkpoint(path);
  if (blocks.size() != params.size()) {
    throw ConsistencyError("checkpoint has " + std::to_string(blocks.size()) + " blocks, model has " +
                           std::to_string(params.size()) + " parameters");
  }
  for (auto& [name, value] : blocks) {
    Tensor& target = params.value(params.index(name));
    if (target.shape() != value.shape()) {
      throw ConsistencyError("checkpoint block '" + name + "' has shape " + value.shape().str() +
                             ", model expects " + target.shape().str());
    }
    target = std::move(value);
  }
}

}  // namespace dotin
