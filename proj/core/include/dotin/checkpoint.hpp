#ifndef DOTIN_CHECKPOINT_HPP
#define DOTIN_CHECKPOINT_HPP

// Flat binary checkpoint of named parameter blocks, little-endian:
//
//   magic    8 bytes  "DOTINCKP"
//   version  u32      1
//   count    u32      number of blocks
//   block*   u32 name length, name bytes, u64 rows, u64 cols,
//            rows * cols f64 values in row-major order

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dotin/optim.hpp"

namespace dotin {

void write_checkpoint(const ParameterStore& params, const std::filesystem::path& path);

std::vector<std::pair<std::string, Tensor>> read_checkpoint(const std::filesystem::path& path);

/// Every block must match a parameter by name and shape.
void load_checkpoint(ParameterStore& params, const std::filesystem::path& path);

}  // namespace dotin

#endif  // DOTIN_CHECKPOINT_HPP
