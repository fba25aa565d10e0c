#pragma once

#include <filesystem>

#include "deephedge/neural.hpp"

namespace deephedge {

// Flat binary checkpoint, little-endian throughout:
//   magic   char[8]  "DHCKPT01"
//   version u32      1
//   n_tasks, embed_dim, n_features, n_hidden   i32 each
//   hidden widths    i32[n_hidden]
//   embedding        f64[n_tasks * embed_dim], row-major
//   per layer (hidden..., output): weights f64[out * in] row-major,
//                                  biases  f64[out]
// save followed by load is bit-exact.
void save_checkpoint(const std::filesystem::path& file, const NetworkParams& params);
NetworkParams load_checkpoint(const std::filesystem::path& file);

}  // namespace deephedge
