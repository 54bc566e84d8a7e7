#pragma once

#include <filesystem>
#include <string>

#include "rh/value_net.hpp"

namespace rh {

// Binary layout, little-endian throughout:
//   "RHNET 1\n"
//   u32 block count
//   per block: u32 name length, name bytes, u32 rows, u32 cols,
//              rows * cols float64 values, row-major
// Besides the parameter blocks the file carries "meta.shape" (node_in,
// edge_in, ego_in, hidden, layers, embed, head widths...) and
// "meta.output" (offset, scale).
std::string encode_checkpoint(const ValueNet& net);
ValueNet decode_checkpoint(const std::string& bytes);  // throws FormatError

// Writes the binary file and `<path>.json` with the shape, parameter count
// and the caller's extra JSON object.
void save_checkpoint(const std::filesystem::path& path, const ValueNet& net,
                     const std::string& extra_json = "{}");
ValueNet load_checkpoint(const std::filesystem::path& path);

}  // namespace rh
