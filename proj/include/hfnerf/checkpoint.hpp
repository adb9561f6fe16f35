#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hfnerf/tensor.hpp"

namespace hfnerf::ad {

using NamedParams = std::vector<std::pair<std::string, Tensor>>;

// Checkpoint layout: magic "HFNERF1\n", then per parameter in list order:
// u32 name length, name bytes, u32 rank, u32 dims[rank], f64 values
// (row-major). All integers and floats little-endian. Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const NamedParams& params);
NamedParams load_checkpoint(const std::string& path);  // tensors come back frozen

}  // namespace hfnerf::ad
