#pragma once

#include <filesystem>

#include "clipfusion/memory/reference_bank.hpp"

namespace clipfusion {

// Single-file bank layout:
//   8 bytes   magic "CFBANK01"
//   8 bytes   header length N, little-endian uint64
//   N bytes   JSON header {"category", "shots", "seed",
//             "tags": [{"tag", "dim", "count", "cells_per_image"}, ...]}
//   then, per tag in header order, count * dim little-endian float32 values.
void save_bank(const std::filesystem::path& path, const ReferenceBank& bank);
ReferenceBank load_bank(const std::filesystem::path& path);

}  // namespace clipfusion
