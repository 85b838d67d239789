#pragma once

#include <string>

#include "rescom/model.hpp"

namespace rescom {

// Flat binary: magic "RSCM", version u32, then per tensor: name length u32,
// name bytes, rank u32, dims u32 each, little-endian f32 payload. All
// integers little-endian. Round-trips bit-exactly.
void save_checkpoint(SiameseModel& model, const std::string& path);
SiameseModel load_checkpoint(const std::string& path);

}  // namespace rescom
