#pragma once

#include <string>

#include "featurizer.hpp"
#include "net.hpp"

namespace siatext {

// Everything needed to resume classification: the shared parameters, the
// vocabulary they were trained over, and the creation/training settings.
struct Checkpoint {
  Params<float> params;
  TrigramVocabulary vocab;
  NetConfig net;
  float margin = 0.5f;
};

// Binary layout, little-endian throughout: magic "SIAT", u32 version, config
// header, length-prefixed vocabulary entries, raw float32 parameter arrays in
// declared field order, trailing CRC-32 over all preceding bytes. Round-trips
// are bitwise exact.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

inline constexpr uint32_t kCheckpointVersion = 1;

}  // namespace siatext
