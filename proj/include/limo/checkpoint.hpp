#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace limo {

// "LIMO1" container: magic, little-endian int32 header (model dims), then
// named row-major float32 blocks with length prefixes. Readers validate
// every shape against the header before accepting weights.
struct Checkpoint {
  std::vector<std::int32_t> header;
  std::vector<std::pair<std::string, std::vector<float>>> blocks;

  const std::vector<float>& block(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// 64-bit FNV-1a digest of a file's bytes, as fixed-width hex; used for
// run-id provenance.
std::string file_digest(const std::string& path);

}  // namespace limo
