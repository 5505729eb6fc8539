#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adaptcs/encoder.hpp"

namespace adaptcs {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  EncoderState state;  // config, dimensions and parameters; no cache
  DenseMatrix unit_hidden;
  std::string config_echo;
  std::uint64_t dataset_hash = 0;
  int epochs_run = 0;
  int best_epoch = -1;
  std::vector<double> train_losses;
  std::vector<double> val_losses;
};

Checkpoint make_checkpoint(const TrainResult& trained, std::uint64_t dataset_hash,
                           std::string config_echo);

/// Writes the binary container at path and a JSON sidecar at path + ".json".
///
/// Container: "ACKP" | version u32 | config echo | seed u64 | encoder config |
/// d u64 | c u32 | tensor count u32 | (name, dense)* | unit_hidden dense |
/// dataset hash u64, all little-endian.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// Reads the binary container (the sidecar is informational). Throws ParseError on
/// malformed files.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace adaptcs
