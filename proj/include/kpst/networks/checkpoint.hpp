#pragma once

#include <filesystem>
#include <string>

#include "kpst/networks/discriminator.hpp"
#include "kpst/networks/generator.hpp"
#include "kpst/nn/adam.hpp"

namespace kpst::networks {

inline constexpr const char* kCheckpointSchema = "kpst-checkpoint-v1";

// Trainer-side bookkeeping persisted alongside the weights.
struct TrainerSnapshot {
  int epoch = 0;          // epochs completed
  std::string rng_state;  // training RNG, so resume continues the same stream
};

void save_checkpoint(const std::filesystem::path& path, const Generator& g,
                     const Discriminator& dx, const Discriminator& dy,
                     const nn::Adam& g_opt, const nn::Adam& dx_opt,
                     const nn::Adam& dy_opt, const TrainerSnapshot& snap);

// Restores into existing networks (shapes must match). Null optimizer /
// discriminator pointers skip those sections, which inference uses.
// Throws CheckpointError on schema, name, or shape mismatches.
TrainerSnapshot load_checkpoint(const std::filesystem::path& path, Generator& g,
                                Discriminator* dx, Discriminator* dy,
                                nn::Adam* g_opt, nn::Adam* dx_opt, nn::Adam* dy_opt);

}  // namespace kpst::networks
