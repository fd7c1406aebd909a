#pragma once

#include "rsl/samplers.hpp"

namespace rsl {

// Straight-line single-threaded implementation of the same update rules,
// using the single-particle building blocks. Produces positions identical to
// run_ensemble bit for bit; kept as a cross-check and benchmark baseline.
EnsembleState run_ensemble_serial(const SamplerConfig& cfg, const TargetModel& target,
                                  const InitSpec& init);

}  // namespace rsl
