#pragma once

#include "vandamp/diagnostics/recorder.hpp"
#include "vandamp/dynamics/integrator.hpp"
#include "vandamp/problem/norms.hpp"

#include <utility>

namespace vandamp {

/// Integrates to config.t_end and returns the diagnostics sampled every
/// config.sample_stride steps. Deterministic: identical inputs give bit-identical
/// records. On a non-finite state the StabilityError carries the partial record.
inline EnergyRecord integrate(const IntegratorConfig& config, const System& sys,
                              const TrajectoryState& initial, RecordOptions options = {}) {
  const NormTriple norms(*sys.problem);
  EnergyRecorder recorder(sys, norms, initial.t, config.t_end, config.dt * config.sample_stride,
                          std::move(options));
  try {
    integrate_with(config, sys, initial, recorder);
  } catch (StabilityError& e) {
    e.attach(recorder.take());
    throw;
  }
  return recorder.take();
}

/// Oracle run: same scheme at dt/10 with the stride scaled so samples land on
/// the coarse run's sample times.
inline EnergyRecord reference_solve(const IntegratorConfig& config, const System& sys,
                                    const TrajectoryState& initial, RecordOptions options = {}) {
  IntegratorConfig fine = config;
  fine.dt = config.dt / 10.0;
  fine.sample_stride = config.sample_stride * 10;
  return integrate(fine, sys, initial, std::move(options));
}

}  // namespace vandamp
