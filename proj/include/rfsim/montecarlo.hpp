#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rfsim/analysis.hpp"
#include "rfsim/circuit.hpp"
#include "rfsim/handshake.hpp"

namespace rfsim {

/// Die-to-die mismatch. Threshold-voltage spread of the two exponential
/// devices shows up as log-normal factors on their effective I_n0; the
/// damping conductance is set by a subthreshold device too and gets its own
/// log-normal factor. Capacitors and bias currents get Gaussian relative
/// errors.
struct MismatchModel {
  double sigma_ln_In0_alpha = 0.15;
  double sigma_ln_In0_beta = 0.15;
  double sigma_C = 0.05;
  double sigma_I_bias = 0.2;
  double sigma_ln_g_damp = 0.6;
  std::uint64_t seed = 1;

  void validate() const;
  MismatchModel scaled(double factor) const;
};

struct DieSample {
  CircuitParams params;
  std::size_t resamples = 0;  ///< draws rejected for invalid parameters
};

/// Parameters of die `die_index`; a pure function of (base, model, index).
DieSample sample_die_detailed(const CircuitParams& base, const MismatchModel& m,
                              std::size_t die_index);
CircuitParams sample_die(const CircuitParams& base, const MismatchModel& m, std::size_t die_index);

struct MetricStats {
  double mean = 0.0;
  double std = 0.0;   ///< sample standard deviation
  double cv = 0.0;    ///< percent
  std::size_t n = 0;  ///< dies contributing
  std::size_t n_undefined = 0;
};

struct DieRecord {
  std::size_t index = 0;
  CircuitParams params;
  MetricsRecord metrics;
  std::size_t n_spikes = 0;
  std::size_t resamples = 0;
};

struct PopulationStats {
  MetricStats baseline_U, baseline_V, first_peak_U, first_peak_V, f_res, q_factor;
  std::vector<DieRecord> dies;
  std::size_t resamples = 0;
};

/// mean / std / CV over the defined values.
MetricStats summarize(const std::vector<double>& values, std::size_t n_undefined);

/// Ringdown on every die and per-metric statistics. Dies run concurrently;
/// the result is independent of scheduling.
PopulationStats run_population(const CircuitParams& base, const MismatchModel& m,
                               std::size_t n_dies, const RingdownSpec& experiment,
                               const HandshakeConfig& hs, unsigned workers = 0);

}  // namespace rfsim
