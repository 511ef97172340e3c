#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "rfsim/circuit.hpp"
#include "rfsim/handshake.hpp"
#include "rfsim/integrator.hpp"
#include "rfsim/stimulus.hpp"

namespace rfsim {

enum class Channel { U, V };

struct Peak {
  std::size_t index = 0;
  double t = 0.0;      ///< parabolic-interpolated time
  double value = 0.0;  ///< sample value
};

/// Default prominence for peak detection on noiseless traces, volts.
inline constexpr double kMinProminence = 1e-4;

/// 3-point local maxima (or minima) of one channel at t >= t_from, skipping
/// clamped samples. Prominence is measured against the nearest troughs on
/// either side.
std::vector<Peak> find_peaks(const Trace& tr, Channel ch, double t_from = 0.0,
                             double min_prominence = kMinProminence, bool minima = false);

/// Mean (U, V) over the final settle_window seconds of the trace.
std::pair<double, double> extract_baseline(const Trace& tr, double settle_window);

/// First local maximum of U and of V after t_stim_end, each channel on its
/// own. Throws AnalysisError when a channel has no peak.
std::pair<double, double> extract_first_peak(const Trace& tr, double t_stim_end);

struct FrequencyEstimate {
  double f_peaks = 0.0;  ///< median inverse inter-peak interval
  double f_fft = 0.0;    ///< spectral peak of the tapered, mean-removed signal
  std::size_t n_peaks = 0;
  bool agree = false;    ///< |f_fft - f_peaks| <= 2 % of f_peaks
};

/// Oscillation frequency of V after t_from. Needs at least three peaks.
FrequencyEstimate resonant_frequency(const Trace& tr, double t_from = 0.0,
                                     Channel ch = Channel::V);

/// Peak frequency of a uniformly sampled signal (Hann taper, 8x zero
/// padding, log-parabolic bin interpolation).
double spectral_peak(const std::vector<double>& x, double sample_interval);

struct QEstimate {
  double Q = 0.0;
  double tau = 0.0;  ///< envelope decay time, s
  std::size_t n_peaks = 0;
  bool defined = false;
  bool infinite = false;  ///< envelope does not decay
};

/// Envelope Q: fit ln(peak - baseline) against peak time, slope = -1/tau,
/// Q = pi f_res tau. Requires >= 5 peaks with strictly decreasing amplitude;
/// otherwise the estimate is flagged infinite (non-decaying) or undefined.
QEstimate q_factor(const Trace& tr, double baseline, double f_res, double t_from = 0.0,
                   Channel ch = Channel::V);

/// Centre line of an oscillation: mean of the midpoints between consecutive
/// extrema over the last `pairs` pairs. Alternating midpoints cancel the
/// first-order decay bias.
double oscillation_midline(const Trace& tr, Channel ch, double t_from = 0.0,
                           std::size_t pairs = 8);

struct MetricsRecord {
  double baseline_U = 0.0;
  double baseline_V = 0.0;
  double first_peak_U = 0.0;
  double first_peak_V = 0.0;
  double f_res = 0.0;
  double f_res_fft = 0.0;
  double q_factor = 0.0;
  bool baseline_defined = false;
  bool peak_defined = false;
  bool f_res_defined = false;
  bool f_res_flagged = false;  ///< estimators disagree by more than 2 %
  bool q_defined = false;
  bool q_infinite = false;
};

/// Inhibitory-pulse ringdown from rest.
struct RingdownSpec {
  double t_pulse = 5e-3;
  double width = 100e-6;
  double amplitude = 0.5;
  Polarity polarity = Polarity::Inhibitory;
  double horizon = 0.3;
  double settle_window = 0.02;
  IntegratorConfig integrator;
};

struct RingdownResult {
  StimulusProgram program;
  SimulationResult sim;
  MetricsRecord metrics;
};

/// Metrics of a ringdown trace whose stimulus ended at t_stim_end.
MetricsRecord extract_metrics(const Trace& tr, double t_stim_end, double settle_window);

RingdownResult run_ringdown(const CircuitParams& p, const RingdownSpec& spec,
                            const HandshakeConfig& hs);
RingdownResult run_ringdown(const CircuitParams& p, const RingdownSpec& spec,
                            const HandshakeConfig& hs, const StimulusProgram& program);

struct FiPoint {
  double level = 0.0;
  double rate = 0.0;
  double rate_std = 0.0;
  std::size_t n_spikes = 0;
};

struct FiOptions {
  double timeout = 2.0;
  IntegratorConfig integrator;
  HandshakeConfig handshake;
};

struct FiCurve {
  std::vector<FiPoint> points;
  std::optional<std::size_t> onset;  ///< first level with nonzero rate
  bool overflow = false;
};

/// Excitatory step from 0 V to each level at t = 0, run until
/// spikes_per_point events or the timeout.
FiCurve fi_curve(const CircuitParams& p, const std::vector<double>& levels, int spikes_per_point,
                 const FiOptions& opt = {});

struct TuningMap {
  std::vector<double> bias_levels;
  std::vector<double> vth;
  std::vector<double> frequencies;
  std::vector<double> f_res;  ///< small-signal resonance of each bias row
  std::vector<std::vector<long>> counts;  ///< [bias][frequency block]
  bool overflow = false;

  /// Block with the most spikes in the row; nullopt for an all-zero row.
  std::optional<std::size_t> argmax(std::size_t row) const;
  /// Detected block indices never decrease with bias (all-zero rows skipped).
  bool argmax_monotone() const;
  /// Same check restricted to rows whose f_res lies inside the chirp band.
  bool argmax_monotone_in_band() const;
};

struct TuningOptions {
  IntegratorConfig integrator;
  HandshakeConfig handshake;
};

/// Spike count per chirp block for each (bias, threshold) pair.
TuningMap tuning_map(const CircuitParams& base, const std::vector<double>& bias_levels,
                     const std::vector<double>& vth_schedule, const StimulusProgram& chirp,
                     const TuningOptions& opt = {});

/// Chirp block index of each event's REQ (nullopt outside every block).
std::vector<std::optional<std::size_t>> bin_events(const StimulusProgram& chirp,
                                                   const std::vector<SpikeEvent>& events);

/// Fraction of binned events within +-radius blocks of the block whose
/// frequency is nearest to f. Zero when there are no events.
double block_concentration(const StimulusProgram& chirp, const std::vector<SpikeEvent>& events,
                           double f, std::size_t radius = 1);

/// Thresholds growing exponentially from v_lo to v_hi over n points.
std::vector<double> exponential_schedule(double v_lo, double v_hi, std::size_t n);

/// n log-spaced values from lo to hi inclusive.
std::vector<double> log_space(double lo, double hi, std::size_t n);
std::vector<double> lin_space(double lo, double hi, std::size_t n);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace rfsim
