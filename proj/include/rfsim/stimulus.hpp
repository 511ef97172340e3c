#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "rfsim/circuit.hpp"

namespace rfsim {

enum class Polarity { Excitatory, Inhibitory };

/// Constant-input interval [t_start, t_end). V_exc is the effective
/// excitatory gate drive (V_DD minus the pin voltage), V_inh the inhibitory
/// pin voltage.
struct Segment {
  double t_start = 0.0;
  double t_end = 0.0;
  double V_exc = 0.0;
  double V_inh = 0.0;
  /// Marks a held (step-like) input: the damping reference follows the
  /// shifted equilibrium while this segment is active.
  bool sustained = false;

  bool operator==(const Segment&) const = default;
};

/// One constant-rate block of a spiking chirp.
struct FrequencyBlock {
  double frequency = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  bool operator==(const FrequencyBlock&) const = default;
};

/// Piecewise-constant synaptic input. Segments tile [0, duration]; beyond
/// duration the last segment's inputs persist. Immutable once built.
class StimulusProgram {
 public:
  StimulusProgram() : StimulusProgram(0.0) {}
  /// Zero input over [0, duration].
  explicit StimulusProgram(double duration);
  /// Validates tiling and merges adjacent segments with identical inputs.
  explicit StimulusProgram(std::vector<Segment> segments, std::vector<FrequencyBlock> blocks = {});

  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<FrequencyBlock>& blocks() const { return blocks_; }
  double duration() const { return segments_.back().t_end; }

  /// Segment start times (the first is always 0).
  std::vector<double> breakpoints() const;
  /// Smallest boundary strictly greater than t (segment start or duration),
  /// or +inf.
  double next_boundary(double t) const;
  /// Segment active at t (right-open intervals; last segment for t >= duration).
  const Segment& at(double t) const;
  std::size_t index_at(double t) const;
  /// Chirp block index active at t, if any.
  std::optional<std::size_t> block_at(double t) const;

  /// Throws ConfigError unless every voltage lies in [0, V_DD].
  void validate(double V_DD) const;

  bool operator==(const StimulusProgram&) const = default;

 private:
  std::vector<Segment> segments_;
  std::vector<FrequencyBlock> blocks_;
};

/// off / on / off around [t0, t0 + width). The program lasts `duration`
/// (at least t0 + width).
StimulusProgram pulse(double t0, double width, double amplitude, Polarity polarity,
                      double duration);

/// baseline on [0, t0), level afterwards (marked sustained).
StimulusProgram step(double t0, double baseline, double level, Polarity polarity, double duration);

enum class ChirpSpacing { Geometric, Linear };

struct ChirpSpec {
  double f_start = 131.0;
  double f_end = 262.0;
  int n_freqs = 13;
  int spikes_per_freq = 10;
  double pulse_width = 100e-6;
  double amplitude = 0.5;
  Polarity polarity = Polarity::Inhibitory;
  ChirpSpacing spacing = ChirpSpacing::Geometric;
};

std::vector<double> chirp_frequencies(const ChirpSpec& spec);

/// Pulse trains at n_freqs rising frequencies, spikes_per_freq pulses each,
/// starting at t = 0. Block boundaries are kept on the program.
StimulusProgram spiking_chirp(const ChirpSpec& spec);

/// Rows of `t_start,t_end,V_exc,V_inh` (header line optional).
StimulusProgram load_stimulus_csv(const std::filesystem::path& path);

/// Voltage-controlled synaptic current sources.
struct SynapseModel {
  double I_s0_exc = 0.0;
  double I_s0_inh = 0.0;
  double kappa = 0.7;
  double U_T = 0.02585;

  static SynapseModel from(const CircuitParams& p) {
    return {p.I_s0_exc, p.I_s0_inh, p.kappa_n, p.U_T};
  }
};

/// I_s0_exc (e^{kappa V_exc / U_T} - 1) - I_s0_inh (e^{kappa V_inh / U_T} - 1),
/// or 0 while the handshake holds the neuron.
double synapse_current(double V_exc, double V_inh, const SynapseModel& m, bool clamped);

}  // namespace rfsim
