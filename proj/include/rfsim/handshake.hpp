#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "rfsim/circuit.hpp"

namespace rfsim {

enum class AckMode { SelfAck, ScriptedAck };

struct HandshakeConfig {
  AckMode mode = AckMode::SelfAck;
  double T_spk = 100e-6;
  /// Per-event acknowledge latency, consumed in order (ScriptedAck only).
  std::vector<double> ack_delays;

  void validate() const;
};

/// One REQ assertion. The neuron is held from t_req until t_release.
struct SpikeEvent {
  std::size_t index = 0;
  double t_req = 0.0;
  double t_release = 0.0;

  bool operator==(const SpikeEvent&) const = default;
};

/// Four-phase REQ/ACK state machine for a single neuron. Accepts exactly
/// (threshold -> release)*; anything else throws ProtocolError.
class Handshake {
 public:
  Handshake(HandshakeConfig cfg, double V_reset, double V_th);

  /// REQ rises at t_cross: U is reset, V pinned at threshold.
  std::pair<NeuronState, SpikeEvent> on_threshold(double t_cross, const NeuronState& s);
  /// ACK received at `t`; the held state resumes oscillating.
  NeuronState release(const NeuronState& s, double t);

  Phase phase() const { return phase_; }
  const std::vector<SpikeEvent>& events() const { return events_; }
  const SpikeEvent* pending() const { return phase_ == Phase::Clamped ? &events_.back() : nullptr; }

 private:
  HandshakeConfig cfg_;
  double V_reset_;
  double V_th_;
  Phase phase_ = Phase::Oscillate;
  std::vector<SpikeEvent> events_;
};

/// Free-function forms of the transitions for a caller-owned event log.
std::pair<NeuronState, SpikeEvent> on_threshold(double t_cross, const NeuronState& s,
                                                const HandshakeConfig& cfg, double V_reset,
                                                double V_th, std::size_t index);
NeuronState release(const NeuronState& s, const SpikeEvent& e);

struct RateStats {
  double mean = 0.0;  ///< Hz
  double std = 0.0;   ///< Hz
  std::size_t n_events = 0;
  /// False with fewer than two events; mean is then reported as 0.
  bool defined = false;
};

/// Mean and standard deviation of the inverse inter-spike intervals of the
/// events whose REQ falls in [t_from, t_to].
RateStats firing_rate(std::span<const SpikeEvent> events, double t_from, double t_to);
/// Same over [0, window].
RateStats firing_rate(std::span<const SpikeEvent> events, double window);

/// Number of violations of ordering / non-overlap / hold-length rules.
std::size_t count_event_violations(std::span<const SpikeEvent> events);

}  // namespace rfsim
