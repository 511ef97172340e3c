#include "rfsim/handshake.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "rfsim/errors.hpp"

namespace rfsim {

void HandshakeConfig::validate() const {
  if (!(T_spk > 0.0) || !std::isfinite(T_spk)) throw ConfigError("handshake.T_spk must be > 0");
  for (double d : ack_delays)
    if (!(d >= 0.0) || !std::isfinite(d))
      throw ConfigError("handshake.ack_delays entries must be >= 0");
}

std::pair<NeuronState, SpikeEvent> on_threshold(double t_cross, const NeuronState& s,
                                                const HandshakeConfig& cfg, double V_reset,
                                                double V_th, std::size_t index) {
  if (s.phase != Phase::Oscillate) throw ProtocolError("threshold event while REQ is high");
  double hold = cfg.T_spk;
  if (cfg.mode == AckMode::ScriptedAck) {
    if (index >= cfg.ack_delays.size())
      throw ProtocolError("acknowledge script exhausted at event " + std::to_string(index));
    hold += cfg.ack_delays[index];
  }
  NeuronState held{t_cross, V_reset, V_th, Phase::Clamped};
  return {held, SpikeEvent{index, t_cross, t_cross + hold}};
}

NeuronState release(const NeuronState& s, const SpikeEvent& e) {
  if (s.phase != Phase::Clamped) throw ProtocolError("release without a pending REQ");
  if (s.t < e.t_release) throw ProtocolError("release before acknowledge");
  NeuronState out = s;
  out.phase = Phase::Oscillate;
  return out;
}

Handshake::Handshake(HandshakeConfig cfg, double V_reset, double V_th)
    : cfg_(std::move(cfg)), V_reset_(V_reset), V_th_(V_th) {
  cfg_.validate();
}

std::pair<NeuronState, SpikeEvent> Handshake::on_threshold(double t_cross, const NeuronState& s) {
  if (phase_ != Phase::Oscillate) throw ProtocolError("threshold event while REQ is high");
  if (!events_.empty() && t_cross < events_.back().t_release)
    throw ProtocolError("threshold event before previous release");
  auto out = rfsim::on_threshold(t_cross, s, cfg_, V_reset_, V_th_, events_.size());
  events_.push_back(out.second);
  phase_ = Phase::Clamped;
  return out;
}

NeuronState Handshake::release(const NeuronState& s, double t) {
  if (phase_ != Phase::Clamped) throw ProtocolError("release without a pending REQ");
  NeuronState at = s;
  at.t = t;
  at.phase = Phase::Clamped;
  NeuronState out = rfsim::release(at, events_.back());
  phase_ = Phase::Oscillate;
  return out;
}

RateStats firing_rate(std::span<const SpikeEvent> events, double t_from, double t_to) {
  if (!(t_to > t_from)) throw ConfigError("firing_rate: window must be > 0");
  RateStats r;
  std::vector<double> inv;
  double prev = 0.0;
  for (const SpikeEvent& e : events) {
    if (e.t_req < t_from || e.t_req > t_to) continue;
    if (r.n_events > 0) inv.push_back(1.0 / (e.t_req - prev));
    prev = e.t_req;
    ++r.n_events;
  }
  if (inv.empty()) return r;
  r.defined = true;
  const double n = static_cast<double>(inv.size());
  r.mean = std::accumulate(inv.begin(), inv.end(), 0.0) / n;
  double ss = 0.0;
  for (double f : inv) ss += (f - r.mean) * (f - r.mean);
  r.std = std::sqrt(ss / n);
  return r;
}

RateStats firing_rate(std::span<const SpikeEvent> events, double window) {
  return firing_rate(events, 0.0, window);
}

std::size_t count_event_violations(std::span<const SpikeEvent> events) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].index != i) ++bad;
    if (!(events[i].t_release > events[i].t_req)) ++bad;
    if (i > 0 && events[i].t_req < events[i - 1].t_release) ++bad;
  }
  return bad;
}

}  // namespace rfsim
