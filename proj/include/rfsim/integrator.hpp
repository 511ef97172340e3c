#pragma once

#include <cstddef>
#include <vector>

#include "rfsim/circuit.hpp"
#include "rfsim/handshake.hpp"
#include "rfsim/stimulus.hpp"

namespace rfsim {

struct IntegratorConfig {
  double dt = 1e-6;
  double t_end = 0.3;
  double crossing_tol = 1e-9;
  int sample_stride = 10;
  /// Stop after the release of this many events (0: run to t_end).
  std::size_t max_events = 0;
  /// Keep the decimated trace. Sweeps that only need events turn this off.
  bool record_trace = true;

  /// Also enforces dt <= 1 / (50 f_res) for the given neuron.
  void validate(const CircuitParams& p) const;
};

struct Sample {
  double t = 0.0;
  double U = 0.0;
  double V = 0.0;
  double I_in = 0.0;
  bool clamped = false;
  bool overflow = false;
};

/// Decimated (t, U, V, I_in) record. Samples fall on the dt * stride grid,
/// plus one extra sample at each REQ and each release.
struct Trace {
  std::vector<Sample> samples;
  bool overflow = false;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
  double t_begin() const { return samples.front().t; }
  double t_end() const { return samples.back().t; }
};

struct SimulationResult {
  Trace trace;
  std::vector<SpikeEvent> events;
  NeuronState final_state;
  bool overflow = false;
};

struct StepResult {
  NeuronState state;
  bool overflow = false;
};

/// Classical RK4 step of (U, V). `f(t, U, V)` returns a Derivative and is
/// evaluated at t, t + dt/2 (twice) and t + dt.
template <class F>
StepResult step_rk4(const NeuronState& s, double dt, F&& f) {
  const double t = s.t;
  const double h2 = 0.5 * dt;
  const Derivative k1 = f(t, s.U, s.V);
  const Derivative k2 = f(t + h2, s.U + h2 * k1.dU, s.V + h2 * k1.dV);
  const Derivative k3 = f(t + h2, s.U + h2 * k2.dU, s.V + h2 * k2.dV);
  const Derivative k4 = f(t + dt, s.U + dt * k3.dU, s.V + dt * k3.dV);
  StepResult r;
  r.state = s;
  r.state.t = t + dt;
  r.state.U = s.U + dt / 6.0 * (k1.dU + 2.0 * k2.dU + 2.0 * k3.dU + k4.dU);
  r.state.V = s.V + dt / 6.0 * (k1.dV + 2.0 * k2.dV + 2.0 * k3.dV + k4.dV);
  r.overflow = k1.overflow || k2.overflow || k3.overflow || k4.overflow;
  return r;
}

struct Crossing {
  double t = 0.0;
  NeuronState state;  ///< integrated state at t (V >= threshold)
};

/// Upward crossing of `threshold` by V inside [lo.t, hi_t], located by
/// bisection: each trial point is reached by a fresh RK4 sub-step from the
/// current lower bracket. Returns the upper bracket once the bracket is
/// narrower than tol. If lo already sits on the threshold, returns lo.
template <class F>
Crossing refine_crossing(const NeuronState& lo, double hi_t, const NeuronState& hi,
                         double threshold, double tol, F&& f) {
  if (lo.V >= threshold) return {lo.t, lo};
  NeuronState a = lo;
  NeuronState b = hi;
  double t_b = hi_t;
  b.t = hi_t;
  while (t_b - a.t > tol) {
    const double mid = 0.5 * (a.t + t_b);
    if (!(mid > a.t && mid < t_b)) break;
    const NeuronState m = step_rk4(a, mid - a.t, f).state;
    if (m.V >= threshold) {
      b = m;
      t_b = mid;
    } else {
      a = m;
    }
  }
  b.t = t_b;
  return {t_b, b};
}

/// Runs the neuron from s0 until cfg.t_end (or cfg.max_events releases).
/// Steps never straddle a stimulus boundary; upward threshold crossings are
/// refined to cfg.crossing_tol and hand control to the handshake, which holds
/// the nodes at (V_reset, V_th) with the synapses gated until release. After release
/// the comparator re-arms only once V has dropped below threshold.
SimulationResult integrate(const NeuronState& s0, const CircuitParams& p,
                           const StimulusProgram& prog, const IntegratorConfig& cfg,
                           const HandshakeConfig& protocol);

}  // namespace rfsim
