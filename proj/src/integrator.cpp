#include "rfsim/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rfsim/errors.hpp"

namespace rfsim {

void IntegratorConfig::validate(const CircuitParams& p) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("integrator.dt must be > 0");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("integrator.t_end must be > 0");
  if (!(crossing_tol > 0.0) || crossing_tol > dt)
    throw ConfigError("integrator.crossing_tol must be in (0, dt]");
  if (sample_stride < 1) throw ConfigError("integrator.sample_stride must be >= 1");
  const double f = derive_params(p).f_res();
  if (dt > 1.0 / (50.0 * f))
    throw ConfigError("integrator.dt must be <= 1/(50 f_res) = " + std::to_string(1.0 / (50.0 * f)) +
                      " s for this neuron");
}

namespace {

class TraceRecorder {
 public:
  explicit TraceRecorder(bool enabled) : enabled_(enabled) {}

  void add(const NeuronState& s, double I_in, bool overflow) {
    if (!enabled_) return;
    if (!trace.samples.empty() && !(s.t > trace.samples.back().t)) return;
    trace.samples.push_back({s.t, s.U, s.V, I_in, s.phase == Phase::Clamped, overflow});
  }

  Trace trace;

 private:
  bool enabled_;
};

}  // namespace

SimulationResult integrate(const NeuronState& s0, const CircuitParams& p,
                           const StimulusProgram& prog, const IntegratorConfig& cfg,
                           const HandshakeConfig& protocol) {
  p.validate();
  cfg.validate(p);
  prog.validate(p.V_DD);
  if (s0.phase != Phase::Oscillate) throw ConfigError("integrate: initial state must be oscillating");

  const ResonatorModel model(p);
  const SynapseModel syn = SynapseModel::from(p);
  Handshake hs(protocol, p.V_reset, p.V_th);

  // Damping reference per segment: held inputs use their own equilibrium.
  const auto& segs = prog.segments();
  std::vector<double> seg_current(segs.size());
  std::vector<Equilibrium> seg_ref(segs.size(), model.rest());
  for (std::size_t i = 0; i < segs.size(); ++i) {
    seg_current[i] = synapse_current(segs[i].V_exc, segs[i].V_inh, syn, false);
    if (segs[i].sustained) {
      try {
        seg_ref[i] = equilibrium(p, seg_current[i]);
      } catch (const DomainError&) {
        // Input drives the beta branch below its floor: no shifted rest point.
      }
    }
  }

  const double dt = cfg.dt;
  const double eps = 1e-9 * dt;
  const double t_end = cfg.t_end;
  const auto stride = static_cast<long long>(cfg.sample_stride);

  SimulationResult out;
  TraceRecorder rec(cfg.record_trace);
  NeuronState s = s0;
  long long n = static_cast<long long>(std::floor(s.t / dt + 1e-9));
  bool armed = s.V < p.V_th;
  bool overflow = false;

  rec.add(s, seg_current[prog.index_at(s.t)], false);

  while (s.t < t_end - eps) {
    if (s.phase == Phase::Clamped) {
      const SpikeEvent ev = *hs.pending();
      const double hold_end = std::min(ev.t_release, t_end);
      while (static_cast<double>(n + 1) * dt <= hold_end + eps) {
        ++n;
        // A grid point that lands on the release is represented by the release sample.
        const double tg = static_cast<double>(n) * dt;
        if (n % stride == 0 && std::abs(tg - ev.t_release) > eps) {
          NeuronState g = s;
          g.t = tg;
          rec.add(g, 0.0, false);
        }
      }
      if (ev.t_release > t_end + eps) {
        s.t = t_end;
        break;
      }
      s = hs.release(s, ev.t_release);
      armed = s.V < p.V_th;
      rec.add(s, 0.0, false);
      if (cfg.max_events > 0 && hs.events().size() >= cfg.max_events) break;
      continue;
    }

    const double t_grid = static_cast<double>(n + 1) * dt;
    const double t_stim = prog.next_boundary(s.t + eps);
    double target = t_grid;
    bool on_grid = true;
    if (t_stim < t_grid - eps) {
      target = t_stim;
      on_grid = false;
    }
    if (t_end < target - eps) {
      target = t_end;
      on_grid = false;
    }
    const double h = target - s.t;
    const std::size_t seg = prog.index_at(s.t + 0.5 * h);
    const double I_in = seg_current[seg];
    const Equilibrium& ref = seg_ref[seg];
    auto f = [&](double, double U, double V) { return model.rhs(U, V, I_in, ref); };

    StepResult r = step_rk4(s, h, f);
    r.state.t = target;
    overflow = overflow || r.overflow;

    if (armed && r.state.V >= p.V_th) {
      const Crossing c = refine_crossing(s, target, r.state, p.V_th, cfg.crossing_tol, f);
      auto [held, ev] = hs.on_threshold(c.t, c.state);
      s = held;
      rec.add(s, 0.0, r.overflow);
      continue;
    }

    s = r.state;
    if (!armed && s.V < p.V_th) armed = true;
    if (on_grid) {
      ++n;
      s.t = static_cast<double>(n) * dt;
      if (n % stride == 0) rec.add(s, I_in, r.overflow);
    }
  }

  out.trace = std::move(rec.trace);
  out.trace.overflow = overflow;
  out.events = hs.events();
  out.final_state = s;
  out.overflow = overflow;
  return out;
}

}  // namespace rfsim
