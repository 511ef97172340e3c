#include "rfsim/commands.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rfsim/errors.hpp"
#include "rfsim/io.hpp"
#include "rfsim/parallel.hpp"

namespace rfsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void emit(CommandOutput& out, const fs::path& path, const std::string& text) {
  io::write_text(path, text);
  out.files.push_back(path);
}

void emit(CommandOutput& out, const fs::path& path, const json& j) {
  io::write_json(path, j);
  out.files.push_back(path);
}

}  // namespace

CommandOutput cmd_ringdown(const ExperimentConfig& cfg, const fs::path& dir) {
  CommandOutput out;
  const RingdownSpec spec = cfg.ringdown_spec();
  const StimulusProgram program =
      cfg.ringdown.stimulus_csv.empty()
          ? pulse(spec.t_pulse, spec.width, spec.amplitude, spec.polarity, spec.horizon)
          : load_stimulus_csv(cfg.ringdown.stimulus_csv);
  const RingdownResult r = run_ringdown(cfg.neuron, spec, cfg.handshake(), program);
  const DerivedParams d = derive_params(cfg.neuron);

  emit(out, dir / "ringdown_trace.csv", io::trace_csv(r.sim.trace));
  emit(out, dir / "ringdown_events.csv", io::events_csv(r.sim.events));
  emit(out, dir / "ringdown_events.json", io::events_json(r.sim.events));
  out.summary = {{"metrics", io::metrics_json(r.metrics)},
                 {"analytic", io::derived_json(d)},
                 {"n_spikes", r.sim.events.size()},
                 {"protocol_violations", count_event_violations(r.sim.events)},
                 {"overflow", r.sim.overflow}};
  emit(out, dir / "ringdown_metrics.json", out.summary);
  out.overflow = r.sim.overflow;
  return out;
}

CommandOutput cmd_fi(const ExperimentConfig& cfg, const fs::path& dir) {
  CommandOutput out;
  CircuitParams p = cfg.neuron;
  p.V_th = cfg.fi.V_th;
  FiOptions opt;
  opt.timeout = cfg.fi.timeout;
  opt.integrator = cfg.integrator;
  opt.handshake = cfg.handshake();
  const auto levels =
      lin_space(cfg.fi.level_min, cfg.fi.level_max, static_cast<std::size_t>(cfg.fi.n_levels));
  const FiCurve curve = fi_curve(p, levels, cfg.fi.spikes_per_point, opt);

  std::string csv = "level_V,rate_Hz,rate_std_Hz,n_spikes\n";
  for (const FiPoint& pt : curve.points)
    csv += fmt::format("{},{},{},{}\n", io::num(pt.level), io::num(pt.rate), io::num(pt.rate_std),
                       pt.n_spikes);
  emit(out, dir / "fi_curve.csv", csv);

  json s = {{"V_th", p.V_th}, {"spikes_per_point", cfg.fi.spikes_per_point}};
  if (curve.onset) {
    const std::size_t k = *curve.onset;
    s["onset_level"] = curve.points[k].level;
    s["onset_rate"] = curve.points[k].rate;
    if (k + 1 < curve.points.size()) {
      s["next_rate"] = curve.points[k + 1].rate;
      s["onset_to_next_ratio"] = curve.points[k].rate / curve.points[k + 1].rate;
    }
  } else {
    s["onset_level"] = nullptr;
  }
  emit(out, dir / "fi_summary.json", s);
  out.summary = s;
  out.overflow = curve.overflow;
  return out;
}

CommandOutput cmd_chirp(const ExperimentConfig& cfg, const fs::path& dir) {
  CommandOutput out;
  const StimulusProgram chirp = spiking_chirp(cfg.chirp.chirp);
  IntegratorConfig ic = cfg.integrator;
  ic.t_end = chirp.duration();
  const Equilibrium eq = equilibrium(cfg.neuron);
  const SimulationResult sim = integrate(NeuronState{0.0, eq.U, eq.V, Phase::Oscillate},
                                         cfg.neuron, chirp, ic, cfg.handshake());

  const auto& blocks = chirp.blocks();
  const auto bins = bin_events(chirp, sim.events);
  std::string raster = "index,t_req_s,t_release_s,block,block_frequency_Hz\n";
  std::vector<long> per_block(blocks.size(), 0);
  for (std::size_t i = 0; i < sim.events.size(); ++i) {
    const SpikeEvent& e = sim.events[i];
    const auto& b = bins[i];
    if (b) ++per_block[*b];
    raster += fmt::format("{},{},{},{},{}\n", e.index, io::num(e.t_req), io::num(e.t_release),
                          b ? std::to_string(*b) : std::string("-1"),
                          b ? io::num(blocks[*b].frequency) : std::string("nan"));
  }
  emit(out, dir / "chirp_raster.csv", raster);

  std::string bcsv = "block,frequency_Hz,t_start_s,t_end_s,spikes\n";
  for (std::size_t j = 0; j < blocks.size(); ++j)
    bcsv += fmt::format("{},{},{},{},{}\n", j, io::num(blocks[j].frequency),
                        io::num(blocks[j].t_start), io::num(blocks[j].t_end), per_block[j]);
  emit(out, dir / "chirp_blocks.csv", bcsv);

  const double f_res = derive_params(cfg.neuron).f_res();
  json s = {{"n_spikes", sim.events.size()},
            {"f_res_analytic", f_res},
            {"concentration_within_one_block", block_concentration(chirp, sim.events, f_res)},
            {"protocol_violations", count_event_violations(sim.events)},
            {"duration", chirp.duration()}};
  out.overflow = sim.overflow;

  if (cfg.chirp.sweep) {
    const auto n = static_cast<std::size_t>(cfg.chirp.n_bias);
    const auto bias = lin_space(cfg.chirp.bias_min, cfg.chirp.bias_max, n);
    const auto vth = exponential_schedule(cfg.chirp.vth_min, cfg.chirp.vth_max, n);
    TuningOptions opt;
    opt.integrator = cfg.integrator;
    opt.handshake = cfg.handshake();
    const TuningMap map = tuning_map(cfg.neuron, bias, vth, chirp, opt);
    emit(out, dir / "tuning_map.csv", io::tuning_map_csv(map));
    emit(out, dir / "tuning_map.json", io::tuning_map_json(map));
    s["tuning_argmax_monotone"] = map.argmax_monotone();
    s["tuning_argmax_monotone_in_band"] = map.argmax_monotone_in_band();
    out.overflow = out.overflow || map.overflow;
  }
  emit(out, dir / "chirp_summary.json", s);
  out.summary = s;
  return out;
}

CommandOutput cmd_sweep_bias(const ExperimentConfig& cfg, const fs::path& dir) {
  CommandOutput out;
  const auto currents = log_space(cfg.sweep_bias.I_min, cfg.sweep_bias.I_max,
                                  static_cast<std::size_t>(cfg.sweep_bias.n_points));
  struct Row {
    double I, f, f_fft, f_an;
    bool flagged, overflow;
  };
  std::vector<Row> rows(currents.size());
  const HandshakeConfig hs = cfg.handshake();
  parallel_for(currents.size(), [&](std::size_t i) {
    CircuitParams p = cfg.neuron;
    p.I_IU = p.I_IV = currents[i];
    p.V_th = cfg.sweep_bias.V_th;
    const double f_an = derive_params(p).f_res();
    RingdownSpec spec = cfg.ringdown_spec();
    spec.horizon = spec.t_pulse + spec.width + cfg.sweep_bias.periods / f_an;
    spec.settle_window = 0.1 * spec.horizon;
    spec.integrator.t_end = spec.horizon;
    spec.integrator.sample_stride = std::max(
        1, static_cast<int>(std::floor(1.0 / (f_an * cfg.integrator.dt * 200.0))));
    const RingdownResult r = run_ringdown(p, spec, hs);
    const MetricsRecord& m = r.metrics;
    rows[i] = {currents[i], m.f_res_defined ? m.f_res : std::nan(""),
               m.f_res_defined ? m.f_res_fft : std::nan(""), f_an,
               !m.f_res_defined || m.f_res_flagged, r.sim.overflow};
  });

  std::string csv = "I_A,f_res_Hz,f_fft_Hz,f_analytic_Hz,flagged\n";
  std::vector<double> x, y;
  for (const Row& r : rows) {
    csv += fmt::format("{},{},{},{},{}\n", io::num(r.I), io::num(r.f), io::num(r.f_fft),
                       io::num(r.f_an), r.flagged ? 1 : 0);
    if (!r.flagged) {
      x.push_back(r.I);
      y.push_back(r.f);
    }
    out.overflow = out.overflow || r.overflow;
  }
  emit(out, dir / "sweep_bias.csv", csv);

  json s = {{"n_points", rows.size()}, {"n_flagged", rows.size() - x.size()}};
  if (x.size() >= 2) {
    const LinearFit fit = fit_line(x, y);
    const double f_mid = y[y.size() / 2];
    s["slope_Hz_per_A"] = fit.slope;
    s["intercept_Hz"] = fit.intercept;
    s["r2"] = fit.r2;
    s["mid_range_frequency_Hz"] = f_mid;
    s["intercept_relative_to_mid"] = std::abs(fit.intercept) / f_mid;
    s["f_at_I_min_Hz"] = y.front();
    s["f_at_I_max_Hz"] = y.back();
  }
  emit(out, dir / "sweep_bias_summary.json", s);
  out.summary = s;
  return out;
}

CommandOutput cmd_montecarlo(const ExperimentConfig& cfg, const fs::path& dir) {
  CommandOutput out;
  const PopulationStats stats =
      run_population(cfg.neuron, cfg.montecarlo.model,
                     static_cast<std::size_t>(cfg.montecarlo.n_dies), cfg.ringdown_spec(),
                     cfg.handshake(), cfg.montecarlo.workers);
  out.summary = io::population_json(stats);
  emit(out, dir / "population.json", out.summary);
  emit(out, dir / "dies.csv", io::dies_csv(stats));
  return out;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"ringdown", "fi", "chirp", "sweep-bias",
                                              "montecarlo"};
  return names;
}

int run(const std::string& subcommand, const ExperimentConfig& cfg, const fs::path& dir,
        std::ostream& log) {
  try {
    cfg.validate();
    CommandOutput out;
    if (subcommand == "ringdown") out = cmd_ringdown(cfg, dir);
    else if (subcommand == "fi") out = cmd_fi(cfg, dir);
    else if (subcommand == "chirp") out = cmd_chirp(cfg, dir);
    else if (subcommand == "sweep-bias") out = cmd_sweep_bias(cfg, dir);
    else if (subcommand == "montecarlo") out = cmd_montecarlo(cfg, dir);
    else throw ConfigError("unknown subcommand '" + subcommand + "'");
    io::write_json(dir / "effective_config.json", config_to_json(cfg));
    for (const auto& f : out.files) log << "wrote " << f.string() << "\n";
    log << out.summary.dump(2) << "\n";
    if (out.overflow) {
      log << "error: a node voltage left the exponent guard band\n";
      return kNumericDiagnostic;
    }
    return kOk;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    log << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ProtocolError& e) {
    log << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const IoError& e) {
    log << "i/o error: " << e.what() << "\n";
    return kIoError;
  }
}

}  // namespace rfsim::cli
