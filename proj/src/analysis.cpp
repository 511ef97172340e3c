#include "rfsim/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <mutex>
#include <numbers>
#include <numeric>

#include "rfsim/errors.hpp"
#include "rfsim/parallel.hpp"

namespace rfsim {

namespace {

double channel_value(const Sample& s, Channel ch) { return ch == Channel::U ? s.U : s.V; }

// Runs of consecutive unclamped samples at t >= t_from, as [begin, end).
std::vector<std::pair<std::size_t, std::size_t>> free_runs(const Trace& tr, double t_from) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t i = 0;
  const std::size_t n = tr.samples.size();
  while (i < n) {
    while (i < n && (tr.samples[i].t < t_from || tr.samples[i].clamped)) ++i;
    const std::size_t b = i;
    while (i < n && !tr.samples[i].clamped) ++i;
    if (i > b) runs.emplace_back(b, i);
  }
  return runs;
}

double interpolate_peak_time(const Trace& tr, std::size_t i, Channel ch) {
  const Sample& a = tr.samples[i - 1];
  const Sample& m = tr.samples[i];
  const Sample& c = tr.samples[i + 1];
  const double h1 = m.t - a.t;
  const double h2 = c.t - m.t;
  if (std::abs(h1 - h2) > 1e-6 * h1) return m.t;
  const double y0 = channel_value(a, ch);
  const double y1 = channel_value(m, ch);
  const double y2 = channel_value(c, ch);
  const double den = y0 - 2.0 * y1 + y2;
  if (den == 0.0) return m.t;
  const double delta = 0.5 * (y0 - y2) / den;
  return m.t + std::clamp(delta, -0.5, 0.5) * h1;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::vector<Peak> find_peaks(const Trace& tr, Channel ch, double t_from, double min_prominence,
                             bool minima) {
  std::vector<Peak> peaks;
  const double sign = minima ? -1.0 : 1.0;
  auto x = [&](std::size_t i) { return sign * channel_value(tr.samples[i], ch); };

  for (auto [b, e] : free_runs(tr, t_from)) {
    if (e - b < 3) continue;
    std::vector<std::size_t> cand;
    for (std::size_t i = b + 1; i + 1 < e; ++i)
      if (x(i - 1) < x(i) && x(i) >= x(i + 1)) cand.push_back(i);
    for (std::size_t k = 0; k < cand.size(); ++k) {
      const std::size_t i = cand[k];
      const std::size_t lo = k == 0 ? b : cand[k - 1];
      const std::size_t hi = k + 1 == cand.size() ? e - 1 : cand[k + 1];
      double left = x(i);
      for (std::size_t j = lo; j < i; ++j) left = std::min(left, x(j));
      double right = x(i);
      for (std::size_t j = i + 1; j <= hi; ++j) right = std::min(right, x(j));
      if (x(i) - std::max(left, right) < min_prominence) continue;
      peaks.push_back({i, interpolate_peak_time(tr, i, ch), channel_value(tr.samples[i], ch)});
    }
  }
  return peaks;
}

std::pair<double, double> extract_baseline(const Trace& tr, double settle_window) {
  if (tr.empty()) throw AnalysisError("baseline: empty trace");
  if (!(settle_window > 0.0)) throw AnalysisError("baseline: settle window must be > 0");
  if (settle_window > tr.t_end() - tr.t_begin())
    throw AnalysisError("baseline: settle window exceeds the trace length");
  const double from = tr.t_end() - settle_window;
  double su = 0.0;
  double sv = 0.0;
  std::size_t n = 0;
  for (const Sample& s : tr.samples) {
    if (s.t < from) continue;
    if (s.clamped) throw AnalysisError("baseline: settle window contains a handshake hold");
    su += s.U;
    sv += s.V;
    ++n;
  }
  return {su / static_cast<double>(n), sv / static_cast<double>(n)};
}

std::pair<double, double> extract_first_peak(const Trace& tr, double t_stim_end) {
  const auto pu = find_peaks(tr, Channel::U, t_stim_end);
  const auto pv = find_peaks(tr, Channel::V, t_stim_end);
  if (pu.empty() || pv.empty()) throw AnalysisError("first peak: no local maximum after stimulus");
  return {pu.front().value, pv.front().value};
}

double spectral_peak(const std::vector<double>& x, double sample_interval) {
  const std::size_t n = x.size();
  if (n < 8) throw AnalysisError("spectrum: too few samples");
  std::size_t N = 1;
  while (N < 8 * n) N <<= 1;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);

  std::vector<double> in(N, 0.0);
  std::vector<fftw_complex> out(N / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_plan_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(N), in.data(), out.data(), FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                           static_cast<double>(n - 1)));
    in[i] = w * (x[i] - mean);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }

  auto mag = [&](std::size_t k) { return std::hypot(out[k][0], out[k][1]); };
  std::size_t best = 1;
  for (std::size_t k = 2; k < N / 2; ++k)
    if (mag(k) > mag(best)) best = k;
  double shift = 0.0;
  if (best > 1 && best + 1 < N / 2) {
    const double a = std::log(mag(best - 1));
    const double b = std::log(mag(best));
    const double c = std::log(mag(best + 1));
    const double den = a - 2.0 * b + c;
    if (den < 0.0) shift = 0.5 * (a - c) / den;
  }
  return (static_cast<double>(best) + shift) / (static_cast<double>(N) * sample_interval);
}

FrequencyEstimate resonant_frequency(const Trace& tr, double t_from, Channel ch) {
  const auto peaks = find_peaks(tr, ch, t_from);
  if (peaks.size() < 3) throw AnalysisError("resonant frequency: fewer than three peaks");
  std::vector<double> inv;
  inv.reserve(peaks.size() - 1);
  for (std::size_t i = 1; i < peaks.size(); ++i) inv.push_back(1.0 / (peaks[i].t - peaks[i - 1].t));

  FrequencyEstimate est;
  est.n_peaks = peaks.size();
  est.f_peaks = median(inv);

  std::vector<double> x;
  std::vector<double> gaps;
  double last_t = 0.0;
  for (const Sample& s : tr.samples) {
    if (s.t < t_from || s.clamped) continue;
    if (!x.empty()) gaps.push_back(s.t - last_t);
    x.push_back(channel_value(s, ch));
    last_t = s.t;
  }
  est.f_fft = spectral_peak(x, median(gaps));
  est.agree = std::abs(est.f_fft - est.f_peaks) <= 0.02 * est.f_peaks;
  return est;
}

QEstimate q_factor(const Trace& tr, double baseline, double f_res, double t_from, Channel ch) {
  QEstimate q;
  const auto peaks = find_peaks(tr, ch, t_from);
  q.n_peaks = peaks.size();
  if (peaks.size() < 5) return q;
  std::vector<double> t;
  std::vector<double> la;
  bool decreasing = true;
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    const double a = peaks[i].value - baseline;
    if (!(a > 0.0)) return q;
    if (i > 0 && !(a < peaks[i - 1].value - baseline)) decreasing = false;
    t.push_back(peaks[i].t);
    la.push_back(std::log(a));
  }
  if (!decreasing) {
    q.infinite = true;
    q.Q = std::numeric_limits<double>::infinity();
    return q;
  }
  const LinearFit fit = fit_line(t, la);
  if (!(fit.slope < 0.0)) {
    q.infinite = true;
    q.Q = std::numeric_limits<double>::infinity();
    return q;
  }
  q.tau = -1.0 / fit.slope;
  q.Q = std::numbers::pi * f_res * q.tau;
  q.defined = true;
  return q;
}

double oscillation_midline(const Trace& tr, Channel ch, double t_from, std::size_t pairs) {
  auto ext = find_peaks(tr, ch, t_from);
  const auto lows = find_peaks(tr, ch, t_from, kMinProminence, true);
  ext.insert(ext.end(), lows.begin(), lows.end());
  std::sort(ext.begin(), ext.end(), [](const Peak& a, const Peak& b) { return a.index < b.index; });
  if (ext.size() < 2) {
    double s = 0.0;
    std::size_t n = 0;
    for (const Sample& x : tr.samples)
      if (x.t >= t_from && !x.clamped) {
        s += channel_value(x, ch);
        ++n;
      }
    if (n == 0) throw AnalysisError("midline: no samples");
    return s / static_cast<double>(n);
  }
  const std::size_t first = ext.size() > pairs + 1 ? ext.size() - pairs - 1 : 0;
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = first; i + 1 < ext.size(); ++i) {
    s += 0.5 * (ext[i].value + ext[i + 1].value);
    ++n;
  }
  return s / static_cast<double>(n);
}

MetricsRecord extract_metrics(const Trace& tr, double t_stim_end, double settle_window) {
  MetricsRecord m;
  try {
    std::tie(m.baseline_U, m.baseline_V) = extract_baseline(tr, settle_window);
    m.baseline_defined = true;
  } catch (const AnalysisError&) {
  }
  try {
    std::tie(m.first_peak_U, m.first_peak_V) = extract_first_peak(tr, t_stim_end);
    m.peak_defined = true;
  } catch (const AnalysisError&) {
  }
  try {
    const FrequencyEstimate f = resonant_frequency(tr, t_stim_end);
    m.f_res = f.f_peaks;
    m.f_res_fft = f.f_fft;
    m.f_res_flagged = !f.agree;
    m.f_res_defined = true;
  } catch (const AnalysisError&) {
  }
  if (m.f_res_defined) {
    const double mid = oscillation_midline(tr, Channel::V, t_stim_end);
    const QEstimate q = q_factor(tr, mid, m.f_res, t_stim_end);
    m.q_defined = q.defined;
    m.q_infinite = q.infinite;
    m.q_factor = q.defined ? q.Q : 0.0;
  }
  return m;
}

RingdownResult run_ringdown(const CircuitParams& p, const RingdownSpec& spec,
                            const HandshakeConfig& hs, const StimulusProgram& program) {
  RingdownResult r{program, {}, {}};
  IntegratorConfig cfg = spec.integrator;
  cfg.t_end = spec.horizon;
  const Equilibrium eq = equilibrium(p);
  r.sim = integrate(NeuronState{0.0, eq.U, eq.V, Phase::Oscillate}, p, program, cfg, hs);
  double t_stim_end = 0.0;
  for (const Segment& s : program.segments())
    if (s.V_exc != 0.0 || s.V_inh != 0.0) t_stim_end = s.t_end;
  r.metrics = extract_metrics(r.sim.trace, t_stim_end, spec.settle_window);
  return r;
}

RingdownResult run_ringdown(const CircuitParams& p, const RingdownSpec& spec,
                            const HandshakeConfig& hs) {
  return run_ringdown(p, spec, hs,
                      pulse(spec.t_pulse, spec.width, spec.amplitude, spec.polarity, spec.horizon));
}

FiCurve fi_curve(const CircuitParams& p, const std::vector<double>& levels, int spikes_per_point,
                 const FiOptions& opt) {
  if (spikes_per_point < 2) throw ConfigError("fi: spikes_per_point must be >= 2");
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (!(levels[i] > levels[i - 1])) throw ConfigError("fi: levels must be increasing");
  FiCurve curve;
  curve.points.resize(levels.size());
  std::vector<char> overflow(levels.size(), 0);
  const Equilibrium eq = equilibrium(p);
  parallel_for(levels.size(), [&](std::size_t i) {
    IntegratorConfig cfg = opt.integrator;
    cfg.t_end = opt.timeout;
    cfg.max_events = static_cast<std::size_t>(spikes_per_point);
    cfg.record_trace = false;
    const StimulusProgram prog = step(0.0, 0.0, levels[i], Polarity::Excitatory, opt.timeout);
    const SimulationResult sim =
        integrate(NeuronState{0.0, eq.U, eq.V, Phase::Oscillate}, p, prog, cfg, opt.handshake);
    const RateStats r = firing_rate(sim.events, 0.0, opt.timeout);
    curve.points[i] = {levels[i], r.defined ? r.mean : 0.0, r.defined ? r.std : 0.0,
                       sim.events.size()};
    overflow[i] = sim.overflow;
  });
  curve.overflow = std::find(overflow.begin(), overflow.end(), 1) != overflow.end();
  for (std::size_t i = 0; i < curve.points.size(); ++i)
    if (curve.points[i].rate > 0.0) {
      curve.onset = i;
      break;
    }
  return curve;
}

std::optional<std::size_t> TuningMap::argmax(std::size_t row) const {
  const auto& r = counts.at(row);
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < r.size(); ++j)
    if (r[j] > 0 && (!best || r[j] > r[*best])) best = j;
  return best;
}

namespace {

bool monotone_rows(const TuningMap& m, bool in_band) {
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < m.counts.size(); ++i) {
    if (in_band && !m.frequencies.empty() && i < m.f_res.size() &&
        (m.f_res[i] < m.frequencies.front() || m.f_res[i] > m.frequencies.back()))
      continue;
    const auto a = m.argmax(i);
    if (!a) continue;
    if (prev && *a < *prev) return false;
    prev = a;
  }
  return true;
}

}  // namespace

bool TuningMap::argmax_monotone() const { return monotone_rows(*this, false); }
bool TuningMap::argmax_monotone_in_band() const { return monotone_rows(*this, true); }

std::vector<std::optional<std::size_t>> bin_events(const StimulusProgram& chirp,
                                                   const std::vector<SpikeEvent>& events) {
  std::vector<std::optional<std::size_t>> bins;
  bins.reserve(events.size());
  for (const SpikeEvent& e : events) bins.push_back(chirp.block_at(e.t_req));
  return bins;
}

double block_concentration(const StimulusProgram& chirp, const std::vector<SpikeEvent>& events,
                           double f, std::size_t radius) {
  const auto& blocks = chirp.blocks();
  if (blocks.empty()) throw AnalysisError("concentration: program has no frequency blocks");
  std::size_t nearest = 0;
  for (std::size_t j = 1; j < blocks.size(); ++j)
    if (std::abs(std::log(blocks[j].frequency / f)) <
        std::abs(std::log(blocks[nearest].frequency / f)))
      nearest = j;
  std::size_t in = 0;
  std::size_t total = 0;
  for (const auto& b : bin_events(chirp, events)) {
    if (!b) continue;
    ++total;
    const std::size_t d = *b > nearest ? *b - nearest : nearest - *b;
    if (d <= radius) ++in;
  }
  return total == 0 ? 0.0 : static_cast<double>(in) / static_cast<double>(total);
}

TuningMap tuning_map(const CircuitParams& base, const std::vector<double>& bias_levels,
                     const std::vector<double>& vth_schedule, const StimulusProgram& chirp,
                     const TuningOptions& opt) {
  if (bias_levels.size() != vth_schedule.size())
    throw ConfigError("tuning map: bias and threshold schedules differ in length");
  for (std::size_t i = 1; i < bias_levels.size(); ++i)
    if (!(bias_levels[i] > bias_levels[i - 1]))
      throw ConfigError("tuning map: bias levels must be increasing");
  TuningMap map;
  map.bias_levels = bias_levels;
  map.vth = vth_schedule;
  for (const FrequencyBlock& b : chirp.blocks()) map.frequencies.push_back(b.frequency);
  map.counts.assign(bias_levels.size(), std::vector<long>(map.frequencies.size(), 0));
  map.f_res.assign(bias_levels.size(), 0.0);
  std::vector<char> overflow(bias_levels.size(), 0);

  parallel_for(bias_levels.size(), [&](std::size_t i) {
    CircuitParams p = base;
    p.I_IU = p.I_IV = bias_levels[i];
    p.V_th = vth_schedule[i];
    map.f_res[i] = derive_params(p).f_res();
    IntegratorConfig cfg = opt.integrator;
    cfg.t_end = chirp.duration();
    cfg.max_events = 0;
    cfg.record_trace = false;
    const Equilibrium eq = equilibrium(p);
    const SimulationResult sim =
        integrate(NeuronState{0.0, eq.U, eq.V, Phase::Oscillate}, p, chirp, cfg, opt.handshake);
    for (const auto& b : bin_events(chirp, sim.events))
      if (b) ++map.counts[i][*b];
    overflow[i] = sim.overflow;
  });
  map.overflow = std::find(overflow.begin(), overflow.end(), 1) != overflow.end();
  return map;
}

std::vector<double> exponential_schedule(double v_lo, double v_hi, std::size_t n) {
  return log_space(v_lo, v_hi, n);
}

std::vector<double> log_space(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  if (!(lo > 0.0 && hi > 0.0)) throw ConfigError("log_space: bounds must be > 0");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  v.back() = hi;
  return v;
}

std::vector<double> lin_space(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  v.back() = hi;
  return v;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw AnalysisError("fit: need at least two (x, y) pairs");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += e * e;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

}  // namespace rfsim
