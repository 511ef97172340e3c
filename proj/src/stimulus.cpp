#include "rfsim/stimulus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "rfsim/errors.hpp"

namespace rfsim {

StimulusProgram::StimulusProgram(double duration) {
  if (!(duration >= 0.0) || !std::isfinite(duration))
    throw ConfigError("stimulus: duration must be finite and >= 0");
  segments_.push_back({0.0, duration, 0.0, 0.0, false});
}

StimulusProgram::StimulusProgram(std::vector<Segment> segments, std::vector<FrequencyBlock> blocks)
    : blocks_(std::move(blocks)) {
  if (segments.empty()) throw ConfigError("stimulus: program has no segments");
  if (segments.front().t_start != 0.0) throw ConfigError("stimulus: first segment must start at 0");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    if (!std::isfinite(s.t_start) || !std::isfinite(s.t_end) || s.t_end < s.t_start)
      throw ConfigError("stimulus: segment " + std::to_string(i) + " has invalid bounds");
    if (i > 0 && s.t_start != segments[i - 1].t_end)
      throw ConfigError("stimulus: segment " + std::to_string(i) +
                        " is not contiguous with its predecessor");
  }
  for (const Segment& s : segments) {
    if (s.t_end == s.t_start && segments.size() > 1) continue;
    if (!segments_.empty()) {
      Segment& last = segments_.back();
      if (last.V_exc == s.V_exc && last.V_inh == s.V_inh && last.sustained == s.sustained) {
        last.t_end = s.t_end;
        continue;
      }
    }
    segments_.push_back(s);
  }
  if (segments_.empty()) segments_.push_back(segments.back());
  segments_.front().t_start = 0.0;
  for (std::size_t i = 1; i < blocks_.size(); ++i)
    if (!(blocks_[i].t_start >= blocks_[i - 1].t_end))
      throw ConfigError("stimulus: frequency blocks overlap");
}

std::vector<double> StimulusProgram::breakpoints() const {
  std::vector<double> bp;
  bp.reserve(segments_.size());
  for (const Segment& s : segments_) bp.push_back(s.t_start);
  return bp;
}

double StimulusProgram::next_boundary(double t) const {
  const auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                                   [](double x, const Segment& s) { return x < s.t_start; });
  if (it != segments_.end()) return it->t_start;
  if (duration() > t) return duration();
  return std::numeric_limits<double>::infinity();
}

std::size_t StimulusProgram::index_at(double t) const {
  const auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                                   [](double x, const Segment& s) { return x < s.t_start; });
  if (it == segments_.begin()) return 0;
  return static_cast<std::size_t>(it - segments_.begin()) - 1;
}

const Segment& StimulusProgram::at(double t) const { return segments_[index_at(t)]; }

std::optional<std::size_t> StimulusProgram::block_at(double t) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    if (t >= blocks_[i].t_start && t < blocks_[i].t_end) return i;
  return std::nullopt;
}

void StimulusProgram::validate(double V_DD) const {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    if (!(s.V_exc >= 0.0 && s.V_exc <= V_DD) || !(s.V_inh >= 0.0 && s.V_inh <= V_DD))
      throw ConfigError("stimulus: segment " + std::to_string(i) +
                        " input voltage outside [0, V_DD]");
  }
}

namespace {

Segment with_drive(double t0, double t1, double amplitude, Polarity polarity, bool sustained) {
  Segment s{t0, t1, 0.0, 0.0, sustained};
  (polarity == Polarity::Excitatory ? s.V_exc : s.V_inh) = amplitude;
  return s;
}

void check_amplitude(double a, const char* what) {
  if (!std::isfinite(a) || a < 0.0) throw ConfigError(std::string("stimulus: ") + what + " must be >= 0");
}

}  // namespace

StimulusProgram pulse(double t0, double width, double amplitude, Polarity polarity,
                      double duration) {
  if (!(width > 0.0)) throw ConfigError("stimulus: pulse width must be > 0");
  if (!(t0 >= 0.0)) throw ConfigError("stimulus: pulse start must be >= 0");
  check_amplitude(amplitude, "pulse amplitude");
  const double t1 = t0 + width;
  const double end = std::max(duration, t1);
  return StimulusProgram({with_drive(0.0, t0, 0.0, polarity, false),
                          with_drive(t0, t1, amplitude, polarity, false),
                          with_drive(t1, end, 0.0, polarity, false)});
}

StimulusProgram step(double t0, double baseline, double level, Polarity polarity, double duration) {
  if (!(t0 >= 0.0)) throw ConfigError("stimulus: step time must be >= 0");
  check_amplitude(baseline, "step baseline");
  check_amplitude(level, "step level");
  const double end = std::max(duration, t0);
  // A zero-drive segment has nothing to hold, so it keeps the resting reference.
  return StimulusProgram({with_drive(0.0, t0, baseline, polarity, baseline != 0.0),
                          with_drive(t0, end, level, polarity, level != 0.0)});
}

std::vector<double> chirp_frequencies(const ChirpSpec& spec) {
  if (spec.n_freqs < 1) throw ConfigError("stimulus: chirp needs at least one frequency");
  if (!(spec.f_start > 0.0)) throw ConfigError("stimulus: chirp f_start must be > 0");
  if (spec.n_freqs > 1 && !(spec.f_start < spec.f_end))
    throw ConfigError("stimulus: chirp requires f_start < f_end");
  std::vector<double> f(static_cast<std::size_t>(spec.n_freqs));
  for (int i = 0; i < spec.n_freqs; ++i) {
    if (spec.n_freqs == 1) {
      f[0] = spec.f_start;
      break;
    }
    const double x = static_cast<double>(i) / (spec.n_freqs - 1);
    f[static_cast<std::size_t>(i)] =
        spec.spacing == ChirpSpacing::Geometric
            ? spec.f_start * std::pow(spec.f_end / spec.f_start, x)
            : spec.f_start + (spec.f_end - spec.f_start) * x;
  }
  return f;
}

StimulusProgram spiking_chirp(const ChirpSpec& spec) {
  const std::vector<double> freqs = chirp_frequencies(spec);
  if (spec.spikes_per_freq < 1) throw ConfigError("stimulus: chirp needs >= 1 spike per frequency");
  if (!(spec.pulse_width > 0.0)) throw ConfigError("stimulus: chirp pulse width must be > 0");
  check_amplitude(spec.amplitude, "chirp amplitude");
  for (double f : freqs)
    if (!(spec.pulse_width < 1.0 / f))
      throw ConfigError("stimulus: chirp pulse width must be shorter than the period at " +
                        std::to_string(f) + " Hz");

  std::vector<Segment> segs;
  std::vector<FrequencyBlock> blocks;
  double block_start = 0.0;
  double cursor = 0.0;
  for (double f : freqs) {
    const double period = 1.0 / f;
    for (int j = 0; j < spec.spikes_per_freq; ++j) {
      const double on = block_start + j * period;
      const double off = on + spec.pulse_width;
      if (on > cursor) segs.push_back(with_drive(cursor, on, 0.0, spec.polarity, false));
      segs.push_back(with_drive(on, off, spec.amplitude, spec.polarity, false));
      cursor = off;
    }
    const double block_end = block_start + spec.spikes_per_freq * period;
    blocks.push_back({f, block_start, block_end});
    block_start = block_end;
  }
  segs.push_back(with_drive(cursor, block_start, 0.0, spec.polarity, false));
  return StimulusProgram(std::move(segs), std::move(blocks));
}

StimulusProgram load_stimulus_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stimulus file " + path.string());
  std::vector<Segment> segs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    Segment s;
    if (!(ss >> s.t_start >> s.t_end >> s.V_exc >> s.V_inh)) {
      if (segs.empty() && lineno == 1) continue;  // header
      throw ConfigError("stimulus: " + path.string() + ":" + std::to_string(lineno) +
                        ": expected t_start,t_end,V_exc,V_inh");
    }
    segs.push_back(s);
  }
  return StimulusProgram(std::move(segs));
}

double synapse_current(double V_exc, double V_inh, const SynapseModel& m, bool clamped) {
  if (clamped) return 0.0;
  const double g = m.kappa / m.U_T;
  return m.I_s0_exc * std::expm1(g * V_exc) - m.I_s0_inh * std::expm1(g * V_inh);
}

}  // namespace rfsim
