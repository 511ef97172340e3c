#include "rfsim/montecarlo.hpp"

#include <cmath>
#include <random>

#include "rfsim/errors.hpp"
#include "rfsim/parallel.hpp"

namespace rfsim {

void MismatchModel::validate() const {
  for (double s : {sigma_ln_In0_alpha, sigma_ln_In0_beta, sigma_C, sigma_I_bias, sigma_ln_g_damp})
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("montecarlo: sigmas must be >= 0");
}

MismatchModel MismatchModel::scaled(double factor) const {
  MismatchModel m = *this;
  m.sigma_ln_In0_alpha *= factor;
  m.sigma_ln_In0_beta *= factor;
  m.sigma_C *= factor;
  m.sigma_I_bias *= factor;
  m.sigma_ln_g_damp *= factor;
  return m;
}

namespace {

bool usable(const CircuitParams& p) {
  try {
    p.validate();
    (void)derive_params(p);
    return true;
  } catch (const ConfigError&) {
    return false;
  } catch (const DomainError&) {
    return false;
  }
}

}  // namespace

DieSample sample_die_detailed(const CircuitParams& base, const MismatchModel& m,
                              std::size_t die_index) {
  m.validate();
  DieSample out;
  for (std::uint64_t attempt = 0;; ++attempt) {
    std::seed_seq seq{static_cast<std::uint32_t>(m.seed), static_cast<std::uint32_t>(m.seed >> 32),
                      static_cast<std::uint32_t>(die_index),
                      static_cast<std::uint32_t>(static_cast<std::uint64_t>(die_index) >> 32),
                      static_cast<std::uint32_t>(attempt)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> z(0.0, 1.0);
    CircuitParams p = base;
    p.n0_ratio_alpha *= std::exp(m.sigma_ln_In0_alpha * z(rng));
    p.n0_ratio_beta *= std::exp(m.sigma_ln_In0_beta * z(rng));
    p.C1 *= 1.0 + m.sigma_C * z(rng);
    p.C2 *= 1.0 + m.sigma_C * z(rng);
    p.I_IU *= 1.0 + m.sigma_I_bias * z(rng);
    p.I_IV *= 1.0 + m.sigma_I_bias * z(rng);
    p.g_damp *= std::exp(m.sigma_ln_g_damp * z(rng));
    if (usable(p)) {
      out.params = p;
      out.resamples = attempt;
      return out;
    }
    if (attempt > 1000) throw ConfigError("montecarlo: cannot draw a valid die; sigmas too large");
  }
}

CircuitParams sample_die(const CircuitParams& base, const MismatchModel& m, std::size_t die_index) {
  return sample_die_detailed(base, m, die_index).params;
}

MetricStats summarize(const std::vector<double>& values, std::size_t n_undefined) {
  MetricStats s;
  s.n = values.size();
  s.n_undefined = n_undefined;
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  s.cv = s.mean > 0.0 ? 100.0 * s.std / s.mean : 0.0;
  return s;
}

PopulationStats run_population(const CircuitParams& base, const MismatchModel& m,
                               std::size_t n_dies, const RingdownSpec& experiment,
                               const HandshakeConfig& hs, unsigned workers) {
  if (n_dies < 2) throw ConfigError("montecarlo: n_dies must be >= 2");
  m.validate();
  PopulationStats out;
  out.dies.resize(n_dies);
  parallel_for(
      n_dies,
      [&](std::size_t i) {
        const DieSample die = sample_die_detailed(base, m, i);
        const RingdownResult r = run_ringdown(die.params, experiment, hs);
        out.dies[i] = {i, die.params, r.metrics, r.sim.events.size(), die.resamples};
      },
      workers);

  std::vector<double> bu, bv, pu, pv, f, q;
  std::size_t nb = 0, np = 0, nf = 0, nq = 0;
  for (const DieRecord& d : out.dies) {
    out.resamples += d.resamples;
    const MetricsRecord& r = d.metrics;
    if (r.baseline_defined) {
      bu.push_back(r.baseline_U);
      bv.push_back(r.baseline_V);
    } else {
      ++nb;
    }
    if (r.peak_defined) {
      pu.push_back(r.first_peak_U);
      pv.push_back(r.first_peak_V);
    } else {
      ++np;
    }
    if (r.f_res_defined && !r.f_res_flagged) f.push_back(r.f_res);
    else ++nf;
    if (r.q_defined) q.push_back(r.q_factor);
    else ++nq;
  }
  out.baseline_U = summarize(bu, nb);
  out.baseline_V = summarize(bv, nb);
  out.first_peak_U = summarize(pu, np);
  out.first_peak_V = summarize(pv, np);
  out.f_res = summarize(f, nf);
  out.q_factor = summarize(q, nq);
  return out;
}

}  // namespace rfsim
