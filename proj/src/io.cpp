#include "rfsim/io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdlib>
#include <fstream>

#include "rfsim/errors.hpp"

namespace rfsim::io {

using nlohmann::json;

std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  return fmt::format("{:.12g}", x);
}

double round12(double x) {
  if (!std::isfinite(x)) return x;
  return std::strtod(num(x).c_str(), nullptr);
}

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json stats_json(const MetricStats& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"cv_percent", s.cv}, {"n", s.n},
          {"n_undefined", s.n_undefined}};
}

}  // namespace

std::string trace_csv(const Trace& tr) {
  std::string out = "t_s,U_V,V_V,I_in_A,clamped,overflow\n";
  out.reserve(tr.samples.size() * 64);
  for (const Sample& s : tr.samples)
    out += fmt::format("{},{},{},{},{},{}\n", num(s.t), num(s.U), num(s.V), num(s.I_in),
                       s.clamped ? 1 : 0, s.overflow ? 1 : 0);
  return out;
}

std::string events_csv(const std::vector<SpikeEvent>& events) {
  std::string out = "index,t_req_s,t_release_s\n";
  for (const SpikeEvent& e : events)
    out += fmt::format("{},{},{}\n", e.index, num(e.t_req), num(e.t_release));
  return out;
}

json events_json(const std::vector<SpikeEvent>& events) {
  json a = json::array();
  for (const SpikeEvent& e : events)
    a.push_back({{"index", e.index}, {"t_req", round12(e.t_req)}, {"t_release", round12(e.t_release)}});
  return a;
}

json metrics_json(const MetricsRecord& m) {
  auto opt = [](bool defined, double v) { return defined ? finite_or_null(v) : json(nullptr); };
  return {{"baseline_U", opt(m.baseline_defined, m.baseline_U)},
          {"baseline_V", opt(m.baseline_defined, m.baseline_V)},
          {"first_peak_U", opt(m.peak_defined, m.first_peak_U)},
          {"first_peak_V", opt(m.peak_defined, m.first_peak_V)},
          {"f_res", opt(m.f_res_defined, m.f_res)},
          {"f_res_fft", opt(m.f_res_defined, m.f_res_fft)},
          {"q_factor", opt(m.q_defined, m.q_factor)},
          {"flags",
           {{"baseline_defined", m.baseline_defined},
            {"peak_defined", m.peak_defined},
            {"f_res_defined", m.f_res_defined},
            {"f_res_estimators_disagree", m.f_res_flagged},
            {"q_defined", m.q_defined},
            {"q_infinite", m.q_infinite}}}};
}

json derived_json(const DerivedParams& d) {
  return {{"U_star", d.U_star},       {"V_star", d.V_star}, {"omega", d.omega},
          {"f_res", d.f_res()},       {"b", d.b},           {"Q", finite_or_null(d.Q)},
          {"I_alpha_star", d.I_alpha_star}, {"I_beta_star", d.I_beta_star}};
}

std::string tuning_map_csv(const TuningMap& map) {
  std::string out = "bias_A,V_th_V,f_res_Hz";
  for (double f : map.frequencies) out += ",count_" + num(f) + "_Hz";
  out += ",detected_Hz\n";
  for (std::size_t i = 0; i < map.counts.size(); ++i) {
    out += num(map.bias_levels[i]) + "," + num(map.vth[i]) + "," + num(map.f_res[i]);
    for (long c : map.counts[i]) out += "," + std::to_string(c);
    const auto a = map.argmax(i);
    out += "," + (a ? num(map.frequencies[*a]) : std::string("nan")) + "\n";
  }
  return out;
}

json tuning_map_json(const TuningMap& map) {
  json rows = json::array();
  for (std::size_t i = 0; i < map.counts.size(); ++i) {
    const auto a = map.argmax(i);
    rows.push_back({{"bias", map.bias_levels[i]},
                    {"V_th", map.vth[i]},
                    {"f_res", map.f_res[i]},
                    {"counts", map.counts[i]},
                    {"detected_frequency", a ? json(map.frequencies[*a]) : json(nullptr)}});
  }
  return {{"frequencies", map.frequencies}, {"rows", rows},
          {"argmax_monotone", map.argmax_monotone()},
          {"argmax_monotone_in_band", map.argmax_monotone_in_band()}};
}

json population_json(const PopulationStats& s) {
  const bool ordered = s.baseline_U.cv < s.f_res.cv && s.f_res.cv < s.q_factor.cv;
  return {{"n_dies", s.dies.size()},
          {"resampled_draws", s.resamples},
          {"baseline_U", stats_json(s.baseline_U)},
          {"baseline_V", stats_json(s.baseline_V)},
          {"first_peak_U", stats_json(s.first_peak_U)},
          {"first_peak_V", stats_json(s.first_peak_V)},
          {"f_res", stats_json(s.f_res)},
          {"q_factor", stats_json(s.q_factor)},
          {"cv_ordering_baseline_lt_fres_lt_q", ordered}};
}

std::string dies_csv(const PopulationStats& s) {
  std::string out =
      "die,C1_F,C2_F,I_IU_A,I_IV_A,I_n0_alpha_A,I_n0_beta_A,g_damp_S,baseline_U_V,baseline_V_V,"
      "first_peak_U_V,first_peak_V_V,f_res_Hz,q_factor,n_spikes,defined_f_res,defined_q\n";
  auto v = [](bool ok, double x) { return ok ? num(x) : std::string("nan"); };
  for (const DieRecord& d : s.dies) {
    const CircuitParams& p = d.params;
    const MetricsRecord& m = d.metrics;
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", d.index, num(p.C1),
                       num(p.C2), num(p.I_IU), num(p.I_IV), num(p.I_n0_alpha()),
                       num(p.I_n0_beta()), num(p.g_damp), v(m.baseline_defined, m.baseline_U),
                       v(m.baseline_defined, m.baseline_V), v(m.peak_defined, m.first_peak_U),
                       v(m.peak_defined, m.first_peak_V), v(m.f_res_defined, m.f_res),
                       v(m.q_defined, m.q_factor), d.n_spikes,
                       m.f_res_defined && !m.f_res_flagged ? 1 : 0, m.q_defined ? 1 : 0);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

void write_json(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

}  // namespace rfsim::io
