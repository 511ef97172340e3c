#include "rfsim/config.hpp"

#include <fstream>
#include <set>
#include <string>

#include "rfsim/errors.hpp"

namespace rfsim {

using nlohmann::json;

namespace {

// Reads one named section, tracking which keys were consumed so leftovers
// can be reported as unknown fields.
class SectionReader {
 public:
  SectionReader(const json& root, std::string name) : name_(std::move(name)) {
    if (!root.contains(name_)) return;
    node_ = &root.at(name_);
    if (!node_->is_object()) throw ConfigError(name_ + ": section must be an object");
  }

  /// Rejects keys no reader asked for.
  void done() const {
    if (!node_) return;
    for (const auto& [key, value] : node_->items())
      if (!seen_.count(key)) throw ConfigError(name_ + "." + key + ": unknown field");
  }

  SectionReader(const SectionReader&) = delete;
  SectionReader& operator=(const SectionReader&) = delete;

  void number(const char* key, double& dst) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(path(key) + ": expected a number");
      dst = v->get<double>();
    }
  }

  template <class Int>
  void integer(const char* key, Int& dst) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(path(key) + ": expected an integer");
      const auto x = v->get<long long>();
      if (x < 0 && std::is_unsigned_v<Int>) throw ConfigError(path(key) + ": must be >= 0");
      dst = static_cast<Int>(x);
    }
  }

  void boolean(const char* key, bool& dst) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(path(key) + ": expected true or false");
      dst = v->get<bool>();
    }
  }

  void string(const char* key, std::string& dst) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(path(key) + ": expected a string");
      dst = v->get<std::string>();
    }
  }

  void numbers(const char* key, std::vector<double>& dst) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(path(key) + ": expected an array of numbers");
      dst.clear();
      for (const json& x : *v) {
        if (!x.is_number()) throw ConfigError(path(key) + ": expected an array of numbers");
        dst.push_back(x.get<double>());
      }
    }
  }

  void polarity(const char* key, Polarity& dst) {
    std::string s;
    string(key, s);
    if (s.empty()) return;
    if (s == "excitatory") dst = Polarity::Excitatory;
    else if (s == "inhibitory") dst = Polarity::Inhibitory;
    else throw ConfigError(path(key) + ": expected \"excitatory\" or \"inhibitory\"");
  }

  std::string path(const char* key) const { return name_ + "." + key; }

 private:
  const json* find(const char* key) {
    if (!node_) return nullptr;
    seen_.insert(key);
    auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
  }

  std::string name_;
  const json* node_ = nullptr;
  std::set<std::string> seen_;
};

const char* to_string(Polarity p) { return p == Polarity::Excitatory ? "excitatory" : "inhibitory"; }

}  // namespace

HandshakeConfig ExperimentConfig::handshake() const {
  return {ack_mode, neuron.T_spk, ack_delays};
}

RingdownSpec ExperimentConfig::ringdown_spec() const {
  RingdownSpec s;
  s.t_pulse = ringdown.t_pulse;
  s.width = ringdown.width;
  s.amplitude = ringdown.amplitude;
  s.polarity = ringdown.polarity;
  s.horizon = ringdown.horizon;
  s.settle_window = ringdown.settle_window;
  s.integrator = integrator;
  s.integrator.t_end = ringdown.horizon;
  return s;
}

void ExperimentConfig::validate() const {
  neuron.validate();
  try {
    (void)derive_params(neuron);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("neuron: ") + e.what());
  }
  IntegratorConfig ic = integrator;
  ic.t_end = ringdown.horizon;
  ic.validate(neuron);
  handshake().validate();

  const auto positive = [](double x, const char* field) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(std::string(field) + " must be > 0");
  };
  const auto in_supply = [&](double x, const char* field) {
    if (!(x >= 0.0 && x <= neuron.V_DD))
      throw ConfigError(std::string(field) + " must lie in [0, V_DD]");
  };
  if (!(ringdown.t_pulse >= 0.0)) throw ConfigError("ringdown.t_pulse must be >= 0");
  positive(ringdown.width, "ringdown.width");
  in_supply(ringdown.amplitude, "ringdown.amplitude");
  positive(ringdown.horizon, "ringdown.horizon");
  positive(ringdown.settle_window, "ringdown.settle_window");
  if (ringdown.settle_window >= ringdown.horizon)
    throw ConfigError("ringdown.settle_window must be shorter than ringdown.horizon");

  in_supply(fi.level_min, "fi.level_min");
  in_supply(fi.level_max, "fi.level_max");
  if (fi.n_levels < 1) throw ConfigError("fi.n_levels must be >= 1");
  if (fi.n_levels > 1 && !(fi.level_max > fi.level_min))
    throw ConfigError("fi.level_max must exceed fi.level_min");
  if (fi.spikes_per_point < 2) throw ConfigError("fi.spikes_per_point must be >= 2");
  if (!(fi.V_th > neuron.V_reset && fi.V_th < neuron.V_DD))
    throw ConfigError("fi.V_th must lie in (V_reset, V_DD)");
  positive(fi.timeout, "fi.timeout");

  (void)chirp_frequencies(chirp.chirp);
  in_supply(chirp.chirp.amplitude, "chirp.amplitude");
  if (chirp.sweep) {
    positive(chirp.bias_min, "chirp.bias_min");
    if (chirp.n_bias < 1) throw ConfigError("chirp.n_bias must be >= 1");
    if (chirp.n_bias > 1 && !(chirp.bias_max > chirp.bias_min))
      throw ConfigError("chirp.bias_max must exceed chirp.bias_min");
    if (!(chirp.vth_min > neuron.V_reset && chirp.vth_max < neuron.V_DD &&
          chirp.vth_max >= chirp.vth_min))
      throw ConfigError("chirp.vth_min/vth_max must be ordered within (V_reset, V_DD)");
  }

  positive(sweep_bias.I_min, "sweep_bias.I_min");
  if (!(sweep_bias.I_max > sweep_bias.I_min))
    throw ConfigError("sweep_bias.I_max must exceed sweep_bias.I_min");
  if (sweep_bias.n_points < 2) throw ConfigError("sweep_bias.n_points must be >= 2");
  if (!(sweep_bias.periods >= 4.0)) throw ConfigError("sweep_bias.periods must be >= 4");
  if (!(sweep_bias.V_th > neuron.V_reset && sweep_bias.V_th < neuron.V_DD))
    throw ConfigError("sweep_bias.V_th must lie in (V_reset, V_DD)");

  montecarlo.model.validate();
  if (montecarlo.n_dies < 2) throw ConfigError("montecarlo.n_dies must be >= 2");
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  static const std::set<std::string> sections{"neuron",     "integrator", "handshake",
                                              "ringdown",   "fi",         "chirp",
                                              "sweep_bias", "montecarlo", "output"};
  for (const auto& [key, value] : j.items())
    if (!sections.count(key)) throw ConfigError(key + ": unknown section");

  ExperimentConfig c;
  {
    SectionReader r(j, "neuron");
    CircuitParams& p = c.neuron;
    r.number("C1", p.C1);
    r.number("C2", p.C2);
    r.number("I_n0", p.I_n0);
    r.number("n0_ratio_alpha", p.n0_ratio_alpha);
    r.number("n0_ratio_beta", p.n0_ratio_beta);
    r.number("kappa_n", p.kappa_n);
    r.number("U_T", p.U_T);
    r.number("I_IU", p.I_IU);
    r.number("I_IV", p.I_IV);
    r.number("V_DD", p.V_DD);
    r.number("V_th", p.V_th);
    r.number("V_reset", p.V_reset);
    r.number("g_damp", p.g_damp);
    r.number("T_spk", p.T_spk);
    r.number("I_s0_exc", p.I_s0_exc);
    r.number("I_s0_inh", p.I_s0_inh);
    r.done();
  }
  {
    SectionReader r(j, "integrator");
    r.number("dt", c.integrator.dt);
    r.number("crossing_tol", c.integrator.crossing_tol);
    r.integer("sample_stride", c.integrator.sample_stride);
    r.done();
  }
  {
    SectionReader r(j, "handshake");
    std::string mode;
    r.string("mode", mode);
    if (mode == "self_ack") c.ack_mode = AckMode::SelfAck;
    else if (mode == "scripted_ack") c.ack_mode = AckMode::ScriptedAck;
    else if (!mode.empty())
      throw ConfigError("handshake.mode: expected \"self_ack\" or \"scripted_ack\"");
    r.numbers("ack_delays", c.ack_delays);
    r.done();
  }
  {
    SectionReader r(j, "ringdown");
    r.number("t_pulse", c.ringdown.t_pulse);
    r.number("width", c.ringdown.width);
    r.number("amplitude", c.ringdown.amplitude);
    r.polarity("polarity", c.ringdown.polarity);
    r.number("horizon", c.ringdown.horizon);
    r.number("settle_window", c.ringdown.settle_window);
    r.string("stimulus_csv", c.ringdown.stimulus_csv);
    r.done();
  }
  {
    SectionReader r(j, "fi");
    r.number("level_min", c.fi.level_min);
    r.number("level_max", c.fi.level_max);
    r.integer("n_levels", c.fi.n_levels);
    r.integer("spikes_per_point", c.fi.spikes_per_point);
    r.number("V_th", c.fi.V_th);
    r.number("timeout", c.fi.timeout);
    r.done();
  }
  {
    SectionReader r(j, "chirp");
    ChirpSpec& s = c.chirp.chirp;
    r.number("f_start", s.f_start);
    r.number("f_end", s.f_end);
    r.integer("n_freqs", s.n_freqs);
    r.integer("spikes_per_freq", s.spikes_per_freq);
    r.number("pulse_width", s.pulse_width);
    r.number("amplitude", s.amplitude);
    r.polarity("polarity", s.polarity);
    std::string spacing;
    r.string("spacing", spacing);
    if (spacing == "geometric") s.spacing = ChirpSpacing::Geometric;
    else if (spacing == "linear") s.spacing = ChirpSpacing::Linear;
    else if (!spacing.empty())
      throw ConfigError("chirp.spacing: expected \"geometric\" or \"linear\"");
    r.boolean("sweep", c.chirp.sweep);
    r.number("bias_min", c.chirp.bias_min);
    r.number("bias_max", c.chirp.bias_max);
    r.integer("n_bias", c.chirp.n_bias);
    r.number("vth_min", c.chirp.vth_min);
    r.number("vth_max", c.chirp.vth_max);
    r.done();
  }
  {
    SectionReader r(j, "sweep_bias");
    r.number("I_min", c.sweep_bias.I_min);
    r.number("I_max", c.sweep_bias.I_max);
    r.integer("n_points", c.sweep_bias.n_points);
    r.number("periods", c.sweep_bias.periods);
    r.number("V_th", c.sweep_bias.V_th);
    r.done();
  }
  {
    SectionReader r(j, "montecarlo");
    MismatchModel& m = c.montecarlo.model;
    r.number("sigma_ln_In0_alpha", m.sigma_ln_In0_alpha);
    r.number("sigma_ln_In0_beta", m.sigma_ln_In0_beta);
    r.number("sigma_C", m.sigma_C);
    r.number("sigma_I_bias", m.sigma_I_bias);
    r.number("sigma_ln_g_damp", m.sigma_ln_g_damp);
    r.integer("seed", m.seed);
    r.integer("n_dies", c.montecarlo.n_dies);
    r.integer("workers", c.montecarlo.workers);
    r.done();
  }
  {
    SectionReader r(j, "output");
    r.string("dir", c.output_dir);
    r.done();
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  const CircuitParams& p = c.neuron;
  const ChirpSpec& s = c.chirp.chirp;
  const MismatchModel& m = c.montecarlo.model;
  json j;
  j["neuron"] = {{"C1", p.C1},
                 {"C2", p.C2},
                 {"I_n0", p.I_n0},
                 {"n0_ratio_alpha", p.n0_ratio_alpha},
                 {"n0_ratio_beta", p.n0_ratio_beta},
                 {"kappa_n", p.kappa_n},
                 {"U_T", p.U_T},
                 {"I_IU", p.I_IU},
                 {"I_IV", p.I_IV},
                 {"V_DD", p.V_DD},
                 {"V_th", p.V_th},
                 {"V_reset", p.V_reset},
                 {"g_damp", p.g_damp},
                 {"T_spk", p.T_spk},
                 {"I_s0_exc", p.I_s0_exc},
                 {"I_s0_inh", p.I_s0_inh}};
  j["integrator"] = {{"dt", c.integrator.dt},
                     {"crossing_tol", c.integrator.crossing_tol},
                     {"sample_stride", c.integrator.sample_stride}};
  j["handshake"] = {{"mode", c.ack_mode == AckMode::SelfAck ? "self_ack" : "scripted_ack"},
                    {"ack_delays", c.ack_delays}};
  j["ringdown"] = {{"t_pulse", c.ringdown.t_pulse},
                   {"width", c.ringdown.width},
                   {"amplitude", c.ringdown.amplitude},
                   {"polarity", to_string(c.ringdown.polarity)},
                   {"horizon", c.ringdown.horizon},
                   {"settle_window", c.ringdown.settle_window},
                   {"stimulus_csv", c.ringdown.stimulus_csv}};
  j["fi"] = {{"level_min", c.fi.level_min},
             {"level_max", c.fi.level_max},
             {"n_levels", c.fi.n_levels},
             {"spikes_per_point", c.fi.spikes_per_point},
             {"V_th", c.fi.V_th},
             {"timeout", c.fi.timeout}};
  j["chirp"] = {{"f_start", s.f_start},
                {"f_end", s.f_end},
                {"n_freqs", s.n_freqs},
                {"spikes_per_freq", s.spikes_per_freq},
                {"pulse_width", s.pulse_width},
                {"amplitude", s.amplitude},
                {"polarity", to_string(s.polarity)},
                {"spacing", s.spacing == ChirpSpacing::Geometric ? "geometric" : "linear"},
                {"sweep", c.chirp.sweep},
                {"bias_min", c.chirp.bias_min},
                {"bias_max", c.chirp.bias_max},
                {"n_bias", c.chirp.n_bias},
                {"vth_min", c.chirp.vth_min},
                {"vth_max", c.chirp.vth_max}};
  j["sweep_bias"] = {{"I_min", c.sweep_bias.I_min},
                     {"I_max", c.sweep_bias.I_max},
                     {"n_points", c.sweep_bias.n_points},
                     {"periods", c.sweep_bias.periods},
                     {"V_th", c.sweep_bias.V_th}};
  j["montecarlo"] = {{"sigma_ln_In0_alpha", m.sigma_ln_In0_alpha},
                     {"sigma_ln_In0_beta", m.sigma_ln_In0_beta},
                     {"sigma_C", m.sigma_C},
                     {"sigma_I_bias", m.sigma_I_bias},
                     {"sigma_ln_g_damp", m.sigma_ln_g_damp},
                     {"seed", m.seed},
                     {"n_dies", c.montecarlo.n_dies},
                     {"workers", c.montecarlo.workers}};
  j["output"] = {{"dir", c.output_dir}};
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace rfsim
