#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "rfsim/errors.hpp"
#include "rfsim/stimulus.hpp"

using namespace rfsim;
using doctest::Approx;

namespace {

void check_tiling(const StimulusProgram& prog) {
  const auto& segs = prog.segments();
  REQUIRE_FALSE(segs.empty());
  CHECK(segs.front().t_start == 0.0);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    CHECK(segs[i].t_end >= segs[i].t_start);
    if (i > 0) CHECK(segs[i].t_start == segs[i - 1].t_end);
  }
  CHECK(segs.back().t_end == prog.duration());
}

std::size_t count_pulses(const StimulusProgram& prog) {
  std::size_t n = 0;
  for (const Segment& s : prog.segments())
    if (s.V_exc != 0.0 || s.V_inh != 0.0) ++n;
  return n;
}

}  // namespace

TEST_CASE("pulse: three segments around the active window") {
  const StimulusProgram p = pulse(1e-3, 100e-6, 0.5, Polarity::Inhibitory, 0.01);
  const auto bp = p.breakpoints();
  REQUIRE(bp.size() == 3);
  CHECK(bp[0] == 0.0);
  CHECK(bp[1] == 1e-3);
  CHECK(bp[2] == Approx(1.1e-3).epsilon(1e-15));
  CHECK(p.segments()[1].V_inh == 0.5);
  CHECK(p.segments()[1].V_exc == 0.0);
  CHECK_FALSE(p.segments()[1].sustained);
  CHECK(p.duration() == 0.01);
  check_tiling(p);

  SUBCASE("zero amplitude is the zero stimulus") {
    CHECK(pulse(1e-3, 100e-6, 0.0, Polarity::Excitatory, 0.01) == StimulusProgram(0.01));
  }
  SUBCASE("pulse at t0 = 0 collapses the leading segment") {
    const StimulusProgram q = pulse(0.0, 100e-6, 0.5, Polarity::Excitatory, 0.01);
    REQUIRE(q.segments().size() == 2);
    CHECK(q.segments()[0].V_exc == 0.5);
    check_tiling(q);
  }
  SUBCASE("duration is stretched to cover the pulse") {
    CHECK(pulse(1e-3, 100e-6, 0.5, Polarity::Excitatory, 0.0).duration() ==
          Approx(1.1e-3).epsilon(1e-15));
  }
  SUBCASE("bounds violations") {
    CHECK_THROWS_AS(pulse(1e-3, 0.0, 0.5, Polarity::Excitatory, 0.01), ConfigError);
    CHECK_THROWS_AS(pulse(-1e-3, 1e-4, 0.5, Polarity::Excitatory, 0.01), ConfigError);
    CHECK_THROWS_AS(pulse(1e-3, 1e-4, -0.5, Polarity::Excitatory, 0.01), ConfigError);
    CHECK_THROWS_AS(pulse(1e-3, 1e-4, 1.6, Polarity::Excitatory, 0.01).validate(1.5),
                    ConfigError);
  }
}

TEST_CASE("step: baseline then held level") {
  SUBCASE("step at t = 0 is a single held segment") {
    const StimulusProgram s = step(0.0, 0.0, 0.5, Polarity::Excitatory, 1.0);
    REQUIRE(s.segments().size() == 1);
    CHECK(s.segments()[0].V_exc == 0.5);
    CHECK(s.segments()[0].sustained);
  }
  SUBCASE("delayed step") {
    const StimulusProgram s = step(0.2, 0.1, 0.4, Polarity::Inhibitory, 1.0);
    REQUIRE(s.segments().size() == 2);
    CHECK(s.segments()[0].V_inh == 0.1);
    CHECK(s.segments()[1].V_inh == 0.4);
    CHECK(s.segments()[1].t_start == 0.2);
    check_tiling(s);
  }
  SUBCASE("level equal to baseline is constant") {
    const StimulusProgram s = step(0.2, 0.3, 0.3, Polarity::Excitatory, 1.0);
    CHECK(s.segments().size() == 1);
  }
  SUBCASE("the last segment persists past the duration") {
    const StimulusProgram s = step(0.2, 0.0, 0.3, Polarity::Excitatory, 1.0);
    CHECK(s.at(5.0).V_exc == 0.3);
    CHECK(s.index_at(5.0) == 1);
  }
}

TEST_CASE("spiking_chirp: octave chirp used for frequency detection") {
  const ChirpSpec spec;  // 131 to 262 Hz, 13 x 10 pulses, 100 us, 0.5 V
  const StimulusProgram c = spiking_chirp(spec);
  check_tiling(c);
  CHECK(count_pulses(c) == 130);
  REQUIRE(c.blocks().size() == 13);
  CHECK(c.blocks().back().frequency == Approx(262.0).epsilon(1e-14));
  // Reference sums were evaluated in 50-digit arithmetic.
  CHECK(1.0 / c.blocks().back().frequency == Approx(3.8167938931297710e-3).epsilon(1e-13));
  CHECK(c.duration() == Approx(0.71821197500403693).epsilon(1e-12));

  const auto f = chirp_frequencies(spec);
  for (std::size_t i = 1; i < f.size(); ++i)
    CHECK(f[i] / f[i - 1] == Approx(std::pow(2.0, 1.0 / 12.0)).epsilon(1e-12));

  // Pulses start at the block start and repeat at the block period.
  for (const FrequencyBlock& b : c.blocks()) {
    const double period = 1.0 / b.frequency;
    CHECK(b.t_end - b.t_start == Approx(10 * period).epsilon(1e-12));
    for (int k = 0; k < 10; ++k) {
      const double t = b.t_start + k * period;
      CHECK(c.at(t + 50e-6).V_inh == 0.5);
      CHECK(c.at(t + 150e-6).V_inh == 0.0);
      CHECK(c.block_at(t + 50e-6) == std::optional<std::size_t>(&b - &c.blocks()[0]));
    }
  }
  CHECK_FALSE(c.block_at(c.duration() + 1.0).has_value());

  SUBCASE("single frequency is a constant-rate train") {
    ChirpSpec s1 = spec;
    s1.n_freqs = 1;
    const StimulusProgram one = spiking_chirp(s1);
    CHECK(count_pulses(one) == 10);
    CHECK(one.duration() == Approx(10.0 / 131.0));
  }
  SUBCASE("linear spacing") {
    ChirpSpec sl = spec;
    sl.spacing = ChirpSpacing::Linear;
    const auto fl = chirp_frequencies(sl);
    for (std::size_t i = 1; i < fl.size(); ++i)
      CHECK(fl[i] - fl[i - 1] == Approx(131.0 / 12.0).epsilon(1e-12));
  }
  SUBCASE("pulse as long as the period is rejected") {
    ChirpSpec bad = spec;
    bad.pulse_width = 1.0 / 262.0;
    CHECK_THROWS_AS(spiking_chirp(bad), ConfigError);
    bad = spec;
    bad.f_end = bad.f_start;
    CHECK_THROWS_AS(spiking_chirp(bad), ConfigError);
  }
}

TEST_CASE("programs tile their duration for random constructions") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double t0 = 0.01 * u(rng);
    const double w = 1e-5 + 1e-3 * u(rng);
    const double d = 0.02 * u(rng);
    check_tiling(pulse(t0, w, 0.5 * u(rng), Polarity::Excitatory, d));
    check_tiling(step(t0, 0.3 * u(rng), 0.3 * u(rng), Polarity::Inhibitory, d + t0));
    ChirpSpec c;
    c.f_start = 50.0 + 100.0 * u(rng);
    c.f_end = c.f_start * (1.1 + u(rng));
    c.n_freqs = 1 + static_cast<int>(8 * u(rng));
    c.spikes_per_freq = 1 + static_cast<int>(6 * u(rng));
    const StimulusProgram cp = spiking_chirp(c);
    check_tiling(cp);
    CHECK(count_pulses(cp) == static_cast<std::size_t>(c.n_freqs * c.spikes_per_freq));
  }
}

TEST_CASE("program constructor validates and merges") {
  CHECK_THROWS_AS(StimulusProgram({{0.1, 0.2, 0, 0, false}}), ConfigError);
  CHECK_THROWS_AS(StimulusProgram({{0.0, 0.1, 0, 0, false}, {0.2, 0.3, 0, 0, false}}),
                  ConfigError);
  const StimulusProgram m({{0.0, 0.1, 0.2, 0, false}, {0.1, 0.3, 0.2, 0, false}});
  CHECK(m.segments().size() == 1);
  CHECK(m.next_boundary(0.0) == 0.3);
  CHECK(std::isinf(m.next_boundary(0.3)));
}

TEST_CASE("load_stimulus_csv") {
  const auto path = std::filesystem::temp_directory_path() / "rfsim_stim_test.csv";
  {
    std::ofstream f(path);
    f << "t_start,t_end,V_exc,V_inh\n0,0.001,0,0\n0.001,0.0011,0,0.5\n0.0011,0.3,0,0\n";
  }
  const StimulusProgram p = load_stimulus_csv(path);
  CHECK(p == pulse(0.001, 100e-6, 0.5, Polarity::Inhibitory, 0.3));
  {
    std::ofstream f(path);
    f << "0,0.001,0,zero\n";
  }
  CHECK_THROWS_AS(load_stimulus_csv(path), ConfigError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_stimulus_csv(path), IoError);
}

TEST_CASE("synapse_current") {
  const CircuitParams p;
  const SynapseModel m = SynapseModel::from(p);
  CHECK(synapse_current(0.0, 0.0, m, false) == 0.0);
  CHECK(synapse_current(0.5, 0.3, m, true) == 0.0);

  const double inh = synapse_current(0.0, 0.5, m, false);
  CHECK(inh < 0.0);
  CHECK(inh == Approx(-p.I_s0_inh * std::expm1(p.kappa_n * 0.5 / p.U_T)).epsilon(1e-14));

  SUBCASE("swapping inputs negates the current for equal scales") {
    SynapseModel eq = m;
    eq.I_s0_inh = eq.I_s0_exc;
    for (double a : {0.0, 0.1, 0.37, 0.5})
      for (double b : {0.0, 0.2, 0.45})
        CHECK(synapse_current(a, b, eq, false) == Approx(-synapse_current(b, a, eq, false)));
  }
  SUBCASE("default inhibitory gain visibly displaces U in a 100 us pulse") {
    CHECK(std::abs(inh) * 100e-6 / p.C1 >= 5e-3);
  }
}
