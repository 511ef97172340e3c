#pragma once

// Behavioral model of the subthreshold resonator: two capacitor nodes U and V
// coupled through exponential (weak-inversion) transistor currents, i.e. a
// Lotka-Volterra oscillator in the current domain.

#include <limits>
#include <utility>

namespace rfsim {

/// Physical parameters of one neuron instance. SI units throughout.
///
/// The defaults reproduce the characterization operating point: 1.5 V
/// supply, 850 mV threshold, 750 mV reset and 150 pA on both bias branches.
/// kappa_n, U_T, I_n0, the branch ratios, g_damp, T_spk and the synapse
/// scale currents are calibration choices (see README).
struct CircuitParams {
  double C1 = 1.2e-12;
  double C2 = 1.2e-12;
  double I_n0 = 47e-15;
  /// Effective I_n0 multiplier of the exponential branch driven by U
  /// (feeds C2).
  double n0_ratio_alpha = 1.0;
  /// Effective I_n0 multiplier of the exponential branch driven by V
  /// (discharges C1). 0.6813 places the resting V at 758 mV.
  double n0_ratio_beta = 0.6813;
  double kappa_n = 0.7;
  double U_T = 0.02585;
  double I_IU = 150e-12;
  double I_IV = 150e-12;
  double V_DD = 1.5;
  double V_th = 0.850;
  double V_reset = 0.750;
  double g_damp = 6.5e-12;
  double T_spk = 100e-6;
  double I_s0_exc = 1.0e-15;
  double I_s0_inh = 5.6e-16;

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;

  double I_n0_alpha() const { return I_n0 * n0_ratio_alpha; }
  double I_n0_beta() const { return I_n0 * n0_ratio_beta; }
  /// kappa^2 / ((kappa + 1) U_T), the gain of the exponentials in 1/V.
  double exp_gain() const { return kappa_n * kappa_n / ((kappa_n + 1.0) * U_T); }

  bool operator==(const CircuitParams&) const = default;
};

enum class Phase { Oscillate, Clamped };

struct NeuronState {
  double t = 0.0;
  double U = 0.0;
  double V = 0.0;
  Phase phase = Phase::Oscillate;
};

struct Equilibrium {
  double U = 0.0;
  double V = 0.0;
};

struct DerivedParams {
  double U_star = 0.0;
  double V_star = 0.0;
  double omega = 0.0;  ///< rad/s
  double b = 0.0;      ///< decay factor, 1/s, <= 0
  double Q = 0.0;      ///< +inf when b == 0
  double I_alpha_star = 0.0;
  double I_beta_star = 0.0;

  double f_res() const;
};

/// Closed-form equilibrium, linearized frequency, decay and quality factor.
/// I_in is a constant external input current; the equilibrium V shifts with
/// it while the equilibrium U does not. Throws DomainError when a bias
/// current does not exceed its branch I_n0 or I_IU + I_in <= 0.
DerivedParams derive_params(const CircuitParams& p, double I_in = 0.0);

/// Equilibrium voltages at constant input; same domain rules as derive_params.
Equilibrium equilibrium(const CircuitParams& p, double I_in = 0.0);

struct Derivative {
  double dU = 0.0;
  double dV = 0.0;
  bool overflow = false;  ///< a node left the exponent guard band
};

/// Pair of exponential branch currents (I_alpha from U, I_beta from V).
struct BranchCurrents {
  double alpha = 0.0;
  double beta = 0.0;
};

/// Right-hand side of the node equations with cached constants.
///
///   C1 dU/dt = I_in + I_IU - I_beta(V) - g_damp (U - U_ref)
///   C2 dV/dt = I_alpha(U) - I_IV      - g_damp (V - V_ref)
///
/// Voltages entering the exponentials are clamped to
/// [-0.2 V, V_DD + 0.2 V]; clamping sets Derivative::overflow.
class ResonatorModel {
 public:
  explicit ResonatorModel(const CircuitParams& p);

  Derivative rhs(double U, double V, double I_in, const Equilibrium& ref) const;
  /// Damping referenced to the zero-input equilibrium.
  Derivative rhs(double U, double V, double I_in) const { return rhs(U, V, I_in, rest_); }

  BranchCurrents currents(double U, double V) const;

  const CircuitParams& params() const { return p_; }
  const Equilibrium& rest() const { return rest_; }
  double gain() const { return gain_; }

  static constexpr double kGuardBand = 0.2;

 private:
  CircuitParams p_;
  double gain_;
  double n0_alpha_;
  double n0_beta_;
  double v_lo_;
  double v_hi_;
  Equilibrium rest_;
};

/// dU/dt, dV/dt for a state in the oscillating phase (zero-input damping
/// reference).
Derivative rhs(const NeuronState& s, const CircuitParams& p, double I_in);

/// Exponential currents I_alpha = I_n0a exp(gain U), I_beta = I_n0b exp(gain V).
BranchCurrents lv_transform(const NeuronState& s, const CircuitParams& p);

/// Conserved quantity of the undamped, constant-input system:
///   H = (I_a - I_IV ln I_a) / s_a + (I_b - (I_IU + I_in) ln I_b) / s_b
/// with s_a = gain / C1, s_b = gain / C2.
double lv_invariant(const NeuronState& s, const CircuitParams& p, double I_in);

/// State of the normal-form oscillator
///   du/dt = b u - omega v + c I,   dv/dt = omega u + b v.
struct LinearizedRFState {
  double u = 0.0;
  double v = 0.0;
  double I = 0.0;
  double c = 1.0;
};

/// Exact solution of the normal form at time t for constant input.
LinearizedRFState linearized_solution(const LinearizedRFState& x0, const DerivedParams& dp,
                                      double t);

/// Maps a node-voltage displacement from equilibrium onto normal-form
/// coordinates: u = U - U*, v = (V - V*) * sqrt(I_b* C2 / (I_a* C1)),
/// c = 1 / C1 so that c * I_in is in V/s.
LinearizedRFState to_linearized(const NeuronState& s, const CircuitParams& p, double I_in = 0.0);

/// Inverse of to_linearized for the voltage coordinates.
std::pair<double, double> from_linearized(const LinearizedRFState& x, const CircuitParams& p,
                                          double I_in = 0.0);

}  // namespace rfsim
