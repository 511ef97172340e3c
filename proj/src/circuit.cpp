#include "rfsim/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rfsim/errors.hpp"

namespace rfsim {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("neuron." + what);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void CircuitParams::validate() const {
  require(finite_positive(C1), "C1 must be > 0");
  require(finite_positive(C2), "C2 must be > 0");
  require(finite_positive(I_n0), "I_n0 must be > 0");
  require(finite_positive(n0_ratio_alpha), "n0_ratio_alpha must be > 0");
  require(finite_positive(n0_ratio_beta), "n0_ratio_beta must be > 0");
  require(finite_positive(U_T), "U_T must be > 0");
  require(finite_positive(I_IU), "I_IU must be > 0");
  require(finite_positive(I_IV), "I_IV must be > 0");
  require(finite_positive(I_s0_exc), "I_s0_exc must be > 0");
  require(finite_positive(I_s0_inh), "I_s0_inh must be > 0");
  require(finite_positive(T_spk), "T_spk must be > 0");
  require(std::isfinite(kappa_n) && kappa_n > 0.0 && kappa_n < 1.0, "kappa_n must be in (0, 1)");
  require(std::isfinite(g_damp) && g_damp >= 0.0, "g_damp must be >= 0");
  require(std::isfinite(V_reset) && V_reset > 0.0, "V_reset must be > 0");
  require(std::isfinite(V_th) && V_th > V_reset, "V_th must exceed V_reset");
  require(std::isfinite(V_DD) && V_DD > V_th, "V_DD must exceed V_th");
}

double DerivedParams::f_res() const { return omega / (2.0 * std::numbers::pi); }

Equilibrium equilibrium(const CircuitParams& p, double I_in) {
  const double k = p.exp_gain();
  const double drive = p.I_IU + I_in;
  if (p.I_IV <= p.I_n0_alpha())
    throw DomainError("equilibrium: I_IV must exceed the alpha-branch I_n0");
  if (drive <= p.I_n0_beta())
    throw DomainError("equilibrium: I_IU + I_in must exceed the beta-branch I_n0");
  return {std::log(p.I_IV / p.I_n0_alpha()) / k, std::log(drive / p.I_n0_beta()) / k};
}

DerivedParams derive_params(const CircuitParams& p, double I_in) {
  const Equilibrium eq = equilibrium(p, I_in);
  const double k = p.exp_gain();
  DerivedParams d;
  d.U_star = eq.U;
  d.V_star = eq.V;
  d.I_alpha_star = p.I_IV;
  d.I_beta_star = p.I_IU + I_in;
  d.omega = k * std::sqrt(d.I_alpha_star * d.I_beta_star / (p.C1 * p.C2));
  // Half the trace of the Jacobian; equals -g/C1 when C1 == C2.
  d.b = -0.5 * p.g_damp * (1.0 / p.C1 + 1.0 / p.C2);
  d.Q = d.b < 0.0 ? d.omega / (2.0 * -d.b) : std::numeric_limits<double>::infinity();
  return d;
}

ResonatorModel::ResonatorModel(const CircuitParams& p)
    : p_(p),
      gain_(p.exp_gain()),
      n0_alpha_(p.I_n0_alpha()),
      n0_beta_(p.I_n0_beta()),
      v_lo_(-kGuardBand),
      v_hi_(p.V_DD + kGuardBand),
      rest_(equilibrium(p)) {}

BranchCurrents ResonatorModel::currents(double U, double V) const {
  return {n0_alpha_ * std::exp(gain_ * U), n0_beta_ * std::exp(gain_ * V)};
}

Derivative ResonatorModel::rhs(double U, double V, double I_in, const Equilibrium& ref) const {
  Derivative d;
  const double Ue = std::clamp(U, v_lo_, v_hi_);
  const double Ve = std::clamp(V, v_lo_, v_hi_);
  d.overflow = Ue != U || Ve != V || !std::isfinite(U) || !std::isfinite(V);
  const double I_alpha = n0_alpha_ * std::exp(gain_ * Ue);
  const double I_beta = n0_beta_ * std::exp(gain_ * Ve);
  d.dU = (I_in + p_.I_IU - I_beta - p_.g_damp * (U - ref.U)) / p_.C1;
  d.dV = (I_alpha - p_.I_IV - p_.g_damp * (V - ref.V)) / p_.C2;
  return d;
}

Derivative rhs(const NeuronState& s, const CircuitParams& p, double I_in) {
  return ResonatorModel(p).rhs(s.U, s.V, I_in);
}

BranchCurrents lv_transform(const NeuronState& s, const CircuitParams& p) {
  const double k = p.exp_gain();
  return {p.I_n0_alpha() * std::exp(k * s.U), p.I_n0_beta() * std::exp(k * s.V)};
}

double lv_invariant(const NeuronState& s, const CircuitParams& p, double I_in) {
  const BranchCurrents I = lv_transform(s, p);
  const double k = p.exp_gain();
  const double s_a = k / p.C1;
  const double s_b = k / p.C2;
  return (I.alpha - p.I_IV * std::log(I.alpha)) / s_a +
         (I.beta - (p.I_IU + I_in) * std::log(I.beta)) / s_b;
}

LinearizedRFState linearized_solution(const LinearizedRFState& x0, const DerivedParams& dp,
                                      double t) {
  const double b = dp.b;
  const double w = dp.omega;
  const double D = b * b + w * w;
  // Fixed point of the forced system.
  const double up = -b * x0.c * x0.I / D;
  const double vp = w * x0.c * x0.I / D;
  const double du = x0.u - up;
  const double dv = x0.v - vp;
  const double decay = std::exp(b * t);
  const double cs = std::cos(w * t);
  const double sn = std::sin(w * t);
  LinearizedRFState x = x0;
  x.u = up + decay * (cs * du - sn * dv);
  x.v = vp + decay * (sn * du + cs * dv);
  return x;
}

namespace {

double v_scale(const CircuitParams& p, const DerivedParams& d) {
  return std::sqrt(d.I_beta_star * p.C2 / (d.I_alpha_star * p.C1));
}

}  // namespace

LinearizedRFState to_linearized(const NeuronState& s, const CircuitParams& p, double I_in) {
  const DerivedParams d = derive_params(p, I_in);
  LinearizedRFState x;
  x.u = s.U - d.U_star;
  x.v = (s.V - d.V_star) * v_scale(p, d);
  x.I = 0.0;
  x.c = 1.0 / p.C1;
  return x;
}

std::pair<double, double> from_linearized(const LinearizedRFState& x, const CircuitParams& p,
                                          double I_in) {
  const DerivedParams d = derive_params(p, I_in);
  return {d.U_star + x.u, d.V_star + x.v / v_scale(p, d)};
}

}  // namespace rfsim
