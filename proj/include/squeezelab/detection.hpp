#pragma once

#include <cmath>
#include <functional>

#include "squeezelab/gaussian_core.hpp"
#include "squeezelab/qcrb.hpp"

namespace squeezelab {

/// Signal statistics and the phase error they imply through error
/// propagation: varPhase = varSignal / gain^2.
struct DetectionOutcome {
  double meanSignal = 0.0;
  double varSignal = 0.0;
  double gain = 0.0;      // d<signal>/d(phase) at the operating point
  double varPhase = 0.0;
};

struct SignalStats {
  double mean = 0.0;
  double variance = 0.0;
};

namespace detail {

// 5-point central difference, O(h^4).
inline double stencil5(const std::function<double(double)>& f, double x,
                       double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) /
         (12 * h);
}

}  // namespace detail

/// Error propagation with a numerically differentiated gain: 5-point central
/// difference at step h = 1e-4 rad combined with one Richardson step at h/2.
/// Throws ZeroGainError when the mean signal carries no first-order phase
/// information at phi0.
inline DetectionOutcome error_propagation(
    const std::function<double(double)>& meanOf,
    const std::function<double(double)>& varOf, double phi0) {
  constexpr double h = 1e-4;
  const double d1 = detail::stencil5(meanOf, phi0, h);
  const double d2 = detail::stencil5(meanOf, phi0, h / 2);

  DetectionOutcome out;
  out.meanSignal = meanOf(phi0);
  out.varSignal = varOf(phi0);
  out.gain = (16.0 * d2 - d1) / 15.0;

  const double scale = std::max(1.0, std::sqrt(std::abs(out.varSignal)));
  if (std::abs(out.gain) <= 1e-12 * scale) {
    throw ZeroGainError("error_propagation: gain vanishes at operating point");
  }
  out.varPhase = out.varSignal / (out.gain * out.gain);
  return out;
}

// ---------------------------------------------------------------------------
// Single-arm homodyne readout: amplitude-squeezed probe against a strong
// phase-shifted reference on a balanced output beamsplitter, differential
// photocurrent n- = d1+d1 - d2+d2.

struct HomodyneError {
  DetectionOutcome outcome;
  double asymptote = 0.0;  // alphaR -> inf limit e^{-2r}/(4 alpha^2)
};

inline double homodyne_analytic_gain(double alpha, double alphaR, double phi) {
  return -2.0 * alpha * alphaR * std::cos(phi);
}

/// Realized phase variance of the single-arm homodyne scheme,
///   varPhase = (e^{-2r}/alpha^2 + 1/alphaR^2 + sinh^2 r/(alpha^2 alphaR^2))/4.
inline HomodyneError single_arm_homodyne_error(double alpha, double alphaR,
                                               double r) {
  if (!(alpha > 0.0) || !(alphaR > 0.0)) {
    throw std::invalid_argument(
        "single_arm_homodyne_error: alpha and alphaR must be > 0");
  }
  HomodyneError he;
  he.outcome.meanSignal = 0.0;  // <n-> = -2 alpha alphaR sin(phi) at phi = 0
  he.outcome.varSignal = alpha * alpha +
                         alphaR * alphaR * std::exp(-2.0 * r) +
                         std::pow(std::sinh(r), 2);
  he.outcome.gain = homodyne_analytic_gain(alpha, alphaR, 0.0);
  he.outcome.varPhase =
      he.outcome.varSignal / (he.outcome.gain * he.outcome.gain);
  he.asymptote = std::exp(-2.0 * r) / (4.0 * alpha * alpha);
  return he;
}

/// Same readout evaluated through the generic Bogoliubov pipeline (probe and
/// reference modes, balanced mixer, finite-difference gain). Valid for any
/// squeeze angle.
inline DetectionOutcome homodyne_error_via_map(double alpha, SqueezeParams sq,
                                               double alphaR) {
  if (!(alpha > 0.0) || !(alphaR > 0.0)) {
    throw std::invalid_argument(
        "homodyne_error_via_map: alpha and alphaR must be > 0");
  }
  BogoliubovMap prep = BogoliubovMap::identity(2);
  prep = apply_dopa(std::move(prep), 0, sq);
  prep = displace(std::move(prep), 0, alpha);
  prep = displace(std::move(prep), 1, Complex(0.0, alphaR));

  const auto stats = [&prep](double phi) {
    BogoliubovMap m = apply_phase(prep, 0, phi);
    m = apply_beamsplitter(std::move(m), 0, 1, 0.5);
    const MomentSet ms = photon_covariance(m);
    SignalStats s;
    s.mean = ms.meanN(0) - ms.meanN(1);
    s.variance = ms.covN(0, 0) + ms.covN(1, 1) - 2.0 * ms.covN(0, 1);
    return s;
  };
  return error_propagation([&](double p) { return stats(p).mean; },
                           [&](double p) { return stats(p).variance; }, 0.0);
}

// ---------------------------------------------------------------------------
// Single-arm parametric (anti-squeezing) readout: squeeze r at angle theta,
// phase phi, then a second amplifier pumped for anti-squeezing with factor R,
// followed by direct detection of n.

/// Coefficients of the composed single-mode chain d = B alpha + C z + S z+.
struct Su11Coefficients {
  Complex B;
  Complex C;
  Complex S;
};

inline Su11Coefficients su11_coefficients(double r, double theta,
                                          double antiSqueeze, double phi) {
  const double R = antiSqueeze;
  const Complex e2t = std::exp(Complex(0.0, 2.0 * theta));
  const Complex em = std::exp(Complex(0.0, -phi));
  const Complex ep = std::exp(Complex(0.0, phi));
  Su11Coefficients c;
  c.B = em * std::cosh(R) - e2t * ep * std::sinh(R);
  c.C = em * std::cosh(r) * std::cosh(R) - ep * std::sinh(r) * std::sinh(R);
  c.S = e2t * em * std::sinh(r) * std::cosh(R) -
        e2t * ep * std::cosh(r) * std::sinh(R);
  return c;
}

/// Exact output photon statistics of the parametric readout:
///   <n>     = |B|^2 alpha^2 + |S|^2
///   Var(n)  = |B* S + B C*|^2 alpha^2 + 2 |C|^2 |S|^2
inline SignalStats su11_single_arm_stats(double alpha, double r, double theta,
                                         double antiSqueeze, double phi) {
  if (!(antiSqueeze >= 0.0)) {
    throw std::invalid_argument("su11_single_arm_stats: R must be >= 0");
  }
  const Su11Coefficients c = su11_coefficients(r, theta, antiSqueeze, phi);
  SignalStats s;
  s.mean = std::norm(c.B) * alpha * alpha + std::norm(c.S);
  s.variance =
      std::norm(std::conj(c.B) * c.S + c.B * std::conj(c.C)) * alpha * alpha +
      2.0 * std::norm(c.C) * std::norm(c.S);
  return s;
}

/// Strong-amplification approximation of the same statistics, with
/// |sigma|^2 = cosh 2r - sinh 2r cos 2 phi:
///   <n>    ~ e^{2R} [alpha^2 sin^2(theta+phi) + |sigma|^2/4]
///   Var(n) ~ e^{4R} |sigma|^2 [alpha^2 sin^2(theta+phi) + |sigma|^2/8]
inline SignalStats su11_single_arm_stats_large_r(double alpha, double r,
                                                 double theta,
                                                 double antiSqueeze,
                                                 double phi) {
  const double sig2 =
      std::cosh(2.0 * r) - std::sinh(2.0 * r) * std::cos(2.0 * phi);
  const double s2 = std::pow(std::sin(theta + phi), 2);
  SignalStats s;
  s.mean = std::exp(2.0 * antiSqueeze) * (alpha * alpha * s2 + sig2 / 4.0);
  s.variance = std::exp(4.0 * antiSqueeze) * sig2 *
               (alpha * alpha * s2 + sig2 / 8.0);
  return s;
}

/// Exact derivative of the mean output photon number with respect to phi.
inline double su11_analytic_gain(double alpha, double r, double theta,
                                 double antiSqueeze, double phi) {
  return std::sinh(2.0 * antiSqueeze) *
         (2.0 * alpha * alpha * std::sin(2.0 * (theta + phi)) +
          std::sinh(2.0 * r) * std::sin(2.0 * phi));
}

struct Su11ReadoutError {
  DetectionOutcome outcome;
  double closedForm = 0.0;  // small-angle closed form, see below
};

/// Midpoint of the validity window e^{-2r}/N << theta^2 << 1; balances the
/// two terms of the small-angle closed form.
inline double su11_default_angle(double alpha, double r) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("su11_default_angle: alpha must be > 0");
  }
  return std::pow(std::exp(-2.0 * r) / (8.0 * alpha * alpha), 0.25);
}

/// Realized error of the parametric readout at phi -> 0, computed exactly
/// through error propagation on the exact statistics. Also reports the
/// small-angle closed form
///   e^{-2r}/(4 alpha^2 cos^2 theta) (1 + e^{-2r}/(8 alpha^2 sin^2 theta)).
/// The gain vanishes at theta = 0 or pi/2 and ZeroGainError is thrown.
inline Su11ReadoutError su11_single_arm_error(double alpha, double r,
                                              double theta,
                                              double antiSqueeze) {
  if (!(antiSqueeze >= 0.0)) {
    throw std::invalid_argument("su11_single_arm_error: R must be >= 0");
  }
  Su11ReadoutError out;
  out.outcome = error_propagation(
      [&](double phi) {
        return su11_single_arm_stats(alpha, r, theta, antiSqueeze, phi).mean;
      },
      [&](double phi) {
        return su11_single_arm_stats(alpha, r, theta, antiSqueeze, phi)
            .variance;
      },
      0.0);
  const double e2r = std::exp(-2.0 * r);
  const double c2 = std::pow(std::cos(theta), 2);
  const double s2 = std::pow(std::sin(theta), 2);
  out.closedForm = e2r / (4.0 * alpha * alpha * c2) *
                   (1.0 + e2r / (8.0 * alpha * alpha * s2));
  return out;
}

// ---------------------------------------------------------------------------
// Two-arm double homodyne readout: sine quadratures of the bright and dark
// outputs measure the common and differential phases independently.

inline void check_bright_alpha(double alpha, const char* what) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument(std::string(what) + ": alpha must be > 0");
  }
}

struct DoubleHomodyneError {
  double varPhiPlus = 0.0;
  double varPhiMinus = 0.0;
};

/// Linearized double-homodyne errors for amplitude squeezers r1 (bright
/// port) and r2 (dark port):
///   Var(phi+) = e^{-2 r1}/(4 alpha^2),  Var(phi-) = e^{-2 r2}/(4 alpha^2).
inline DoubleHomodyneError double_homodyne_error(double alpha, double r1,
                                                 double r2) {
  check_bright_alpha(alpha, "double_homodyne_error");
  DoubleHomodyneError e;
  e.varPhiPlus = std::exp(-2.0 * r1) / (4.0 * alpha * alpha);
  e.varPhiMinus = std::exp(-2.0 * r2) / (4.0 * alpha * alpha);
  return e;
}

struct DoubleHomodyneOutcome {
  DetectionOutcome plus;
  DetectionOutcome minus;
};

/// Double homodyne through the generic pipeline: output sine quadratures of
/// the recombined arms, finite-difference gains. Valid for any preparation.
inline DoubleHomodyneOutcome double_homodyne_error_via_map(
    const TwoArmPrep& prep) {
  check_bright_alpha(prep.alpha, "double_homodyne_error_via_map");
  const BogoliubovMap base = build_map(two_arm_prep_program(prep));
  constexpr double kSineAngle = std::numbers::pi / 2.0;

  const auto quad = [&base](int mode, double phi1, double phi2) {
    BogoliubovMap m = apply_phase(base, 0, phi1);
    m = apply_phase(std::move(m), 1, phi2);
    m = apply_beamsplitter(std::move(m), 0, 1, 0.5);
    return quadrature_stats(m, mode, kSineAngle);
  };

  DoubleHomodyneOutcome out;
  out.plus = error_propagation(
      [&](double p) { return quad(0, p, p).mean; },
      [&](double p) { return quad(0, p, p).variance; }, 0.0);
  out.minus = error_propagation(
      [&](double p) { return quad(1, p, -p).mean; },
      [&](double p) { return quad(1, p, -p).variance; }, 0.0);
  return out;
}

// ---------------------------------------------------------------------------
// Two-arm double direct detection: photon counting on both outputs with the
// optimally weighted combination of the two photocurrents.

/// Input-mode moments for a1 = alpha + squeeze(r1), a2 = squeeze(r2), both
/// squeezed along the amplitude quadrature, and the beamsplitter-exchange
/// quadratic form Y = i(a2+ a1 - a1+ a2).
struct DirectDetectionMoments {
  double meanN1 = 0.0;
  double meanN2 = 0.0;
  double meanY = 0.0;
  double meanNminus = 0.0;
  double varN1 = 0.0;
  double varN2 = 0.0;
  double varY = 0.0;
  double covN1N2 = 0.0;
  double covN1Y = 0.0;
  double covN2Y = 0.0;
};

inline DirectDetectionMoments double_direct_moments(double alpha, double r1,
                                                    double r2) {
  DirectDetectionMoments m;
  const double a2 = alpha * alpha;
  m.meanN1 = a2 + std::pow(std::sinh(r1), 2);
  m.meanN2 = std::pow(std::sinh(r2), 2);
  m.meanY = 0.0;
  m.meanNminus = m.meanN1 - m.meanN2;
  m.varN1 = a2 * std::exp(2.0 * r1) + 0.5 * std::pow(std::sinh(2.0 * r1), 2);
  m.varN2 = 0.5 * std::pow(std::sinh(2.0 * r2), 2);
  m.varY = a2 * std::exp(-2.0 * r2) + std::pow(std::sinh(r1 - r2), 2);
  m.covN1N2 = 0.0;
  m.covN1Y = 0.0;
  m.covN2Y = 0.0;
  return m;
}

/// Realized differential-phase error of double direct detection at operating
/// offset phiMinus, with the optimal combination of both photocurrents:
///
///   Var(phi-) = [Var(Y) + 4 V1 V2/(V1+V2) cot^2(2 phi-)] / (4 <n->^2)
///
/// The offset pi/4 cancels the cot^2 term exactly.
inline DetectionOutcome double_direct_error(double alpha, double r1, double r2,
                                            double phiMinus) {
  const DirectDetectionMoments m = double_direct_moments(alpha, r1, r2);
  if (std::abs(m.meanNminus) < 1e-12) {
    throw ZeroGainError("double_direct_error: <n-> vanishes");
  }
  const double s = std::sin(2.0 * phiMinus);
  if (std::abs(s) < 1e-12) {
    throw SingularOperatingPointError(
        "double_direct_error: sin(2 phi-) vanishes; shift the operating point");
  }
  const double c = std::cos(2.0 * phiMinus);
  const double vsum = m.varN1 + m.varN2;

  DetectionOutcome out;
  out.meanSignal = m.meanNminus * c;
  out.gain = -2.0 * m.meanNminus * s;
  // Var(n-out) reduced by the measured n+out correlations.
  out.varSignal = vsum * c * c + m.varY * s * s -
                  (vsum > 0.0 ? std::pow((m.varN1 - m.varN2) * c, 2) / vsum
                              : 0.0);
  out.varPhase = out.varSignal / (out.gain * out.gain);
  return out;
}

/// Closed form of double_direct_error for a vacuum bright-port squeezer
/// (r1 = 0, r2 = r).
inline double double_direct_error_single_squeezer(double alpha, double r,
                                                  double phiMinus) {
  const double a2 = alpha * alpha;
  const double sh2 = std::pow(std::sinh(r), 2);
  const double s22 = std::pow(std::sinh(2.0 * r), 2);
  const double cot = std::cos(2.0 * phiMinus) / std::sin(2.0 * phiMinus);
  const double num = a2 * std::exp(-2.0 * r) + sh2 +
                     2.0 * a2 * s22 / (a2 + 0.5 * s22) * cot * cot;
  return num / (4.0 * (a2 - sh2) * (a2 - sh2));
}

/// Closed form of double_direct_error for the two-mode-squeezer preparation
/// (r1 = -r, r2 = r).
inline double double_direct_error_su11_prep(double alpha, double r,
                                            double phiMinus) {
  const double a2 = alpha * alpha;
  const double e2 = std::exp(-2.0 * r);
  const double s22 = std::pow(std::sinh(2.0 * r), 2);
  const double v1 = a2 * e2 + 0.5 * s22;
  const double v2 = 0.5 * s22;
  const double cot = std::cos(2.0 * phiMinus) / std::sin(2.0 * phiMinus);
  const double num =
      a2 * e2 + s22 + 4.0 * v1 * v2 / (v1 + v2) * cot * cot;
  return num / (4.0 * a2 * a2);
}

/// Large-amplitude form of the two-mode-squeezer case,
///   [e^{-4r} + (2 a^2 sinh^2 2r + sinh^4 2r)/(a^4 sin^2 2 phi-)]
///     / (4 (a^2 e^{-2r} + sinh^2 r));
/// converges to double_direct_error_su11_prep as alpha grows.
inline double double_direct_error_su11_prep_asymptotic(double alpha, double r,
                                                       double phiMinus) {
  const double a2 = alpha * alpha;
  const double s22 = std::pow(std::sinh(2.0 * r), 2);
  const double sin2 = std::pow(std::sin(2.0 * phiMinus), 2);
  const double pref = 1.0 / (4.0 * (a2 * std::exp(-2.0 * r) +
                                    std::pow(std::sinh(r), 2)));
  return pref * (std::exp(-4.0 * r) +
                 (2.0 * a2 * s22 + s22 * s22) / (a2 * a2 * sin2));
}

/// Double direct detection evaluated from composed Bogoliubov maps: output
/// photon covariances at the operating point and a finite-difference gain.
inline DetectionOutcome double_direct_error_via_map(const TwoArmPrep& prep,
                                                    double phiMinus) {
  if (std::abs(std::sin(2.0 * phiMinus)) < 1e-12) {
    throw SingularOperatingPointError(
        "double_direct_error_via_map: sin(2 phi-) vanishes");
  }
  const BogoliubovMap base = build_map(two_arm_prep_program(prep));

  const auto output_moments = [&base](double phi) {
    BogoliubovMap m = apply_phase(base, 0, phi);
    m = apply_phase(std::move(m), 1, -phi);
    m = apply_beamsplitter(std::move(m), 0, 1, 0.5);
    return photon_covariance(m);
  };

  const MomentSet at = output_moments(phiMinus);
  const double varMinus = at.covN(0, 0) + at.covN(1, 1) - 2.0 * at.covN(0, 1);
  const double varPlus = at.covN(0, 0) + at.covN(1, 1) + 2.0 * at.covN(0, 1);
  const double cov = at.covN(0, 0) - at.covN(1, 1);

  DetectionOutcome out = error_propagation(
      [&](double p) {
        const MomentSet ms = output_moments(p);
        return ms.meanN(0) - ms.meanN(1);
      },
      [&](double) { return varMinus; }, phiMinus);
  out.varSignal = varMinus - (varPlus > 0.0 ? cov * cov / varPlus : 0.0);
  out.varPhase = out.varSignal / (out.gain * out.gain);
  return out;
}

// ---------------------------------------------------------------------------
// Two-arm parametric readout.

struct TwoArmReadoutMeans {
  double mean1 = 0.0;
  double mean2 = 0.0;
};

/// Output photon means after phases (phi1, phi2) and a two-mode
/// anti-squeezing readout of factor R at pump angle vartheta. The phases
/// enter only through phi1 + phi2, so the means carry information about the
/// common phase alone.
inline TwoArmReadoutMeans two_arm_su11_readout_stats(const BogoliubovMap& prep,
                                                     double antiSqueeze,
                                                     double vartheta,
                                                     double phi1, double phi2) {
  if (prep.modes() != 2) {
    throw std::invalid_argument(
        "two_arm_su11_readout_stats: two-mode preparation required");
  }
  BogoliubovMap m = apply_phase(prep, 0, phi1);
  m = apply_phase(std::move(m), 1, phi2);
  m = apply_nopa(std::move(m), 0, 1, SqueezeParams(antiSqueeze, vartheta));
  TwoArmReadoutMeans out;
  out.mean1 = mean_photon(m, 0);
  out.mean2 = mean_photon(m, 1);
  return out;
}

}  // namespace squeezelab
