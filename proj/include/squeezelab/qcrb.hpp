#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "squeezelab/gaussian_core.hpp"

namespace squeezelab {

/// Quantum Fisher information matrix for commuting per-arm phase
/// generators: A = 4 x photon-number covariance of the probe state.
struct FisherMatrix {
  RMatrix A;

  int dim() const { return static_cast<int>(A.rows()); }
};

/// Lower bound on the covariance of any unbiased phase estimate,
/// varPhi = A^{-1}. When the Fisher matrix is singular within tolerance an
/// unmeasurable phase direction exists: wellPosed is false and varPhi holds
/// the pseudo-inverse over the measurable subspace.
struct PhaseBound {
  RMatrix varPhi;
  bool wellPosed = false;

  int dim() const { return static_cast<int>(varPhi.rows()); }
};

inline FisherMatrix fisher_matrix(const MomentSet& moments,
                                  const std::vector<int>& arms) {
  const int n = moments.modes();
  for (std::size_t i = 0; i < arms.size(); ++i) {
    if (arms[i] < 0 || arms[i] >= n) {
      throw std::out_of_range("fisher_matrix: arm index out of range");
    }
    for (std::size_t j = i + 1; j < arms.size(); ++j) {
      if (arms[i] == arms[j]) {
        throw std::invalid_argument("fisher_matrix: arm indices must be distinct");
      }
    }
  }
  const int m = static_cast<int>(arms.size());
  FisherMatrix f;
  f.A.resize(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      f.A(i, j) = 4.0 * moments.covN(arms[i], arms[j]);
    }
  }
  return f;
}

/// Moments of the common/differential photon numbers N+- = N_1 +- N_2.
/// Index 0 is "+", index 1 is "-".
inline MomentSet to_plusminus_basis(const MomentSet& moments) {
  if (moments.modes() != 2) {
    throw std::invalid_argument("to_plusminus_basis: exactly two arms required");
  }
  const double v11 = moments.covN(0, 0), v22 = moments.covN(1, 1);
  const double v12 = moments.covN(0, 1);
  MomentSet out;
  out.meanN = RVector(2);
  out.meanN << moments.meanN(0) + moments.meanN(1),
      moments.meanN(0) - moments.meanN(1);
  out.covN = RMatrix(2, 2);
  out.covN << v11 + v22 + 2.0 * v12, v11 - v22,
              v11 - v22, v11 + v22 - 2.0 * v12;
  return out;
}

/// Inverse of to_plusminus_basis.
inline MomentSet from_plusminus_basis(const MomentSet& moments) {
  if (moments.modes() != 2) {
    throw std::invalid_argument("from_plusminus_basis: exactly two arms required");
  }
  const double vpp = moments.covN(0, 0), vmm = moments.covN(1, 1);
  const double vpm = moments.covN(0, 1);
  MomentSet out;
  out.meanN = RVector(2);
  out.meanN << (moments.meanN(0) + moments.meanN(1)) / 2.0,
      (moments.meanN(0) - moments.meanN(1)) / 2.0;
  out.covN = RMatrix(2, 2);
  out.covN << (vpp + vmm + 2.0 * vpm) / 4.0, (vpp - vmm) / 4.0,
              (vpp - vmm) / 4.0, (vpp + vmm - 2.0 * vpm) / 4.0;
  return out;
}

/// Inverts the Fisher matrix through its eigendecomposition. Directions with
/// eigenvalues below 1e-12 of the largest are treated as unmeasurable.
inline PhaseBound qcrb_bound(const FisherMatrix& fisher) {
  const RMatrix sym = (fisher.A + fisher.A.transpose()) / 2.0;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(sym);
  const RVector eig = es.eigenvalues();
  const double scale = eig.cwiseAbs().maxCoeff();
  const double tol = 1e-12 * scale;

  PhaseBound bound;
  bound.wellPosed = scale > 0.0 && eig.minCoeff() > tol;
  RVector inv(eig.size());
  for (int i = 0; i < eig.size(); ++i) {
    inv(i) = eig(i) > tol ? 1.0 / eig(i) : 0.0;
  }
  bound.varPhi =
      es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  bound.varPhi = ((bound.varPhi + bound.varPhi.transpose()) / 2.0).eval();
  return bound;
}

/// Single-arm bound for a displaced squeezed probe:
///   Var(N) = alpha^2 (cosh 2r + sinh 2r cos 2theta) + sinh^2(2r)/2
///   varPhi = 1 / (4 Var(N)),
/// maximized (best bound) at theta = 0, where Var(N) = alpha^2 e^{2r}
/// + sinh^2(2r)/2.
inline PhaseBound closed_form_single_arm(double alpha, SqueezeParams sq) {
  if (!(alpha >= 0.0)) {
    throw std::invalid_argument("closed_form_single_arm: alpha must be >= 0");
  }
  const double varN =
      alpha * alpha *
          (std::cosh(2.0 * sq.r) + std::sinh(2.0 * sq.r) * std::cos(2.0 * sq.theta)) +
      0.5 * std::pow(std::sinh(2.0 * sq.r), 2);
  FisherMatrix f;
  f.A = RMatrix::Constant(1, 1, 4.0 * varN);
  return qcrb_bound(f);
}

/// Balanced two-arm preparation: squeezers (sq1, sq2) on the input ports of
/// a 50/50 beamsplitter, total classical amplitude alpha with relative
/// carrier phase 2*zeta between the two arms (port amplitudes alpha cos zeta
/// and i alpha sin zeta).
struct TwoArmPrep {
  double alpha = 0.0;
  double zeta = 0.0;
  SqueezeParams sq1;
  SqueezeParams sq2;

  /// Preparation by a single two-mode squeezer: equivalent to port squeezers
  /// -r1 = r2 = sq.r at a common angle.
  static TwoArmPrep su11(double alpha, double zeta, SqueezeParams sq) {
    TwoArmPrep prep;
    prep.alpha = alpha;
    prep.zeta = zeta;
    prep.sq1 = SqueezeParams(-sq.r, sq.theta);
    prep.sq2 = sq;
    return prep;
  }
};

/// Elementary-operation program realizing a single-arm displaced squeezed
/// probe (squeeze first, then displace).
inline GaussianProgram single_arm_prep_program(double alpha, SqueezeParams sq) {
  GaussianProgram p;
  p.modes = 1;
  p.dopa(0, sq).displace(0, alpha);
  return p;
}

/// Program realizing a TwoArmPrep; modes 0 and 1 are the two arms after the
/// input beamsplitter.
inline GaussianProgram two_arm_prep_program(const TwoArmPrep& prep) {
  GaussianProgram p;
  p.modes = 2;
  p.dopa(0, prep.sq1)
      .dopa(1, prep.sq2)
      .displace(0, prep.alpha * std::cos(prep.zeta))
      .displace(1, Complex(0.0, prep.alpha * std::sin(prep.zeta)))
      .beamsplitter(0, 1, 0.5);
  return p;
}

/// Program realizing the two-mode-squeezer preparation directly (no input
/// beamsplitter); photon statistics match
/// two_arm_prep_program(TwoArmPrep::su11(...)).
inline GaussianProgram su11_prep_program(double alpha, double zeta,
                                         SqueezeParams sq) {
  GaussianProgram p;
  p.modes = 2;
  const Complex beta1 =
      alpha / std::numbers::sqrt2 * std::exp(Complex(0.0, zeta));
  const Complex beta2 =
      alpha / std::numbers::sqrt2 * std::exp(Complex(0.0, -zeta));
  p.nopa(0, 1, sq).displace(0, beta1).displace(1, beta2);
  return p;
}

namespace detail {

inline double sq2(double x) { return x * x; }

}  // namespace detail

struct TwoArmBound {
  MomentSet plusMinusMoments;  // over (N+, N-)
  PhaseBound bound;            // varPhi over (phi+, phi-)
};

/// Closed-form common/differential photon-number moments of a TwoArmPrep:
///
///   Var(N+) = a^2 [(cosh 2r1 + sinh 2r1 cos 2t1) cos^2 z
///                  + (cosh 2r2 - sinh 2r2 cos 2t2) sin^2 z]
///             + (sinh^2 2r1 + sinh^2 2r2)/2
///   Var(N-) = a^2 [(cosh 2r1 - sinh 2r1 cos 2t1) sin^2 z
///                  + (cosh 2r2 + sinh 2r2 cos 2t2) cos^2 z]
///             + sinh^2(r1+r2) cos^2(t1-t2) + sinh^2(r1-r2) sin^2(t1-t2)
///   Cov(N+,N-) = (a^2/2)(sinh 2r1 sin 2t1 + sinh 2r2 sin 2t2) sin 2z
///
/// and the corresponding phase bound. Agrees with the generic pipeline
/// (two_arm_prep_program -> photon_covariance -> to_plusminus_basis).
inline TwoArmBound closed_form_two_arm(const TwoArmPrep& prep) {
  detail::require_finite(prep.alpha, "alpha");
  detail::require_finite(prep.zeta, "zeta");
  const double a2 = prep.alpha * prep.alpha;
  const double c2z = detail::sq2(std::cos(prep.zeta));
  const double s2z = detail::sq2(std::sin(prep.zeta));
  const double r1 = prep.sq1.r, t1 = prep.sq1.theta;
  const double r2 = prep.sq2.r, t2 = prep.sq2.theta;

  const double vp =
      a2 * ((std::cosh(2 * r1) + std::sinh(2 * r1) * std::cos(2 * t1)) * c2z +
            (std::cosh(2 * r2) - std::sinh(2 * r2) * std::cos(2 * t2)) * s2z) +
      0.5 * (detail::sq2(std::sinh(2 * r1)) + detail::sq2(std::sinh(2 * r2)));
  const double vm =
      a2 * ((std::cosh(2 * r1) - std::sinh(2 * r1) * std::cos(2 * t1)) * s2z +
            (std::cosh(2 * r2) + std::sinh(2 * r2) * std::cos(2 * t2)) * c2z) +
      detail::sq2(std::sinh(r1 + r2)) * detail::sq2(std::cos(t1 - t2)) +
      detail::sq2(std::sinh(r1 - r2)) * detail::sq2(std::sin(t1 - t2));
  const double cpm = 0.5 * a2 *
                     (std::sinh(2 * r1) * std::sin(2 * t1) +
                      std::sinh(2 * r2) * std::sin(2 * t2)) *
                     std::sin(2 * prep.zeta);

  TwoArmBound out;
  out.plusMinusMoments.meanN = RVector(2);
  out.plusMinusMoments.meanN << a2 + detail::sq2(std::sinh(r1)) +
                                    detail::sq2(std::sinh(r2)),
      0.0;
  out.plusMinusMoments.covN = RMatrix(2, 2);
  out.plusMinusMoments.covN << vp, cpm, cpm, vm;
  out.bound = qcrb_bound(fisher_matrix(out.plusMinusMoments, {0, 1}));
  return out;
}

/// Phase bounds of the two-mode-squeezer preparation, independent of zeta:
///   Var(N+) = alpha^2 (cosh 2r - sinh 2r cos 2theta) + sinh^2 2r
///   Var(N-) = alpha^2 (cosh 2r + sinh 2r cos 2theta)
/// with zero cross-correlation.
inline PhaseBound su11_prep_bounds(double alpha, double r, double theta) {
  if (!(r >= 0.0)) {
    throw std::invalid_argument("su11_prep_bounds: r must be >= 0");
  }
  const double a2 = alpha * alpha;
  const double vp =
      a2 * (std::cosh(2 * r) - std::sinh(2 * r) * std::cos(2 * theta)) +
      detail::sq2(std::sinh(2 * r));
  const double vm =
      a2 * (std::cosh(2 * r) + std::sinh(2 * r) * std::cos(2 * theta));
  FisherMatrix f;
  f.A = RMatrix::Zero(2, 2);
  f.A(0, 0) = 4.0 * vp;
  f.A(1, 1) = 4.0 * vm;
  return qcrb_bound(f);
}

/// How the unknown phase is distributed over the two arms when a single
/// physical phase varphi is estimated.
enum class PhaseLayout {
  asymmetric,     // phi_1 = varphi, phi_2 = 0: both channels inform
  antisymmetric,  // phi_1 = -phi_2 = varphi/2: only the "-" channel informs
};

/// Var(varphi) from a 2x2 (phi+, phi-) bound with uncorrelated channels:
///   asymmetric:     4 / (1/Var(phi+) + 1/Var(phi-))
///   antisymmetric:  4 Var(phi-)
/// Var(phi+) = +inf is accepted in the asymmetric case and reproduces the
/// antisymmetric value.
inline double individual_phase_error(const PhaseBound& bound,
                                     PhaseLayout layout) {
  if (bound.dim() != 2) {
    throw std::invalid_argument("individual_phase_error: 2x2 bound required");
  }
  const double vp = bound.varPhi(0, 0);
  const double vm = bound.varPhi(1, 1);
  const double cross = bound.varPhi(0, 1);
  if (!std::isfinite(vm) || vm <= 0.0) {
    throw PreconditionError(
        "individual_phase_error: differential-phase bound must be finite");
  }
  if (std::isfinite(vp)) {
    if (!bound.wellPosed) {
      throw PreconditionError(
          "individual_phase_error: bound is not well posed");
    }
    if (std::abs(cross) > 1e-8 * std::sqrt(vp * vm)) {
      throw PreconditionError(
          "individual_phase_error: channels are cross-correlated");
    }
  }
  switch (layout) {
    case PhaseLayout::asymmetric:
      return 4.0 / (1.0 / vp + 1.0 / vm);
    case PhaseLayout::antisymmetric:
      return 4.0 * vm;
  }
  throw std::invalid_argument("individual_phase_error: unknown layout");
}

/// Reference phase-uncertainty limits (radians, not variances) for N mean
/// photons at the object: shot-noise 1/(2 sqrt N), squeezing-improved
/// e^{-r}/(2 sqrt N), and the Heisenberg scale 1/N.
struct ReferenceLimits {
  double snl = 0.0;
  double sqz = 0.0;
  double hl = 0.0;
};

inline ReferenceLimits reference_limits(double n, double r) {
  if (!(n > 0.0)) {
    throw std::invalid_argument("reference_limits: N must be > 0");
  }
  ReferenceLimits lim;
  lim.snl = 1.0 / (2.0 * std::sqrt(n));
  lim.sqz = std::exp(-r) / (2.0 * std::sqrt(n));
  lim.hl = 1.0 / n;
  return lim;
}

}  // namespace squeezelab
