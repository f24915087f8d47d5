#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "squeezelab/errors.hpp"

namespace squeezelab {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

namespace detail {

inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

inline void require_finite(Complex z, const char* what) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

}  // namespace detail

/// Squeeze factor and angle of a quadrature squeezer. The squeezed-field
/// variance scales as exp(-2r) along the angle theta.
///
/// A negative squeeze factor is the same physical operation with the angle
/// shifted by pi/2 (exp(2i(theta + pi/2)) = -exp(2i*theta)); the constructor
/// normalizes to r >= 0 and theta in [0, pi).
struct SqueezeParams {
  double r = 0.0;
  double theta = 0.0;

  SqueezeParams() = default;

  SqueezeParams(double r_in, double theta_in) {
    detail::require_finite(r_in, "squeeze factor");
    detail::require_finite(theta_in, "squeeze angle");
    if (r_in < 0.0) {
      r_in = -r_in;
      theta_in += std::numbers::pi / 2.0;
    }
    r = r_in;
    theta = std::fmod(theta_in, std::numbers::pi);
    if (theta < 0.0) theta += std::numbers::pi;
  }

  /// Squeeze factor from a decibel figure: r = ln(10^(dB/20)).
  static SqueezeParams from_db(double db, double theta = 0.0) {
    return SqueezeParams(db * std::numbers::ln10 / 20.0, theta);
  }

  bool is_identity() const { return r == 0.0; }
};

/// Affine Bogoliubov map of a lossless Gaussian network over vacuum inputs.
///
/// Output annihilation operators are a_j = d_j + sum_k C_jk z_k + S_jk z_k^+,
/// where z_k are the vacuum input modes. Losslessness requires
/// C C^+ - S S^+ = I and C S^T symmetric; see validate_bogoliubov.
struct BogoliubovMap {
  CVector d;
  CMatrix C;
  CMatrix S;

  int modes() const { return static_cast<int>(d.size()); }

  static BogoliubovMap identity(int modes) {
    if (modes < 1) {
      throw std::invalid_argument("mode count must be >= 1");
    }
    BogoliubovMap m;
    m.d = CVector::Zero(modes);
    m.C = CMatrix::Identity(modes, modes);
    m.S = CMatrix::Zero(modes, modes);
    return m;
  }
};

/// Per-mode photon-number means and covariance matrix.
struct MomentSet {
  RVector meanN;
  RMatrix covN;

  int modes() const { return static_cast<int>(meanN.size()); }
};

struct QuadratureStats {
  double mean = 0.0;
  double variance = 0.0;
};

/// Deviations of a map from the lossless (symplectic) conditions.
struct BogoliubovDiagnostics {
  double unitarity_deviation = 0.0;  // max |(C C^+ - S S^+ - I)_jk|
  double symmetry_deviation = 0.0;   // max |(C S^T - (C S^T)^T)_jk|

  bool within(double tol) const {
    return unitarity_deviation <= tol && symmetry_deviation <= tol;
  }
};

namespace detail {

inline void check_mode(const BogoliubovMap& m, int mode, const char* what) {
  if (mode < 0 || mode >= m.modes()) {
    throw std::out_of_range(std::string(what) + ": mode index out of range");
  }
}

}  // namespace detail

/// Adds a classical displacement alpha on one mode.
inline BogoliubovMap displace(BogoliubovMap m, int mode, Complex alpha) {
  detail::check_mode(m, mode, "displace");
  detail::require_finite(alpha, "displacement");
  m.d(mode) += alpha;
  return m;
}

/// Phase shifter: a -> a exp(-i phi) on one mode.
inline BogoliubovMap apply_phase(BogoliubovMap m, int mode, double phi) {
  detail::check_mode(m, mode, "apply_phase");
  detail::require_finite(phi, "phase");
  const Complex f = std::exp(Complex(0.0, -phi));
  m.d(mode) *= f;
  m.C.row(mode) *= f;
  m.S.row(mode) *= f;
  return m;
}

/// Beamsplitter of power transmissivity T on modes (j, k):
///   a_j -> sqrt(T) a_j + sqrt(1-T) a_k
///   a_k -> sqrt(1-T) a_j - sqrt(T) a_k
/// T = 1/2 is the balanced convention b_{1,2} = (a_1 +- a_2)/sqrt(2).
inline BogoliubovMap apply_beamsplitter(BogoliubovMap m, int j, int k,
                                        double transmissivity) {
  detail::check_mode(m, j, "apply_beamsplitter");
  detail::check_mode(m, k, "apply_beamsplitter");
  if (j == k) {
    throw std::invalid_argument("apply_beamsplitter: modes must differ");
  }
  if (!(transmissivity >= 0.0 && transmissivity <= 1.0)) {
    throw std::invalid_argument(
        "apply_beamsplitter: transmissivity must lie in [0, 1]");
  }
  const double t = std::sqrt(transmissivity);
  const double u = std::sqrt(1.0 - transmissivity);

  const Complex dj = m.d(j), dk = m.d(k);
  m.d(j) = t * dj + u * dk;
  m.d(k) = u * dj - t * dk;

  const CVector cj = m.C.row(j), ck = m.C.row(k);
  m.C.row(j) = t * cj + u * ck;
  m.C.row(k) = u * cj - t * ck;

  const CVector sj = m.S.row(j), sk = m.S.row(k);
  m.S.row(j) = t * sj + u * sk;
  m.S.row(k) = u * sj - t * sk;
  return m;
}

/// Degenerate parametric amplifier (single-mode squeezer) on one mode:
///   a -> a cosh r + a^+ exp(2i theta) sinh r.
inline BogoliubovMap apply_dopa(BogoliubovMap m, int mode, SqueezeParams sq) {
  detail::check_mode(m, mode, "apply_dopa");
  const double ch = std::cosh(sq.r);
  const Complex g = std::exp(Complex(0.0, 2.0 * sq.theta)) * std::sinh(sq.r);

  // a^+ expressed over the inputs swaps C and S rows under conjugation.
  const Complex dm = m.d(mode);
  const CVector c = m.C.row(mode), s = m.S.row(mode);
  m.d(mode) = ch * dm + g * std::conj(dm);
  m.C.row(mode) = ch * c + g * s.conjugate();
  m.S.row(mode) = ch * s + g * c.conjugate();
  return m;
}

/// Non-degenerate parametric amplifier (two-mode squeezer) on modes (j, k):
///   a_j -> a_j cosh r + a_k^+ exp(2i theta) sinh r, and symmetrically.
inline BogoliubovMap apply_nopa(BogoliubovMap m, int j, int k,
                                SqueezeParams sq) {
  detail::check_mode(m, j, "apply_nopa");
  detail::check_mode(m, k, "apply_nopa");
  if (j == k) {
    throw std::invalid_argument("apply_nopa: modes must differ");
  }
  const double ch = std::cosh(sq.r);
  const Complex g = std::exp(Complex(0.0, 2.0 * sq.theta)) * std::sinh(sq.r);

  const Complex dj = m.d(j), dk = m.d(k);
  const CVector cj = m.C.row(j), ck = m.C.row(k);
  const CVector sj = m.S.row(j), sk = m.S.row(k);

  m.d(j) = ch * dj + g * std::conj(dk);
  m.d(k) = ch * dk + g * std::conj(dj);
  m.C.row(j) = ch * cj + g * sk.conjugate();
  m.C.row(k) = ch * ck + g * sj.conjugate();
  m.S.row(j) = ch * sj + g * ck.conjugate();
  m.S.row(k) = ch * sk + g * cj.conjugate();
  return m;
}

/// Map equal to applying `first` and then `second`.
inline BogoliubovMap compose(const BogoliubovMap& first,
                             const BogoliubovMap& second) {
  if (first.modes() != second.modes()) {
    throw std::invalid_argument("compose: mode counts differ");
  }
  BogoliubovMap out;
  out.d = second.d + second.C * first.d + second.S * first.d.conjugate();
  out.C = second.C * first.C + second.S * first.S.conjugate();
  out.S = second.C * first.S + second.S * first.C.conjugate();
  return out;
}

/// Mean photon number of one output mode: |d_j|^2 + sum_k |S_jk|^2.
inline double mean_photon(const BogoliubovMap& m, int mode) {
  detail::check_mode(m, mode, "mean_photon");
  return std::norm(m.d(mode)) + m.S.row(mode).squaredNorm();
}

/// Photon-number means and covariances of all output modes over vacuum
/// inputs, evaluated by Wick contraction of the quartic terms:
///
///   Cov(N_j, N_k) = sum_n (d_j^* C_jn + d_j S_jn^*)(d_k C_kn^* + d_k^* S_kn)
///                 + (C C^+)_jk (S S^+)_kj^* + (C S^T)_jk (C S^T)_jk^*
///
/// The result is real and symmetric; tiny imaginary residue is discarded.
inline MomentSet photon_covariance(const BogoliubovMap& m) {
  const int n = m.modes();
  MomentSet out;
  out.meanN = RVector::Zero(n);
  for (int j = 0; j < n; ++j) {
    out.meanN(j) = mean_photon(m, j);
  }

  // Linear part: v_j = conj(d_j) * C_j. + d_j * conj(S_j.)
  CMatrix v(n, n);
  for (int j = 0; j < n; ++j) {
    v.row(j) =
        std::conj(m.d(j)) * m.C.row(j) + m.d(j) * m.S.row(j).conjugate();
  }
  const CMatrix lin = v * v.adjoint();

  const CMatrix cc = m.C * m.C.adjoint();   // <A_j A_k^+>
  const CMatrix ss = m.S * m.S.adjoint();   // <A_k^+ A_j> transposed
  const CMatrix cs = m.C * m.S.transpose(); // <A_j A_k>

  out.covN = RMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      const Complex quad = cc(j, k) * std::conj(ss(j, k)) +
                           cs(j, k) * std::conj(cs(k, j));
      out.covN(j, k) = (lin(j, k) + quad).real();
    }
  }
  out.covN = ((out.covN + out.covN.transpose()) / 2.0).eval();
  return out;
}

/// Mean and variance of the rotated quadrature
/// X = (a exp(-i angle) + a^+ exp(i angle)) / sqrt(2); vacuum variance 1/2.
/// angle = pi/2 gives the sine quadrature (a - a^+)/(i sqrt(2)).
inline QuadratureStats quadrature_stats(const BogoliubovMap& m, int mode,
                                        double angle) {
  detail::check_mode(m, mode, "quadrature_stats");
  const Complex f = std::exp(Complex(0.0, -angle));
  QuadratureStats qs;
  qs.mean = std::numbers::sqrt2 * (m.d(mode) * f).real();
  const double cc = m.C.row(mode).squaredNorm();
  const double ss = m.S.row(mode).squaredNorm();
  const Complex cs = m.C.row(mode).cwiseProduct(m.S.row(mode)).sum();
  qs.variance = 0.5 * (cc + ss + 2.0 * (f * f * cs).real());
  return qs;
}

/// Reports how far a map deviates from the lossless Bogoliubov conditions.
/// Never throws; callers decide what deviation is acceptable.
inline BogoliubovDiagnostics validate_bogoliubov(const BogoliubovMap& m) {
  const int n = m.modes();
  const CMatrix u =
      m.C * m.C.adjoint() - m.S * m.S.adjoint() - CMatrix::Identity(n, n);
  const CMatrix w = m.C * m.S.transpose();
  BogoliubovDiagnostics diag;
  diag.unitarity_deviation = u.cwiseAbs().maxCoeff();
  diag.symmetry_deviation = (w - w.transpose()).cwiseAbs().maxCoeff();
  return diag;
}

// ---------------------------------------------------------------------------
// Elementary-operation programs. A program is an ordered list of elementary
// operations applied to vacuum; it can drive both the analytic map above and
// the exact truncated Fock simulation.

struct DisplaceOp {
  int mode;
  Complex alpha;
};

struct PhaseOp {
  int mode;
  double phi;
};

struct BeamsplitterOp {
  int j;
  int k;
  double transmissivity;
};

struct DopaOp {
  int mode;
  SqueezeParams sq;
};

struct NopaOp {
  int j;
  int k;
  SqueezeParams sq;
};

using GaussianOp =
    std::variant<DisplaceOp, PhaseOp, BeamsplitterOp, DopaOp, NopaOp>;

struct GaussianProgram {
  int modes = 1;
  std::vector<GaussianOp> ops;

  GaussianProgram& displace(int mode, Complex alpha) {
    ops.push_back(DisplaceOp{mode, alpha});
    return *this;
  }
  GaussianProgram& phase(int mode, double phi) {
    ops.push_back(PhaseOp{mode, phi});
    return *this;
  }
  GaussianProgram& beamsplitter(int j, int k, double transmissivity = 0.5) {
    ops.push_back(BeamsplitterOp{j, k, transmissivity});
    return *this;
  }
  GaussianProgram& dopa(int mode, SqueezeParams sq) {
    ops.push_back(DopaOp{mode, sq});
    return *this;
  }
  GaussianProgram& nopa(int j, int k, SqueezeParams sq) {
    ops.push_back(NopaOp{j, k, sq});
    return *this;
  }
};

inline BogoliubovMap apply(BogoliubovMap m, const GaussianOp& op) {
  return std::visit(
      [&](const auto& o) -> BogoliubovMap {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, DisplaceOp>) {
          return displace(std::move(m), o.mode, o.alpha);
        } else if constexpr (std::is_same_v<T, PhaseOp>) {
          return apply_phase(std::move(m), o.mode, o.phi);
        } else if constexpr (std::is_same_v<T, BeamsplitterOp>) {
          return apply_beamsplitter(std::move(m), o.j, o.k, o.transmissivity);
        } else if constexpr (std::is_same_v<T, DopaOp>) {
          return apply_dopa(std::move(m), o.mode, o.sq);
        } else {
          return apply_nopa(std::move(m), o.j, o.k, o.sq);
        }
      },
      op);
}

inline BogoliubovMap build_map(const GaussianProgram& program) {
  BogoliubovMap m = BogoliubovMap::identity(program.modes);
  for (const auto& op : program.ops) {
    m = apply(std::move(m), op);
  }
  return m;
}

inline std::string describe(const GaussianOp& op) {
  return std::visit(
      [](const auto& o) -> std::string {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, DisplaceOp>) {
          return "displace on mode " + std::to_string(o.mode);
        } else if constexpr (std::is_same_v<T, PhaseOp>) {
          return "phase on mode " + std::to_string(o.mode);
        } else if constexpr (std::is_same_v<T, BeamsplitterOp>) {
          return "beamsplitter on modes " + std::to_string(o.j) + "," +
                 std::to_string(o.k);
        } else if constexpr (std::is_same_v<T, DopaOp>) {
          return "dopa on mode " + std::to_string(o.mode);
        } else {
          return "nopa on modes " + std::to_string(o.j) + "," +
                 std::to_string(o.k);
        }
      },
      op);
}

}  // namespace squeezelab
