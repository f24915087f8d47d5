#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "squeezelab/gaussian_core.hpp"
#include "squeezelab/qcrb.hpp"

namespace squeezelab {

/// Exact multimode state in a truncated Fock space. Amplitudes are stored
/// with mode 0 as the fastest index; `cutoff` is the exclusive per-mode
/// photon bound, so the vector has cutoff^modes entries.
///
/// normDeficit accumulates the probability discarded by truncation, so
/// ||amplitudes||^2 is within [1 - normDeficit, 1]. Moment queries never
/// renormalize; distribution queries do.
struct FockState {
  int modes = 1;
  int cutoff = 2;
  CVector amplitudes;
  double normDeficit = 0.0;
};

struct FockBuildOptions {
  double deficitTolerance = 1e-8;
};

struct CutoffDiagnostics {
  double normDeficit = 0.0;
  RVector tailMass;  // per mode, raw marginal mass of the top two levels
};

/// Conservative per-mode cutoff for a displaced squeezed preparation,
/// ceil((|alpha| cosh r + 3)^2 + 10 sinh^2 r).
inline int default_cutoff(double alphaMagnitude, double maxSqueeze) {
  const double a = std::abs(alphaMagnitude) * std::cosh(maxSqueeze) + 3.0;
  const double n = a * a + 10.0 * std::pow(std::sinh(maxSqueeze), 2);
  return std::max(2, static_cast<int>(std::ceil(n)));
}

namespace fock_detail {

// Work buffer for one elementary step. Active modes are padded to twice the
// state cutoff so that leakage past the cutoff lands in the pad and is
// measured on projection instead of wrapping back into the kept block.
struct WorkSpace {
  std::vector<int> dims;
  std::vector<std::int64_t> strides;
  CVector data;

  std::int64_t size() const { return data.size(); }
};

inline std::int64_t checked_size(const std::vector<int>& dims) {
  std::int64_t n = 1;
  for (int d : dims) {
    n *= d;
    if (n > (std::int64_t{1} << 26)) {
      throw std::invalid_argument(
          "fock oracle: truncated space too large; lower the cutoff");
    }
  }
  return n;
}

inline WorkSpace embed(const FockState& st, const std::vector<int>& active) {
  WorkSpace ws;
  ws.dims.assign(st.modes, st.cutoff);
  for (int m : active) ws.dims[m] = 2 * st.cutoff;
  ws.strides.resize(st.modes);
  std::int64_t stride = 1;
  for (int m = 0; m < st.modes; ++m) {
    ws.strides[m] = stride;
    stride *= ws.dims[m];
  }
  ws.data = CVector::Zero(checked_size(ws.dims));

  const std::int64_t inner = st.amplitudes.size();
  for (std::int64_t idx = 0; idx < inner; ++idx) {
    std::int64_t rem = idx, out = 0;
    for (int m = 0; m < st.modes; ++m) {
      out += (rem % st.cutoff) * ws.strides[m];
      rem /= st.cutoff;
    }
    ws.data(out) = st.amplitudes(idx);
  }
  return ws;
}

/// Copies the kept block back into the state and returns the squared norm
/// discarded from the pad.
inline double project(const WorkSpace& ws, FockState& st) {
  const double total = ws.data.squaredNorm();
  const std::int64_t inner = st.amplitudes.size();
  double kept = 0.0;
  for (std::int64_t idx = 0; idx < inner; ++idx) {
    std::int64_t rem = idx, in = 0;
    for (int m = 0; m < st.modes; ++m) {
      in += (rem % st.cutoff) * ws.strides[m];
      rem /= st.cutoff;
    }
    st.amplitudes(idx) = ws.data(in);
    kept += std::norm(ws.data(in));
  }
  return std::max(0.0, total - kept);
}

// Anti-Hermitian generators of the elementary Gaussian unitaries, applied
// as out = G * in over the work space.

struct DisplaceGen {
  int mode;
  Complex alpha;  // G = alpha a+ - conj(alpha) a

  void operator()(const WorkSpace& ws, const CVector& in, CVector& out) const {
    out.setZero();
    const std::int64_t stride = ws.strides[mode];
    const int dim = ws.dims[mode];
    const std::int64_t blocks = ws.size() / (stride * dim);
    for (std::int64_t b = 0; b < blocks; ++b) {
      for (std::int64_t r = 0; r < stride; ++r) {
        const std::int64_t base = b * stride * dim + r;
        for (int n = 0; n < dim; ++n) {
          Complex v = 0.0;
          if (n > 0) v += alpha * std::sqrt(double(n)) * in(base + (n - 1) * stride);
          if (n + 1 < dim)
            v -= std::conj(alpha) * std::sqrt(double(n + 1)) * in(base + (n + 1) * stride);
          out(base + n * stride) = v;
        }
      }
    }
  }

  double norm_bound(const WorkSpace& ws) const {
    return 2.0 * std::abs(alpha) * std::sqrt(double(ws.dims[mode]));
  }
};

struct DopaGen {
  int mode;
  Complex g;  // (r/2) e^{2i theta}; G = g a+^2 - conj(g) a^2

  void operator()(const WorkSpace& ws, const CVector& in, CVector& out) const {
    out.setZero();
    const std::int64_t stride = ws.strides[mode];
    const int dim = ws.dims[mode];
    const std::int64_t blocks = ws.size() / (stride * dim);
    for (std::int64_t b = 0; b < blocks; ++b) {
      for (std::int64_t r = 0; r < stride; ++r) {
        const std::int64_t base = b * stride * dim + r;
        for (int n = 0; n < dim; ++n) {
          Complex v = 0.0;
          if (n > 1)
            v += g * std::sqrt(double(n) * double(n - 1)) * in(base + (n - 2) * stride);
          if (n + 2 < dim)
            v -= std::conj(g) * std::sqrt(double(n + 1) * double(n + 2)) *
                 in(base + (n + 2) * stride);
          out(base + n * stride) = v;
        }
      }
    }
  }

  double norm_bound(const WorkSpace& ws) const {
    return 2.0 * std::abs(g) * (ws.dims[mode] + 1.0);
  }
};

// Shared two-mode iteration: fn(base, nj, nk) over every pair fiber.
template <typename Fn>
inline void for_each_pair(const WorkSpace& ws, int j, int k, Fn&& fn) {
  const std::int64_t size = ws.size();
  const std::int64_t sj = ws.strides[j], sk = ws.strides[k];
  const int dj = ws.dims[j], dk = ws.dims[k];
  std::vector<std::int64_t> rest;
  // Enumerate offsets of all multi-indices with n_j = n_k = 0.
  rest.push_back(0);
  for (int m = 0; m < static_cast<int>(ws.dims.size()); ++m) {
    if (m == j || m == k) continue;
    std::vector<std::int64_t> next;
    next.reserve(rest.size() * ws.dims[m]);
    for (std::int64_t r : rest) {
      for (int n = 0; n < ws.dims[m]; ++n) next.push_back(r + n * ws.strides[m]);
    }
    rest.swap(next);
  }
  (void)size;
  for (std::int64_t r : rest) {
    for (int nj = 0; nj < dj; ++nj) {
      for (int nk = 0; nk < dk; ++nk) {
        fn(r + nj * sj + nk * sk, nj, nk);
      }
    }
  }
}

struct RotationGen {
  int j, k;
  double chi;  // G = chi (aj+ ak - ak+ aj)

  void operator()(const WorkSpace& ws, const CVector& in, CVector& out) const {
    out.setZero();
    const std::int64_t sj = ws.strides[j], sk = ws.strides[k];
    const int dj = ws.dims[j], dk = ws.dims[k];
    for_each_pair(ws, j, k, [&](std::int64_t idx, int nj, int nk) {
      Complex v = 0.0;
      if (nj > 0 && nk + 1 < dk)
        v += chi * std::sqrt(double(nj) * double(nk + 1)) * in(idx - sj + sk);
      if (nk > 0 && nj + 1 < dj)
        v -= chi * std::sqrt(double(nj + 1) * double(nk)) * in(idx + sj - sk);
      out(idx) = v;
    });
  }

  double norm_bound(const WorkSpace& ws) const {
    return 2.0 * std::abs(chi) * std::max(ws.dims[j], ws.dims[k]);
  }
};

struct NopaGen {
  int j, k;
  Complex g;  // r e^{2i theta}; G = g aj+ ak+ - conj(g) aj ak

  void operator()(const WorkSpace& ws, const CVector& in, CVector& out) const {
    out.setZero();
    const std::int64_t sj = ws.strides[j], sk = ws.strides[k];
    const int dj = ws.dims[j], dk = ws.dims[k];
    for_each_pair(ws, j, k, [&](std::int64_t idx, int nj, int nk) {
      Complex v = 0.0;
      if (nj > 0 && nk > 0)
        v += g * std::sqrt(double(nj) * double(nk)) * in(idx - sj - sk);
      if (nj + 1 < dj && nk + 1 < dk)
        v -= std::conj(g) * std::sqrt(double(nj + 1) * double(nk + 1)) *
             in(idx + sj + sk);
      out(idx) = v;
    });
  }

  double norm_bound(const WorkSpace& ws) const {
    return 2.0 * std::abs(g) * (std::max(ws.dims[j], ws.dims[k]) + 1.0);
  }
};

/// In-place exp(G) via scaling and a Taylor action on the vector. The
/// generator is anti-Hermitian, so each substep has unit operator norm and
/// the series is evaluated without cancellation blow-up.
template <typename Gen>
inline void apply_exp_generator(WorkSpace& ws, const Gen& gen) {
  const double bound = gen.norm_bound(ws);
  const int substeps = std::max(1, static_cast<int>(std::ceil(bound / 4.0)));
  CVector term(ws.size()), next(ws.size());
  for (int s = 0; s < substeps; ++s) {
    term = ws.data;
    const double ref = ws.data.norm();
    for (int k = 1; k <= 160; ++k) {
      gen(ws, term, next);
      term = next / (double(substeps) * k);
      ws.data += term;
      if (term.norm() <= 1e-18 * ref) break;
    }
  }
}

inline void apply_mode_phase(FockState& st, int mode, double phi) {
  const std::int64_t size = st.amplitudes.size();
  std::int64_t stride = 1;
  for (int m = 0; m < mode; ++m) stride *= st.cutoff;
  for (std::int64_t idx = 0; idx < size; ++idx) {
    const int n = static_cast<int>((idx / stride) % st.cutoff);
    st.amplitudes(idx) *= std::exp(Complex(0.0, -phi * n));
  }
}

inline void check_fock_mode(const FockState& st, int mode, const char* what) {
  if (mode < 0 || mode >= st.modes) {
    throw std::out_of_range(std::string(what) + ": mode index out of range");
  }
}

}  // namespace fock_detail

/// Applies one elementary operation exactly (to machine precision) on the
/// truncated space and returns the squared norm lost to truncation.
inline double apply_exact(FockState& st, const GaussianOp& op) {
  using namespace fock_detail;
  return std::visit(
      [&](const auto& o) -> double {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, PhaseOp>) {
          check_fock_mode(st, o.mode, "phase");
          apply_mode_phase(st, o.mode, o.phi);
          return 0.0;
        } else if constexpr (std::is_same_v<T, DisplaceOp>) {
          check_fock_mode(st, o.mode, "displace");
          WorkSpace ws = embed(st, {o.mode});
          apply_exp_generator(ws, DisplaceGen{o.mode, o.alpha});
          return project(ws, st);
        } else if constexpr (std::is_same_v<T, DopaOp>) {
          check_fock_mode(st, o.mode, "dopa");
          WorkSpace ws = embed(st, {o.mode});
          const Complex g = 0.5 * o.sq.r *
                            std::exp(Complex(0.0, 2.0 * o.sq.theta));
          apply_exp_generator(ws, DopaGen{o.mode, g});
          return project(ws, st);
        } else if constexpr (std::is_same_v<T, NopaOp>) {
          check_fock_mode(st, o.j, "nopa");
          check_fock_mode(st, o.k, "nopa");
          if (o.j == o.k) throw std::invalid_argument("nopa: modes must differ");
          WorkSpace ws = embed(st, {o.j, o.k});
          const Complex g = o.sq.r * std::exp(Complex(0.0, 2.0 * o.sq.theta));
          apply_exp_generator(ws, NopaGen{o.j, o.k, g});
          return project(ws, st);
        } else {
          check_fock_mode(st, o.j, "beamsplitter");
          check_fock_mode(st, o.k, "beamsplitter");
          if (o.j == o.k)
            throw std::invalid_argument("beamsplitter: modes must differ");
          if (!(o.transmissivity >= 0.0 && o.transmissivity <= 1.0))
            throw std::invalid_argument(
                "beamsplitter: transmissivity must lie in [0, 1]");
          WorkSpace ws = embed(st, {o.j, o.k});
          const double chi = std::atan2(std::sqrt(1.0 - o.transmissivity),
                                        std::sqrt(o.transmissivity));
          apply_exp_generator(ws, RotationGen{o.j, o.k, chi});
          // The map convention reflects the second output; a pi phase on
          // mode k after the rotation realizes it.
          const std::int64_t sk = ws.strides[o.k];
          const int dk = ws.dims[o.k];
          for (std::int64_t idx = 0; idx < ws.size(); ++idx) {
            if (((idx / sk) % dk) % 2 == 1) ws.data(idx) = -ws.data(idx);
          }
          return project(ws, st);
        }
      },
      op);
}

/// Builds the exact truncated state of a program applied to vacuum.
/// Throws TruncationOverflowError when the accumulated norm deficit exceeds
/// the configured tolerance, naming the offending step.
inline FockState build_state(const GaussianProgram& program, int cutoff,
                             const FockBuildOptions& options = {}) {
  if (cutoff < 2) {
    throw std::invalid_argument("fock oracle: cutoff must be >= 2");
  }
  if (program.modes < 1 || program.modes > 3) {
    throw std::invalid_argument("fock oracle: 1 to 3 modes supported");
  }
  FockState st;
  st.modes = program.modes;
  st.cutoff = cutoff;
  std::vector<int> dims(program.modes, cutoff);
  st.amplitudes = CVector::Zero(fock_detail::checked_size(dims));
  st.amplitudes(0) = 1.0;

  for (std::size_t i = 0; i < program.ops.size(); ++i) {
    st.normDeficit += apply_exact(st, program.ops[i]);
    if (st.normDeficit > options.deficitTolerance) {
      throw TruncationOverflowError(
          "fock oracle: norm deficit " + std::to_string(st.normDeficit) +
          " exceeds tolerance " + std::to_string(options.deficitTolerance) +
          " at step " + std::to_string(i) + " (" +
          describe(program.ops[i]) + "); raise the cutoff");
    }
  }
  return st;
}

/// Photon-number means and covariances by direct summation over basis
/// occupations. Evaluated on the unnormalized state so truncation bias
/// stays visible.
inline MomentSet exact_photon_moments(const FockState& st) {
  MomentSet out;
  out.meanN = RVector::Zero(st.modes);
  RMatrix second = RMatrix::Zero(st.modes, st.modes);
  std::vector<int> n(st.modes);
  const std::int64_t size = st.amplitudes.size();
  for (std::int64_t idx = 0; idx < size; ++idx) {
    const double p = std::norm(st.amplitudes(idx));
    if (p == 0.0) continue;
    std::int64_t rem = idx;
    for (int m = 0; m < st.modes; ++m) {
      n[m] = static_cast<int>(rem % st.cutoff);
      rem /= st.cutoff;
    }
    for (int j = 0; j < st.modes; ++j) {
      out.meanN(j) += p * n[j];
      for (int k = 0; k < st.modes; ++k) second(j, k) += p * n[j] * n[k];
    }
  }
  out.covN = second - out.meanN * out.meanN.transpose();
  return out;
}

/// Quantum Fisher information of the pure truncated state for commuting
/// per-arm number generators: 4 x photon-number covariance over `arms`.
inline FisherMatrix exact_qfi_pure(const FockState& st,
                                   const std::vector<int>& arms) {
  return fisher_matrix(exact_photon_moments(st), arms);
}

/// Marginal photon-number distribution of one mode, renormalized.
inline RVector photon_distribution(const FockState& st, int mode) {
  fock_detail::check_fock_mode(st, mode, "photon_distribution");
  RVector p = RVector::Zero(st.cutoff);
  std::int64_t stride = 1;
  for (int m = 0; m < mode; ++m) stride *= st.cutoff;
  const std::int64_t size = st.amplitudes.size();
  for (std::int64_t idx = 0; idx < size; ++idx) {
    p(static_cast<int>((idx / stride) % st.cutoff)) +=
        std::norm(st.amplitudes(idx));
  }
  const double total = p.sum();
  if (total > 0.0) p /= total;
  return p;
}

/// Truncation health report: accumulated norm deficit plus the raw marginal
/// mass sitting in the top two levels of each mode (two levels, so states
/// with even-photon structure cannot hide behind an empty top bin).
inline CutoffDiagnostics cutoff_diagnostics(const FockState& st) {
  CutoffDiagnostics diag;
  diag.normDeficit = st.normDeficit;
  diag.tailMass = RVector::Zero(st.modes);
  const std::int64_t size = st.amplitudes.size();
  std::int64_t stride = 1;
  for (int m = 0; m < st.modes; ++m) {
    for (std::int64_t idx = 0; idx < size; ++idx) {
      const int n = static_cast<int>((idx / stride) % st.cutoff);
      if (n >= st.cutoff - 2) diag.tailMass(m) += std::norm(st.amplitudes(idx));
    }
    stride *= st.cutoff;
  }
  return diag;
}

/// Mean and variance of a rotated quadrature on one mode, for cross-checks
/// against the analytic map.
inline QuadratureStats exact_quadrature_stats(const FockState& st, int mode,
                                              double angle) {
  fock_detail::check_fock_mode(st, mode, "exact_quadrature_stats");
  std::int64_t stride = 1;
  for (int m = 0; m < mode; ++m) stride *= st.cutoff;
  const std::int64_t size = st.amplitudes.size();

  Complex a = 0.0, a2 = 0.0;
  double nmean = 0.0, norm2 = 0.0;
  for (std::int64_t idx = 0; idx < size; ++idx) {
    const Complex amp = st.amplitudes(idx);
    if (amp == Complex(0.0)) continue;
    const int n = static_cast<int>((idx / stride) % st.cutoff);
    norm2 += std::norm(amp);
    nmean += std::norm(amp) * n;
    if (n + 1 < st.cutoff)
      a += std::conj(amp) * std::sqrt(double(n + 1)) *
           st.amplitudes(idx + stride);
    if (n + 2 < st.cutoff)
      a2 += std::conj(amp) * std::sqrt(double(n + 1) * double(n + 2)) *
            st.amplitudes(idx + 2 * stride);
  }
  const Complex f = std::exp(Complex(0.0, -angle));
  QuadratureStats qs;
  qs.mean = std::numbers::sqrt2 * (f * a).real();
  const double x2 = (f * f * a2).real() + nmean + 0.5 * norm2;
  qs.variance = x2 - qs.mean * qs.mean;
  return qs;
}

}  // namespace squeezelab
