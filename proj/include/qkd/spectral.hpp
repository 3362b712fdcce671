#pragma once

// Amplitude functions of the encoding (frequency bins and time bins in
// the spectral domain), closed-form single-photon overlaps and the
// two-photon Bell-state overlap, for Gaussian and Lorentzian shapes.
//
// Every Gaussian amplitude used anywhere in the library is an instance
// of GaussAmp: pref * exp(c2 w^2 + c1 w + c0). Conjugation, argument
// shifts and full-line / interval moments of products of two such
// amplitudes are closed-form, which is what turns the scatterer and
// dispersion overlap integrals downstream into erf evaluations.

#include <qkd/numerics.hpp>

namespace qkd {

enum class AmplitudeShape { Gaussian, Lorentzian };

// All frequencies are angular [rad/ps], relative to `carrier`; times in ps.
struct EncodingParams {
  double omega0 = 0.0;
  double omega1 = 0.0;
  double sigma_w = 0.0;
  double tau0 = 0.0;
  double tau1 = 0.0;
  double sigma_t = 0.0;
  double carrier = 0.0;
  AmplitudeShape shape = AmplitudeShape::Gaussian;

  double omega(int i) const { return i == 0 ? omega0 : omega1; }
  double tau(int j) const { return j == 0 ? tau0 : tau1; }
};

inline double thz_to_angular(double f_thz) { return 2.0 * pi * f_thz; }
inline double ghz_to_angular(double f_ghz) { return 2.0 * pi * 1e-3 * f_ghz; }

inline void validate(const EncodingParams& e) {
  if (!(e.sigma_w > 0.0) || !(e.sigma_t > 0.0))
    throw std::invalid_argument("encoding: bin widths must be positive");
  if (e.omega0 == e.omega1 || e.tau0 == e.tau1)
    throw std::invalid_argument("encoding: degenerate bins");
}

// The paper-level regime assumption <0_x|1_x> ~ 0; callers may warn when
// this fails but nothing in the math below requires it.
inline bool well_separated(const EncodingParams& e) {
  return std::abs(e.omega1 - e.omega0) >= 6.0 * e.sigma_w &&
         std::abs(e.tau1 - e.tau0) >= 6.0 * e.sigma_t;
}

// ---------------------------------------------------------------------------
// Gaussian amplitude machinery.
// ---------------------------------------------------------------------------

struct GaussAmp {
  cplx pref{1.0, 0.0};
  cplx c2{0.0, 0.0};
  cplx c1{0.0, 0.0};
  cplx c0{0.0, 0.0};

  GaussAmp conjugate() const {
    return {std::conj(pref), std::conj(c2), std::conj(c1), std::conj(c0)};
  }
  // amp(w + mu) as a GaussAmp in w.
  GaussAmp shifted(double mu) const {
    return {pref, c2, c1 + 2.0 * c2 * mu, c0 + c1 * mu + c2 * (mu * mu)};
  }
  cplx operator()(double w) const { return pref * std::exp(c2 * w * w + c1 * w + c0); }
};

inline GaussAmp freq_bin_amp(double Omega, double sw) {
  return {std::pow(pi, -0.25) / std::sqrt(sw),
          cplx(-1.0 / (2.0 * sw * sw), 0.0),
          cplx(Omega / (sw * sw), 0.0),
          cplx(-Omega * Omega / (2.0 * sw * sw), 0.0)};
}

inline GaussAmp time_bin_amp(double tau, double st) {
  return {std::pow(pi, -0.25) * std::sqrt(st),
          cplx(-st * st / 2.0, 0.0),
          cplx(0.0, -tau),
          cplx(0.0, 0.0)};
}

namespace detail {
struct AmpProduct {
  cplx pref, c2, c1, c0;
};
inline AmpProduct product(const GaussAmp& bra, const GaussAmp& ket) {
  const GaussAmp b = bra.conjugate();
  return {b.pref * ket.pref, b.c2 + ket.c2, b.c1 + ket.c1, b.c0 + ket.c0};
}
}  // namespace detail

// int_-inf^inf bra*(w) ket(w) dw
inline cplx overlap_full(const GaussAmp& bra, const GaussAmp& ket) {
  auto p = detail::product(bra, ket);
  return p.pref * std::sqrt(pi / (-p.c2)) * std::exp(p.c0 - p.c1 * p.c1 / (4.0 * p.c2));
}

// int_lo^hi bra*(w) ket(w) dw, via the complex error function.
inline cplx overlap_interval(const GaussAmp& bra, const GaussAmp& ket, double lo, double hi) {
  auto p = detail::product(bra, ket);
  const cplx s = std::sqrt(-p.c2);
  const cplx m = -p.c1 / (2.0 * p.c2);
  return p.pref * (std::sqrt(pi) / (2.0 * s)) * std::exp(p.c0 - p.c1 * p.c1 / (4.0 * p.c2)) *
         (cerf(s * (hi - m)) - cerf(s * (lo - m)));
}

// ---------------------------------------------------------------------------
// Amplitude accessors for an encoding (frequency domain in both cases).
// Lorentzian amplitudes are provided as plain callables for the
// quadrature oracle; their closed-form overlaps are pole-approximation
// expressions implemented below.
// ---------------------------------------------------------------------------

inline GaussAmp famp(const EncodingParams& e, int i) {
  return freq_bin_amp(e.omega(i), e.sigma_w);
}
inline GaussAmp tamp(const EncodingParams& e, int j) {
  return time_bin_amp(e.tau(j), e.sigma_t);
}

// Lorentzian frequency-bin amplitude (sigma_w = FWHM) and the spectral
// representation of the Lorentzian time-bin amplitude (sigma_t = FWHM).
inline cplx lorentz_famp(const EncodingParams& e, int i, double w) {
  const double hw = e.sigma_w / 2.0;
  const double d = w - e.omega(i);
  return std::sqrt(e.sigma_w / pi) * hw / (d * d + hw * hw);
}
inline cplx lorentz_tamp(const EncodingParams& e, int j, double w) {
  return std::sqrt(e.sigma_t / 2.0) * std::exp(cplx(0.0, -w * e.tau(j))) *
         std::exp(-e.sigma_t * std::abs(w) / 2.0);
}

// ---------------------------------------------------------------------------
// Normalization factor of the two-photon antisymmetric state.
// ---------------------------------------------------------------------------

inline double normalization_A(double mu0, double mu1, double sigma, AmplitudeShape shape) {
  if (!(sigma > 0.0) || mu0 == mu1)
    throw std::invalid_argument("normalization_A: need sigma > 0 and distinct bins");
  const double d2 = (mu0 - mu1) * (mu0 - mu1);
  if (shape == AmplitudeShape::Gaussian)
    return 1.0 / std::sqrt(2.0 * (1.0 - std::exp(-d2 / (2.0 * sigma * sigma))));
  return (d2 + sigma * sigma) / std::sqrt(2.0 * (2.0 * sigma * sigma * d2 + d2 * d2));
}

// ---------------------------------------------------------------------------
// Overlaps.
// ---------------------------------------------------------------------------

inline cplx single_overlap_ft(int i, int j, const EncodingParams& e) {
  validate(e);
  if (e.shape == AmplitudeShape::Gaussian) return overlap_full(famp(e, i), tamp(e, j));
  // Lorentzian closed form (pole approximation of the |w| kernel at the
  // frequency-bin pole; see the orthogonality discussion).
  const double hw = e.sigma_w / 2.0;
  const double O = e.omega(i), t = e.tau(j);
  return std::sqrt(pi * e.sigma_w * e.sigma_t / 2.0) *
         std::exp(-e.sigma_t * std::sqrt(O * O + hw * hw) / 2.0) *
         std::exp(-e.sigma_w * std::abs(t) / 2.0) * std::exp(cplx(0.0, -O * t));
}

struct OverlapSet {
  Eigen::Matrix2cd alpha;  // alpha(i,j) = <i_f|j_t>
  cplx beta_f{0.0, 0.0};
  cplx beta_t{0.0, 0.0};
  cplx a{0.0, 0.0};  // <Psi-_f|Psi-_t>
};

inline cplx bell_overlap_a(const EncodingParams& e) {
  validate(e);
  const double Af = normalization_A(e.omega0, e.omega1, e.sigma_w, e.shape);
  const double At = normalization_A(e.tau0, e.tau1, e.sigma_t, e.shape);
  const cplx a00 = single_overlap_ft(0, 0, e), a01 = single_overlap_ft(0, 1, e);
  const cplx a10 = single_overlap_ft(1, 0, e), a11 = single_overlap_ft(1, 1, e);
  return 2.0 * Af * At * (a00 * a11 - a01 * a10);
}

inline OverlapSet overlap_set(const EncodingParams& e) {
  validate(e);
  OverlapSet ov;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) ov.alpha(i, j) = single_overlap_ft(i, j, e);
  if (e.shape == AmplitudeShape::Gaussian) {
    ov.beta_f = overlap_full(famp(e, 0), famp(e, 1));
    ov.beta_t = overlap_full(tamp(e, 0), tamp(e, 1));
  } else {
    const double dw2 = (e.omega0 - e.omega1) * (e.omega0 - e.omega1);
    const double dt2 = (e.tau0 - e.tau1) * (e.tau0 - e.tau1);
    ov.beta_f = e.sigma_w * e.sigma_w / (dw2 + e.sigma_w * e.sigma_w);
    ov.beta_t = e.sigma_t * e.sigma_t / (dt2 + e.sigma_t * e.sigma_t);
  }
  const double Af = normalization_A(e.omega0, e.omega1, e.sigma_w, e.shape);
  const double At = normalization_A(e.tau0, e.tau1, e.sigma_t, e.shape);
  ov.a = 2.0 * Af * At * (ov.alpha(0, 0) * ov.alpha(1, 1) - ov.alpha(0, 1) * ov.alpha(1, 0));
  return ov;
}

// Two-photon wavefunction value Psi-_x(w1, w2) for the oracle-side
// antisymmetry and normalization checks.
inline cplx bell_wavefunction_f(const EncodingParams& e, double w1, double w2) {
  const double A = normalization_A(e.omega0, e.omega1, e.sigma_w, e.shape);
  if (e.shape == AmplitudeShape::Gaussian)
    return A * (famp(e, 0)(w1) * famp(e, 1)(w2) - famp(e, 1)(w1) * famp(e, 0)(w2));
  return A * (lorentz_famp(e, 0, w1) * lorentz_famp(e, 1, w2) -
              lorentz_famp(e, 1, w1) * lorentz_famp(e, 0, w2));
}

inline cplx bell_wavefunction_t(const EncodingParams& e, double w1, double w2) {
  const double A = normalization_A(e.tau0, e.tau1, e.sigma_t, e.shape);
  if (e.shape == AmplitudeShape::Gaussian)
    return A * (tamp(e, 0)(w1) * tamp(e, 1)(w2) - tamp(e, 1)(w1) * tamp(e, 0)(w2));
  return A * (lorentz_tamp(e, 0, w1) * lorentz_tamp(e, 1, w2) -
              lorentz_tamp(e, 1, w1) * lorentz_tamp(e, 0, w2));
}

}  // namespace qkd
