#pragma once

// Noise-channel math: the frequency beam-splitter (scatterer) channel in
// single-pair, multi-pair, parameter-deviated and mixed forms, chromatic
// dispersion at orders 1 and 2, photon loss, collective qubit unitaries,
// the logical amplitude-damping approximation, and the closed-form rates
// of the alternative (two-frequency-pair) Bell encoding.

#include <qkd/spectral.hpp>

#include <optional>
#include <variant>

namespace qkd {

// ---------------------------------------------------------------------------
// Channel descriptions.
// ---------------------------------------------------------------------------

struct FbsPair {
  double Omega = 0.0;  // first bin center, relative to carrier [rad/ps]
  double mu = 0.0;     // bin separation [rad/ps]
  double eps = 0.0;    // bin width [rad/ps]
  double theta = 0.0;
  double phi = 0.0;
};

inline void validate(const FbsPair& p) {
  if (!(p.eps > 0.0)) throw std::invalid_argument("fbs pair: eps must be positive");
  if (!(p.mu > p.eps)) throw std::invalid_argument("fbs pair: bins overlap (mu <= eps)");
}

// Additive offsets applied to the second photon's scatterer parameters.
struct FbsDelta {
  double dOmega = 0.0, dmu = 0.0, deps = 0.0, dtheta = 0.0, dphi = 0.0;
};

struct FbsChannel {
  std::vector<FbsPair> pairs;
  std::optional<FbsDelta> delta;

  std::vector<FbsPair> pairs_first() const { return pairs; }
  std::vector<FbsPair> pairs_second() const {
    if (!delta) return pairs;
    std::vector<FbsPair> out = pairs;
    for (auto& p : out) {
      p.Omega += delta->dOmega;
      p.mu += delta->dmu;
      p.eps += delta->deps;
      p.theta += delta->dtheta;
      p.phi += delta->dphi;
    }
    return out;
  }
};

inline void validate(const FbsChannel& c) {
  for (const auto& p : c.pairs) validate(p);
  // Pairwise disjoint supports (each pair touches [O-e/2, O+mu+e/2]).
  for (size_t i = 0; i < c.pairs.size(); ++i)
    for (size_t j = i + 1; j < c.pairs.size(); ++j) {
      const auto &a = c.pairs[i], &b = c.pairs[j];
      const double alo = a.Omega - a.eps / 2, ahi = a.Omega + a.mu + a.eps / 2;
      const double blo = b.Omega - b.eps / 2, bhi = b.Omega + b.mu + b.eps / 2;
      if (std::max(alo, blo) < std::min(ahi, bhi))
        throw std::invalid_argument("fbs channel: pair supports overlap");
    }
}

struct DispersionChannel {
  int order = 2;        // n in {1, 2}
  double alpha = 0.0;   // [ps^n]
  double omega0 = 0.0;  // expansion frequency, relative to carrier [rad/ps]
};

inline void validate(const DispersionChannel& c) {
  if (c.order != 1 && c.order != 2)
    throw std::invalid_argument("dispersion: only orders 1 and 2 supported");
}

struct QubitUnitary {
  double theta = 0.0;
  double phi = 0.0;
  Eigen::Matrix2cd matrix() const {
    Eigen::Matrix2cd u;
    u << std::cos(theta), -std::exp(cplx(0.0, -phi)) * std::sin(theta),
        std::exp(cplx(0.0, phi)) * std::sin(theta), std::cos(theta);
    return u;
  }
};

struct LogicalAmpDamp {
  double eta0 = 1.0;
  double Delta = 0.0;
};

struct LossSpec {
  enum class Mode { uniform, frequency_dependent } mode = Mode::uniform;
  double p = 1.0;  // per-photon survival probability (uniform mode)
  double p_bin0 = 1.0, p_bin1 = 1.0, p_carrier = 1.0;  // frequency-dependent mode

  double survival_freq() const {
    return mode == Mode::uniform ? p : 0.5 * (p_bin0 + p_bin1);
  }
  double survival_time() const { return mode == Mode::uniform ? p : p_carrier; }
};

struct ChannelSpec;

struct MixedChannel {
  std::vector<double> weights;
  std::vector<ChannelSpec> components;
};

struct ChannelSpec {
  std::variant<std::monostate, FbsChannel, DispersionChannel, QubitUnitary, LogicalAmpDamp,
               MixedChannel>
      kind;
  LossSpec loss;
};

inline void validate(const MixedChannel& m) {
  if (m.weights.size() != m.components.size())
    throw std::invalid_argument("mixed channel: weight/component length mismatch");
  double s = 0.0;
  for (double w : m.weights) {
    if (w < 0.0) throw std::invalid_argument("mixed channel: negative weight");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12)
    throw std::invalid_argument("mixed channel: weights must sum to 1");
}

// ---------------------------------------------------------------------------
// Scatterer action and overlaps.
// ---------------------------------------------------------------------------

// Piecewise transform of an arbitrary spectral wavefunction. Bins mix as
//   bin1: cos(t) y(w) - e^{-i phi} sin(t) y(w + mu)
//   bin2: cos(t) y(w) + e^{+i phi} sin(t) y(w - mu)
// and the function is untouched outside all bins.
inline std::function<cplx(double)> fbs_apply(std::function<cplx(double)> y,
                                             std::vector<FbsPair> pairs) {
  return [y = std::move(y), pairs = std::move(pairs)](double w) -> cplx {
    for (const auto& p : pairs) {
      if (w > p.Omega - p.eps / 2 && w <= p.Omega + p.eps / 2)
        return std::cos(p.theta) * y(w) -
               std::exp(cplx(0.0, -p.phi)) * std::sin(p.theta) * y(w + p.mu);
      if (w > p.Omega + p.mu - p.eps / 2 && w <= p.Omega + p.mu + p.eps / 2)
        return std::cos(p.theta) * y(w) +
               std::exp(cplx(0.0, p.phi)) * std::sin(p.theta) * y(w - p.mu);
    }
    return y(w);
  };
}

// Transformed time-bin amplitude as a callable (the piecewise G function).
inline std::function<cplx(double)> fbs_transform_timebin_amp(double tau,
                                                             const EncodingParams& e,
                                                             const std::vector<FbsPair>& pairs) {
  if (e.shape != AmplitudeShape::Gaussian)
    throw std::invalid_argument("fbs transform: closed forms only for Gaussian shapes");
  GaussAmp F = time_bin_amp(tau, e.sigma_t);
  return fbs_apply([F](double w) { return F(w); }, pairs);
}

inline std::function<cplx(double)> fbs_transform_timebin_amp(double tau,
                                                             const EncodingParams& e,
                                                             const FbsPair& pair) {
  return fbs_transform_timebin_amp(tau, e, std::vector<FbsPair>{pair});
}

// Closed-form <bra | FBS(ket)> for Gaussian amplitudes. The full-line
// term plus, per pair, interval corrections over both bins with shifted
// kets for the cross terms; all reduce to cerf evaluations.
inline cplx fbs_overlap(const GaussAmp& bra, const GaussAmp& ket,
                        const std::vector<FbsPair>& pairs) {
  cplx val = overlap_full(bra, ket);
  for (const auto& p : pairs) {
    const double b1lo = p.Omega - p.eps / 2, b1hi = p.Omega + p.eps / 2;
    const double b2lo = p.Omega + p.mu - p.eps / 2, b2hi = p.Omega + p.mu + p.eps / 2;
    const double ct = std::cos(p.theta), st = std::sin(p.theta);
    val += (ct - 1.0) *
           (overlap_interval(bra, ket, b1lo, b1hi) + overlap_interval(bra, ket, b2lo, b2hi));
    val -= std::exp(cplx(0.0, -p.phi)) * st * overlap_interval(bra, ket.shifted(p.mu), b1lo, b1hi);
    val += std::exp(cplx(0.0, p.phi)) * st * overlap_interval(bra, ket.shifted(-p.mu), b2lo, b2hi);
  }
  return val;
}

// 1D overlap of two time-bin amplitudes through the scatterer,
// H(tau, tau') = <F_tau | FBS(F_tau')>.
inline cplx overlap_H(double tau, double tau_prime, double sigma_t, const FbsPair& pair) {
  validate(pair);
  return fbs_overlap(time_bin_amp(tau, sigma_t), time_bin_amp(tau_prime, sigma_t), {pair});
}

// 1D overlap of a frequency bin at Delta with a transformed time bin,
// I(Delta, tau) = <f_Delta | FBS(F_tau)>.
inline cplx overlap_I(double Delta, double tau, const EncodingParams& e, const FbsPair& pair) {
  validate(pair);
  if (e.shape != AmplitudeShape::Gaussian)
    throw std::invalid_argument("overlap_I: Gaussian shapes only");
  return fbs_overlap(freq_bin_amp(Delta, e.sigma_w), time_bin_amp(tau, e.sigma_t), {pair});
}

// ---------------------------------------------------------------------------
// Logical-level effect of the scatterer on the two-photon states.
// ---------------------------------------------------------------------------

struct FbsLogicalEffect {
  double fidelity_tt = 1.0;  // |<Psi'-_t|Psi-_t>|^2
  double phase_tt = 0.0;     // arg <Psi'-_t|Psi-_t>
  double fidelity_tf = 0.0;  // |<Psi-_f|Psi'-_t>|^2
};

inline FbsLogicalEffect fbs_logical_effect(const EncodingParams& e, const FbsChannel& chan) {
  validate(e);
  validate(chan);
  if (e.shape != AmplitudeShape::Gaussian)
    throw std::invalid_argument("fbs_logical_effect: Gaussian shapes only");
  const auto p1 = chan.pairs_first(), p2 = chan.pairs_second();
  const double At = normalization_A(e.tau0, e.tau1, e.sigma_t, e.shape);
  const double Af = normalization_A(e.omega0, e.omega1, e.sigma_w, e.shape);

  // H-type overlaps per photon: Hx(i, j) = <F_i | C_x F_j>.
  Eigen::Matrix2cd H1, H2, I1, I2;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      H1(i, j) = fbs_overlap(tamp(e, i), tamp(e, j), p1);
      H2(i, j) = fbs_overlap(tamp(e, i), tamp(e, j), p2);
      I1(i, j) = fbs_overlap(famp(e, i), tamp(e, j), p1);
      I2(i, j) = fbs_overlap(famp(e, i), tamp(e, j), p2);
    }
  // <Psi_t | (C1 x C2) Psi_t> expands into four photonwise products; for
  // equal channels it collapses to 2 A^2 (H00 H11 - H01 H10).
  const cplx ott = At * At *
                   (std::conj(H1(0, 0)) * std::conj(H2(1, 1)) -
                    std::conj(H1(1, 0)) * std::conj(H2(0, 1)) -
                    std::conj(H1(0, 1)) * std::conj(H2(1, 0)) +
                    std::conj(H1(1, 1)) * std::conj(H2(0, 0)));
  // Note H(i,j) = <F_i|C F_j>, so <C F_j|F_i> = conj H(i,j); the bracket
  // above is <Psi'_t|Psi_t> with Psi'_t = (C1 x C2) Psi_t.
  const cplx otf = Af * At *
                   (I1(0, 0) * I2(1, 1) - I1(0, 1) * I2(1, 0) - I1(1, 0) * I2(0, 1) +
                    I1(1, 1) * I2(0, 0));
  FbsLogicalEffect out;
  out.fidelity_tt = std::norm(ott);
  out.phase_tt = std::arg(ott);
  out.fidelity_tf = std::norm(otf);
  return out;
}

// ---------------------------------------------------------------------------
// Dispersion.
// ---------------------------------------------------------------------------

// Multiply a Gaussian amplitude by exp(i alpha (w - w0)^n), n in {1, 2}.
inline GaussAmp dispersion_amp(const GaussAmp& a, double alpha, int n, double w0 = 0.0) {
  if (n == 1)
    return {a.pref * std::exp(cplx(0.0, -alpha * w0)), a.c2, a.c1 + cplx(0.0, alpha), a.c0};
  if (n == 2)
    return {a.pref * std::exp(cplx(0.0, alpha * w0 * w0)), a.c2 + cplx(0.0, alpha),
            a.c1 - cplx(0.0, 2.0 * alpha * w0), a.c0};
  throw std::invalid_argument("dispersion_amp: only orders 1 and 2 supported");
}

// Transformed 1D overlaps: kappa = <i_f|j_f'>, lambda = <i_t|j_t'>,
// gamma = <i_f|j_t'>, delta = <i_t|j_f'>, primes marking the channel.
struct TransformedOverlapSet {
  Eigen::Matrix2cd kappa, lambda, gamma, delta;
};

inline TransformedOverlapSet dispersion_overlaps(const EncodingParams& e,
                                                 const DispersionChannel& c) {
  validate(e);
  validate(c);
  if (e.shape != AmplitudeShape::Gaussian)
    throw std::invalid_argument("dispersion_overlaps: Gaussian shapes only");
  TransformedOverlapSet t;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const GaussAmp fj = dispersion_amp(famp(e, j), c.alpha, c.order, c.omega0);
      const GaussAmp tj = dispersion_amp(tamp(e, j), c.alpha, c.order, c.omega0);
      t.kappa(i, j) = overlap_full(famp(e, i), fj);
      t.lambda(i, j) = overlap_full(tamp(e, i), tj);
      t.gamma(i, j) = overlap_full(famp(e, i), tj);
      t.delta(i, j) = overlap_full(tamp(e, i), fj);
    }
  return t;
}

// Same four overlap blocks for the scatterer channel.
inline TransformedOverlapSet fbs_overlaps(const EncodingParams& e,
                                          const std::vector<FbsPair>& pairs) {
  validate(e);
  if (e.shape != AmplitudeShape::Gaussian)
    throw std::invalid_argument("fbs_overlaps: Gaussian shapes only");
  TransformedOverlapSet t;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      t.kappa(i, j) = fbs_overlap(famp(e, i), famp(e, j), pairs);
      t.lambda(i, j) = fbs_overlap(tamp(e, i), tamp(e, j), pairs);
      t.gamma(i, j) = fbs_overlap(famp(e, i), tamp(e, j), pairs);
      t.delta(i, j) = fbs_overlap(tamp(e, i), famp(e, j), pairs);
    }
  return t;
}

// Per-photon overlap sets when the photons see alpha and alpha + delta.
inline std::pair<TransformedOverlapSet, TransformedOverlapSet> dispersion_delta(
    const EncodingParams& e, const DispersionChannel& c, double delta_alpha) {
  DispersionChannel c2 = c;
  c2.alpha += delta_alpha;
  return {dispersion_overlaps(e, c), dispersion_overlaps(e, c2)};
}

// ---------------------------------------------------------------------------
// Kraus helpers and state-level channel application.
// ---------------------------------------------------------------------------

// Complete an in-subspace contraction A (signal block of K0 = A (+) 1)
// with leak operators into the trailing inconclusive dimension, so that
// the set is trace preserving.
inline std::vector<Mat> contraction_kraus(const Mat& A) {
  const int ds = int(A.rows());
  const int d = ds + 1;
  Mat K0 = Mat::Zero(d, d);
  K0.topLeftCorner(ds, ds) = A;
  K0(ds, ds) = 1.0;
  std::vector<Mat> ks{K0};
  Mat R = Mat::Identity(d, d) - K0.adjoint() * K0;
  EigH er = eig_hermitian(0.5 * (R + R.adjoint()));
  for (int k = 0; k < d; ++k) {
    if (er.values[k] < -1e-9)
      throw std::runtime_error("contraction_kraus: input is not a contraction");
    if (er.values[k] < 1e-14) continue;
    Mat kl = Mat::Zero(d, d);
    kl.row(ds) = std::sqrt(std::max(er.values[k], 0.0)) * er.vectors.col(k).adjoint();
    ks.push_back(kl);
  }
  return ks;
}

inline Mat apply_kraus(const Mat& rho, const std::vector<Mat>& ks) {
  Mat out = Mat::Zero(rho.rows(), rho.cols());
  for (const auto& k : ks) out += k * rho * k.adjoint();
  return out;
}

inline Mat kron_pow(const Mat& u, int n) {
  Mat m = Mat::Identity(1, 1);
  for (int i = 0; i < n; ++i) {
    Mat next(m.rows() * u.rows(), m.cols() * u.cols());
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c)
        next.block(r * u.rows(), c * u.cols(), u.rows(), u.cols()) = m(r, c) * u;
    m = next;
  }
  return m;
}

// rho -> p^N rho_signal (+) accumulated inconclusive population. For the
// frequency-dependent mode the state space must be the 3-dim logical
// space {0_L (frequency pair), 1_L (time pair), inconclusive}; the two
// logical levels then damp with their own survival probabilities.
inline Mat loss_channel_apply(const Mat& rho, const LossSpec& loss, int photons) {
  const int d = int(rho.rows());
  const int ds = d - 1;
  if (loss.mode == LossSpec::Mode::uniform) {
    const double amp = std::pow(loss.p, 0.5 * photons);
    return apply_kraus(rho, contraction_kraus(amp * Mat::Identity(ds, ds)));
  }
  if (d != 3)
    throw std::invalid_argument(
        "loss_channel_apply: frequency-dependent mode acts on the 3-dim logical space");
  Mat A = Mat::Zero(2, 2);
  A(0, 0) = std::pow(loss.survival_freq(), 0.5 * photons);
  A(1, 1) = std::pow(loss.survival_time(), 0.5 * photons);
  return apply_kraus(rho, contraction_kraus(A));
}

// rho -> (U^(x)N (+) 1) rho (.)^dagger on an (2^N + 1)-dim space.
inline Mat collective_unitary_apply(const Mat& rho, const QubitUnitary& u, int photons) {
  const int ds = 1 << photons;
  if (rho.rows() != ds + 1)
    throw std::invalid_argument("collective_unitary_apply: dimension mismatch");
  Mat full = Mat::Identity(ds + 1, ds + 1);
  full.topLeftCorner(ds, ds) = kron_pow(u.matrix(), photons);
  return full * rho * full.adjoint();
}

// Logical amplitude damping / decoherence channel on {0_L, 1_L, perp}.
inline std::pair<Mat, Mat> amp_damp_kraus(const LogicalAmpDamp& ad) {
  Mat e0 = Mat::Zero(3, 3), e1 = Mat::Zero(3, 3);
  e0(2, 1) = std::sqrt(1.0 - ad.eta0);
  e1(0, 0) = 1.0;
  e1(1, 1) = std::sqrt(ad.eta0) * std::exp(cplx(0.0, ad.Delta));
  e1(2, 2) = 1.0;
  return {e0, e1};
}

inline Mat amp_damp_logical_apply(const Mat& rho, const LogicalAmpDamp& ad) {
  if (rho.rows() != 3)
    throw std::invalid_argument("amp_damp_logical_apply: expects the 3-dim logical space");
  auto [e0, e1] = amp_damp_kraus(ad);
  return e0 * rho * e0.adjoint() + e1 * rho * e1.adjoint();
}

// ---------------------------------------------------------------------------
// Alternative encoding (antisymmetric Bell states across two frequency
// pairs): closed-form loss and error rates under the worst bin pairing.
// ---------------------------------------------------------------------------

struct AltEncodingRates {
  double l0, l1, e_bit, e_ph;
};

inline AltEncodingRates alt_encoding_rates(double th1, double th2, double ph1, double ph2) {
  const double c1 = std::cos(th1), c2 = std::cos(th2);
  const double s1 = std::sin(th1), s2 = std::sin(th2);
  AltEncodingRates r;
  r.l0 = 1.0 - c1 * c1 * c2 * c2 - s1 * s1 * s2 * s2;
  r.l1 = r.l0;
  r.e_bit = s1 * s1 * s2 * s2;
  const double sp = std::sin(ph1 + ph2);
  r.e_ph = sp * sp * s1 * s1 * s2 * s2;
  return r;
}

}  // namespace qkd
