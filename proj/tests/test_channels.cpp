#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qkd/channels.hpp>

#include <random>

using namespace qkd;

namespace {

EncodingParams fig_encoding(double eps_ghz = 6.6) {
  EncodingParams e;
  e.omega0 = 0.0;
  e.omega1 = thz_to_angular(0.019);
  e.sigma_w = ghz_to_angular(eps_ghz) / 6.0;
  e.tau0 = 0.0;
  e.tau1 = 220.0;
  e.sigma_t = 17.0;
  return e;
}

// Scatterer aligned with the encoding bins, full-width eps = 6 sigma_w.
FbsPair fig_pair(const EncodingParams& e, double theta, double phi = 0.0) {
  FbsPair p;
  p.Omega = e.omega0;
  p.mu = e.omega1 - e.omega0;
  p.eps = 6.0 * e.sigma_w;
  p.theta = theta;
  p.phi = phi;
  return p;
}

std::vector<double> peak_ladder(double c, double s, std::vector<double> b) {
  for (double k : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
    b.push_back(c - k * s);
    b.push_back(c + k * s);
  }
  b.push_back(c);
  return b;
}

// Breakpoints covering both scatterer bins of every pair plus a peak at c.
std::vector<double> fbs_breaks(const std::vector<FbsPair>& pairs, double c, double s, double r) {
  std::vector<double> b{c - r, c + r};
  for (const auto& p : pairs) {
    for (double edge : {p.Omega - p.eps / 2, p.Omega + p.eps / 2, p.Omega + p.mu - p.eps / 2,
                        p.Omega + p.mu + p.eps / 2}) {
      if (edge > c - r && edge < c + r) b.push_back(edge);
    }
  }
  b = peak_ladder(c, s, std::move(b));
  std::vector<double> out;
  for (double x : b)
    if (x >= c - r && x <= c + r) out.push_back(x);
  return out;
}

cplx quad_fbs_overlap(const GaussAmp& bra, const GaussAmp& ket,
                      const std::vector<FbsPair>& pairs, double center, double scale) {
  auto tk = fbs_apply([ket](double w) { return ket(w); }, pairs);
  auto f = [&](double w) { return std::conj(bra(w)) * tk(w); };
  const double r = 60.0 * scale + 0.5;
  return integrate_1d(f, fbs_breaks(pairs, center, scale, r), 1e-11).value;
}

}  // namespace

TEST_CASE("fbs pair and channel validation") {
  FbsPair p;
  p.Omega = 0.0;
  p.mu = 0.05;
  p.eps = 0.01;
  CHECK_NOTHROW(validate(p));
  p.eps = 0.06;  // bins overlap
  CHECK_THROWS_AS(validate(p), std::invalid_argument);

  FbsChannel c;
  c.pairs = {FbsPair{0.0, 0.05, 0.01, 0.3, 0.0}, FbsPair{0.2, 0.05, 0.01, 0.3, 0.0}};
  CHECK_NOTHROW(validate(c));
  c.pairs[1].Omega = 0.04;  // support collides with pair 0's second bin
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
}

TEST_CASE("fbs_apply leaves the function untouched outside the bins") {
  EncodingParams e = fig_encoding();
  FbsPair p = fig_pair(e, 0.7, 0.3);
  GaussAmp F = time_bin_amp(e.tau1, e.sigma_t);
  auto g = fbs_apply([F](double w) { return F(w); }, {p});
  const double wout = p.Omega + p.mu + p.eps;  // beyond both bins
  CHECK(std::abs(g(wout) - F(wout)) < 1e-15);
  // Inside bin 1 the value mixes in the mu-shifted amplitude.
  const double win = p.Omega;
  const cplx want = std::cos(p.theta) * F(win) -
                    std::exp(cplx(0.0, -p.phi)) * std::sin(p.theta) * F(win + p.mu);
  CHECK(std::abs(g(win) - want) < 1e-15);
}

TEST_CASE("fbs transform preserves norm (unitarity oracle)") {
  EncodingParams e = fig_encoding();
  for (double theta : {0.4, 1.2, pi / 2}) {
    auto g = fbs_transform_timebin_amp(e.tau1, e, fig_pair(e, theta, 0.4));
    auto f = [&](double w) { return cplx(std::norm(g(w)), 0.0); };
    auto bks = fbs_breaks({fig_pair(e, theta, 0.4)}, 0.0, 1.0 / e.sigma_t, 1.5);
    CHECK(std::abs(integrate_1d(f, bks, 1e-11).value - 1.0) < 1e-8);
  }
  e.shape = AmplitudeShape::Lorentzian;
  CHECK_THROWS_AS(fbs_transform_timebin_amp(0.0, e, fig_pair(e, 0.3)), std::invalid_argument);
}

TEST_CASE("overlap_H: identity limit and oracle equivalence") {
  EncodingParams e = fig_encoding();
  FbsPair id = fig_pair(e, 0.0);
  // theta = 0 reduces to the plain time-bin overlap exp(-(t-t')^2/(4 s^2)).
  const cplx h = overlap_H(e.tau0, e.tau1, e.sigma_t, id);
  const double dt = e.tau1 - e.tau0;
  CHECK(std::abs(h - std::exp(-dt * dt / (4.0 * e.sigma_t * e.sigma_t))) < 1e-14);
  CHECK(std::abs(overlap_H(50.0, 50.0, e.sigma_t, id) - 1.0) < 1e-14);

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> uth(0.0, 2.0 * pi), ut(-50.0, 250.0);
  for (int k = 0; k < 12; ++k) {
    FbsPair p = fig_pair(e, uth(rng), uth(rng));
    const double t0 = ut(rng), t1 = ut(rng);
    const cplx got = overlap_H(t0, t1, e.sigma_t, p);
    const cplx want = quad_fbs_overlap(time_bin_amp(t0, e.sigma_t), time_bin_amp(t1, e.sigma_t),
                                       {p}, 0.0, 1.0 / e.sigma_t);
    CHECK(std::abs(got - want) < 1e-8);
  }
}

TEST_CASE("overlap_I: identity limit and oracle equivalence") {
  EncodingParams e = fig_encoding();
  FbsPair id = fig_pair(e, 0.0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(overlap_I(e.omega(i), e.tau(j), e, id) - single_overlap_ft(i, j, e)) < 1e-14);

  std::mt19937 rng(9);
  std::uniform_real_distribution<double> uth(0.0, 2.0 * pi), ut(-50.0, 250.0);
  std::uniform_real_distribution<double> uw(-0.05, 0.15);
  for (int k = 0; k < 12; ++k) {
    FbsPair p = fig_pair(e, uth(rng), uth(rng));
    const double W = uw(rng), t = ut(rng);
    const cplx got = overlap_I(W, t, e, p);
    const cplx want =
        quad_fbs_overlap(freq_bin_amp(W, e.sigma_w), time_bin_amp(t, e.sigma_t), {p}, W, e.sigma_w);
    CHECK(std::abs(got - want) < 1e-8);
  }
}

TEST_CASE("fbs_overlap handles multiple disjoint pairs (oracle)") {
  EncodingParams e = fig_encoding();
  FbsPair p1 = fig_pair(e, 0.8, 0.2);
  FbsPair p2 = p1;
  p2.Omega = e.omega1 + 4.0 * p1.eps;
  p2.theta = 1.9;
  FbsChannel chan;
  chan.pairs = {p1, p2};
  CHECK_NOTHROW(validate(chan));
  const GaussAmp bra = freq_bin_amp(e.omega0, e.sigma_w);
  const GaussAmp ket = time_bin_amp(e.tau1, e.sigma_t);
  const cplx got = fbs_overlap(bra, ket, chan.pairs);
  const cplx want = quad_fbs_overlap(bra, ket, chan.pairs, e.omega0, e.sigma_w);
  CHECK(std::abs(got - want) < 1e-8);
}

TEST_CASE("fbs_logical_effect: trivial channel and full-swap point") {
  EncodingParams e = fig_encoding();
  FbsChannel id;
  id.pairs = {fig_pair(e, 0.0)};
  auto eff = fbs_logical_effect(e, id);
  CHECK(eff.fidelity_tt == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(eff.phase_tt) < 1e-12);
  CHECK(eff.fidelity_tf == doctest::Approx(std::norm(bell_overlap_a(e))).epsilon(1e-10));

  // theta = pi flips the sign inside both bins; the tt overlap stays high
  // because most spectral weight lies outside the narrow bins.
  FbsChannel flip;
  flip.pairs = {fig_pair(e, pi)};
  auto ef = fbs_logical_effect(e, flip);
  CHECK(ef.fidelity_tt <= 1.0 + 1e-12);
  CHECK(ef.fidelity_tf >= 0.0);
}

TEST_CASE("fbs_logical_effect matches a two-photon quadrature oracle") {
  EncodingParams e = fig_encoding();
  FbsChannel chan;
  chan.pairs = {fig_pair(e, 1.1, 0.5)};
  auto eff = fbs_logical_effect(e, chan);

  const double At = normalization_A(e.tau0, e.tau1, e.sigma_t, AmplitudeShape::Gaussian);
  const double Af = normalization_A(e.omega0, e.omega1, e.sigma_w, AmplitudeShape::Gaussian);
  Eigen::Matrix2cd H, I;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      H(i, j) = quad_fbs_overlap(time_bin_amp(e.tau(i), e.sigma_t),
                                 time_bin_amp(e.tau(j), e.sigma_t), chan.pairs, 0.0,
                                 1.0 / e.sigma_t);
      I(i, j) = quad_fbs_overlap(freq_bin_amp(e.omega(i), e.sigma_w),
                                 time_bin_amp(e.tau(j), e.sigma_t), chan.pairs, e.omega(i),
                                 e.sigma_w);
    }
  const cplx ott = 2.0 * At * At *
                   (std::conj(H(0, 0)) * std::conj(H(1, 1)) - std::conj(H(0, 1)) * std::conj(H(1, 0)));
  const cplx otf = 2.0 * Af * At * (I(0, 0) * I(1, 1) - I(0, 1) * I(1, 0));
  CHECK(eff.fidelity_tt == doctest::Approx(std::norm(ott)).epsilon(1e-7));
  CHECK(eff.phase_tt == doctest::Approx(std::arg(ott)).epsilon(1e-6));
  CHECK(eff.fidelity_tf == doctest::Approx(std::norm(otf)).epsilon(1e-6));
}

TEST_CASE("deviated scatterer: zero offsets reproduce the symmetric case") {
  EncodingParams e = fig_encoding();
  FbsChannel base;
  base.pairs = {fig_pair(e, 0.9, 0.1)};
  FbsChannel dev = base;
  dev.delta = FbsDelta{};
  auto a = fbs_logical_effect(e, base);
  auto b = fbs_logical_effect(e, dev);
  CHECK(a.fidelity_tt == doctest::Approx(b.fidelity_tt).epsilon(1e-14));
  CHECK(a.fidelity_tf == doctest::Approx(b.fidelity_tf).epsilon(1e-14));

  dev.delta = FbsDelta{0.0, 0.0, 0.0, 0.05, 0.0};
  auto c = fbs_logical_effect(e, dev);
  CHECK(c.fidelity_tt != doctest::Approx(a.fidelity_tt).epsilon(1e-10));
}

TEST_CASE("dispersion_amp against pointwise multiplication") {
  GaussAmp F = time_bin_amp(120.0, 20.0);
  for (int n : {1, 2}) {
    GaussAmp d = dispersion_amp(F, 0.37, n, 0.01);
    for (double w : {-0.2, 0.0, 0.013, 0.4}) {
      const cplx want = F(w) * std::exp(cplx(0.0, 0.37 * std::pow(w - 0.01, n)));
      CHECK(std::abs(d(w) - want) < 1e-12 * std::abs(want));
    }
  }
  CHECK_THROWS_AS(dispersion_amp(F, 1.0, 3), std::invalid_argument);
}

TEST_CASE("linear dispersion identities on the two-photon overlaps") {
  EncodingParams e = fig_encoding();
  DispersionChannel c;
  c.order = 1;
  c.alpha = 11.0;
  auto t = dispersion_overlaps(e, c);
  const double Af = normalization_A(e.omega0, e.omega1, e.sigma_w, e.shape);
  const double At = normalization_A(e.tau0, e.tau1, e.sigma_t, e.shape);
  const cplx off = 2.0 * Af * Af * (t.kappa(0, 0) * t.kappa(1, 1) - t.kappa(0, 1) * t.kappa(1, 0));
  const cplx ott =
      2.0 * At * At * (t.lambda(0, 0) * t.lambda(1, 1) - t.lambda(0, 1) * t.lambda(1, 0));
  CHECK(std::norm(ott) ==
        doctest::Approx(std::exp(-c.alpha * c.alpha / (e.sigma_t * e.sigma_t))).epsilon(1e-10));
  CHECK(std::norm(off) ==
        doctest::Approx(std::exp(-c.alpha * c.alpha * e.sigma_w * e.sigma_w)).epsilon(1e-10));
  const double want_phase =
      std::remainder(c.alpha * (e.omega0 + e.omega1), 2.0 * pi);
  CHECK(std::remainder(std::arg(off) - want_phase, 2.0 * pi) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("dispersion_overlaps matches quadrature (order 2)") {
  EncodingParams e = fig_encoding();
  DispersionChannel c;
  c.order = 2;
  c.alpha = 290.0;
  c.omega0 = 0.005;
  auto t = dispersion_overlaps(e, c);
  auto quad = [&](const GaussAmp& bra, const GaussAmp& ket, double ctr, double s) {
    auto f = [&](double w) {
      return std::conj(bra(w)) * ket(w) * std::exp(cplx(0.0, c.alpha * std::pow(w - c.omega0, 2)));
    };
    const double r = 60.0 * s + 0.5;
    std::vector<double> b = peak_ladder(ctr, s, {ctr - r, ctr + r});
    std::vector<double> bb;
    for (double x : b)
      if (x >= ctr - r && x <= ctr + r) bb.push_back(x);
    return integrate_1d(f, bb, 1e-11).value;
  };
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(t.kappa(i, j) - quad(famp(e, i), famp(e, j), e.omega(i), e.sigma_w)) < 1e-8);
      CHECK(std::abs(t.gamma(i, j) - quad(famp(e, i), tamp(e, j), e.omega(i), e.sigma_w)) < 1e-8);
      CHECK(std::abs(t.lambda(i, j) - quad(tamp(e, i), tamp(e, j), 0.0, 1.0 / e.sigma_t)) < 1e-8);
    }
  CHECK_THROWS_AS((void)dispersion_overlaps(e, DispersionChannel{3, 1.0, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("dispersion_delta offsets only the second photon") {
  EncodingParams e = fig_encoding();
  DispersionChannel c{2, 250.0, 0.0};
  auto [t1, t2] = dispersion_delta(e, c, 30.0);
  auto t1ref = dispersion_overlaps(e, c);
  DispersionChannel c2 = c;
  c2.alpha = 280.0;
  auto t2ref = dispersion_overlaps(e, c2);
  CHECK((t1.lambda - t1ref.lambda).norm() == 0.0);
  CHECK((t2.lambda - t2ref.lambda).norm() == 0.0);
}

TEST_CASE("contraction_kraus completes to a trace-preserving set") {
  std::mt19937 rng(21);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 10; ++rep) {
    Mat a(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) a(i, j) = cplx(g(rng), g(rng));
    a *= 0.9 / std::sqrt(eig_hermitian(a.adjoint() * a).values.maxCoeff());
    auto ks = contraction_kraus(a);
    Mat sum = Mat::Zero(5, 5);
    for (const auto& k : ks) sum += k.adjoint() * k;
    CHECK((sum - Mat::Identity(5, 5)).norm() < 1e-10);
  }
  CHECK_THROWS_AS(contraction_kraus(2.0 * Mat::Identity(2, 2)), std::runtime_error);
}

TEST_CASE("loss_channel_apply: uniform mode block form") {
  Mat rho = Mat::Zero(3, 3);
  rho(0, 0) = 0.5;
  rho(1, 1) = 0.5;
  rho(0, 1) = rho(1, 0) = 0.5;
  LossSpec loss;
  loss.p = 0.4;
  for (int n : {1, 2, 4}) {
    Mat out = loss_channel_apply(rho, loss, n);
    const double pn = std::pow(0.4, n);
    CHECK(std::abs(out(0, 0).real() - 0.5 * pn) < 1e-12);
    CHECK(std::abs(out(0, 1).real() - 0.5 * pn) < 1e-12);
    CHECK(std::abs(out(2, 2).real() - (1.0 - pn)) < 1e-12);
    CHECK(std::abs(out.trace().real() - 1.0) < 1e-12);
  }
}

TEST_CASE("loss_channel_apply: frequency-dependent mode") {
  Mat rho = Mat::Zero(3, 3);
  rho.topLeftCorner(2, 2).setConstant(0.5);
  LossSpec loss;
  loss.mode = LossSpec::Mode::frequency_dependent;
  loss.p_bin0 = 0.6;
  loss.p_bin1 = 0.2;
  loss.p_carrier = 0.5;
  Mat out = loss_channel_apply(rho, loss, 2);
  const double pf = 0.4, pt = 0.5;  // mean(bins) and carrier
  CHECK(std::abs(out(0, 0).real() - 0.5 * pf * pf) < 1e-12);
  CHECK(std::abs(out(1, 1).real() - 0.5 * pt * pt) < 1e-12);
  CHECK(std::abs(out(0, 1).real() - 0.5 * pf * pt) < 1e-12);
  CHECK(std::abs(out.trace().real() - 1.0) < 1e-12);
  CHECK_THROWS_AS(loss_channel_apply(Mat::Identity(4, 4), loss, 1), std::invalid_argument);
}

TEST_CASE("collective_unitary_apply preserves trace and spectrum") {
  QubitUnitary u{0.7, 1.3};
  CHECK((u.matrix() * u.matrix().adjoint() - Eigen::Matrix2cd::Identity()).norm() < 1e-14);
  std::mt19937 rng(31);
  std::normal_distribution<double> g;
  Mat a(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) a(i, j) = cplx(g(rng), g(rng));
  Mat rho = a * a.adjoint();
  rho /= rho.trace();
  Mat out = collective_unitary_apply(rho, u, 2);
  CHECK(std::abs(out.trace().real() - 1.0) < 1e-12);
  auto ev_in = eig_hermitian(rho).values;
  auto ev_out = eig_hermitian(out).values;
  CHECK((ev_in - ev_out).norm() < 1e-10);
  CHECK_THROWS_AS(collective_unitary_apply(rho, u, 3), std::invalid_argument);
}

TEST_CASE("amp_damp_logical_apply") {
  auto [e0, e1] = amp_damp_kraus(LogicalAmpDamp{0.7, 0.4});
  CHECK((e0.adjoint() * e0 + e1.adjoint() * e1 - Mat::Identity(3, 3)).norm() < 1e-14);

  Mat rho = Mat::Zero(3, 3);
  rho.topLeftCorner(2, 2).setConstant(0.5);
  Mat out = amp_damp_logical_apply(rho, LogicalAmpDamp{0.7, 0.4});
  CHECK(std::abs(out.trace().real() - 1.0) < 1e-12);
  CHECK(std::abs(out(1, 1).real() - 0.5 * 0.7) < 1e-12);
  CHECK(std::abs(out(0, 1) - 0.5 * std::sqrt(0.7) * std::exp(cplx(0.0, -0.4))) < 1e-12);
  CHECK(std::abs(out(2, 2).real() - 0.5 * 0.3) < 1e-12);

  // eta0 = 1 with a phase acts as a pure logical rotation.
  Mat id = amp_damp_logical_apply(rho, LogicalAmpDamp{1.0, 0.0});
  CHECK((id - rho).norm() < 1e-14);
}

TEST_CASE("alt_encoding_rates closed forms") {
  auto r = alt_encoding_rates(0.3, 0.0, 0.1, 0.2);
  const double s = std::sin(0.3);
  CHECK(r.l0 == doctest::Approx(s * s).epsilon(1e-14));
  CHECK(r.l1 == doctest::Approx(r.l0).epsilon(1e-15));
  CHECK(r.e_bit == 0.0);
  CHECK(r.e_ph == 0.0);

  auto q = alt_encoding_rates(0.4, 0.7, 0.3, 0.9);
  auto qs = alt_encoding_rates(0.7, 0.4, 0.9, 0.3);  // symmetric under swap
  CHECK(q.l0 == doctest::Approx(qs.l0).epsilon(1e-14));
  CHECK(q.e_bit == doctest::Approx(qs.e_bit).epsilon(1e-14));
  CHECK(q.e_ph == doctest::Approx(qs.e_ph).epsilon(1e-14));
  CHECK(q.e_bit <= q.l0 + 1e-15);
  // Phase error carries the full phase dependence; bit error carries none.
  auto qp = alt_encoding_rates(0.4, 0.7, 0.0, 0.0);
  CHECK(qp.e_ph == 0.0);
  CHECK(qp.e_bit == doctest::Approx(q.e_bit).epsilon(1e-14));
}

TEST_CASE("mixed channel validation") {
  MixedChannel m;
  m.weights = {0.5, 0.5};
  m.components.resize(2);
  CHECK_NOTHROW(validate(m));
  m.weights = {0.5, 0.6};
  CHECK_THROWS_AS(validate(m), std::invalid_argument);
  m.weights = {0.5};
  CHECK_THROWS_AS(validate(m), std::invalid_argument);
}
