#pragma once

// Signal-state ensembles, receiver POVMs, announcement labels and key maps
// for the seven protocols compared in the study: BB84, Wang's two-photon
// decoherence-free protocol, the Boileau 3- and 4-photon protocols, the Li
// dephasing/rotation pairs, and the two-photon frequency/time-bin protocol
// built on the ququart embedding.
//
// Announcement labels: 0 = Z-type, 1 = X-type, 2 = conclusive but
// non-logical ("rest"), 3 = no-click. Key maps list (atil, btil, bbar) -> r;
// unlisted tuples are discarded.

#include <qkd/ququart.hpp>

#include <map>
#include <string>

namespace qkd {

struct SignalState {
  int announcement = 0;
  int secret = 0;
  double probability = 0.25;
  Vec vector;  // on Bob's signal space (perp dimension appended)
};

struct PovmElement {
  int announcement = 0;
  int secret = 0;
  Mat op;
};

// Alice's measurement is a projective readout of her preparation register;
// each announcement group lists the register indices it spans (Boileau-3
// groups span two indices because of the purifying register).
struct AliceGroup {
  int announcement = 0;
  int secret = 0;
  std::vector<int> indices;
};

using KeyMap = std::map<std::tuple<int, int, int>, int>;

struct ProtocolSpec {
  std::string name;
  int dim_a = 4;
  int dim_b = 0;
  int photons = 1;  // per logical state, sets the loss scaling
  std::vector<SignalState> states;
  std::vector<AliceGroup> alice;
  std::vector<PovmElement> povm;
  KeyMap keymap;
  Vec psi_aa;  // source purification on A x B
};

enum class ProtocolName { bb84, wang, boileau4, boileau3, li_rot, li_deph, ours };

// ---------------------------------------------------------------------------
// Syndrome states of the concatenated repetition codes (SM recursion):
// the 4-qubit word has bits (x, x^s0, x^s1, x^s1^s0); the X-basis variant
// applies the Hadamard at the physical-qubit level.
// ---------------------------------------------------------------------------

enum class QubitBasis { Z, X };

namespace detail {
inline Vec qubit_word(const std::vector<int>& bits, QubitBasis basis) {
  const double r = 1.0 / std::sqrt(2.0);
  Vec v = Vec::Ones(1);
  for (int b : bits) {
    Vec e = Vec::Zero(2);
    if (basis == QubitBasis::Z)
      e(b) = 1.0;
    else {
      e(0) = r;
      e(1) = b == 0 ? r : -r;
    }
    Vec next(v.size() * 2);
    for (int i = 0; i < v.size(); ++i) next.segment(i * 2, 2) = v(i) * e;
    v = next;
  }
  return v;
}
}  // namespace detail

inline Vec syndrome_state(int x, int s, QubitBasis basis) {
  if ((x & ~1) || (s & ~3)) throw std::invalid_argument("syndrome_state: x is a bit, s 2 bits");
  const int s0 = s >> 1, s1 = s & 1;
  return detail::qubit_word({x, x ^ s0, x ^ s1, x ^ s1 ^ s0}, basis);
}

// |s>^(4) = (|0>_s + |1>_s)/sqrt(2) in the requested basis.
inline Vec syndrome_superposition(int s, QubitBasis basis) {
  return (syndrome_state(0, s, basis) + syndrome_state(1, s, basis)) / std::sqrt(2.0);
}

namespace detail {

inline Vec syndrome3(int x, int s, QubitBasis basis) {
  const int s0 = s >> 1, s1 = s & 1;
  return qubit_word({x, x ^ s0, x ^ s1}, basis);
}

inline Mat syndrome_projector(int s, QubitBasis basis, int nqubits) {
  Mat p;
  if (nqubits == 4) {
    const Vec a = syndrome_state(0, s, basis), b = syndrome_state(1, s, basis);
    p = a * a.adjoint() + b * b.adjoint();
  } else {
    const Vec a = syndrome3(0, s, basis), b = syndrome3(1, s, basis);
    p = a * a.adjoint() + b * b.adjoint();
  }
  return p;
}

inline Vec embed_signal(const Vec& v, int dim_b) {
  Vec w = Vec::Zero(dim_b);
  w.head(v.size()) = v;
  return w;
}

inline Mat pad_perp(const Mat& m) {
  Mat out = Mat::Zero(m.rows() + 1, m.cols() + 1);
  out.topLeftCorner(m.rows(), m.cols()) = m;
  return out;
}

// Shared scaffolding: index-aligned Alice groups, half-weighted state
// projectors for the Z/X announcements, then "rest" and perp.
inline void finish_projective(ProtocolSpec& spec, bool with_rest) {
  for (int i = 0; i < int(spec.states.size()); ++i) {
    const auto& s = spec.states[i];
    spec.alice.push_back({s.announcement, s.secret, {i}});
    spec.povm.push_back({s.announcement, s.secret, Mat(0.5 * s.vector * s.vector.adjoint())});
  }
  Mat sum = Mat::Zero(spec.dim_b, spec.dim_b);
  for (const auto& p : spec.povm) sum += p.op;
  Mat perp = Mat::Zero(spec.dim_b, spec.dim_b);
  perp(spec.dim_b - 1, spec.dim_b - 1) = 1.0;
  if (with_rest) spec.povm.push_back({2, 0, Mat(Mat::Identity(spec.dim_b, spec.dim_b) - sum - perp)});
  spec.povm.push_back({3, 0, perp});
}

inline KeyMap both_bases_keymap() {
  return {{{0, 0, 0}, 0}, {{0, 0, 1}, 1}, {{1, 1, 0}, 0}, {{1, 1, 1}, 1}};
}

inline Vec ket_bits(std::initializer_list<int> bits) {
  return qubit_word(std::vector<int>(bits), QubitBasis::Z);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Four-photon state families.
// ---------------------------------------------------------------------------

inline std::vector<SignalState> boileau4_states() {
  auto sZ = [](int s) { return syndrome_superposition(s, QubitBasis::Z); };
  const double r = 1.0 / std::sqrt(2.0);
  return {{0, 0, 0.25, Vec(r * (sZ(2) - sZ(3)))},
          {0, 1, 0.25, Vec(r * (sZ(1) - sZ(3)))},
          {1, 0, 0.25, Vec(r * (sZ(1) - sZ(3)))},
          {1, 1, 0.25, Vec(r * (sZ(2) - sZ(1)))}};
}

inline std::vector<SignalState> li_rot_states() {
  auto sZ = [](int s) { return syndrome_superposition(s, QubitBasis::Z); };
  const double r = 1.0 / std::sqrt(2.0);
  return {{0, 0, 0.25, Vec(r * (sZ(0) + sZ(1)))},
          {0, 1, 0.25, Vec(r * (sZ(2) - sZ(3)))},
          {1, 0, 0.25, Vec(r * (sZ(0) + sZ(2)))},
          {1, 1, 0.25, Vec(r * (sZ(1) - sZ(3)))}};
}

inline std::vector<SignalState> li_deph_states() {
  auto sX = [](int s) { return syndrome_superposition(s, QubitBasis::X); };
  const double r = 1.0 / std::sqrt(2.0);
  return {{0, 0, 0.25, Vec(r * (sX(0) - sX(1)))},
          {0, 1, 0.25, Vec(r * (sX(2) - sX(3)))},
          {1, 0, 0.25, Vec(r * (sX(0) - sX(2)))},
          {1, 1, 0.25, Vec(r * (sX(1) - sX(3)))}};
}

inline KeyMap keymap_boileau() {
  return {{{0, 0, 2}, 0}, {{0, 1, 2}, 0}, {{1, 0, 3}, 0}, {{1, 1, 3}, 0},
          {{0, 0, 1}, 1}, {{0, 1, 1}, 1}, {{1, 0, 2}, 1}, {{1, 1, 2}, 1}};
}

inline KeyMap keymap_li_deph() {
  return {{{0, 1, 0}, 0}, {{0, 1, 1}, 0}, {{1, 1, 0}, 0}, {{1, 1, 2}, 0},
          {{0, 1, 2}, 1}, {{0, 1, 3}, 1}, {{1, 1, 1}, 1}, {{1, 1, 3}, 1}};
}

inline KeyMap keymap_li_rot() {
  return {{{0, 0, 0}, 0}, {{0, 0, 1}, 0}, {{0, 1, 0}, 0}, {{0, 1, 1}, 0},
          {{1, 0, 0}, 0}, {{1, 0, 2}, 0}, {{1, 1, 0}, 0}, {{1, 1, 2}, 0},
          {{0, 0, 2}, 1}, {{0, 0, 3}, 1}, {{0, 1, 2}, 1}, {{0, 1, 3}, 1},
          {{1, 0, 1}, 1}, {{1, 0, 3}, 1}, {{1, 1, 1}, 1}, {{1, 1, 3}, 1}};
}

// ---------------------------------------------------------------------------
// Builders.
// ---------------------------------------------------------------------------

namespace detail {

inline ProtocolSpec bb84_spec() {
  ProtocolSpec s;
  s.name = "bb84";
  s.dim_a = 4;
  s.dim_b = 3;
  s.photons = 1;
  const double r = 1.0 / std::sqrt(2.0);
  Vec z0 = ket_bits({0}), z1 = ket_bits({1});
  std::vector<std::pair<std::pair<int, int>, Vec>> raw = {
      {{0, 0}, z0}, {{0, 1}, z1}, {{1, 0}, Vec(r * (z0 + z1))}, {{1, 1}, Vec(r * (z0 - z1))}};
  for (auto& [ab, v] : raw)
    s.states.push_back({ab.first, ab.second, 0.25, embed_signal(v, s.dim_b)});
  finish_projective(s, /*with_rest=*/false);
  s.keymap = both_bases_keymap();
  return s;
}

inline ProtocolSpec wang_spec() {
  ProtocolSpec s;
  s.name = "wang";
  s.dim_a = 4;
  s.dim_b = 5;
  s.photons = 2;
  const double r = 1.0 / std::sqrt(2.0);
  Vec s10 = ket_bits({1, 0}), s01 = ket_bits({0, 1});
  std::vector<std::pair<std::pair<int, int>, Vec>> raw = {
      {{0, 0}, s10}, {{0, 1}, s01}, {{1, 0}, Vec(r * (s01 + s10))}, {{1, 1}, Vec(r * (s01 - s10))}};
  for (auto& [ab, v] : raw)
    s.states.push_back({ab.first, ab.second, 0.25, embed_signal(v, s.dim_b)});
  for (int i = 0; i < 4; ++i) {
    const auto& st = s.states[i];
    s.alice.push_back({st.announcement, st.secret, {i}});
    s.povm.push_back({st.announcement, st.secret, Mat(0.5 * st.vector * st.vector.adjoint())});
  }
  Mat rest = Mat::Zero(5, 5);  // |00><00| + |11><11|: conclusive, non-logical
  rest(0, 0) = 1.0;
  rest(3, 3) = 1.0;
  s.povm.push_back({2, 0, rest});
  Mat perp = Mat::Zero(5, 5);
  perp(4, 4) = 1.0;
  s.povm.push_back({3, 0, perp});
  s.keymap = both_bases_keymap();
  return s;
}

inline ProtocolSpec fourphoton_spec(const std::string& name,
                                    const std::vector<SignalState>& sts, KeyMap km) {
  ProtocolSpec s;
  s.name = name;
  s.dim_a = 4;
  s.dim_b = 17;
  s.photons = 4;
  for (int i = 0; i < 4; ++i) {
    SignalState st = sts[i];
    st.vector = embed_signal(st.vector, s.dim_b);
    s.states.push_back(st);
    s.alice.push_back({st.announcement, st.secret, {i}});
  }
  for (int sy = 0; sy < 4; ++sy) {
    s.povm.push_back({0, sy, Mat(0.5 * pad_perp(syndrome_projector(sy, QubitBasis::Z, 4)))});
    s.povm.push_back({1, sy, Mat(0.5 * pad_perp(syndrome_projector(sy, QubitBasis::X, 4)))});
  }
  Mat sum = Mat::Zero(17, 17);
  for (const auto& p : s.povm) sum += p.op;
  Mat perp = Mat::Zero(17, 17);
  perp(16, 16) = 1.0;
  s.povm.push_back({2, 0, Mat(Mat::Identity(17, 17) - sum - perp)});
  s.povm.push_back({3, 0, perp});
  s.keymap = std::move(km);
  return s;
}

inline ProtocolSpec boileau3_spec() {
  // Alice register = preparation index x purifying fourth qubit; Bob keeps
  // the first three qubits plus the inconclusive dimension.
  ProtocolSpec s;
  s.name = "boileau3";
  s.dim_a = 8;
  s.dim_b = 9;
  s.photons = 3;
  const auto sts = boileau4_states();
  s.psi_aa = Vec::Zero(s.dim_a * s.dim_b);
  for (int i = 0; i < 4; ++i) {
    SignalState st = sts[i];
    s.alice.push_back({st.announcement, st.secret, {2 * i, 2 * i + 1}});
    // Split the 16-dim four-qubit state into (first three qubits, fourth).
    for (int q4 = 0; q4 < 2; ++q4) {
      Vec part = Vec::Zero(s.dim_b);
      for (int k = 0; k < 8; ++k) part(k) = st.vector(2 * k + q4);
      s.psi_aa.segment((2 * i + q4) * s.dim_b, s.dim_b) += 0.5 * part;
    }
    s.states.push_back(st);  // reference copy of the source four-qubit state
  }
  for (int sy = 0; sy < 4; ++sy) {
    s.povm.push_back({0, sy, Mat(0.5 * pad_perp(syndrome_projector(sy, QubitBasis::Z, 3)))});
    s.povm.push_back({1, sy, Mat(0.5 * pad_perp(syndrome_projector(sy, QubitBasis::X, 3)))});
  }
  Mat sum = Mat::Zero(9, 9);
  for (const auto& p : s.povm) sum += p.op;
  Mat perp = Mat::Zero(9, 9);
  perp(8, 8) = 1.0;
  s.povm.push_back({2, 0, Mat(Mat::Identity(9, 9) - sum - perp)});
  s.povm.push_back({3, 0, perp});
  s.keymap = keymap_boileau();
  return s;
}

inline ProtocolSpec ours_spec(const EncodingParams& e) {
  ProtocolSpec s;
  s.name = "ours";
  s.dim_a = 4;
  s.dim_b = kTwoPhotonDim;
  s.photons = 2;
  auto basis = build_basis(e);
  auto le = embed_logical(e, basis);
  std::vector<std::pair<std::pair<int, int>, Vec>> raw = {
      {{0, 0}, le.ket0L}, {{0, 1}, le.ket1L}, {{1, 0}, le.ketPlusL}, {{1, 1}, le.ketMinusL}};
  for (auto& [ab, v] : raw) s.states.push_back({ab.first, ab.second, 0.25, v});
  finish_projective(s, /*with_rest=*/true);
  s.keymap = both_bases_keymap();
  return s;
}

}  // namespace detail

inline ProtocolSpec make_protocol(ProtocolName name, const EncodingParams* enc = nullptr) {
  ProtocolSpec s;
  switch (name) {
    case ProtocolName::bb84: s = detail::bb84_spec(); break;
    case ProtocolName::wang: s = detail::wang_spec(); break;
    case ProtocolName::boileau4:
      s = detail::fourphoton_spec("boileau4", boileau4_states(), keymap_boileau());
      break;
    case ProtocolName::li_rot:
      s = detail::fourphoton_spec("li_rot", li_rot_states(), keymap_li_rot());
      break;
    case ProtocolName::li_deph:
      s = detail::fourphoton_spec("li_deph", li_deph_states(), keymap_li_deph());
      break;
    case ProtocolName::boileau3: s = detail::boileau3_spec(); break;
    case ProtocolName::ours:
      if (!enc) throw std::invalid_argument("make_protocol: encoding required for this protocol");
      s = detail::ours_spec(*enc);
      break;
  }
  return s;
}

inline ProtocolName protocol_from_string(const std::string& name) {
  if (name == "bb84") return ProtocolName::bb84;
  if (name == "wang") return ProtocolName::wang;
  if (name == "boileau4") return ProtocolName::boileau4;
  if (name == "boileau3") return ProtocolName::boileau3;
  if (name == "li_rot") return ProtocolName::li_rot;
  if (name == "li_deph") return ProtocolName::li_deph;
  if (name == "ours") return ProtocolName::ours;
  throw std::invalid_argument("unknown protocol: " + name);
}

// ---------------------------------------------------------------------------
// Source purification.
// ---------------------------------------------------------------------------

struct Purification {
  Mat rho_a;
  Vec psi_aa;
};

inline Purification purify_source(const ProtocolSpec& spec) {
  Purification p;
  if (spec.psi_aa.size() > 0) {
    p.psi_aa = spec.psi_aa;
  } else {
    p.psi_aa = Vec::Zero(spec.dim_a * spec.dim_b);
    for (int i = 0; i < int(spec.states.size()); ++i)
      p.psi_aa.segment(i * spec.dim_b, spec.dim_b) +=
          std::sqrt(spec.states[i].probability) * spec.states[i].vector;
  }
  p.rho_a = Mat::Zero(spec.dim_a, spec.dim_a);
  for (int i = 0; i < spec.dim_a; ++i)
    for (int j = 0; j < spec.dim_a; ++j)
      p.rho_a(i, j) = p.psi_aa.segment(j * spec.dim_b, spec.dim_b)
                          .dot(p.psi_aa.segment(i * spec.dim_b, spec.dim_b));
  return p;
}

}  // namespace qkd
