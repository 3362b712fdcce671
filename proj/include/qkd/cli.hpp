#pragma once

// Configuration and artifact plumbing for the sweep driver: unit-suffixed
// scalar parsing, strict config ingestion with per-experiment defaults,
// deterministic CSV (RFC 4180) and JSON-lines emission, generated plot
// scripts, and the resolved-config echo that makes every dataset rerunnable.

#include <qkd/keyrate.hpp>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace qkd::cli {

using nlohmann::json;

inline constexpr const char* kCodeVersion = "0.3.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Unit-suffixed scalars. Dimensional quantities must carry a unit; bare
// numbers are rejected with the offending field path.
// ---------------------------------------------------------------------------

enum class Unit { frequency, time, angle, transmissivity, dispersion1, dispersion2 };

namespace detail {

inline std::pair<double, std::string> split_quantity(const std::string& s,
                                                     const std::string& path) {
  std::istringstream in(s);
  double v = 0.0;
  std::string unit;
  if (!(in >> v)) throw ConfigError(path + ": expected \"<number> <unit>\", got \"" + s + "\"");
  in >> unit;
  std::string rest;
  if (in >> rest) throw ConfigError(path + ": trailing tokens in \"" + s + "\"");
  if (unit.empty()) throw ConfigError(path + ": unit suffix required on \"" + s + "\"");
  return {v, unit};
}

}  // namespace detail

// Parse a unit-suffixed scalar into base units: rad/ps for frequencies,
// ps for times, rad for angles, survival probability for losses, ps^n for
// dispersion coefficients.
inline double parse_quantity(const json& j, Unit kind, const std::string& path) {
  if (j.is_number()) throw ConfigError(path + ": unit suffix required (got a bare number)");
  if (!j.is_string()) throw ConfigError(path + ": expected a unit-suffixed string");
  auto [v, unit] = detail::split_quantity(j.get<std::string>(), path);
  switch (kind) {
    case Unit::frequency:
      if (unit == "THz") return thz_to_angular(v);
      if (unit == "GHz") return ghz_to_angular(v);
      if (unit == "rad/ps") return v;
      throw ConfigError(path + ": frequency unit must be THz, GHz, or rad/ps");
    case Unit::time:
      if (unit == "ps") return v;
      throw ConfigError(path + ": time unit must be ps");
    case Unit::angle:
      if (unit == "rad") return v;
      if (unit == "pi") return v * pi;
      throw ConfigError(path + ": angle unit must be rad or pi");
    case Unit::transmissivity:
      if (unit == "dB") return std::pow(10.0, -v / 10.0);
      throw ConfigError(path + ": loss unit must be dB");
    case Unit::dispersion1:
      if (unit == "ps") return v;
      throw ConfigError(path + ": first-order dispersion unit must be ps");
    case Unit::dispersion2:
      if (unit == "ps2" || unit == "ps^2") return v;
      throw ConfigError(path + ": second-order dispersion unit must be ps2");
  }
  throw ConfigError(path + ": unhandled unit kind");
}

inline std::vector<double> parse_quantity_list(const json& j, Unit kind, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected a list");
  std::vector<double> out;
  for (size_t i = 0; i < j.size(); ++i)
    out.push_back(parse_quantity(j[i], kind, path + "/" + std::to_string(i)));
  return out;
}

// ---------------------------------------------------------------------------
// Experiments and their defaults.
// ---------------------------------------------------------------------------

enum class Experiment {
  fbs_fidelity,
  fbs_keyrate,
  loss_keyrate,
  mixed_theta,
  dispersion_keyrate,
  optimize_encoding,
  phase_surface,
  bit_error_surface,
  multi_fbs,
  deviations,
  alt_encoding,
};

inline const std::vector<std::pair<std::string, Experiment>>& experiment_names() {
  static const std::vector<std::pair<std::string, Experiment>> names = {
      {"fbs_fidelity", Experiment::fbs_fidelity},
      {"fbs_keyrate", Experiment::fbs_keyrate},
      {"loss_keyrate", Experiment::loss_keyrate},
      {"mixed_theta", Experiment::mixed_theta},
      {"dispersion_keyrate", Experiment::dispersion_keyrate},
      {"optimize_encoding", Experiment::optimize_encoding},
      {"phase_surface", Experiment::phase_surface},
      {"bit_error_surface", Experiment::bit_error_surface},
      {"multi_fbs", Experiment::multi_fbs},
      {"deviations", Experiment::deviations},
      {"alt_encoding", Experiment::alt_encoding},
  };
  return names;
}

// Human-readable registry used by the list-experiments verb (experiments.cpp).
struct ExperimentInfo {
  std::string name;
  std::string summary;
};
const std::vector<ExperimentInfo>& experiment_catalog();

inline Experiment experiment_from_string(const std::string& s) {
  for (const auto& [name, e] : experiment_names())
    if (name == s) return e;
  throw ConfigError("/experiment: unknown experiment \"" + s + "\"");
}

inline std::string to_string(Experiment e) {
  for (const auto& [name, ex] : experiment_names())
    if (ex == e) return name;
  return "?";
}

// Default scatterer-free encoding shared by the named figures.
inline json default_encoding() {
  return json{{"omega0", "0 THz"},   {"omega1", "0.019 THz"}, {"sigma_w", "1.1 GHz"},
              {"tau0", "0 ps"},      {"tau1", "220 ps"},      {"sigma_t", "17 ps"},
              {"carrier", "195.860 THz"}, {"shape", "gaussian"}};
}

// Per-experiment defaults; user configs are merged into these strictly
// (any key absent from the defaults is rejected).
inline json default_config(Experiment e) {
  json c{{"experiment", to_string(e)},
         {"output_dir", std::string("out/") + to_string(e)},
         {"seed", 0},
         {"encoding", default_encoding()}};
  switch (e) {
    case Experiment::fbs_fidelity:
    case Experiment::phase_surface:
    case Experiment::bit_error_surface:
      c["eps_list"] = {"6.6 GHz", "3.0 GHz", "0.6 GHz"};
      c["theta_points"] = 81;
      c["phi_points"] = 81;
      break;
    case Experiment::fbs_keyrate:
      c["protocols"] = {"bb84", "wang", "boileau4", "ours"};
      c["eps"] = "0.6 GHz";
      c["phi"] = "0 rad";
      c["theta_points"] = 81;
      c["mode"] = "full_tomography";
      break;
    case Experiment::loss_keyrate:
      c["protocols"] = {"bb84", "wang", "ours", "boileau3", "boileau4", "li_rot", "li_deph"};
      c["theta"] = "0 rad";
      c["db_min"] = 0.0;
      c["db_max"] = 60.0;
      c["db_step"] = 1.0;
      break;
    case Experiment::mixed_theta:
      c["protocols"] = {"ours", "bb84", "wang"};
      c["eps_list"] = {"6.6 GHz", "3.0 GHz", "0.6 GHz"};
      c["theta_points"] = 64;
      c["mode"] = "full_tomography";
      break;
    case Experiment::dispersion_keyrate:
      c["order"] = 2;
      c["alpha_min"] = "0 ps2";
      c["alpha_max"] = "1800 ps2";  // four oscillation periods of 2pi/mu^2
      c["alpha_points"] = 181;
      c["encoding"]["sigma_t"] = "30 ps";
      c["mode"] = "full_tomography";
      break;
    case Experiment::optimize_encoding:
      c["sigma_t_list"] = {"10 ps", "20 ps", "30 ps", "40 ps"};
      c["eps_list"] = {"0.6 GHz", "3.0 GHz", "6.6 GHz"};
      c["theta_points"] = 81;
      break;
    case Experiment::multi_fbs:
      c["npairs_list"] = {1, 2, 3};
      c["extra_theta"] = "1.5707963267948966 rad";
      c["extra_phi"] = "1.5707963267948966 rad";
      c["eps"] = "3.0 GHz";
      c["theta_points"] = 81;
      c["phi_points"] = 81;
      break;
    case Experiment::deviations:
      c["eps"] = "3.0 GHz";
      c["delta_eps_frac"] = {0.0, 0.1, 0.2};
      c["delta_mu_frac"] = {0.0, 0.05, 0.1};
      c["delta_omega"] = {"0 GHz", "0.3 GHz", "0.6 GHz"};
      c["delta_theta"] = {"0 rad", "0.1 rad", "0.2 rad"};
      c["delta_phi"] = {"0 rad", "0.1 rad", "0.2 rad"};
      c["theta_points"] = 81;
      c["phi_points"] = 81;
      break;
    case Experiment::alt_encoding:
      c["theta_points"] = 81;
      c["phi_points"] = 81;
      break;
  }
  return c;
}

namespace detail {

inline void strict_merge(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError(path + ": expected an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string sub = path + "/" + it.key();
    if (!base.contains(it.key())) throw ConfigError(sub + ": unknown key");
    if (base[it.key()].is_object() && !it.value().is_object())
      throw ConfigError(sub + ": expected an object");
    if (base[it.key()].is_object())
      strict_merge(base[it.key()], it.value(), sub);
    else
      base[it.key()] = it.value();
  }
}

inline int parse_points(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<int>() <= 0)
    throw ConfigError(path + ": grid size must be a positive integer");
  return j.get<int>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Resolved configuration in base units.
// ---------------------------------------------------------------------------

struct ResolvedConfig {
  Experiment experiment = Experiment::fbs_fidelity;
  json merged;  // defaults overlaid with the user config (unit strings intact)
  std::string output_dir;
  long seed = 0;

  EncodingParams encoding;
  bool sigma_w_explicit = false;  // user pinned sigma_w; otherwise eps/6 ties apply

  std::vector<double> eps_list;  // [rad/ps]
  double eps = 0.0;
  std::vector<std::string> protocols;
  int theta_points = 0, phi_points = 0;
  double phi_fixed = 0.0, theta_fixed = 0.0;
  KeyRateMode mode = KeyRateMode::full_tomography;

  double db_min = 0.0, db_max = 0.0, db_step = 1.0;

  int disp_order = 2;
  double alpha_min = 0.0, alpha_max = 0.0;
  int alpha_points = 0;

  std::vector<double> sigma_t_list;
  std::vector<int> npairs_list;
  double extra_theta = 0.0, extra_phi = 0.0;
  std::vector<double> delta_eps_frac, delta_mu_frac, delta_omega, delta_theta, delta_phi;
};

inline EncodingParams parse_encoding(const json& j, const std::string& path) {
  EncodingParams e;
  e.omega0 = parse_quantity(j.at("omega0"), Unit::frequency, path + "/omega0");
  e.omega1 = parse_quantity(j.at("omega1"), Unit::frequency, path + "/omega1");
  e.sigma_w = parse_quantity(j.at("sigma_w"), Unit::frequency, path + "/sigma_w");
  e.tau0 = parse_quantity(j.at("tau0"), Unit::time, path + "/tau0");
  e.tau1 = parse_quantity(j.at("tau1"), Unit::time, path + "/tau1");
  e.sigma_t = parse_quantity(j.at("sigma_t"), Unit::time, path + "/sigma_t");
  e.carrier = parse_quantity(j.at("carrier"), Unit::frequency, path + "/carrier");
  const std::string shape = j.at("shape").get<std::string>();
  if (shape == "gaussian")
    e.shape = AmplitudeShape::Gaussian;
  else if (shape == "lorentzian")
    e.shape = AmplitudeShape::Lorentzian;
  else
    throw ConfigError(path + "/shape: must be gaussian or lorentzian");
  return e;
}

inline ResolvedConfig resolve_config(const json& user) {
  if (!user.is_object()) throw ConfigError("config root must be an object");
  if (!user.contains("experiment") || !user["experiment"].is_string())
    throw ConfigError("/experiment: required string field");
  const Experiment e = experiment_from_string(user["experiment"].get<std::string>());

  json merged = default_config(e);
  detail::strict_merge(merged, user, "");

  ResolvedConfig r;
  r.experiment = e;
  r.merged = merged;
  r.output_dir = merged.at("output_dir").get<std::string>();
  r.seed = merged.at("seed").get<long>();
  r.encoding = parse_encoding(merged.at("encoding"), "/encoding");
  r.sigma_w_explicit = user.contains("encoding") && user["encoding"].contains("sigma_w");

  auto pts = [&](const char* key) { return detail::parse_points(merged.at(key), std::string("/") + key); };
  auto qty = [&](const char* key, Unit u) {
    return parse_quantity(merged.at(key), u, std::string("/") + key);
  };

  switch (e) {
    case Experiment::fbs_fidelity:
    case Experiment::phase_surface:
    case Experiment::bit_error_surface:
      r.eps_list = parse_quantity_list(merged.at("eps_list"), Unit::frequency, "/eps_list");
      r.theta_points = pts("theta_points");
      r.phi_points = pts("phi_points");
      break;
    case Experiment::fbs_keyrate:
      r.protocols = merged.at("protocols").get<std::vector<std::string>>();
      r.eps = qty("eps", Unit::frequency);
      r.phi_fixed = qty("phi", Unit::angle);
      r.theta_points = pts("theta_points");
      r.mode = merged.at("mode").get<std::string>() == "frank_wolfe" ? KeyRateMode::frank_wolfe
                                                                     : KeyRateMode::full_tomography;
      break;
    case Experiment::loss_keyrate:
      r.protocols = merged.at("protocols").get<std::vector<std::string>>();
      r.theta_fixed = qty("theta", Unit::angle);
      r.db_min = merged.at("db_min").get<double>();
      r.db_max = merged.at("db_max").get<double>();
      r.db_step = merged.at("db_step").get<double>();
      if (!(r.db_step > 0.0) || r.db_max < r.db_min)
        throw ConfigError("/db_step: loss grid must be increasing");
      break;
    case Experiment::mixed_theta:
      r.protocols = merged.at("protocols").get<std::vector<std::string>>();
      r.eps_list = parse_quantity_list(merged.at("eps_list"), Unit::frequency, "/eps_list");
      r.theta_points = pts("theta_points");
      r.mode = merged.at("mode").get<std::string>() == "frank_wolfe" ? KeyRateMode::frank_wolfe
                                                                     : KeyRateMode::full_tomography;
      break;
    case Experiment::dispersion_keyrate:
      r.disp_order = merged.at("order").get<int>();
      if (r.disp_order != 1 && r.disp_order != 2)
        throw ConfigError("/order: dispersion order must be 1 or 2");
      {
        const Unit du = r.disp_order == 1 ? Unit::dispersion1 : Unit::dispersion2;
        r.alpha_min = qty("alpha_min", du);
        r.alpha_max = qty("alpha_max", du);
      }
      r.alpha_points = pts("alpha_points");
      r.mode = merged.at("mode").get<std::string>() == "frank_wolfe" ? KeyRateMode::frank_wolfe
                                                                     : KeyRateMode::full_tomography;
      break;
    case Experiment::optimize_encoding:
      r.sigma_t_list = parse_quantity_list(merged.at("sigma_t_list"), Unit::time, "/sigma_t_list");
      r.eps_list = parse_quantity_list(merged.at("eps_list"), Unit::frequency, "/eps_list");
      r.theta_points = pts("theta_points");
      break;
    case Experiment::multi_fbs:
      r.npairs_list = merged.at("npairs_list").get<std::vector<int>>();
      for (int n : r.npairs_list)
        if (n < 1 || n > 3) throw ConfigError("/npairs_list: pair counts must be 1..3");
      r.extra_theta = qty("extra_theta", Unit::angle);
      r.extra_phi = qty("extra_phi", Unit::angle);
      r.eps = qty("eps", Unit::frequency);
      r.theta_points = pts("theta_points");
      r.phi_points = pts("phi_points");
      break;
    case Experiment::deviations:
      r.eps = qty("eps", Unit::frequency);
      r.delta_eps_frac = merged.at("delta_eps_frac").get<std::vector<double>>();
      r.delta_mu_frac = merged.at("delta_mu_frac").get<std::vector<double>>();
      r.delta_omega = parse_quantity_list(merged.at("delta_omega"), Unit::frequency, "/delta_omega");
      r.delta_theta = parse_quantity_list(merged.at("delta_theta"), Unit::angle, "/delta_theta");
      r.delta_phi = parse_quantity_list(merged.at("delta_phi"), Unit::angle, "/delta_phi");
      r.theta_points = pts("theta_points");
      r.phi_points = pts("phi_points");
      break;
    case Experiment::alt_encoding:
      r.theta_points = pts("theta_points");
      r.phi_points = pts("phi_points");
      break;
  }

  validate(r.encoding);
  for (const auto& p : r.protocols) protocol_from_string(p);  // referenced protocols exist
  return r;
}

inline ResolvedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("config parse error: ") + ex.what());
  }
  return resolve_config(j);
}

// ---------------------------------------------------------------------------
// Records and emission.
// ---------------------------------------------------------------------------

struct PlotSpec {
  bool surface = false;          // heatmap over (x, y) per series, else line plot
  std::string x, y, z;           // z used for surfaces
  std::vector<std::string> series;
  bool logy = false;
};

struct ExperimentResult {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;  // cells are numbers, strings, or null; parallel to errors
  std::vector<std::string> errors;
  PlotSpec plot;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

// 64-bit FNV-1a over the canonical dump of the merged config.
inline std::string config_hash(const json& merged) {
  const std::string dump = merged.dump();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline void write_csv(const std::string& path, const ExperimentResult& res, const std::string& hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (size_t i = 0; i < res.columns.size(); ++i) out << (i ? "," : "") << csv_escape(res.columns[i]);
  out << ",error,config_hash,code_version\r\n";
  for (size_t r = 0; r < res.rows.size(); ++r) {
    for (size_t i = 0; i < res.rows[r].size(); ++i) {
      if (i) out << ",";
      const json& v = res.rows[r][i];
      if (v.is_number()) {
        const double x = v.get<double>();
        out << (std::isfinite(x) ? format_double(x) : "");  // NaNs never emitted as values
      } else if (v.is_string()) {
        out << csv_escape(v.get<std::string>());
      }
    }
    out << "," << csv_escape(res.errors[r]) << "," << hash << "," << kCodeVersion << "\r\n";
  }
}

inline void write_jsonl(const std::string& path, const ExperimentResult& res, const std::string& hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (size_t r = 0; r < res.rows.size(); ++r) {
    json rec;
    for (size_t i = 0; i < res.rows[r].size(); ++i) {
      const json& v = res.rows[r][i];
      if (v.is_number() && !std::isfinite(v.get<double>()))
        rec[res.columns[i]] = nullptr;
      else
        rec[res.columns[i]] = v;
    }
    if (!res.errors[r].empty()) rec["error"] = res.errors[r];
    rec["config_hash"] = hash;
    rec["code_version"] = kCodeVersion;
    out << rec.dump() << "\n";
  }
}

inline void write_plot_script(const std::string& path, const std::string& csv_name,
                              const ExperimentResult& res, const std::string& title) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const auto& p = res.plot;
  out << "#!/usr/bin/env python3\n"
      << "# regenerates the figure axes and series from the emitted CSV\n"
      << "import csv, collections\n"
      << "import matplotlib\n"
      << "matplotlib.use('Agg')\n"
      << "import matplotlib.pyplot as plt\n\n"
      << "rows = []\n"
      << "with open('" << csv_name << "', newline='') as f:\n"
      << "    for rec in csv.DictReader(f):\n"
      << "        if rec.get('error'):\n"
      << "            continue\n"
      << "        rows.append(rec)\n\n"
      << "series_cols = [";
  for (size_t i = 0; i < p.series.size(); ++i) out << (i ? ", " : "") << "'" << p.series[i] << "'";
  out << "]\n"
      << "groups = collections.defaultdict(list)\n"
      << "for rec in rows:\n"
      << "    groups[tuple(rec[c] for c in series_cols)].append(rec)\n\n";
  if (p.surface) {
    out << "n = len(groups)\n"
        << "fig, axes = plt.subplots(1, max(n, 1), figsize=(5 * max(n, 1), 4), squeeze=False)\n"
        << "for ax, (key, recs) in zip(axes[0], sorted(groups.items())):\n"
        << "    xs = sorted({float(r['" << p.x << "']) for r in recs})\n"
        << "    ys = sorted({float(r['" << p.y << "']) for r in recs})\n"
        << "    zi = {(float(r['" << p.x << "']), float(r['" << p.y << "'])): float(r['" << p.z
        << "']) for r in recs}\n"
        << "    zz = [[zi.get((x, y), float('nan')) for x in xs] for y in ys]\n"
        << "    im = ax.pcolormesh(xs, ys, zz, shading='nearest')\n"
        << "    ax.set_xlabel('" << p.x << "'); ax.set_ylabel('" << p.y << "')\n"
        << "    ax.set_title(', '.join(f'{c}={v}' for c, v in zip(series_cols, key)))\n"
        << "    fig.colorbar(im, ax=ax, label='" << p.z << "')\n";
  } else {
    out << "fig, ax = plt.subplots(figsize=(6, 4))\n"
        << "for key, recs in sorted(groups.items()):\n"
        << "    recs.sort(key=lambda r: float(r['" << p.x << "']))\n"
        << "    ax.plot([float(r['" << p.x << "']) for r in recs], [float(r['" << p.y
        << "']) for r in recs],\n"
        << "            label=', '.join(f'{c}={v}' for c, v in zip(series_cols, key)) or None)\n"
        << "ax.set_xlabel('" << p.x << "'); ax.set_ylabel('" << p.y << "')\n";
    if (p.logy) out << "ax.set_yscale('log')\n";
    out << "if series_cols:\n    ax.legend()\n";
  }
  out << "fig.suptitle('" << title << "')\n"
      << "fig.tight_layout()\n"
      << "fig.savefig('" << title << ".png', dpi=150)\n"
      << "print('wrote " << title << ".png')\n";
}

// Resolved-config echo: the merged config plus base-unit values and
// provenance, sufficient to rerun the dataset.
inline void write_echo(const std::string& path, const ResolvedConfig& cfg) {
  json echo = cfg.merged;
  echo["resolved"] = {
      {"omega0_rad_per_ps", cfg.encoding.omega0},   {"omega1_rad_per_ps", cfg.encoding.omega1},
      {"sigma_w_rad_per_ps", cfg.encoding.sigma_w}, {"tau0_ps", cfg.encoding.tau0},
      {"tau1_ps", cfg.encoding.tau1},               {"sigma_t_ps", cfg.encoding.sigma_t},
      {"carrier_rad_per_ps", cfg.encoding.carrier},
  };
  echo["config_hash"] = config_hash(cfg.merged);
  echo["code_version"] = kCodeVersion;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << echo.dump(2) << "\n";
}

}  // namespace qkd::cli
