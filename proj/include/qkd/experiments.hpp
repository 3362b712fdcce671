#pragma once

// Named experiments behind the sweep driver. Each experiment expands its
// grid into independent tasks, dispatches them to a worker pool, and
// assembles records in grid order so repeated runs are byte-identical.

#include <qkd/cli.hpp>

#include <atomic>
#include <functional>
#include <thread>

namespace qkd::cli {

namespace detail {

inline void parallel_for(int n, const std::function<void(int)>& body) {
  const int hw = int(std::thread::hardware_concurrency());
  const int nw = std::max(1, std::min(hw > 0 ? hw : 1, n));
  if (nw == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < nw; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (auto& t : pool) t.join();
}

// Half-open angle grid over [0, 2pi).
inline double angle_at(int i, int points) { return 2.0 * pi * i / points; }

inline double to_ghz(double rad_per_ps) { return rad_per_ps / (2.0 * pi * 1e-3); }

// Encoding with the figure tie sigma_w = eps/6 unless the config pinned it.
inline EncodingParams tied_encoding(const ResolvedConfig& cfg, double eps) {
  EncodingParams e = cfg.encoding;
  if (!cfg.sigma_w_explicit) e.sigma_w = eps / 6.0;
  return e;
}

inline FbsPair encoding_pair(const EncodingParams& e, double eps, double theta, double phi) {
  FbsPair p;
  p.Omega = e.omega0;
  p.mu = e.omega1 - e.omega0;
  p.eps = eps;
  p.theta = theta;
  p.phi = phi;
  return p;
}

inline ChannelSpec protocol_channel(const std::string& name, const EncodingParams& e, double eps,
                                    double theta, double phi, double p_survival) {
  ChannelSpec c;
  if (name == "ours")
    c.kind = FbsChannel{{encoding_pair(e, eps, theta, phi)}, std::nullopt};
  else
    c.kind = QubitUnitary{theta, phi};
  c.loss.p = p_survival;
  return c;
}

inline ChannelSpec mixed_channel(const std::string& name, const EncodingParams& e, double eps,
                                 int points, double phi) {
  MixedChannel mix;
  for (int k = 0; k < points; ++k) {
    mix.components.push_back(protocol_channel(name, e, eps, angle_at(k, points), phi, 1.0));
    mix.weights.push_back(1.0 / points);
  }
  ChannelSpec c;
  c.kind = mix;
  return c;
}

struct TaskTable {
  ExperimentResult res;
  std::vector<std::function<std::vector<json>()>> tasks;

  void run() {
    res.rows.assign(tasks.size(), {});
    res.errors.assign(tasks.size(), "");
    parallel_for(int(tasks.size()), [&](int i) {
      try {
        res.rows[i] = tasks[i]();
      } catch (const std::exception& ex) {
        res.rows[i].assign(res.columns.size(), nullptr);
        res.errors[i] = ex.what();
      }
    });
  }
};

inline std::vector<json> rate_cells(const KeyRateResult& kr) {
  return {kr.rate, kr.lower_bound, kr.gap, kr.p_concl, kr.qber, kr.leak,
          double(kr.floored), double(kr.converged)};
}

inline const std::vector<std::string>& rate_columns() {
  static const std::vector<std::string> cols = {"rate", "lower_bound", "gap",     "p_concl",
                                                "qber", "leak",        "floored", "converged"};
  return cols;
}

}  // namespace detail

inline ExperimentResult run_experiment(const ResolvedConfig& cfg) {
  using namespace detail;
  TaskTable t;

  switch (cfg.experiment) {
    case Experiment::fbs_fidelity:
    case Experiment::phase_surface:
    case Experiment::bit_error_surface: {
      t.res.columns = {"eps_ghz", "theta", "phi", "fidelity_tt", "phase_tt", "fidelity_tf"};
      t.res.plot = {true, "theta", "phi",
                    cfg.experiment == Experiment::phase_surface       ? "phase_tt"
                    : cfg.experiment == Experiment::bit_error_surface ? "fidelity_tf"
                                                                      : "fidelity_tt",
                    {"eps_ghz"}};
      for (double eps : cfg.eps_list)
        for (int i = 0; i < cfg.theta_points; ++i)
          for (int j = 0; j < cfg.phi_points; ++j)
            t.tasks.push_back([=, &cfg]() -> std::vector<json> {
              const EncodingParams e = tied_encoding(cfg, eps);
              const double th = angle_at(i, cfg.theta_points), ph = angle_at(j, cfg.phi_points);
              auto eff = fbs_logical_effect(e, FbsChannel{{encoding_pair(e, eps, th, ph)}, {}});
              return {to_ghz(eps), th, ph, eff.fidelity_tt, eff.phase_tt, eff.fidelity_tf};
            });
      break;
    }

    case Experiment::fbs_keyrate: {
      t.res.columns = {"protocol", "theta"};
      for (const auto& c : rate_columns()) t.res.columns.push_back(c);
      t.res.plot = {false, "theta", "rate", "", {"protocol"}};
      for (const auto& name : cfg.protocols)
        for (int i = 0; i < cfg.theta_points; ++i)
          t.tasks.push_back([=, &cfg]() -> std::vector<json> {
            const EncodingParams e = tied_encoding(cfg, cfg.eps);
            const double th = angle_at(i, cfg.theta_points);
            auto spec = make_protocol(protocol_from_string(name), &e);
            auto kr = key_rate(spec, protocol_channel(name, e, cfg.eps, th, cfg.phi_fixed, 1.0),
                               cfg.mode, &e);
            std::vector<json> row = {name, th};
            for (auto& c : rate_cells(kr)) row.push_back(std::move(c));
            return row;
          });
      break;
    }

    case Experiment::loss_keyrate: {
      t.res.columns = {"protocol", "loss_db", "eta"};
      for (const auto& c : rate_columns()) t.res.columns.push_back(c);
      t.res.plot = {false, "loss_db", "rate", "", {"protocol"}, true};
      const int npts = int(std::floor((cfg.db_max - cfg.db_min) / cfg.db_step + 1e-9)) + 1;
      for (const auto& name : cfg.protocols)
        for (int i = 0; i < npts; ++i)
          t.tasks.push_back([=, &cfg]() -> std::vector<json> {
            const double db = cfg.db_min + i * cfg.db_step;
            const double eta = std::pow(10.0, -db / 10.0);
            const EncodingParams e = tied_encoding(cfg, 6.0 * cfg.encoding.sigma_w);
            auto spec = make_protocol(protocol_from_string(name), &e);
            auto kr = key_rate(
                spec, protocol_channel(name, e, 6.0 * e.sigma_w, cfg.theta_fixed, 0.0, eta),
                KeyRateMode::full_tomography, &e);
            std::vector<json> row = {name, db, eta};
            for (auto& c : rate_cells(kr)) row.push_back(std::move(c));
            return row;
          });
      break;
    }

    case Experiment::mixed_theta: {
      t.res.columns = {"protocol", "eps_ghz"};
      for (const auto& c : rate_columns()) t.res.columns.push_back(c);
      t.res.plot = {false, "eps_ghz", "rate", "", {"protocol"}};
      for (const auto& name : cfg.protocols)
        for (double eps : cfg.eps_list)
          t.tasks.push_back([=, &cfg]() -> std::vector<json> {
            const EncodingParams e = tied_encoding(cfg, eps);
            auto spec = make_protocol(protocol_from_string(name), &e);
            auto kr = key_rate(spec, mixed_channel(name, e, eps, cfg.theta_points, 0.0), cfg.mode,
                               &e);
            std::vector<json> row = {name, to_ghz(eps)};
            for (auto& c : rate_cells(kr)) row.push_back(std::move(c));
            return row;
          });
      break;
    }

    case Experiment::dispersion_keyrate: {
      t.res.columns = {"alpha", "order"};
      for (const auto& c : rate_columns()) t.res.columns.push_back(c);
      t.res.plot = {false, "alpha", "rate", "", {"order"}};
      for (int i = 0; i < cfg.alpha_points; ++i)
        t.tasks.push_back([=, &cfg]() -> std::vector<json> {
          const double a = cfg.alpha_points == 1
                               ? cfg.alpha_min
                               : cfg.alpha_min + (cfg.alpha_max - cfg.alpha_min) * i /
                                                     (cfg.alpha_points - 1);
          const EncodingParams& e = cfg.encoding;
          auto spec = make_protocol(ProtocolName::ours, &e);
          ChannelSpec c;
          c.kind = DispersionChannel{cfg.disp_order, a, 0.0};
          auto kr = key_rate(spec, c, cfg.mode, &e);
          std::vector<json> row = {a, double(cfg.disp_order)};
          for (auto& cell : rate_cells(kr)) row.push_back(std::move(cell));
          return row;
        });
      break;
    }

    case Experiment::optimize_encoding: {
      t.res.columns = {"sigma_t_ps", "eps_ghz", "theta", "fidelity_tt"};
      t.res.plot = {false, "theta", "fidelity_tt", "", {"sigma_t_ps", "eps_ghz"}};
      for (double st : cfg.sigma_t_list)
        for (double eps : cfg.eps_list)
          for (int i = 0; i < cfg.theta_points; ++i)
            t.tasks.push_back([=, &cfg]() -> std::vector<json> {
              EncodingParams e = tied_encoding(cfg, eps);
              e.sigma_t = st;
              const double th = angle_at(i, cfg.theta_points);
              auto eff = fbs_logical_effect(e, FbsChannel{{encoding_pair(e, eps, th, 0.0)}, {}});
              return {st, to_ghz(eps), th, eff.fidelity_tt};
            });
      break;
    }

    case Experiment::multi_fbs: {
      t.res.columns = {"npairs", "theta", "phi", "fidelity_tt", "fidelity_tf"};
      t.res.plot = {true, "theta", "phi", "fidelity_tt", {"npairs"}};
      for (int np : cfg.npairs_list)
        for (int i = 0; i < cfg.theta_points; ++i)
          for (int j = 0; j < cfg.phi_points; ++j)
            t.tasks.push_back([=, &cfg]() -> std::vector<json> {
              const EncodingParams e = tied_encoding(cfg, cfg.eps);
              const double th = angle_at(i, cfg.theta_points), ph = angle_at(j, cfg.phi_points);
              const double mu = e.omega1 - e.omega0;
              std::vector<FbsPair> pairs = {encoding_pair(e, cfg.eps, th, ph)};
              // extra scatterers on bins outside the encoded pair
              if (np >= 2)
                pairs.push_back({e.omega0 - thz_to_angular(0.026), mu, cfg.eps, cfg.extra_theta,
                                 cfg.extra_phi});
              if (np >= 3)
                pairs.push_back({e.omega0 + thz_to_angular(0.026), mu, cfg.eps, cfg.extra_theta,
                                 cfg.extra_phi});
              auto eff = fbs_logical_effect(e, FbsChannel{pairs, {}});
              return {double(np), th, ph, eff.fidelity_tt, eff.fidelity_tf};
            });
      break;
    }

    case Experiment::deviations: {
      t.res.columns = {"param", "delta", "theta", "phi", "fidelity_tt", "fidelity_tf"};
      t.res.plot = {true, "theta", "phi", "fidelity_tt", {"param", "delta"}};
      struct Sweep {
        const char* name;
        const std::vector<double>* values;
      };
      const std::vector<Sweep> sweeps = {{"eps_frac", &cfg.delta_eps_frac},
                                         {"mu_frac", &cfg.delta_mu_frac},
                                         {"omega", &cfg.delta_omega},
                                         {"theta", &cfg.delta_theta},
                                         {"phi", &cfg.delta_phi}};
      for (const auto& sw : sweeps)
        for (double dv : *sw.values)
          for (int i = 0; i < cfg.theta_points; ++i)
            for (int j = 0; j < cfg.phi_points; ++j) {
              const std::string pname = sw.name;
              t.tasks.push_back([=, &cfg]() -> std::vector<json> {
                const EncodingParams e = tied_encoding(cfg, cfg.eps);
                const double th = angle_at(i, cfg.theta_points), ph = angle_at(j, cfg.phi_points);
                FbsPair base = encoding_pair(e, cfg.eps, th, ph);
                FbsDelta d;
                if (pname == "eps_frac") d.deps = dv * base.eps;
                if (pname == "mu_frac") d.dmu = dv * base.mu;
                if (pname == "omega") d.dOmega = dv;
                if (pname == "theta") d.dtheta = dv;
                if (pname == "phi") d.dphi = dv;
                auto eff = fbs_logical_effect(e, FbsChannel{{base}, d});
                const double shown = pname == "omega" ? to_ghz(dv) : dv;
                return {pname, shown, th, ph, eff.fidelity_tt, eff.fidelity_tf};
              });
            }
      break;
    }

    case Experiment::alt_encoding: {
      t.res.columns = {"theta", "phi", "l0", "l1", "e_bit", "e_ph"};
      t.res.plot = {true, "theta", "phi", "e_bit", {}};
      for (int i = 0; i < cfg.theta_points; ++i)
        for (int j = 0; j < cfg.phi_points; ++j)
          t.tasks.push_back([=, &cfg]() -> std::vector<json> {
            const double th = angle_at(i, cfg.theta_points), ph = angle_at(j, cfg.phi_points);
            auto r = alt_encoding_rates(th, th, ph, ph);
            return {th, ph, r.l0, r.l1, r.e_bit, r.e_ph};
          });
      break;
    }
  }

  t.run();
  return t.res;
}

// Runs the experiment and writes <name>.csv/.jsonl/_plot.py/_config.json
// under the configured output directory. Returns the number of failed
// records (nonzero signals solver trouble to the driver).
inline int run_and_write(const ResolvedConfig& cfg) {
  ExperimentResult res = run_experiment(cfg);
  const std::string name = to_string(cfg.experiment);
  std::filesystem::create_directories(cfg.output_dir);
  const std::string base = cfg.output_dir + "/" + name;
  const std::string hash = config_hash(cfg.merged);
  write_csv(base + ".csv", res, hash);
  write_jsonl(base + ".jsonl", res, hash);
  write_plot_script(base + "_plot.py", name + ".csv", res, name);
  write_echo(base + "_config.json", cfg);
  int failures = 0;
  for (const auto& err : res.errors)
    if (!err.empty()) ++failures;
  return failures;
}

}  // namespace qkd::cli
