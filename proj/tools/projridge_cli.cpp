// Command-line front end: simulate, fit, tune, ratecheck, report.
// Exit codes: 0 success, 1 input error, 2 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "projridge/error.hpp"
#include "projridge/harness.hpp"
#include "projridge/kernels.hpp"
#include "projridge/ridge.hpp"
#include "projridge/threshold.hpp"
#include "projridge/tuning.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace projridge;

namespace {

constexpr int kInputError = 1;
constexpr int kNumericalError = 2;

void print_json(const json& j) { std::cout << dump_json(j) << "\n"; }

json indices_one_based(const IndexSet& s) {
  json out = json::array();
  for (auto j : s) out.push_back(j + 1);
  return out;
}

Regime parse_regime(const std::string& s) {
  if (s == "gaussian") return Regime::gaussian;
  if (s == "moment") return Regime::moment;
  throw input_error("unknown regime '" + s + "' (expected gaussian or moment)");
}

void check_schedule(const ScheduleParams& s) {
  for (const auto& w : s.validate()) std::cerr << "warning: " << w << "\n";
}

struct Problem {
  DesignMatrix X;
  SvdFactorization F;
  Vector y;
};

Problem load_problem(const std::string& design, const std::string& response) {
  DesignMatrix X(read_matrix_csv(design));
  Vector y = read_vector_csv(response);
  if (y.size() != X.n())
    throw input_error("response has " + std::to_string(y.size()) + " entries but the design has " +
                      std::to_string(X.n()) + " rows");
  SvdFactorization F = factorize(X);
  return {std::move(X), std::move(F), std::move(y)};
}

TuningGrid load_grid(const std::string& path, const SvdFactorization& F, const Vector& y) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open grid " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw input_error("grid " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw input_error("grid file must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (k != "c1" && k != "c2" && k != "alpha" && k != "regime" && k != "l" && k != "k" && k != "t")
      throw input_error("unknown key '" + k + "' in grid file");
  try {
    const double alpha = j.value("alpha", 0.5);
    TuningGrid g;
    if (!j.contains("c1") && !j.contains("c2")) {
      g = default_grid(F, y, alpha);
    } else {
      if (!j.contains("c1") || !j.contains("c2")) throw input_error("grid file needs both 'c1' and 'c2' (or neither)");
      g.c1_values = j.at("c1").get<std::vector<double>>();
      g.c2_values = j.at("c2").get<std::vector<double>>();
      g.schedule.alpha = alpha;
    }
    if (j.contains("regime")) g.schedule.regime = parse_regime(j.at("regime").get<std::string>());
    if (j.contains("l")) g.schedule.l = j.at("l").get<double>();
    if (j.contains("k")) g.schedule.k = j.at("k").get<double>();
    if (j.contains("t")) g.schedule.t = j.at("t").get<double>();
    g.validate();
    check_schedule(g.schedule);
    return g;
  } catch (const json::exception& e) {
    throw input_error(std::string("grid file: ") + e.what());
  }
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  if (names.empty()) return all_methods();
  std::vector<Method> out;
  for (const auto& n : names) out.push_back(parse_method(n));
  return out;
}

void print_report_summary(const StudyReport& r, const std::vector<fs::path>& files) {
  json summary = json::object();
  for (std::size_t m = 0; m < r.methods.size(); ++m)
    summary[to_string(r.methods[m])] = {{"mean_l2", r.mean_l2[m]}, {"failures", r.failures[m]}};
  json paths = json::array();
  for (const auto& f : files) paths.push_back(f.string());
  print_json({{"study", to_string(r.config.study)}, {"design", r.design_label}, {"summary", summary}, {"files", paths}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projection ridge estimation and simulation studies"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  std::string isa;
  app.add_option("--isa", isa, "Kernel variant: scalar or avx2 (default: best available)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run a simulation study and write report files");
  std::string sim_study, sim_config, sim_out;
  unsigned sim_workers = 0;
  std::vector<std::string> sim_methods;
  sim->add_option("--study", sim_study, "I, II, III, IV or custom")->required();
  sim->add_option("--config", sim_config, "JSON config with StudyConfig keys");
  sim->add_option("--out", sim_out, "Output directory")->required();
  sim->add_option("--workers", sim_workers, "Worker threads (0: all cores)");
  sim->add_option("--methods", sim_methods, "Subset of thresholded_ridge, lasso, enet, ridge")->delimiter(',');

  // fit
  auto* fit = app.add_subcommand("fit", "Fit thresholded ridge at given schedule constants");
  std::string fit_design, fit_response, fit_regime = "gaussian", fit_out;
  ScheduleParams fit_s;
  std::optional<double> fit_h;
  fit->add_option("--design", fit_design, "Design matrix CSV")->required();
  fit->add_option("--response", fit_response, "Response vector CSV")->required();
  fit->add_option("--c1", fit_s.C1, "Threshold constant C1")->required();
  fit->add_option("--c2", fit_s.C2, "Regularization constant C2")->required();
  fit->add_option("--alpha", fit_s.alpha, "Threshold exponent in (0, 1/2]")->required();
  fit->add_option("--regime", fit_regime, "gaussian or moment");
  fit->add_option("--l", fit_s.l, "Moment regime: l");
  fit->add_option("--k", fit_s.k, "Moment regime: k");
  fit->add_option("--t", fit_s.t, "Moment regime: t");
  fit->add_option("--ridge-h", fit_h, "Explicit regularization h (overrides the C2 schedule)");
  fit->add_option("--out", fit_out, "Write the coefficient vector to this CSV");

  // tune
  auto* tun = app.add_subcommand("tune", "Choose (C1, C2) by the leave-one-out criterion");
  std::string tun_design, tun_response, tun_grid;
  tun->add_option("--design", tun_design, "Design matrix CSV")->required();
  tun->add_option("--response", tun_response, "Response vector CSV")->required();
  tun->add_option("--grid", tun_grid, "JSON grid file")->required();

  // ratecheck
  auto* rc = app.add_subcommand("ratecheck", "Log-log error slopes for a named scenario");
  std::string rc_theorem, rc_scenario, rc_out;
  std::vector<long> rc_n;
  std::uint64_t rc_seed = 20120101;
  long rc_reps = 500;
  rc->add_option("--theorem", rc_theorem, "t1ii or t3")->required();
  rc->add_option("--scenario", rc_scenario, "orthogonal or bounded-q")->required();
  rc->add_option("--n", rc_n, "Ascending sample sizes (at least 4)")->delimiter(',');
  rc->add_option("--seed", rc_seed, "Master seed");
  rc->add_option("--replications", rc_reps, "Monte-Carlo replications for t3 (>= 500)");
  rc->add_option("--out", rc_out, "Also write the JSON report to this file");

  // report
  auto* rep = app.add_subcommand("report", "Regenerate report files from a manifest");
  std::string rep_manifest, rep_out;
  unsigned rep_workers = 0;
  rep->add_option("--manifest", rep_manifest, "manifest.json from a previous run")->required();
  rep->add_option("--out", rep_out, "Output directory (default: the manifest's directory)");
  rep->add_option("--workers", rep_workers, "Worker threads (0: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (!isa.empty()) {
      if (isa == "scalar") kernels::set_active_isa(kernels::Isa::scalar);
      else if (isa == "avx2") kernels::set_active_isa(kernels::Isa::avx2);
      else throw input_error("unknown --isa '" + isa + "'");
    }

    if (*sim) {
      const StudyId study = parse_study(sim_study);
      StudyConfig cfg;
      if (!sim_config.empty()) {
        cfg = load_config(sim_config, study);
      } else if (study == StudyId::custom) {
        throw input_error("--study custom needs --config");
      } else {
        cfg = preset(study, StudyConfig{}.n, StudyConfig{}.p);
        cfg.validate();
      }
      RunOptions opts;
      opts.workers = sim_workers;
      const StudyReport r = run_study(cfg, parse_methods(sim_methods), opts);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
      print_report_summary(r, emit_report(r, sim_out));
    } else if (*fit) {
      fit_s.regime = parse_regime(fit_regime);
      check_schedule(fit_s);
      const Problem pr = load_problem(fit_design, fit_response);
      const long n = static_cast<long>(pr.X.n());
      const long p = static_cast<long>(pr.X.p());
      const double a = threshold_value(n, fit_s);
      const double h = fit_h ? *fit_h : regularization_value(n, p, fit_s);
      const ThresholdedFit tf = apply_threshold(fit_ridge(pr.F, pr.y, h), a);
      json out{{"n", n},
               {"p", p},
               {"rank", pr.F.rank()},
               {"a", a},
               {"h", h},
               {"psi_hat", psi_hat_at(pr.F, pr.y, a, h)},
               {"selected", indices_one_based(tf.selected)}};
      if (fit_out.empty()) {
        out["theta_tilde"] = std::vector<double>(tf.theta_tilde.data(), tf.theta_tilde.data() + tf.theta_tilde.size());
      } else {
        write_vector_csv(fit_out, tf.theta_tilde);
        out["theta_tilde_file"] = fit_out;
      }
      print_json(out);
    } else if (*tun) {
      const Problem pr = load_problem(tun_design, tun_response);
      const TuningGrid g = load_grid(tun_grid, pr.F, pr.y);
      const CvResult cv = tune(pr.F, pr.y, g);
      json table = json::array();
      for (Eigen::Index i = 0; i < cv.psi_hat.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < cv.psi_hat.cols(); ++k)
          row.push_back(std::isfinite(cv.psi_hat(i, k)) ? json(cv.psi_hat(i, k)) : json(nullptr));
        table.push_back(row);
      }
      print_json({{"c1", g.c1_values},
                  {"c2", g.c2_values},
                  {"psi_hat", table},
                  {"best_c1", cv.best_c1},
                  {"best_c2", cv.best_c2},
                  {"best_psi_hat", cv.best_value}});
    } else if (*rc) {
      const Theorem th = parse_theorem(rc_theorem);
      if (rc_n.empty())
        rc_n = rc_scenario == "orthogonal" ? std::vector<long>{50, 100, 200, 400} : std::vector<long>{100, 200, 400, 800};
      const json j = rate_report_to_json(rate_check(th, rc_scenario, rc_n, rc_seed, rc_reps));
      if (!rc_out.empty()) {
        std::ofstream f(rc_out);
        if (!f) throw input_error("cannot write " + rc_out);
        f << dump_json(j) << "\n";
      }
      print_json(j);
    } else if (*rep) {
      const Manifest m = load_manifest(rep_manifest);
      RunOptions opts = m.options;
      opts.workers = rep_workers;
      const fs::path dir = rep_out.empty() ? fs::path(rep_manifest).parent_path() : fs::path(rep_out);
      const StudyReport r = run_study(m.config, m.methods, opts);
      print_report_summary(r, emit_report(r, dir.empty() ? fs::path(".") : dir));
    }
  } catch (const input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  }
  return 0;
}
