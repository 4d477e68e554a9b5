// fmbsde: command-line front end for the mean-field fractional-BSDE library.
//
//   fmbsde <simulate|solve|compare|verify|report> --config <file>
//          [--out-dir <dir>] [--seed <n>]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "fmbsde/config.hpp"
#include "fmbsde/csv.hpp"
#include "fmbsde/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fmbsde;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

CsvTable matrix_table(const TimeGrid& grid, const Eigen::MatrixXd& m) {
  CsvTable t;
  for (std::size_t k = 0; k < grid.size(); ++k) t.header.push_back("t_" + std::to_string(k));
  t.rows.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index p = 0; p < m.rows(); ++p) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index k = 0; k < m.cols(); ++k) row[static_cast<std::size_t>(k)] = m(p, k);
    t.rows.push_back(std::move(row));
  }
  return t;
}

void run_simulate(const RunConfig& cfg, const fs::path& out_dir) {
  const ForwardSpec spec = cfg.forward_spec();
  spec.validate();
  const auto batch = fbm::sample_paths(spec.grid, spec.hurst, cfg.n_paths, cfg.seed);
  fbm::export_csv(batch, (out_dir / "paths.csv").string());
  const Eigen::MatrixXd eta = forward::simulate_eta(spec, batch);
  write_csv(matrix_table(spec.grid, eta), (out_dir / "eta.csv").string());
  std::cout << "wrote paths.csv and eta.csv (" << cfg.n_paths << " paths, "
            << spec.grid.size() << " grid points)\n";
}

void run_solve(const RunConfig& cfg, const fs::path& out_dir) {
  const MfBsdeProblem p = cfg.problem();
  p.spec.validate();
  const MfBsdeSolution sol = picard_solve(p, cfg.solve_options());
  export_surface_csv(sol.surface, (out_dir / "surface.csv").string());

  const std::size_t residual_paths = std::min<std::size_t>(cfg.n_paths, 2000);
  const auto batch = fbm::sample_paths(p.spec.grid, p.spec.hurst, residual_paths, cfg.seed);
  const ResidualReport residuals = discrete_residual(p, sol, batch);
  write_text(out_dir / "diagnostics.json", diagnostics_json(sol, &residuals));

  const double y0 = sol.surface.value(0, p.spec.eta0);
  std::cout << "Y_0 = " << y0 << " after " << sol.iterations << " iteration(s); wrote"
            << " surface.csv and diagnostics.json\n";
}

void run_compare(const RunConfig& cfg, const fs::path& out_dir) {
  if (!cfg.f2 && !cfg.g2)
    throw std::invalid_argument("compare requires a second problem (f2 and/or g2)");
  const MfBsdeProblem p1 = cfg.problem();
  const MfBsdeProblem p2 = cfg.second_problem();
  p1.spec.validate();
  const ComparisonVerdict verdict = compare_solutions(p1, p2, cfg.compare_tol, cfg.solve_options());

  const double y1 = verdict.first.surface.value(0, cfg.eta0);
  const double y2 = verdict.second.surface.value(0, cfg.eta0);
  json j;
  j["ordered"] = verdict.ordered;
  j["max_violation"] = verdict.max_violation;
  j["tolerance"] = cfg.compare_tol;
  j["y1_at_0"] = y1;
  j["y2_at_0"] = y2;
  j["iterations"] = {verdict.first.iterations, verdict.second.iterations};
  write_text(out_dir / "compare.json", j.dump(2) + "\n");
  export_surface_csv(verdict.second.surface, (out_dir / "surface.csv").string());
  std::cout << "verdict: " << (verdict.ordered ? "ordered" : "NOT ordered")
            << " (max violation " << verdict.max_violation << "); Y1(0) = " << y1
            << ", Y2(0) = " << y2 << "\n";
  if (!verdict.ordered) throw std::runtime_error("comparison ordering violated");
}

json check_json(const verify::CheckResult& r, const json& params) {
  return json{{"name", r.name}, {"params", params}, {"lhs", r.lhs},
              {"rhs", r.rhs},   {"se", r.se},       {"z", r.z}};
}

json run_verify_battery(const RunConfig& cfg) {
  json checks = json::array();
  const double T = 1.0;
  const std::size_t n_time = 128;
  const TimeGrid grid = TimeGrid::uniform(T, n_time);
  const std::vector<std::size_t> probe = {n_time / 4, n_time / 2, 3 * n_time / 4, n_time};

  for (double hv : cfg.verify_hursts) {
    const Hurst h{hv};
    const json base{{"H", hv}, {"T", T}, {"n_paths", cfg.verify_paths}};
    const auto batch = fbm::sample_paths(grid, h, cfg.verify_paths, cfg.seed + 17);

    const Coefficient one = Coefficient::constant(1.0);
    const Coefficient zero = Coefficient::constant(0.0);
    // Grid-aligned staircase of t: piecewise-constant integrands make the
    // left-endpoint discrete integral an exact realization, so the Monte
    // Carlo side carries no discretization bias.
    std::vector<double> stair_vals(grid.size() - 1);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) stair_vals[k] = grid[k];
    const Coefficient ramp = Coefficient::piecewise_constant(grid.points(), stair_vals);

    // Duality: B_T, B_T^2, B_T^3 against u = 1.
    for (int degree : {1, 2, 3}) {
      auto phi = verify::PolynomialFunctional::monomial({one}, 1.0, {degree});
      auto r = verify::duality_check(phi, one, batch);
      r.name = "duality[B_T^" + std::to_string(degree) + ", u=1]";
      checks.push_back(check_json(r, base));
    }

    // Isometry: deterministic integrands, then the F = B closed-form branch.
    {
      auto r = verify::isometry_check(one, batch);
      r.name = "isometry[F=1]";
      checks.push_back(check_json(r, base));
      r = verify::isometry_check(ramp, batch);
      r.name = "isometry[F=t staircase]";
      checks.push_back(check_json(r, base));
      r = verify::isometry_check_fbm(batch);
      checks.push_back(check_json(r, base));
    }

    // Ito formula at mean level for the stock of test functions.
    ForwardSpec spec;
    spec.eta0 = 0.0;
    spec.b = zero;
    spec.sigma = one;
    spec.hurst = h;
    spec.grid = grid;
    for (const auto& F : {verify::TestFunction::square(), verify::TestFunction::quartic(),
                          verify::TestFunction::cosine()}) {
      for (auto& r : verify::ito_mean_check(F, spec, batch, probe))
        checks.push_back(check_json(r, base));
    }

    // Product rule battery.
    struct Pair {
      const char* label;
      Coefficient f1, f2, g1, g2;
    };
    const std::vector<Pair> pairs = {
        {"f1=f2=1", one, one, zero, zero},
        {"f1=1,f2=0,g2=1", one, zero, zero, one},
        {"f1=1,f2=t_staircase", one, ramp, zero, zero},
    };
    for (const auto& pr : pairs) {
      for (auto& r : verify::product_rule_check(pr.f1, pr.f2, pr.g1, pr.g2, batch, probe)) {
        r.name = "product_rule[" + std::string(pr.label) + "]" + r.name.substr(12);
        checks.push_back(check_json(r, base));
      }
    }
  }

  bool all_pass = true;
  double max_abs_z = 0.0;
  for (const auto& c : checks) {
    const double z = std::abs(c.at("z").get<double>());
    max_abs_z = std::max(max_abs_z, z);
    if (z > 3.0) all_pass = false;
  }
  return json{{"checks", checks}, {"all_pass", all_pass}, {"max_abs_z", max_abs_z}};
}

void run_verify(const RunConfig& cfg, const fs::path& out_dir) {
  const json report = run_verify_battery(cfg);
  write_text(out_dir / "verify.json", report.dump(2) + "\n");
  std::cout << report.at("checks").size() << " checks, max |z| = "
            << report.at("max_abs_z").get<double>() << ", "
            << (report.at("all_pass").get<bool>() ? "all passed" : "FAILURES") << "\n";
  if (!report.at("all_pass").get<bool>())
    throw std::runtime_error("verification battery reported |z| > 3");
}

void run_report(const RunConfig&, const fs::path& out_dir) {
  std::ostringstream out;
  bool found = false;

  const fs::path diag = out_dir / "diagnostics.json";
  if (fs::exists(diag)) {
    found = true;
    const json j = json::parse(std::ifstream(diag));
    out << "Solver diagnostics\n";
    out << "  iterations : " << j.value("iterations", 0) << "\n";
    out << "  beta       : " << j.value("beta_used", 0.0) << "\n";
    out << "  M          : " << j.value("M_used", 0.0) << "\n";
    if (j.contains("distances") && !j["distances"].empty())
      out << "  final dist : " << j["distances"].back().value("combined", 0.0) << "\n";
    if (j.contains("residual"))
      out << "  residual   : rms " << j["residual"].value("overall_rms", 0.0) << "\n";
    out << "\n";
  }
  const fs::path cmp = out_dir / "compare.json";
  if (fs::exists(cmp)) {
    found = true;
    const json j = json::parse(std::ifstream(cmp));
    out << "Comparison verdict\n";
    out << "  ordered       : " << (j.value("ordered", false) ? "yes" : "NO") << "\n";
    out << "  max violation : " << j.value("max_violation", 0.0) << "\n";
    out << "  Y1(0), Y2(0)  : " << j.value("y1_at_0", 0.0) << ", " << j.value("y2_at_0", 0.0)
        << "\n\n";
  }
  const fs::path ver = out_dir / "verify.json";
  if (fs::exists(ver)) {
    found = true;
    const json j = json::parse(std::ifstream(ver));
    out << "Verification battery\n";
    out << "  checks   : " << j.at("checks").size() << "\n";
    out << "  max |z|  : " << j.value("max_abs_z", 0.0) << "\n";
    out << "  verdict  : " << (j.value("all_pass", false) ? "all passed" : "FAILURES") << "\n\n";
  }
  if (!found)
    throw std::invalid_argument(
        "report: no diagnostics.json, compare.json, or verify.json under " + out_dir.string() +
        " (run solve/compare/verify first)");
  write_text(out_dir / "report.txt", out.str());
  std::cout << out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field BSDEs driven by fractional Brownian motion"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  for (const char* name : {"simulate", "solve", "compare", "verify", "report"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out-dir", out_dir, "output directory (created if missing)");
    sub->add_option("--seed", seed_override, "override the config's RNG seed");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
#ifdef _OPENMP
    omp_set_num_threads(configured_threads());
#endif
    RunConfig cfg = RunConfig::from_json_file(config_path);
    if (seed_override) cfg.seed = *seed_override;
    const fs::path out(out_dir);
    fs::create_directories(out);

    if (command == "simulate") run_simulate(cfg, out);
    else if (command == "solve") run_solve(cfg, out);
    else if (command == "compare") run_compare(cfg, out);
    else if (command == "verify") run_verify(cfg, out);
    else run_report(cfg, out);
    return 0;
  } catch (const ParseError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}
