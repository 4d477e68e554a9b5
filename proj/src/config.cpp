#include "fmbsde/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include "json.hpp"
#include <stdexcept>
#include <thread>

namespace fmbsde {

using nlohmann::json;

namespace {

const std::vector<std::string> kDriverVars = {"t", "x", "yp", "zp", "y", "z"};

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Coefficient coefficient_of_t(const std::string& src) {
  auto e = Expression::parse(src, {"t"});
  return Coefficient::from_function([e](double t) { return e.eval(std::span(&t, 1)); },
                                    CoeffDomain::Time);
}

Coefficient coefficient_of_x(const std::string& src) {
  auto e = Expression::parse(src, {"x"});
  return Coefficient::from_function([e](double x) { return e.eval(std::span(&x, 1)); },
                                    CoeffDomain::Space);
}

Driver driver_from(const std::string& src, bool* mean_field_dependent) {
  auto e = Expression::parse(src, kDriverVars);
  if (mean_field_dependent) {
    const std::vector<std::string> primed = {"yp", "zp"};
    *mean_field_dependent = e.mentions(primed);
  }
  return [e](double t, double x, double yp, double zp, double y, double z) {
    const double vals[6] = {t, x, yp, zp, y, z};
    return e.eval(std::span(vals, 6));
  };
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j = json::parse(text);
  RunConfig c;
  read_field(j, "hurst", c.hurst);
  read_field(j, "horizon", c.horizon);
  read_field(j, "eta0", c.eta0);
  read_field(j, "n_time", c.n_time);
  read_field(j, "n_space", c.n_space);
  read_field(j, "n_quad", c.n_quad);
  read_field(j, "n_paths", c.n_paths);
  read_field(j, "seed", c.seed);
  read_field(j, "b", c.b);
  read_field(j, "sigma", c.sigma);
  read_field(j, "g", c.g);
  read_field(j, "f", c.f);
  if (j.contains("f2")) c.f2 = j.at("f2").get<std::string>();
  if (j.contains("g2")) c.g2 = j.at("g2").get<std::string>();
  read_field(j, "lipschitz_C", c.lipschitz_C);
  read_field(j, "monotone_in_yprime", c.monotone_in_yprime);
  read_field(j, "tol", c.tol);
  read_field(j, "max_iter", c.max_iter);
  read_field(j, "sigma_min", c.sigma_min);
  read_field(j, "compare_tol", c.compare_tol);
  read_field(j, "verify_hursts", c.verify_hursts);
  read_field(j, "verify_paths", c.verify_paths);
  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (!(hurst > 0.5 && hurst < 1.0))
    throw std::invalid_argument("config: hurst must lie in (1/2, 1)");
  if (!(horizon > 0.0)) throw std::invalid_argument("config: horizon must be positive");
  if (n_time < 2) throw std::invalid_argument("config: n_time must be >= 2");
  if (n_space < 8) throw std::invalid_argument("config: n_space must be >= 8");
  if (n_quad < 2) throw std::invalid_argument("config: n_quad must be >= 2");
  if (n_paths < 2) throw std::invalid_argument("config: n_paths must be >= 2");
  if (!(lipschitz_C >= 0.0)) throw std::invalid_argument("config: lipschitz_C must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("config: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("config: max_iter must be >= 1");
  for (double hh : verify_hursts)
    if (!(hh > 0.5 && hh < 1.0))
      throw std::invalid_argument("config: verify_hursts entries must lie in (1/2, 1)");

  // Parse and probe every expression so malformed configs fail up front.
  const Coefficient cb = coefficient_of_t(b);
  const Coefficient cs = coefficient_of_t(sigma);
  const Coefficient cg = coefficient_of_x(g);
  const Driver df = driver_from(f);
  for (double t : {0.0, 0.25 * horizon, 0.5 * horizon, 0.75 * horizon, horizon}) {
    (void)cb(t);
    if (std::abs(cs(t)) < sigma_min)
      throw std::invalid_argument("config: |sigma| must stay above sigma_min");
  }
  for (double x : {-1.0, 0.0, 1.0}) (void)cg(x);
  (void)df(0.5 * horizon, 0.0, 0.0, 0.0, 0.0, 0.0);
  if (f2) {
    const Driver d2 = driver_from(*f2);
    (void)d2(0.5 * horizon, 0.0, 0.0, 0.0, 0.0, 0.0);
  }
  if (g2) {
    const Coefficient c2 = coefficient_of_x(*g2);
    (void)c2(0.0);
  }
}

ForwardSpec RunConfig::forward_spec() const {
  ForwardSpec spec;
  spec.eta0 = eta0;
  spec.b = coefficient_of_t(b);
  spec.sigma = coefficient_of_t(sigma);
  spec.hurst = Hurst{hurst};
  spec.grid = TimeGrid::uniform(horizon, static_cast<std::size_t>(n_time));
  spec.sigma_min = sigma_min;
  return spec;
}

MfBsdeProblem RunConfig::problem() const {
  MfBsdeProblem p;
  p.spec = forward_spec();
  p.f = driver_from(f, &p.mean_field_dependent);
  p.g = coefficient_of_x(g);
  p.lipschitz_C = lipschitz_C;
  p.monotone_in_yprime = monotone_in_yprime;
  return p;
}

MfBsdeProblem RunConfig::second_problem() const {
  MfBsdeProblem p = problem();
  if (f2) p.f = driver_from(*f2, &p.mean_field_dependent);
  if (g2) p.g = coefficient_of_x(*g2);
  return p;
}

SolveOptions RunConfig::solve_options() const {
  SolveOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  opts.n_quad = n_quad;
  opts.n_x = n_space;
  return opts;
}

std::string RunConfig::canonical_json() const {
  json j;
  j["hurst"] = hurst;
  j["horizon"] = horizon;
  j["eta0"] = eta0;
  j["n_time"] = n_time;
  j["n_space"] = n_space;
  j["n_quad"] = n_quad;
  j["n_paths"] = n_paths;
  j["seed"] = seed;
  j["b"] = Expression::parse(b, {"t"}).print();
  j["sigma"] = Expression::parse(sigma, {"t"}).print();
  j["g"] = Expression::parse(g, {"x"}).print();
  j["f"] = Expression::parse(f, kDriverVars).print();
  if (f2) j["f2"] = Expression::parse(*f2, kDriverVars).print();
  if (g2) j["g2"] = Expression::parse(*g2, {"x"}).print();
  j["lipschitz_C"] = lipschitz_C;
  j["monotone_in_yprime"] = monotone_in_yprime;
  j["tol"] = tol;
  j["max_iter"] = max_iter;
  j["sigma_min"] = sigma_min;
  j["compare_tol"] = compare_tol;
  j["verify_hursts"] = verify_hursts;
  j["verify_paths"] = verify_paths;
  return j.dump(2) + "\n";
}

int configured_threads() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const char* env = std::getenv("FMBSDE_THREADS");
  if (!env || !*env) return static_cast<int>(hw);
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 0)
    throw std::invalid_argument("FMBSDE_THREADS must be a nonnegative integer");
  if (v == 0) return static_cast<int>(hw);
  return static_cast<int>(std::min<long>(v, hw));
}

}  // namespace fmbsde
