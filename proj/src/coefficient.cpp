#include "fmbsde/coefficient.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fmbsde {

Coefficient Coefficient::constant(double c, CoeffDomain d) {
  Coefficient out;
  out.kind_ = Kind::Constant;
  out.domain_ = d;
  out.const_value_ = c;
  return out;
}

Coefficient Coefficient::piecewise_constant(std::vector<double> breaks, std::vector<double> values,
                                            CoeffDomain d) {
  if (breaks.size() < 2 || values.size() + 1 != breaks.size())
    throw std::invalid_argument("piecewise_constant: need n+1 breakpoints for n values");
  if (!std::is_sorted(breaks.begin(), breaks.end()))
    throw std::invalid_argument("piecewise_constant: breakpoints must be sorted");
  Coefficient out;
  out.kind_ = Kind::PiecewiseConstant;
  out.domain_ = d;
  out.breaks_ = std::move(breaks);
  out.values_ = std::move(values);
  return out;
}

Coefficient Coefficient::piecewise_linear(std::vector<double> xs, std::vector<double> ys,
                                          CoeffDomain d) {
  if (xs.size() < 2 || xs.size() != ys.size())
    throw std::invalid_argument("piecewise_linear: need matching xs/ys of size >= 2");
  if (!std::is_sorted(xs.begin(), xs.end()))
    throw std::invalid_argument("piecewise_linear: xs must be sorted");
  Coefficient out;
  out.kind_ = Kind::PiecewiseLinear;
  out.domain_ = d;
  out.breaks_ = std::move(xs);
  out.values_ = std::move(ys);
  return out;
}

Coefficient Coefficient::from_function(std::function<double(double)> f, CoeffDomain d) {
  Coefficient out;
  out.kind_ = Kind::Function;
  out.domain_ = d;
  out.func_ = std::move(f);
  return out;
}

double Coefficient::operator()(double u) const {
  switch (kind_) {
    case Kind::Constant:
      return const_value_;
    case Kind::PiecewiseConstant: {
      if (u <= breaks_.front()) return values_.front();
      if (u >= breaks_.back()) return values_.back();
      auto it = std::upper_bound(breaks_.begin(), breaks_.end(), u);
      std::size_t i = static_cast<std::size_t>(it - breaks_.begin()) - 1;
      if (i >= values_.size()) i = values_.size() - 1;
      return values_[i];
    }
    case Kind::PiecewiseLinear: {
      if (u <= breaks_.front()) return values_.front();
      if (u >= breaks_.back()) return values_.back();
      auto it = std::upper_bound(breaks_.begin(), breaks_.end(), u);
      std::size_t i = static_cast<std::size_t>(it - breaks_.begin()) - 1;
      double w = (u - breaks_[i]) / (breaks_[i + 1] - breaks_[i]);
      return values_[i] + w * (values_[i + 1] - values_[i]);
    }
    case Kind::Function:
      return func_(u);
  }
  return 0.0;
}

namespace {

PcProfile build_profile(const Coefficient& c, std::vector<double> edges) {
  PcProfile out;
  out.values.resize(edges.size() - 1);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    out.values[i] = c(0.5 * (edges[i] + edges[i + 1]));
  out.edges = std::move(edges);
  return out;
}

void dedupe(std::vector<double>& edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-14; }),
              edges.end());
}

}  // namespace

PcProfile resample_pc(const Coefficient& c, double t, const TimeGrid& grid, int refine) {
  if (!(t > 0.0)) throw std::domain_error("resample_pc: t must be positive");
  if (refine < 1) refine = 1;
  std::vector<double> edges;
  const auto& pts = grid.points();
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    double a = pts[k];
    if (a >= t) break;
    double b = std::min(pts[k + 1], t);
    for (int r = 0; r < refine; ++r)
      edges.push_back(a + (b - a) * static_cast<double>(r) / refine);
  }
  edges.push_back(t);
  // Past the grid horizon (t > T) extend with uniform cells of comparable size.
  if (t > pts.back()) {
    double dt = (pts.back() - pts.front()) / static_cast<double>((pts.size() - 1) * refine);
    for (double u = pts.back(); u < t; u += dt) edges.push_back(u);
  }
  for (double b : c.breakpoints())
    if (b > 0.0 && b < t) edges.push_back(b);
  dedupe(edges);
  return build_profile(c, std::move(edges));
}

PcProfile resample_pc_uniform(const Coefficient& c, double t, std::size_t m) {
  if (!(t > 0.0)) throw std::domain_error("resample_pc_uniform: t must be positive");
  if (m < 1) m = 1;
  std::vector<double> edges(m + 1);
  for (std::size_t i = 0; i <= m; ++i) edges[i] = t * static_cast<double>(i) / m;
  for (double b : c.breakpoints())
    if (b > 0.0 && b < t) edges.push_back(b);
  dedupe(edges);
  return build_profile(c, std::move(edges));
}

std::size_t TimeGrid::index_of(double t) const {
  double slack = 1e-9 * (horizon() > 0 ? horizon() : 1.0);
  auto it = std::lower_bound(points_.begin(), points_.end(), t - slack);
  if (it == points_.end() || std::abs(*it - t) > slack)
    throw std::invalid_argument("time " + std::to_string(t) + " is not a grid point");
  return static_cast<std::size_t>(it - points_.begin());
}

}  // namespace fmbsde
