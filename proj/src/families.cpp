#include "monocat/families.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace monocat {

QualitySupport QualitySupport::make(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw InvalidInput("support must satisfy lo < hi with finite endpoints");
  }
  return {lo, hi};
}

double FamilySpec::param(const std::string& name, double fallback) const {
  auto it = params.find(name);
  return it == params.end() ? fallback : it->second;
}

double FamilySpec::required(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) {
    throw InvalidInput("family '" + kind + "' requires parameter '" + name + "'");
  }
  return it->second;
}

FamilySpec FamilySpec::power(double k) { return {"power", {{"k", k}}, {}, {}}; }
FamilySpec FamilySpec::reflected_power(double k) { return {"reflected_power", {{"k", k}}, {}, {}}; }
FamilySpec FamilySpec::exponential(double beta) { return {"exponential", {{"beta", beta}}, {}, {}}; }
FamilySpec FamilySpec::logistic(double mu, double s) {
  return {"logistic", {{"mu", mu}, {"s", s}}, {}, {}};
}
FamilySpec FamilySpec::reverse_logistic(double eps, double skew) {
  return {"reverse_logistic", {{"eps", eps}, {"skew", skew}}, {}, {}};
}
FamilySpec FamilySpec::uniform_interval(double lo, double hi) {
  return {"uniform_interval", {{"lo", lo}, {"hi", hi}}, {}, {}};
}
FamilySpec FamilySpec::sine_wave(double amp, double cycles) {
  return {"sine_wave", {{"amp", amp}, {"cycles", cycles}}, {}, {}};
}
FamilySpec FamilySpec::from_table(std::vector<std::pair<double, double>> rows) {
  return {"table", {}, std::move(rows), {}};
}
FamilySpec FamilySpec::mixture(std::vector<std::pair<double, FamilySpec>> parts) {
  return {"mixture", {}, {}, std::move(parts)};
}

namespace {

double interpolate(const std::vector<std::pair<double, double>>& rows, double x) {
  if (x <= rows.front().first) return rows.front().second;
  if (x >= rows.back().first) return rows.back().second;
  auto it = std::upper_bound(rows.begin(), rows.end(), x,
                             [](double v, const auto& row) { return v < row.first; });
  const auto& [x1, y1] = *it;
  const auto& [x0, y0] = *(it - 1);
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

void validate(const FamilySpec& spec, const QualitySupport& support) {
  const auto& k = spec.kind;
  if (k == "uniform") return;
  if (k == "power" || k == "reflected_power") {
    const double e = spec.required("k");
    if (!(e > 0.0) || !std::isfinite(e)) throw InvalidInput(k + ": exponent k must be > 0");
    return;
  }
  if (k == "exponential") {
    if (!std::isfinite(spec.required("beta"))) throw InvalidInput("exponential: beta must be finite");
    return;
  }
  if (k == "logistic") {
    spec.required("mu");
    if (!(spec.required("s") > 0.0)) throw InvalidInput("logistic: scale s must be > 0");
    return;
  }
  if (k == "reverse_logistic") {
    const double eps = spec.param("eps", 0.02);
    if (!(eps > 0.0 && eps < 0.5)) throw InvalidInput("reverse_logistic: eps must lie in (0, 0.5)");
    if (!(spec.param("skew", 1.0) > 0.0)) throw InvalidInput("reverse_logistic: skew must be > 0");
    return;
  }
  if (k == "uniform_interval") {
    const double a = spec.required("lo");
    const double b = spec.required("hi");
    if (!(a < b) || a < support.lo || b > support.hi) {
      throw InvalidInput("uniform_interval: need support.lo <= lo < hi <= support.hi");
    }
    return;
  }
  if (k == "sine_wave") {
    if (!(std::abs(spec.param("amp", 0.5)) < 1.0)) throw InvalidInput("sine_wave: |amp| must be < 1");
    if (!(spec.param("cycles", 1.0) > 0.0)) throw InvalidInput("sine_wave: cycles must be > 0");
    return;
  }
  if (k == "table") {
    const auto& rows = spec.table;
    if (rows.size() < 2) throw InvalidInput("table: need at least two rows");
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (!(rows[i].first > rows[i - 1].first)) {
        throw InvalidInput("table: quality column must be strictly increasing");
      }
    }
    for (const auto& [x, y] : rows) {
      if (!std::isfinite(x) || !std::isfinite(y)) throw InvalidInput("table: non-finite entry");
    }
    if (std::abs(rows.front().first - support.lo) > 1e-12 ||
        std::abs(rows.back().first - support.hi) > 1e-12) {
      throw InvalidInput("table: first and last rows must sit at the support endpoints");
    }
    return;
  }
  if (k == "mixture") {
    if (spec.components.empty()) throw InvalidInput("mixture: need at least one component");
    double total = 0.0;
    for (const auto& [w, part] : spec.components) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("mixture: weights must be >= 0");
      total += w;
      validate(part, support);
    }
    if (!(total > 0.0)) throw InvalidInput("mixture: weights sum to zero");
    return;
  }
  throw InvalidInput("unknown family kind '" + k + "'");
}

double logit(double u) { return std::log(u / (1.0 - u)); }

double evaluate(const FamilySpec& spec, const QualitySupport& sup, double x) {
  const double t = std::clamp((x - sup.lo) / sup.width(), 0.0, 1.0);
  const auto& k = spec.kind;
  if (k == "uniform") return t;
  if (k == "power") return std::pow(t, spec.required("k"));
  if (k == "reflected_power") return 1.0 - std::pow(1.0 - t, spec.required("k"));
  if (k == "exponential") {
    const double beta = spec.required("beta");
    if (std::abs(beta) < 1e-12) return t;
    return -std::expm1(-beta * t) / -std::expm1(-beta);
  }
  if (k == "logistic") {
    const double mu = spec.required("mu");
    const double s = spec.required("s");
    auto cdf = [&](double v) { return 1.0 / (1.0 + std::exp(-(v - mu) / s)); };
    const double lo = cdf(sup.lo);
    return (cdf(x) - lo) / (cdf(sup.hi) - lo);
  }
  if (k == "reverse_logistic") {
    const double eps = spec.param("eps", 0.02);
    const double u = eps + (1.0 - 2.0 * eps) * std::pow(t, spec.param("skew", 1.0));
    return (logit(u) - logit(eps)) / (logit(1.0 - eps) - logit(eps));
  }
  if (k == "uniform_interval") {
    const double a = spec.required("lo");
    const double b = spec.required("hi");
    return std::clamp((x - a) / (b - a), 0.0, 1.0);
  }
  if (k == "sine_wave") {
    const double amp = spec.param("amp", 0.5);
    const double w = 2.0 * std::numbers::pi * spec.param("cycles", 1.0);
    auto raw = [&](double v) { return v + amp * (1.0 - std::cos(w * v)) / w; };
    return raw(t) / raw(1.0);
  }
  if (k == "table") return interpolate(spec.table, x);
  // mixture
  double total = 0.0;
  double acc = 0.0;
  for (const auto& [w, part] : spec.components) {
    total += w;
    acc += w * evaluate(part, sup, x);
  }
  return acc / total;
}

void collect_breakpoints(const FamilySpec& spec, std::vector<double>& out) {
  if (spec.kind == "uniform_interval") {
    out.push_back(spec.required("lo"));
    out.push_back(spec.required("hi"));
  } else if (spec.kind == "table") {
    for (const auto& row : spec.table) out.push_back(row.first);
  } else if (spec.kind == "mixture") {
    for (const auto& part : spec.components) collect_breakpoints(part.second, out);
  }
}

bool smooth_positive(const FamilySpec& spec) {
  const auto& k = spec.kind;
  if (k == "uniform" || k == "exponential" || k == "logistic" || k == "sine_wave") return true;
  if (k == "power" || k == "reflected_power") return spec.required("k") >= 1.0;
  if (k == "reverse_logistic") return spec.param("skew", 1.0) >= 1.0;
  if (k == "mixture") {
    return std::all_of(spec.components.begin(), spec.components.end(),
                       [](const auto& part) { return smooth_positive(part.second); });
  }
  return false;
}

}  // namespace

SampledFamily sample_family(const FamilySpec& spec, const QualitySupport& support, int n) {
  validate(spec, support);
  if (n < 3) throw InvalidInput("grid size n must be >= 3");
  SampledFamily out;
  if (spec.kind == "table") {
    for (const auto& [x, y] : spec.table) {
      out.xs.push_back(x);
      out.ys.push_back(y);
    }
    out.xs.front() = support.lo;
    out.xs.back() = support.hi;
    return out;
  }
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(n) + 8);
  for (int i = 0; i < n; ++i) {
    xs.push_back(support.lo + support.width() * static_cast<double>(i) / (n - 1));
  }
  xs.back() = support.hi;
  collect_breakpoints(spec, xs);
  std::sort(xs.begin(), xs.end());
  // Drop knots that collide with a neighbour; keep exact breakpoints over grid points.
  std::vector<double> merged;
  merged.reserve(xs.size());
  const double eps = 1e-12 * support.width();
  std::vector<double> brk;
  collect_breakpoints(spec, brk);
  auto is_break = [&](double v) { return std::find(brk.begin(), brk.end(), v) != brk.end(); };
  for (double x : xs) {
    if (!merged.empty() && x - merged.back() <= eps) {
      if (is_break(x) && merged.back() != support.lo) merged.back() = x;
      continue;
    }
    merged.push_back(x);
  }
  merged.back() = support.hi;
  out.xs = std::move(merged);
  out.ys.reserve(out.xs.size());
  for (double x : out.xs) out.ys.push_back(evaluate(spec, support, x));
  out.ys.front() = 0.0;
  out.ys.back() = 1.0;
  out.smooth_positive_density = smooth_positive(spec);
  return out;
}

ScalarFunction ScalarFunction::poly(std::vector<double> coeffs) {
  if (coeffs.empty()) throw InvalidInput("poly: need at least one coefficient");
  ScalarFunction f;
  f.kind_ = Kind::poly;
  f.coeffs_ = std::move(coeffs);
  return f;
}

ScalarFunction ScalarFunction::inverse(double scale, double shift) {
  ScalarFunction f;
  f.kind_ = Kind::inverse;
  f.coeffs_ = {scale, shift};
  return f;
}

ScalarFunction ScalarFunction::exp(double scale, double rate) {
  ScalarFunction f;
  f.kind_ = Kind::exp;
  f.coeffs_ = {scale, rate};
  return f;
}

double ScalarFunction::operator()(double x) const {
  switch (kind_) {
    case Kind::poly: {
      double acc = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
      return acc;
    }
    case Kind::inverse:
      return coeffs_[0] / (x + coeffs_[1]);
    case Kind::exp:
      return coeffs_[0] * std::exp(coeffs_[1] * x);
  }
  return 0.0;
}

}  // namespace monocat
