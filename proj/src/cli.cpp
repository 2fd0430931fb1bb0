#include "monocat/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "monocat/analysis.hpp"
#include "monocat/schooling.hpp"
#include "monocat/valuation.hpp"

namespace monocat::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------- config access

const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError("config: missing required key '" + path + "'");
  return j.at(key);
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError("config key '" + path + "' must be a number");
  return j.get<double>();
}

double number_or(const json& j, const std::string& key, double fallback, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return as_number(j.at(key), path);
}

int int_or(const json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
  return v.get<int>();
}

std::vector<double> number_list(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError("config key '" + path + "' must be a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(as_number(v, path));
  return out;
}

// Rethrows library input errors with the config key attached.
template <class F>
auto at_key(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ConfigError("config key '" + path + "': " + e.what());
  }
}

FamilySpec parse_family(const json& j, const std::string& path) {
  if (j.is_string()) {
    FamilySpec f;
    f.kind = j.get<std::string>();
    return f;
  }
  if (!j.is_object()) throw ConfigError("config key '" + path + "' must be a family name or object");
  FamilySpec f;
  if (j.contains("table")) {
    f.kind = "table";
    const json& rows = j.at("table");
    if (!rows.is_array()) throw ConfigError("config key '" + path + ".table' must be an array of [x, value] pairs");
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != 2) {
        throw ConfigError("config key '" + path + ".table' must be an array of [x, value] pairs");
      }
      f.table.emplace_back(as_number(row[0], path + ".table"), as_number(row[1], path + ".table"));
    }
  } else {
    const json& kind = need(j, "family", path + ".family");
    if (!kind.is_string()) throw ConfigError("config key '" + path + ".family' must be a string");
    f.kind = kind.get<std::string>();
  }
  if (j.contains("components")) {
    const json& parts = j.at("components");
    if (!parts.is_array()) throw ConfigError("config key '" + path + ".components' must be an array");
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const std::string sub = path + ".components[" + std::to_string(i) + "]";
      f.components.emplace_back(number_or(parts[i], "weight", 1.0, sub + ".weight"), parse_family(parts[i], sub));
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "family" || key == "table" || key == "components" || key == "weight" || key == "normalize") continue;
    f.params[key] = as_number(value, path + "." + key);
  }
  return f;
}

ScalarFunction parse_function(const json& j, const std::string& path) {
  if (j.is_number()) return ScalarFunction::constant(j.get<double>());
  if (j.is_object() && j.contains("poly")) return ScalarFunction::poly(number_list(j.at("poly"), path + ".poly"));
  if (j.is_object() && j.contains("inverse")) {
    const json& p = j.at("inverse");
    return ScalarFunction::inverse(number_or(p, "scale", 1.0, path + ".inverse.scale"),
                                   number_or(p, "shift", 0.0, path + ".inverse.shift"));
  }
  if (j.is_object() && j.contains("exp")) {
    const json& p = j.at("exp");
    return ScalarFunction::exp(number_or(p, "scale", 1.0, path + ".exp.scale"),
                               as_number(need(p, "rate", path + ".exp.rate"), path + ".exp.rate"));
  }
  throw ConfigError("config key '" + path + "' must be a number or one of {poly, inverse, exp}");
}

QualityFn as_quality_fn(ScalarFunction f) {
  return [f = std::move(f)](double x) { return f(x); };
}

// ---------------------------------------------------------------- run context

struct Context {
  json cfg;
  std::string mode;
  fs::path out;
  std::uint64_t seed = 0;
  int grid_n = kDefaultGrid;
  int oracle_n = 400;
  int knots = kDefaultKnots;
  double tol_env = kTolEnv;
  double tol_val = kTolVal;
  double tol_ic = kTolIc;
  bool svg = true;
  QualitySupport support;
};

Context make_context(const RunOptions& opts) {
  std::ifstream in(opts.config);
  if (!in) throw ConfigError("config: cannot open '" + opts.config.string() + "'");
  Context c;
  try {
    c.cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  if (!c.cfg.is_object()) throw ConfigError("config: top level must be an object");
  if (opts.mode) {
    c.mode = *opts.mode;
  } else {
    const json& m = need(c.cfg, "mode", "mode");
    if (!m.is_string()) throw ConfigError("config key 'mode' must be a string");
    c.mode = m.get<std::string>();
  }
  static const std::set<std::string> modes{"solve", "diagnose", "flip", "school", "sweep", "verify"};
  if (!modes.count(c.mode)) throw ConfigError("config key 'mode': unknown mode '" + c.mode + "'");
  c.out = opts.out;
  if (opts.seed) {
    c.seed = *opts.seed;
  } else if (c.cfg.contains("seed")) {
    const json& s = c.cfg.at("seed");
    if (!s.is_number_unsigned()) throw ConfigError("config key 'seed' must be a nonnegative integer");
    c.seed = s.get<std::uint64_t>();
  }
  c.grid_n = int_or(c.cfg, "grid_n", kDefaultGrid);
  if (c.grid_n < 3) throw ConfigError("config key 'grid_n' must be >= 3");
  c.oracle_n = int_or(c.cfg, "oracle_n", 400);
  if (c.oracle_n < 0) throw ConfigError("config key 'oracle_n' must be >= 0");
  if (c.oracle_n > kMaxOracleCells) {
    throw ConfigError("config key 'oracle_n': " + std::to_string(c.oracle_n) +
                      " exceeds n_max_oracle = " + std::to_string(kMaxOracleCells));
  }
  c.knots = int_or(c.cfg, "knots", kDefaultKnots);
  if (c.knots < 3) throw ConfigError("config key 'knots' must be >= 3");
  if (c.cfg.contains("tolerances")) {
    const json& t = c.cfg.at("tolerances");
    c.tol_env = number_or(t, "env", kTolEnv, "tolerances.env");
    c.tol_val = number_or(t, "val", kTolVal, "tolerances.val");
    c.tol_ic = number_or(t, "ic", kTolIc, "tolerances.ic");
  }
  if (c.cfg.contains("svg")) {
    if (!c.cfg.at("svg").is_boolean()) throw ConfigError("config key 'svg' must be a boolean");
    c.svg = c.cfg.at("svg").get<bool>();
  }
  if (c.cfg.contains("support")) {
    const auto s = number_list(c.cfg.at("support"), "support");
    if (s.size() != 2) throw ConfigError("config key 'support' must be [lo, hi]");
    c.support = at_key("support", [&] { return QualitySupport::make(s[0], s[1]); });
  }
  return c;
}

struct Instance {
  SenderWeighting s;
  ReceiverCdf r;
};

ReceiverCdf receiver_from(const Context& c) {
  const json& j = need(c.cfg, "receiver", "receiver");
  return at_key("receiver", [&] { return build_receiver(parse_family(j, "receiver"), c.support, c.knots); });
}

SenderWeighting apply_transform(const Context& c, SenderWeighting s, const ReceiverCdf& r) {
  const json& t = c.cfg.at("transform");
  const json& kind_j = need(t, "kind", "transform.kind");
  if (!kind_j.is_string()) throw ConfigError("config key 'transform.kind' must be a string");
  const auto kind = kind_j.get<std::string>();
  return at_key("transform", [&]() -> SenderWeighting {
    if (kind == "state_dependent") {
      return transform_state_dependent(s, as_quality_fn(parse_function(need(t, "alpha", "transform.alpha"), "transform.alpha")));
    }
    if (kind == "retail") {
      return transform_retail(r, as_quality_fn(parse_function(need(t, "pi", "transform.pi"), "transform.pi")));
    }
    if (kind == "peer_effects") {
      return transform_peer_effects(
          r, as_quality_fn(parse_function(need(t, "lambda2", "transform.lambda2"), "transform.lambda2")));
    }
    if (kind == "quadratic") {
      return transform_quadratic(
          r, as_quality_fn(parse_function(need(t, "lambda1", "transform.lambda1"), "transform.lambda1")),
          as_number(need(t, "lambda2", "transform.lambda2"), "transform.lambda2"));
    }
    throw ConfigError("config key 'transform.kind': unknown transform '" + kind + "'");
  });
}

Instance instance_from(const Context& c) {
  if (c.cfg.contains("group_mixture")) {
    const json& groups = need(c.cfg.at("group_mixture"), "groups", "group_mixture.groups");
    if (!groups.is_array() || groups.empty()) throw ConfigError("config key 'group_mixture.groups' must be a non-empty array");
    std::vector<GroupPrior> priors;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const std::string path = "group_mixture.groups[" + std::to_string(i) + "]";
      const double w = number_or(groups[i], "weight", 1.0, path + ".weight");
      const json& cdf = need(groups[i], "cdf", path + ".cdf");
      priors.push_back({w, at_key(path, [&] { return build_sender(parse_family(cdf, path + ".cdf"), c.support, c.knots); })});
    }
    auto [s, r] = at_key("group_mixture", [&] { return transform_group_mixture(priors); });
    return {std::move(s), std::move(r)};
  }
  auto r = receiver_from(c);
  const json& sj = need(c.cfg, "sender", "sender");
  SenderWeighting s;
  if ((sj.is_string() && sj.get<std::string>() == "receiver") ||
      (sj.is_object() && sj.contains("same_as") && sj.at("same_as") == "receiver")) {
    s = SenderWeighting::from_receiver(r);
  } else {
    bool normalize = true;
    if (sj.is_object() && sj.contains("normalize")) {
      if (!sj.at("normalize").is_boolean()) throw ConfigError("config key 'sender.normalize' must be a boolean");
      normalize = sj.at("normalize").get<bool>();
    }
    s = at_key("sender", [&] { return build_sender(parse_family(sj, "sender"), c.support, c.knots, normalize); });
  }
  if (c.cfg.contains("transform")) s = apply_transform(c, std::move(s), r);
  return {std::move(s), std::move(r)};
}

// ---------------------------------------------------------------- serialization

json check_json(const Check& ch) { return {{"ok", ch.ok}, {"margin", ch.margin}}; }

json categorization_json(const Categorization& a, const ReceiverCdf& r) {
  json pools = json::array();
  for (std::size_t i = 0; i < a.pools().size(); ++i) {
    const Pool& p = a.pools()[i];
    const Pool& z = a.percentile_pools()[i];
    pools.push_back({{"lo", p.lo}, {"hi", p.hi}, {"z_lo", z.lo}, {"z_hi", z.hi}, {"mean", r.conditional_mean(p.lo, p.hi)}});
  }
  return {{"pools", pools}, {"full_pooling", a.is_full_pooling()}, {"full_separation", a.is_full_separation()}};
}

json routes_json(const ValueRoutes& v) {
  return {{"direct", v.direct}, {"psi", v.psi}, {"ibp", v.ibp}, {"max_disagreement", v.max_disagreement()}};
}

json flip_json(const FlipReport& f, const ReceiverCdf& r, const ReceiverCdf& r_flip) {
  return {{"coverage", f.coverage},
          {"overlap", f.overlap},
          {"degenerate", f.degenerate},
          {"flipped_full_pooling", f.flipped_full_pooling},
          {"original", categorization_json(f.original, r)},
          {"flipped", categorization_json(f.flipped, r_flip)}};
}

json diagnostics_json(const DiagnosticsReport& d, const SenderWeighting& s, const ReceiverCdf& r) {
  json j;
  j["full_pooling_optimal"] = check_json(d.full_pooling);
  j["full_separation_optimal"] = check_json(d.full_separation);
  j["fosd_global"] = check_json(d.fosd_global);
  j["lr_dominance_global"] = check_json(d.lr_global);
  j["degenerate_affine"] = d.degenerate_affine;
  json stretches = json::array();
  for (const Pool& p : d.affine_stretches) stretches.push_back({p.lo, p.hi});
  j["affine_stretches"] = stretches;
  json iv = json::array();
  for (const auto& i : d.intervals) {
    iv.push_back({{"interval", {i.a, i.b}}, {"fosd", check_json(i.fosd)}, {"lr", check_json(i.lr)}});
  }
  j["intervals"] = iv;
  if (d.flip) {
    const auto r_flip = flip_problem(s, r).second;
    j["flip"] = flip_json(*d.flip, r, r_flip);
  } else {
    j["flip"] = {{"defined", false}, {"reason", d.flip_error}};
  }
  j["alternation_ok"] = d.alternation ? json(*d.alternation) : json("n/a");
  return j;
}

json flags_json(const PercentileCurve& curve) {
  json flags = json::array();
  if (is_globally_affine(curve, curve.tol)) flags.push_back("degenerate: H affine");
  if (!curve.affine_spans.empty()) flags.push_back("ties: H affine on separated stretches");
  return flags;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw NumericFailure("cannot write '" + p.string() + "'");
  out << text;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

std::vector<double> quality_grid(const PercentileCurve& curve, const ReceiverCdf& r) {
  std::vector<double> xs(curve.points());
  for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = r.inverse(curve.z[k]);
  xs.front() = r.support().lo;
  xs.back() = r.support().hi;
  return xs;
}

void write_curve_csv(const fs::path& p, const PercentileCurve& curve, const Categorization& a,
                     const SenderWeighting& s, const ReceiverCdf& r) {
  std::ostringstream os;
  os << "z,a,H,envelope,pooled,A,Psi\n";
  const PosteriorFunction post(a, r);
  const auto xs = quality_grid(curve, r);
  for (std::size_t k = 0; k < curve.points(); ++k) {
    const double x = xs[k];
    const int pooled = k < curve.cells() ? curve.pooled[k] : 0;
    os << fmt(curve.z[k]) << ',' << fmt(x) << ',' << fmt(curve.h[k]) << ',' << fmt(curve.env[k]) << ',' << pooled
       << ',' << fmt(post(x)) << ',' << fmt(psi_value(a, s, r, x)) << '\n';
  }
  write_text(p, os.str());
}

void write_svg(const fs::path& p, const PercentileCurve& curve, const std::string& title) {
  constexpr double W = 640, Hh = 480, L = 60, R = 20, T = 40, B = 50;
  double lo = std::min(0.0, *std::min_element(curve.h.begin(), curve.h.end()));
  double hi = std::max(1.0, *std::max_element(curve.h.begin(), curve.h.end()));
  auto px = [&](double z) { return L + z * (W - L - R); };
  auto py = [&](double h) { return Hh - B - (h - lo) / (hi - lo) * (Hh - T - B); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hh << "\" viewBox=\"0 0 " << W
     << ' ' << Hh << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << title << "</text>\n";
  for (auto [s, e] : curve.pool_spans) {
    os << "<rect x=\"" << fmt(px(curve.z[s])) << "\" y=\"" << T << "\" width=\"" << fmt(px(curve.z[e]) - px(curve.z[s]))
       << "\" height=\"" << Hh - T - B << "\" fill=\"#dbe6f4\"/>\n";
  }
  os << "<line x1=\"" << L << "\" y1=\"" << Hh - B << "\" x2=\"" << W - R << "\" y2=\"" << Hh - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << Hh - B << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W - R << "\" y=\"" << Hh - 15 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
     << "font-size=\"12\">z</text>\n";
  os << "<text x=\"15\" y=\"" << T + 10 << "\" font-family=\"sans-serif\" font-size=\"12\">H</text>\n";
  auto polyline = [&](const std::vector<double>& ys, const char* style) {
    os << "<polyline fill=\"none\" " << style << " points=\"";
    const std::size_t step = std::max<std::size_t>(1, curve.points() / 800);
    for (std::size_t k = 0; k < curve.points(); k += step) os << fmt(px(curve.z[k])) << ',' << fmt(py(ys[k])) << ' ';
    os << fmt(px(curve.z.back())) << ',' << fmt(py(ys.back())) << "\"/>\n";
  };
  polyline(curve.h, "stroke=\"#1f4e9c\" stroke-width=\"2\"");
  polyline(curve.env, "stroke=\"#c0392b\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"");
  os << "</svg>\n";
  write_text(p, os.str());
}

void write_sweep_csv(const fs::path& p, const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "gamma,lambda,a_tilde,full_pooling,payoff\n";
  for (const auto& r : rows) {
    os << fmt(r.gamma) << ',' << fmt(r.lambda) << ',' << fmt(r.a_tilde) << ',' << (r.full_pooling ? 1 : 0) << ','
       << fmt(r.payoff) << '\n';
  }
  write_text(p, os.str());
}

json sweep_row_json(const SweepRow& r) {
  return {{"gamma", r.gamma}, {"lambda", r.lambda}, {"a_tilde", r.a_tilde}, {"full_pooling", r.full_pooling},
          {"payoff", r.payoff}};
}

// ---------------------------------------------------------------- modes

json solve_report(const Context& c, const Instance& in, const Solution& sol) {
  json rep;
  rep["mode"] = c.mode;
  rep["seed"] = c.seed;
  rep["grid_n"] = c.grid_n;
  rep["support"] = {c.support.lo, c.support.hi};
  rep["categorization"] = categorization_json(sol.categorization, in.r);
  const auto routes = sender_value_routes(sol.categorization, in.s, in.r);
  rep["value"] = routes.direct;
  rep["values"] = routes_json(routes);
  rep["a_tilde"] = first_separating_quality(sol.curve, in.r);
  rep["flags"] = flags_json(sol.curve);
  rep["sender"] = {{"value_at_lo", in.s.value_at_lo()}, {"jump_at_lo", in.s.jump_at_lo()}, {"is_cdf", in.s.is_cdf()}};
  if (c.oracle_n > 0) {
    const auto o = dp_oracle(in.s, in.r, c.oracle_n);
    rep["oracle"] = {{"n", c.oracle_n},
                     {"value", o.value},
                     {"gap", routes.direct - o.value},
                     {"bound", 5.0 * c.support.width() / c.oracle_n},
                     {"categorization", categorization_json(o.categorization, in.r)}};
  }
  return rep;
}

void emit_curve(const Context& c, const Solution& sol, const Instance& in, const std::string& title) {
  write_curve_csv(c.out / "curve.csv", sol.curve, sol.categorization, in.s, in.r);
  if (c.svg) write_svg(c.out / "envelope.svg", sol.curve, title);
}

std::vector<std::pair<double, double>> intervals_from(const Context& c) {
  std::vector<std::pair<double, double>> out;
  if (!c.cfg.contains("intervals")) return out;
  const json& iv = c.cfg.at("intervals");
  if (!iv.is_array()) throw ConfigError("config key 'intervals' must be an array of [a, b] pairs");
  for (const auto& pair : iv) {
    const auto ab = number_list(pair, "intervals");
    if (ab.size() != 2) throw ConfigError("config key 'intervals' must be an array of [a, b] pairs");
    out.emplace_back(ab[0], ab[1]);
  }
  return out;
}

int run_solve(const Context& c, std::ostream& log, bool full_diagnostics) {
  const auto in = instance_from(c);
  const auto sol = solve(in.s, in.r, c.grid_n, c.tol_env);
  json rep = solve_report(c, in, sol);
  if (full_diagnostics) {
    const auto intervals = intervals_from(c);
    const auto d = at_key("intervals", [&] { return diagnose(in.s, in.r, sol, intervals, c.grid_n); });
    rep["diagnostics"] = diagnostics_json(d, in.s, in.r);
  } else {
    rep["diagnostics"] = {{"full_pooling_optimal", check_json(check_full_pooling(in.s, in.r, c.grid_n, c.tol_env))},
                          {"full_separation_optimal",
                           check_json(check_full_separation(in.s, in.r, c.grid_n, c.tol_env))},
                          {"degenerate_affine", is_globally_affine(sol.curve, c.tol_env)}};
  }
  write_json(c.out / "report.json", rep);
  emit_curve(c, sol, in, "H and its lower convex envelope");
  log << "value " << fmt(rep["value"].get<double>()) << " with " << sol.categorization.pools().size() << " pool(s)\n";
  return kOk;
}

int run_flip(const Context& c, std::ostream& log) {
  const auto in = instance_from(c);
  const auto f = flip_report(in.s, in.r, c.grid_n);
  const auto r_flip = flip_problem(in.s, in.r).second;
  const auto sol = solve(in.s, in.r, c.grid_n, c.tol_env);
  json rep = solve_report(c, in, sol);
  rep["flip"] = flip_json(f, in.r, r_flip);
  write_json(c.out / "report.json", rep);
  emit_curve(c, sol, in, "H and its lower convex envelope");
  log << "coverage " << fmt(f.coverage) << " overlap " << fmt(f.overlap) << '\n';
  return kOk;
}

SchoolingConfig school_config(const Context& c, const json& sj) {
  SchoolingConfig cfg{
      at_key("school.f0", [&] { return build_sender(parse_family(need(sj, "f0", "school.f0"), "school.f0"), c.support, c.knots); }),
      c.cfg.contains("receiver") ? receiver_from(c)
                                 : build_receiver(FamilySpec::uniform(), c.support, c.knots),
      parse_function(need(sj, "cost", "school.cost"), "school.cost"),
      as_number(need(sj, "lambda", "school.lambda"), "school.lambda"),
      number_or(sj, "sigma", 0.0, "school.sigma"),
      c.knots};
  if (cfg.lambda < 0.0) throw ConfigError("config key 'school.lambda' must be >= 0");
  if (cfg.sigma < 0.0 || cfg.sigma > 1.0) throw ConfigError("config key 'school.sigma' must lie in [0, 1]");
  if (!cfg.f0.is_cdf()) throw ConfigError("config key 'school.f0' must describe a continuous cdf with F0(lo) = 0");
  return cfg;
}

int run_school(const Context& c, std::ostream& log) {
  const json& sj = need(c.cfg, "school", "school");
  if (sj.contains("closed_form")) {
    const json& cf = sj.at("closed_form");
    const double gamma = as_number(need(cf, "gamma", "school.closed_form.gamma"), "school.closed_form.gamma");
    const double lambda = as_number(need(cf, "lambda", "school.closed_form.lambda"), "school.closed_form.lambda");
    const std::vector<double> g{gamma};
    const std::vector<double> l{lambda};
    const auto rows = at_key("school.closed_form", [&] { return censorship_threshold_sweep(g, l, c.grid_n); });
    const Instance in{closed_form_sender(gamma, lambda, c.knots),
                      build_receiver(FamilySpec::uniform(), QualitySupport::make(0.0, 1.0), c.knots)};
    const auto sol = solve(in.s, in.r, c.grid_n, c.tol_env);
    json rep = solve_report(c, in, sol);
    rep["school"] = sweep_row_json(rows.front());
    write_json(c.out / "report.json", rep);
    write_sweep_csv(c.out / "sweep.csv", rows);
    emit_curve(c, sol, in, "Induced H, closed form");
    log << "a_tilde " << fmt(rows.front().a_tilde) << '\n';
    return kOk;
  }

  const auto cfg = school_config(c, sj);
  const auto ss = solve_school(cfg, c.grid_n);
  const int samples = int_or(sj, "ic_samples", 10000);
  const double ic = verify_ic(ss.learning, ss.solution.categorization, cfg, samples, c.seed);
  const Instance in{ss.induced.s, cfg.r};
  json rep = solve_report(c, in, ss.solution);
  json jumps = json::array();
  for (const auto& j : ss.learning.jumps(1e-12)) jumps.push_back({{"at", j.at}, {"size", j.size}});
  rep["school"] = {{"intrinsic_learning_value", ss.induced.intrinsic},
                   {"K", ss.induced.k},
                   {"S_lo", ss.induced.s.value_at_lo()},
                   {"jump_at_lo", ss.induced.s.jump_at_lo()},
                   {"learning_at_lo", ss.learning.at_lo()},
                   {"learning_jumps", jumps},
                   {"payoff", ss.payoff},
                   {"value_plus_K", ss.value_plus_k},
                   {"identity_residual", std::abs(ss.payoff - ss.value_plus_k)},
                   {"ic_violation", ic},
                   {"ic_ok", ic <= c.tol_ic},
                   {"full_pooling_condition", check_json(check_school_full_pooling(cfg))}};
  write_json(c.out / "report.json", rep);
  emit_curve(c, ss.solution, in, "Induced H for the grading problem");
  log << "payoff " << fmt(ss.payoff) << " ic violation " << fmt(ic) << '\n';
  return kOk;
}

int run_sweep(const Context& c, std::ostream& log) {
  const json& sj = need(c.cfg, "sweep", "sweep");
  const auto gammas = number_list(need(sj, "gammas", "sweep.gammas"), "sweep.gammas");
  const auto lambdas = number_list(need(sj, "lambdas", "sweep.lambdas"), "sweep.lambdas");
  const auto rows = at_key("sweep", [&] { return censorship_threshold_sweep(gammas, lambdas, c.grid_n); });
  write_sweep_csv(c.out / "sweep.csv", rows);

  const std::size_t cols = lambdas.size();
  bool nonincreasing = true;
  for (std::size_t gi = 1; gi < gammas.size(); ++gi) {
    for (std::size_t li = 0; li < cols; ++li) {
      if (rows[gi * cols + li].a_tilde > rows[(gi - 1) * cols + li].a_tilde + 1e-12) nonincreasing = false;
    }
  }
  json reversal = json::object();
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    bool down = false;
    bool up_after_down = false;
    for (std::size_t li = 1; li < cols; ++li) {
      const double d = rows[gi * cols + li].a_tilde - rows[gi * cols + li - 1].a_tilde;
      if (d < -1e-12) down = true;
      if (d > 1e-12 && down) up_after_down = true;
    }
    reversal[fmt(gammas[gi])] = up_after_down;
  }
  json rj = json::array();
  for (const auto& r : rows) rj.push_back(sweep_row_json(r));
  write_json(c.out / "report.json", {{"mode", c.mode},
                                     {"rows", rj},
                                     {"a_tilde_nonincreasing_in_gamma", nonincreasing},
                                     {"lambda_profile_reversal", reversal}});
  log << rows.size() << " sweep rows\n";
  return kOk;
}

// ---------------------------------------------------------------- verify

struct VerifyRow {
  std::string name;
  double measured = 0.0;
  double target = 0.0;
  std::string relation;
  bool pass = false;
  double tol = 0.0;  // golden rows only
};

struct Bundled {
  std::string name;
  SenderWeighting s;
  ReceiverCdf r;
};

std::vector<Bundled> bundled_instances(const QualitySupport& sup) {
  std::vector<Bundled> out;
  auto add = [&](std::string name, const FamilySpec& sf, const FamilySpec& rf) {
    out.push_back({std::move(name), build_sender(sf, sup), build_receiver(rf, sup)});
  };
  add("intro_0.05", FamilySpec::uniform_interval(0.70, 0.80), FamilySpec::uniform());
  add("intro_0.10", FamilySpec::uniform_interval(0.65, 0.85), FamilySpec::uniform());
  add("concave_h", FamilySpec::uniform(), FamilySpec::power(2.0));
  add("convex_h", FamilySpec::power(2.0), FamilySpec::uniform());
  add("reverse_logistic", FamilySpec::reverse_logistic(0.05, 1.5), FamilySpec::exponential(1.0));
  add("logistic_mixture",
      FamilySpec::mixture({{0.6, FamilySpec::logistic(0.3, 0.08)}, {0.4, FamilySpec::power(3.0)}}),
      FamilySpec::sine_wave(0.4, 2.0));
  return out;
}

int run_verify(const Context& c, std::ostream& log, std::ostream& err) {
  const json vj = c.cfg.contains("verify") ? c.cfg.at("verify") : json::object();
  const int random_count = int_or(vj, "random", 200);
  std::map<std::string, double> goldens{{"value.intro_0.05", 0.85},   {"value.intro_0.10", 0.825},
                                        {"value.full_pooling", 0.5},  {"value.full_separation", 0.75},
                                        {"value.concave_h", 2.0 / 3.0}};
  std::map<std::string, double> golden_tol{{"value.intro_0.05", 2e-3},   {"value.intro_0.10", 2e-3},
                                           {"value.full_pooling", 1e-6}, {"value.full_separation", 1e-3},
                                           {"value.concave_h", 2e-3}};
  if (vj.contains("goldens")) {
    for (const auto& [k, v] : vj.at("goldens").items()) {
      if (!goldens.count(k)) throw ConfigError("config key 'verify.goldens." + k + "': unknown golden");
      goldens[k] = as_number(v, "verify.goldens." + k);
    }
  }

  const auto sup = QualitySupport::make(0.0, 1.0);
  const auto instances = bundled_instances(sup);
  std::vector<VerifyRow> rows;
  auto golden_row = [&](const std::string& name, double measured) {
    const double g = goldens.at(name);
    const double tol = golden_tol.at(name);
    rows.push_back({name, measured, g, "~", std::abs(measured - g) <= tol, tol});
  };

  double worst_routes = 0.0;
  for (const auto& inst : instances) {
    const auto sol = solve(inst.s, inst.r, c.grid_n, c.tol_env);
    const double v = sender_value(sol.categorization, inst.s, inst.r);
    if (inst.name == "intro_0.05" || inst.name == "intro_0.10" || inst.name == "concave_h") {
      golden_row("value." + inst.name, v);
    }
    if (inst.name == "intro_0.05") {
      golden_row("value.full_pooling", sender_value(Categorization::full_pooling(inst.r), inst.s, inst.r));
      golden_row("value.full_separation", sender_value(Categorization::full_separation(inst.r), inst.s, inst.r));
    }
    if (c.oracle_n > 0) {
      const auto o = dp_oracle(inst.s, inst.r, c.oracle_n);
      const double bound = 5.0 * sup.width() / c.oracle_n;
      rows.push_back({"oracle." + inst.name, std::abs(v - o.value), bound, "<=", std::abs(v - o.value) <= bound});
    }
    std::vector<Categorization> others;
    others.reserve(static_cast<std::size_t>(random_count));
    for (int k = 0; k < random_count; ++k) {
      others.push_back(random_categorization(inst.r, c.seed * 1000003u + static_cast<std::uint64_t>(k), 4, c.grid_n));
    }
    const auto values = sender_values(others, inst.s, inst.r);
    const double best_random = values.empty() ? -1e300 : *std::max_element(values.begin(), values.end());
    rows.push_back({"optimality." + inst.name, v - best_random, -c.tol_val, ">=", v - best_random >= -c.tol_val});
    const auto grid = quality_grid(sol.curve, inst.r);
    const double margin = psi_dominance_margin(sol.categorization, others, inst.s, inst.r, grid);
    rows.push_back({"psi_dominance." + inst.name, margin, -c.tol_env, ">=", margin >= -c.tol_env});
    worst_routes = std::max(worst_routes, sender_value_routes(sol.categorization, inst.s, inst.r).max_disagreement());
    for (const auto& a : others) {
      worst_routes = std::max(worst_routes, sender_value_routes(a, inst.s, inst.r).max_disagreement());
    }
  }
  rows.push_back({"value_routes", worst_routes, c.tol_val, "<=", worst_routes <= c.tol_val});

  const auto school_sup = QualitySupport::make(1e-3, 1.0);
  const SchoolingConfig school{build_sender(FamilySpec::power(0.5), school_sup),
                               build_receiver(FamilySpec::uniform(), school_sup), ScalarFunction::inverse(1.0), 0.8,
                               0.0};
  const auto ss = solve_school(school, c.grid_n);
  const double ic = verify_ic(ss.learning, ss.solution.categorization, school, 10000, c.seed);
  rows.push_back({"school.ic", ic, c.tol_ic, "<=", ic <= c.tol_ic});
  const double resid = std::abs(ss.payoff - ss.value_plus_k);
  rows.push_back({"school.identity", resid, 1e-5, "<=", resid <= 1e-5});

  bool all = true;
  char line[160];
  std::snprintf(line, sizeof line, "%-30s %-20s %-3s %-24s %s\n", "check", "measured", "", "target", "result");
  log << line;
  for (const auto& r : rows) {
    const std::string target = r.tol > 0.0 ? fmt(r.target) + " +- " + fmt(r.tol) : fmt(r.target);
    std::snprintf(line, sizeof line, "%-30s %-20s %-3s %-24s %s\n", r.name.c_str(), fmt(r.measured).c_str(),
                  r.relation.c_str(), target.c_str(), r.pass ? "PASS" : "FAIL");
    log << line;
    if (!r.pass) {
      err << "verify: FAIL " << r.name << " (measured " << fmt(r.measured) << ", target " << fmt(r.target) << ")\n";
      all = false;
    }
  }
  json rj = json::array();
  for (const auto& r : rows) {
    rj.push_back({{"check", r.name}, {"measured", r.measured}, {"target", r.target}, {"pass", r.pass}});
  }
  write_json(c.out / "report.json", {{"mode", c.mode}, {"seed", c.seed}, {"rows", rj}, {"all_pass", all}});
  return all ? kOk : kNumericFailure;
}

}  // namespace

int run(const RunOptions& opts, std::ostream& log, std::ostream& err) {
  try {
    const Context c = make_context(opts);
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec) throw NumericFailure("cannot create output directory '" + c.out.string() + "'");
    if (c.mode == "solve") return run_solve(c, log, false);
    if (c.mode == "diagnose") return run_solve(c, log, true);
    if (c.mode == "flip") return run_flip(c, log);
    if (c.mode == "school") return run_school(c, log);
    if (c.mode == "sweep") return run_sweep(c, log);
    return run_verify(c, log, err);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const json::exception& e) {
    err << "error: config: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const NumericFailure& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumericFailure;
  }
}

}  // namespace monocat::cli
