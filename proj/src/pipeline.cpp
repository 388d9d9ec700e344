// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
#include "qchaos/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qchaos/error.hpp"
#include "qchaos/parallel.hpp"

namespace qchaos {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr std::pair<RunMode, const char*> kModes[] = {
    {RunMode::kClassicalOtoc, "classical-otoc"}, {RunMode::kQuantumOtoc, "quantum-otoc"},
    {RunMode::kClassicalM2, "classical-m2"},     {RunMode::kQuantumM2, "quantum-m2"},
    {RunMode::kSpectrum, "spectrum"},            {RunMode::kMqc, "mqc"},
    {RunMode::kScan, "scan"},                    {RunMode::kFit, "fit"},
};

}  // namespace

const char* to_string(RunMode mode) {
  for (const auto& [m, s] : kModes) {
    if (m == mode) return s;
  }
  return "unknown";
}

RunMode parse_run_mode(const std::string& s) {
  for (const auto& [m, name] : kModes) {
    if (s == name) return m;
  }
  throw ConfigError("unknown mode '" + s + "'");
}

std::vector<double> TimeGridSpec::build() const {
  return log_spacing ? log_grid(t_min, t_max, n_samples, true) : linear_grid(t_max, n_samples);
}

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

// Strict object reader: every key must be consumed.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  ~Obj() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw ConfigError(path_ + "." + k + ": unknown key");
    }
  }
  bool has(const std::string& k) const { return j_.contains(k); }
  const json* get(const std::string& k) {
    used_.insert(k);
    return j_.contains(k) ? &j_.at(k) : nullptr;
  }
  std::string path(const std::string& k) const { return path_ + "." + k; }

  void num(const std::string& k, double& out) {
    if (auto v = get(k)) {
      if (!v->is_number()) throw ConfigError(path(k) + ": expected a number");
      out = v->get<double>();
    }
  }
  void integer(const std::string& k, int& out) {
    if (auto v = get(k)) {
      if (!v->is_number_integer()) throw ConfigError(path(k) + ": expected an integer");
      out = v->get<int>();
    }
  }
  void u64(const std::string& k, std::uint64_t& out) {
    if (auto v = get(k)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
        throw ConfigError(path(k) + ": expected a nonnegative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }
  void boolean(const std::string& k, bool& out) {
    if (auto v = get(k)) {
      if (!v->is_boolean()) throw ConfigError(path(k) + ": expected true or false");
      out = v->get<bool>();
    }
  }
  void str(const std::string& k, std::string& out) {
    if (auto v = get(k)) {
      if (!v->is_string()) throw ConfigError(path(k) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  std::vector<double> numbers(const std::string& k, std::size_t exact = 0) {
    const json* v = get(k);
    if (!v->is_array()) throw ConfigError(path(k) + ": expected an array");
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) throw ConfigError(path(k) + ": expected numbers");
      out.push_back(e.get<double>());
    }
    if (exact && out.size() != exact) {
      throw ConfigError(path(k) + ": expected " + std::to_string(exact) + " numbers");
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Vec2 vec2(Obj& o, const std::string& k) {
  const auto v = o.numbers(k, 2);
  return {v[0], v[1]};
}

PhasePoint point_from(const json& e, const std::string& path) {
  if (!e.is_array() || e.size() != 4) throw ConfigError(path + ": a center is [q1, q2, p1, p2]");
  std::array<double, 4> v{};
  for (int i = 0; i < 4; ++i) {
    if (!e[i].is_number()) throw ConfigError(path + ": center components must be numbers");
    v[i] = e[i].get<double>();
  }
  return {{v[0], v[1]}, {v[2], v[3]}};
}

void parse_model(const json& j, RunConfig& cfg) {
  Obj o(j, "model");
  std::string kind = "quartic";
  o.str("kind", kind);
  double beta = 1.0, coupling = 0.5, omega = 1.0;
  o.num("beta", beta);
  o.num("coupling", coupling);
  o.num("omega", omega);
  if (kind == "quartic") {
    cfg.model = ModelParams::quartic(beta, coupling);
  } else if (kind == "harmonic") {
    cfg.model = ModelParams::harmonic(omega);
  } else if (kind == "polynomial") {
    cfg.model = ModelParams{};
    cfg.model.beta = beta;
    cfg.model.coupling = coupling;
    const json* terms = o.get("terms");
    if (!terms || !terms->is_array()) throw ConfigError("model.terms: expected an array of [j, k, c]");
    for (const auto& t : *terms) {
      if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() || !t[1].is_number_integer() ||
          !t[2].is_number()) {
        throw ConfigError("model.terms: each term is [j, k, c] with integer j, k");
      }
      cfg.model.potential_terms.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<double>()});
    }
  } else {
    throw ConfigError("model.kind: expected quartic, harmonic or polynomial");
  }
  if (kind != "polynomial" && o.has("terms")) throw ConfigError("model.terms: only valid with kind polynomial");
  if (kind != "harmonic" && o.has("omega")) throw ConfigError("model.omega: only valid with kind harmonic");
}

void parse_propagator(const json& j, PropagatorSpec& p) {
  Obj o(j, "propagator");
  std::string method = "auto";
  o.str("method", method);
  if (method == "auto") {
    p.method = PropagationMethod::kAuto;
  } else if (method == "krylov") {
    p.method = PropagationMethod::kKrylov;
  } else if (method == "spectral") {
    p.method = PropagationMethod::kSpectral;
  } else {
    throw ConfigError("propagator.method: expected auto, krylov or spectral");
  }
  o.num("dt", p.dt);
  o.integer("krylov_dim", p.krylov_dim);
  o.num("tol", p.tol);
  int block = static_cast<int>(p.spectral_max_block);
  o.integer("spectral_max_block", block);
  p.spectral_max_block = block;
}

void parse_spectrum(const json& j, RunConfig& cfg) {
  Obj o(j, "spectrum");
  auto& s = cfg.spectrum;
  if (const json* v = o.get("sectors")) {
    if (!v->is_array() || v->empty()) throw ConfigError("spectrum.sectors: expected a nonempty array");
    s.sectors.clear();
    for (const auto& e : *v) {
      if (!e.is_string()) throw ConfigError("spectrum.sectors: expected labels such as \"ee+\"");
      try {
        s.sectors.push_back(SymmetrySector::parse(e.get<std::string>()));
      } catch (const InvalidArgument& ex) {
        throw ConfigError(std::string("spectrum.sectors: ") + ex.what());
      }
    }
  }
  o.integer("n_max", s.n_max);
  o.integer("convergence_step", s.convergence_step);
  o.num("convergence_tol", s.convergence_tol);
  o.integer("poly_degree", s.unfold.poly_degree);
  o.num("edge_fraction", s.unfold.edge_fraction);
  o.integer("bins", s.bins);
  o.num("s_max", s.s_max);
}

void parse_fit(const json& j, FitSpec& f) {
  Obj o(j, "fit");
  std::string law = to_string(f.law);
  o.str("law", law);
  try {
    f.law = parse_growth_law(law);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("fit.law: ") + e.what());
  }
  if (o.has("window")) {
    const auto w = o.numbers("window", 2);
    f.window = std::pair{w[0], w[1]};
  }
  o.num("tail_fraction", f.saturation.tail_fraction);
  o.num("max_tail_slope", f.saturation.max_tail_slope);
  o.str("input", f.input);
  o.str("column", f.column);
  o.boolean("log_space", f.log_space);
}

}  // namespace

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  try {
    model.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  require(hbar > 0.0 && std::isfinite(hbar), "hbar must be positive");
  require(shell.de > 0.0, "shell.de must be positive");
  require(shell.n_centers > 0, "shell.n_centers must be positive");
  require(ensemble_samples > 0, "ensemble.n_samples must be positive");
  require(times.t_max > 0.0, "times.t_max must be positive");
  require(times.n_samples >= 2, "times.n_samples must be at least 2");
  require(!times.log_spacing || (times.t_min > 0.0 && times.t_min < times.t_max),
          "times.t_min must be in (0, t_max) for log spacing");
  require(integrator.dt > 0.0, "integrator.dt must be positive");
  require(integrator.max_rel_drift > 0.0, "integrator.max_rel_drift must be positive");
  require(integrator.max_halvings >= 0, "integrator.max_halvings must be nonnegative");
  require(propagator.dt > 0.0, "propagator.dt must be positive");
  require(propagator.krylov_dim >= 2, "propagator.krylov_dim must be at least 2");
  require(propagator.tol > 0.0, "propagator.tol must be positive");
  require(propagator.spectral_max_block > 0, "propagator.spectral_max_block must be positive");
  require(n_max >= 0, "basis.n_max must be nonnegative");
  require(batch > 0, "quantum.batch must be positive");
  require(spectrum.n_max > 0, "spectrum.n_max must be positive");
  require(spectrum.convergence_step > 0 && spectrum.convergence_step % 2 == 0,
          "spectrum.convergence_step must be positive and even");
  require(spectrum.convergence_tol > 0.0, "spectrum.convergence_tol must be positive");
  require(spectrum.unfold.poly_degree >= 1, "spectrum.poly_degree must be at least 1");
  require(spectrum.unfold.edge_fraction >= 0.0 && spectrum.unfold.edge_fraction < 0.5,
          "spectrum.edge_fraction must be in [0, 0.5)");
  require(spectrum.bins >= 1 && spectrum.s_max > 0.0, "spectrum.bins and spectrum.s_max must be positive");
  if (mqc_grid) require(mqc_grid->n1 >= 1 && mqc_grid->n2 >= 1, "mqc.grid entries must be positive");
  require(fit.saturation.tail_fraction > 0.0 && fit.saturation.tail_fraction <= 1.0,
          "fit.tail_fraction must be in (0, 1]");
  require(fit.saturation.max_tail_slope > 0.0, "fit.max_tail_slope must be positive");
  if (fit.window) require(fit.window->second > fit.window->first, "fit.window must be increasing");
  for (double b : scan.betas) require(b > 0.0, "scan.betas must be positive");
  require(scan.spectrum_hbar >= 0.0, "scan.spectrum_hbar must be nonnegative");
  require(threads >= 1, "threads must be at least 1");
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  try {
    Obj o(j, "config");
    if (const json* m = o.get("mode")) {
      if (!m->is_string()) throw ConfigError("config.mode: expected a string");
      cfg.mode = parse_run_mode(m->get<std::string>());
    }
    if (const json* m = o.get("model")) parse_model(*m, cfg);
    o.num("hbar", cfg.hbar);
    if (const json* s = o.get("shell")) {
      Obj so(*s, "shell");
      so.num("e0", cfg.shell.e0);
      so.num("de", cfg.shell.de);
      so.integer("n_centers", cfg.shell.n_centers);
      if (so.has("q_max")) cfg.shell.q_max = vec2(so, "q_max");
      if (so.has("p_max")) cfg.shell.p_max = vec2(so, "p_max");
    }
    if (const json* c = o.get("centers")) {
      if (!c->is_array() || c->empty()) throw ConfigError("config.centers: expected a nonempty array");
      for (std::size_t i = 0; i < c->size(); ++i) {
        cfg.centers.push_back(point_from((*c)[i], "config.centers[" + std::to_string(i) + "]"));
      }
    }
    if (const json* e = o.get("ensemble")) {
      Obj eo(*e, "ensemble");
      eo.integer("n_samples", cfg.ensemble_samples);
    }
    if (const json* t = o.get("times")) {
      Obj to(*t, "times");
      to.num("t_max", cfg.times.t_max);
      to.integer("n_samples", cfg.times.n_samples);
      to.num("t_min", cfg.times.t_min);
      std::string spacing = "linear";
      to.str("spacing", spacing);
      if (spacing != "linear" && spacing != "log") throw ConfigError("times.spacing: expected linear or log");
      cfg.times.log_spacing = spacing == "log";
    }
    if (const json* i = o.get("integrator")) {
      Obj io(*i, "integrator");
      io.num("dt", cfg.integrator.dt);
      io.num("max_rel_drift", cfg.integrator.max_rel_drift);
      io.integer("max_halvings", cfg.integrator.max_halvings);
    }
    if (const json* p = o.get("propagator")) parse_propagator(*p, cfg.propagator);
    if (const json* b = o.get("basis")) {
      Obj bo(*b, "basis");
      bo.integer("n_max", cfg.n_max);
    }
    if (const json* q = o.get("quantum")) {
      Obj qo(*q, "quantum");
      qo.num("max_edge_population", cfg.max_edge_population);
      qo.integer("batch", cfg.batch);
    }
    if (const json* s = o.get("spectrum")) parse_spectrum(*s, cfg);
    if (const json* m = o.get("mqc")) {
      Obj mo(*m, "mqc");
      if (mo.has("grid")) {
        const auto g = mo.numbers("grid", 2);
        cfg.mqc_grid = PhaseGrid{static_cast<int>(g[0]), static_cast<int>(g[1])};
      }
    }
    if (const json* f = o.get("fit")) parse_fit(*f, cfg.fit);
    if (const json* s = o.get("scan")) {
      Obj so(*s, "scan");
      if (so.has("betas")) cfg.scan.betas = so.numbers("betas");
      so.boolean("otoc", cfg.scan.otoc);
      so.boolean("delta", cfg.scan.delta);
      so.num("spectrum_hbar", cfg.scan.spectrum_hbar);
    }
    o.u64("seed", cfg.seed);
    o.integer("threads", cfg.threads);
    o.boolean("subtract_t0", cfg.subtract_t0);
    o.boolean("svg", cfg.svg);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

namespace {

const char* method_name(PropagationMethod m) {
  switch (m) {
    case PropagationMethod::kKrylov:
      return "krylov";
    case PropagationMethod::kSpectral:
      return "spectral";
    default:
      return "auto";
  }
}

json canonical_json(const RunConfig& c) {
  json j;
  j["mode"] = c.mode ? json(to_string(*c.mode)) : json(nullptr);
  json terms = json::array();
  for (const auto& t : c.model.potential_terms) terms.push_back({t.j, t.k, t.c});
  j["model"] = {{"kind", "polynomial"}, {"beta", c.model.beta}, {"coupling", c.model.coupling}, {"terms", terms}};
  j["hbar"] = c.hbar;
  j["shell"] = {{"e0", c.shell.e0},
                {"de", c.shell.de},
                {"n_centers", c.shell.n_centers},
                {"q_max", {c.shell.q_max[0], c.shell.q_max[1]}},
                {"p_max", {c.shell.p_max[0], c.shell.p_max[1]}}};
  json centers = json::array();
  for (const auto& p : c.centers) centers.push_back({p.q[0], p.q[1], p.p[0], p.p[1]});
  j["centers"] = centers;
  j["ensemble"] = {{"n_samples", c.ensemble_samples}};
  j["times"] = {{"t_max", c.times.t_max},
                {"n_samples", c.times.n_samples},
                {"spacing", c.times.log_spacing ? "log" : "linear"},
                {"t_min", c.times.t_min}};
  j["integrator"] = {{"dt", c.integrator.dt},
                     {"max_rel_drift", c.integrator.max_rel_drift},
                     {"max_halvings", c.integrator.max_halvings}};
  j["propagator"] = {{"method", method_name(c.propagator.method)},
                     {"dt", c.propagator.dt},
                     {"krylov_dim", c.propagator.krylov_dim},
                     {"tol", c.propagator.tol},
                     {"spectral_max_block", c.propagator.spectral_max_block}};
  j["basis"] = {{"n_max", c.n_max}};
  j["quantum"] = {{"max_edge_population", c.max_edge_population}, {"batch", c.batch}};
  json sectors = json::array();
  for (const auto& s : c.spectrum.sectors) sectors.push_back(s.label());
  j["spectrum"] = {{"sectors", sectors},
                   {"n_max", c.spectrum.n_max},
                   {"convergence_step", c.spectrum.convergence_step},
                   {"convergence_tol", c.spectrum.convergence_tol},
                   {"poly_degree", c.spectrum.unfold.poly_degree},
                   {"edge_fraction", c.spectrum.unfold.edge_fraction},
                   {"bins", c.spectrum.bins},
                   {"s_max", c.spectrum.s_max}};
  j["mqc"] = json::object();
  if (c.mqc_grid) j["mqc"]["grid"] = {c.mqc_grid->n1, c.mqc_grid->n2};
  j["fit"] = {{"law", to_string(c.fit.law)},
              {"tail_fraction", c.fit.saturation.tail_fraction},
              {"max_tail_slope", c.fit.saturation.max_tail_slope},
              {"input", c.fit.input},
              {"column", c.fit.column},
              {"log_space", c.fit.log_space}};
  if (c.fit.window) j["fit"]["window"] = {c.fit.window->first, c.fit.window->second};
  j["scan"] = {{"betas", c.scan.betas},
               {"otoc", c.scan.otoc},
               {"delta", c.scan.delta},
               {"spectrum_hbar", c.scan.spectrum_hbar}};
  j["seed"] = c.seed;
  j["subtract_t0"] = c.subtract_t0;
  return j;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string canonical_config(const RunConfig& cfg) { return canonical_json(cfg).dump(); }

std::string config_hash(const RunConfig& cfg) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(canonical_config(cfg));
  return os.str();
}

// ---------------------------------------------------------------------------
// Output

namespace {

struct Provenance {
  std::string mode;
  std::string hash;
  std::uint64_t seed;

  json to_json() const {
    return {{"toolkit", "qchaos"}, {"version", QCHAOS_VERSION}, {"mode", mode}, {"config_hash", hash}, {"seed", seed}};
  }
};

void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f << content;
    if (!f) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

class Csv {
 public:
  Csv(const Provenance& prov, std::vector<std::string> columns) : ncols_(columns.size()) {
    os_ << "# qchaos " << QCHAOS_VERSION << "\n# mode: " << prov.mode << "\n# config_hash: " << prov.hash
        << "\n# seed: " << prov.seed << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
    os_ << "\n";
  }
  Csv& cell(double v) { return sep() << format_double(v), *this; }
  Csv& cell(long v) { return sep() << v, *this; }
  Csv& cell(int v) { return sep() << v, *this; }
  Csv& cell(const std::string& v) { return sep() << v, *this; }
  void end() {
    if (col_ != ncols_) throw std::logic_error("csv row width mismatch");
    os_ << "\n";
    col_ = 0;
  }
  void save(const fs::path& p) const { write_file(p, os_.str()); }

 private:
  std::ostream& sep() {
    if (col_++) os_ << ",";
    return os_;
  }
  std::ostringstream os_;
  std::size_t ncols_;
  std::size_t col_ = 0;
};

struct SvgGuide {
  double t0, t1, slope, intercept;
  bool power;
};

// Line chart of a log-space series; power-law guides are drawn against ln t.
std::string svg_chart(const Provenance& prov, const std::string& title, const TimeSeries& s,
                      const std::optional<SvgGuide>& guide) {
  const double w = 640, h = 400, ml = 60, mr = 20, mt = 40, mb = 50;
  const bool logx = guide && guide->power;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (logx && !(s.times[i] > 0.0)) continue;
    xs.push_back(logx ? std::log(s.times[i]) : s.times[i]);
    ys.push_back(s.values[i]);
  }
  if (xs.size() < 2) return {};
  const auto [x0, x1] = std::minmax_element(xs.begin(), xs.end());
  const auto [y0, y1] = std::minmax_element(ys.begin(), ys.end());
  const double xa = *x0, xb = *x1 > *x0 ? *x1 : *x0 + 1, ya = *y0, yb = *y1 > *y0 ? *y1 : *y0 + 1;
  auto px = [&](double x) { return ml + (x - xa) / (xb - xa) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - ya) / (yb - ya) * (h - mt - mb); };
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!-- qchaos " << QCHAOS_VERSION << " mode " << prov.mode
     << " config_hash " << prov.hash << " seed " << prov.seed << " -->\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << title << "</text>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\"" << h - mb
     << "\" stroke=\"black\"/>\n<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
     << "\" stroke=\"black\"/>\n";
  auto label = [&](double x, double y, const std::string& anchor, double v) {
    os << "<text x=\"" << x << "\" y=\"" << y << "\" text-anchor=\"" << anchor
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << v << "</text>\n";
  };
  label(ml, h - mb + 16, "middle", xa);
  label(w - mr, h - mb + 16, "middle", xb);
  label(ml - 6, h - mb, "end", ya);
  label(ml - 6, mt + 4, "end", yb);
  os << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"12\">" << (logx ? "ln t" : "t") << "</text>\n";
  os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) os << px(xs[i]) << "," << py(ys[i]) << " ";
  os << "\"/>\n";
  if (guide) {
    const double a = logx ? std::log(std::max(guide->t0, 1e-300)) : guide->t0;
    const double b = logx ? std::log(guide->t1) : guide->t1;
    os << "<line x1=\"" << px(a) << "\" y1=\"" << py(guide->intercept + guide->slope * a) << "\" x2=\"" << px(b)
       << "\" y2=\"" << py(guide->intercept + guide->slope * b)
       << "\" stroke=\"#d62728\" stroke-dasharray=\"6,4\" stroke-width=\"1.5\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

json fit_json(const GrowthFit& f) {
  return {{"law", to_string(f.law)},
          {"rate_or_exponent", f.rate_or_exponent},
          {"intercept", f.intercept},
          {"window", {f.window.first, f.window.second}},
          {"r_squared", f.r_squared},
          {"n_points", f.n_points}};
}

json saturation_json(const Saturation& s) {
  return {{"t_star", s.t_star}, {"v_bar", s.v_bar}, {"sat", s.sat}, {"tail_slope", s.tail_slope}};
}

struct Analysis {
  json summary;
  std::optional<GrowthFit> fit;
  std::optional<Saturation> sat;
};

Analysis analyze(const TimeSeries& log_series, const FitSpec& spec) {
  Analysis a;
  try {
    a.fit = fit_growth(log_series, spec.law, spec.window, spec.saturation);
    a.summary["fit"] = fit_json(*a.fit);
  } catch (const Error& e) {
    a.summary["fit"] = {{"error", e.what()}};
  }
  try {
    a.sat = saturation_velocity(log_series, spec.saturation);
    a.summary["saturation"] = saturation_json(*a.sat);
  } catch (const Error& e) {
    a.summary["saturation"] = {{"error", e.what()}};
  }
  return a;
}

void write_series(const fs::path& dir, const Provenance& prov, const TimeSeries& log_series,
                  const std::vector<TimeSeries>& members, const std::string& observable) {
  Csv s(prov, {"t", "log_mean", "log_std_error"});
  for (std::size_t i = 0; i < log_series.size(); ++i) {
    // Members share the full grid; log_series may have dropped t = 0.
    const auto it = std::find(members.front().times.begin(), members.front().times.end(), log_series.times[i]);
    const auto row = static_cast<std::size_t>(it - members.front().times.begin());
    double m = 0.0, m2 = 0.0;
    for (const auto& x : members) {
      const double l = std::log(x.values[row]);
      m += l;
      m2 += l * l;
    }
    const double n = static_cast<double>(members.size());
    m /= n;
    const double var = n > 1 ? std::max(0.0, (m2 - n * m * m) / (n - 1)) : 0.0;
    s.cell(log_series.times[i]).cell(log_series.values[i]).cell(std::sqrt(var / n)).end();
  }
  s.save(dir / "series.csv");

  std::vector<std::string> cols{"t"};
  for (std::size_t k = 0; k < members.size(); ++k) cols.push_back(observable + "_" + std::to_string(k));
  Csv e(prov, cols);
  for (std::size_t i = 0; i < members.front().size(); ++i) {
    e.cell(members.front().times[i]);
    for (const auto& x : members) e.cell(x.values[i]);
    e.end();
  }
  e.save(dir / "ensembles.csv");
}

// Subtracted series may dip below zero before growth sets in, so with a
// fit window they are log-averaged from the window start on.
std::vector<TimeSeries> log_domain(const RunConfig& cfg, const std::vector<TimeSeries>& members) {
  if (!cfg.subtract_t0 || !cfg.fit.window) return members;
  std::vector<TimeSeries> out;
  for (const auto& m : members) {
    TimeSeries r;
    r.meta = m.meta;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m.times[i] < cfg.fit.window->first) continue;
      r.times.push_back(m.times[i]);
      r.values.push_back(m.values[i]);
    }
    out.push_back(std::move(r));
  }
  return out;
}

void finish_series(const fs::path& dir, const RunConfig& cfg, const Provenance& prov,
                   const std::vector<TimeSeries>& all, const std::string& observable, json& summary) {
  const auto members = log_domain(cfg, all);
  const TimeSeries lg = log_average(members);
  write_series(dir, prov, lg, members, observable);
  Analysis a = analyze(lg, cfg.fit);
  summary["observable"] = observable;
  summary["n_series"] = members.size();
  for (auto& [k, v] : a.summary.items()) summary[k] = v;
  json files = {"series.csv", "ensembles.csv"};
  if (cfg.svg) {
    std::optional<SvgGuide> guide;
    if (a.fit) {
      guide = SvgGuide{a.fit->window.first, a.fit->window.second, a.fit->rate_or_exponent, a.fit->intercept,
                       a.fit->law == GrowthLaw::kPower};
    }
    const std::string chart = svg_chart(prov, "log-averaged " + observable, lg, guide);
    if (!chart.empty()) {
      write_file(dir / "chart.svg", chart);
      files.push_back("chart.svg");
    }
  }
  summary["files"] = files;
}

// ---------------------------------------------------------------------------
// Runs

std::vector<PhasePoint> run_centers(const RunConfig& cfg) {
  if (!cfg.centers.empty()) return cfg.centers;
  ShellSpec s = cfg.shell;
  s.seed = cfg.seed;
  return sample_shell(cfg.model, s);
}

std::vector<GaussianEnsemble> run_ensembles(const RunConfig& cfg, const std::vector<PhasePoint>& centers) {
  std::vector<GaussianEnsemble> out;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    out.push_back(GaussianEnsemble::coherent(centers[i], cfg.hbar, cfg.ensemble_samples, derive_seed(cfg.seed, i + 1)));
  }
  return out;
}

double meta_drift(const TimeSeries& s) {
  const auto it = s.meta.find("max_rel_energy_drift");
  return it == s.meta.end() ? 0.0 : std::stod(it->second);
}

void run_classical(const RunConfig& cfg, const fs::path& dir, const Provenance& prov, bool otoc, json& summary) {
  const auto centers = run_centers(cfg);
  const auto ens = run_ensembles(cfg, centers);
  const auto times = cfg.times.build();
  std::vector<TimeSeries> members;
  if (otoc) {
    members = classical_otoc(cfg.model, ens, times, cfg.integrator, cfg.threads);
  } else {
    for (const auto& e : ens) members.push_back(classical_m2(cfg.model, e, times, cfg.subtract_t0, cfg.integrator, cfg.threads).series);
  }
  double drift = 0.0;
  for (const auto& m : members) drift = std::max(drift, meta_drift(m));
  summary["conservation"] = {{"max_rel_energy_drift", drift}};
  finish_series(dir, cfg, prov, members, otoc ? "c_pp" : "m2", summary);
}

struct QuantumSetup {
  std::shared_ptr<const FockBasis> basis;
  OperatorMatrix h;
  std::unique_ptr<Propagator> prop;
};

QuantumSetup quantum_setup(const RunConfig& cfg) {
  if (cfg.n_max <= 0) throw ConfigError("quantum runs need basis.n_max > 0");
  QuantumSetup q;
  q.basis = std::make_shared<const FockBasis>(cfg.hbar, cfg.n_max);
  q.h = hamiltonian_matrix(cfg.model, *q.basis);
  q.prop = make_propagator(q.h, *q.basis, cfg.propagator);
  return q;
}

QuantumEnsembleSeries quantum_series(const RunConfig& cfg, const QuantumSetup& q, bool otoc, bool m2) {
  std::vector<StateVector> states;
  for (const auto& c : run_centers(cfg)) states.push_back(coherent_state(c, q.basis));
  const auto p1 = operator_matrix(OperatorKind::kMomentum, 0, *q.basis);
  QuantumRunOptions o;
  o.otoc = otoc;
  o.m2 = m2;
  o.subtract_t0 = cfg.subtract_t0;
  o.max_edge_population = cfg.max_edge_population;
  o.batch = cfg.batch;
  const auto times = cfg.times.build();
  return quantum_ensemble_series(states, q.h, p1, times, *q.prop, o);
}

json quantum_stats_json(const QuantumRunStats& s, const QuantumSetup& q) {
  return {{"max_norm_drift", s.max_norm_drift},
          {"max_rel_energy_drift", s.max_rel_energy_drift},
          {"max_edge_population", s.max_edge_population},
          {"basis_n_max", q.basis->n_max()},
          {"propagator", q.prop->name()}};
}

void run_quantum(const RunConfig& cfg, const fs::path& dir, const Provenance& prov, bool otoc, json& summary) {
  const auto q = quantum_setup(cfg);
  const auto r = quantum_series(cfg, q, otoc, !otoc);
  summary["conservation"] = quantum_stats_json(r.stats, q);
  finish_series(dir, cfg, prov, otoc ? r.otoc : r.m2, otoc ? "c_pp" : "m2", summary);
}

LevelStats spectrum_stats(const RunConfig& cfg, double hbar) {
  return level_statistics(cfg.model, hbar, cfg.spectrum, cfg.threads);
}

void run_spectrum(const RunConfig& cfg, const fs::path& dir, const Provenance& prov, json& summary) {
  const double hbar = cfg.hbar;
  const auto st = spectrum_stats(cfg, hbar);
  Csv lv(prov, {"index", "energy"});
  for (std::size_t i = 0; i < st.levels.size(); ++i) lv.cell(static_cast<long>(i)).cell(st.levels[i]).end();
  lv.save(dir / "levels.csv");
  Csv sp(prov, {"index", "spacing"});
  for (std::size_t i = 0; i < st.spacings.size(); ++i) sp.cell(static_cast<long>(i)).cell(st.spacings[i]).end();
  sp.save(dir / "spacings.csv");
  Csv hi(prov, {"s_lo", "s_hi", "density", "wigner", "poisson"});
  for (std::size_t i = 0; i < st.histogram.densities.size(); ++i) {
    const double a = st.histogram.bin_edges[i], b = st.histogram.bin_edges[i + 1], m = 0.5 * (a + b);
    hi.cell(a).cell(b).cell(st.histogram.densities[i]).cell(wigner_surmise(m)).cell(poisson_spacing(m)).end();
  }
  hi.save(dir / "histogram.csv");
  json sectors = json::array();
  for (const auto& s : cfg.spectrum.sectors) sectors.push_back(s.label());
  summary["spectrum"] = {{"hbar", hbar},
                         {"sectors", sectors},
                         {"delta", st.delta},
                         {"n_levels", st.levels.size()},
                         {"n_spacings", st.spacings.size()},
                         {"sector_dimension", st.sector_dimension}};
  summary["files"] = {"levels.csv", "spacings.csv", "histogram.csv"};
}

void run_mqc(const RunConfig& cfg, const fs::path& dir, const Provenance& prov, json& summary) {
  const auto q = quantum_setup(cfg);
  const PhaseGrid grid = cfg.mqc_grid ? *cfg.mqc_grid : PhaseGrid::nyquist(*q.basis);
  const auto centers = run_centers(cfg);
  const auto times = cfg.times.build();
  Csv in(prov, {"center", "t", "m1", "m2", "intensity"});
  Csv m2(prov, {"center", "t", "m2_mqc", "m2_direct", "abs_diff", "aliasing"});
  double worst = 0.0;
  int aliasing = 0;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const auto psi = coherent_state(centers[c], q.basis);
    for (double t : times) {
      const auto spec = extract_intensities(echo_signals(psi, *q.prop, t, grid), q.basis->n_max());
      for (const auto& [m, v] : spec.intensities) {
        in.cell(static_cast<long>(c)).cell(t).cell(m.first).cell(m.second).cell(v).end();
      }
      const double a = m2_from_mqc(spec);
      const double b = number_variance_m2(evolve(psi, *q.prop, t));
      worst = std::max(worst, std::abs(a - b));
      aliasing += spec.aliasing_warning;
      m2.cell(static_cast<long>(c)).cell(t).cell(a).cell(b).cell(std::abs(a - b)).cell(spec.aliasing_warning ? 1 : 0).end();
    }
  }
  in.save(dir / "intensities.csv");
  m2.save(dir / "mqc_m2.csv");
  summary["mqc"] = {{"grid", {grid.n1, grid.n2}},
                    {"purity", 1.0},
                    {"max_abs_m2_difference", worst},
                    {"aliasing_warnings", aliasing},
                    {"basis_n_max", q.basis->n_max()}};
  summary["files"] = {"intensities.csv", "mqc_m2.csv"};
}

TimeSeries read_series_csv(const std::string& path, const std::string& column) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  std::string line;
  std::vector<std::string> header;
  TimeSeries s;
  std::size_t vcol = 0;
  auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (header.empty()) {
      header = cells;
      if (header.empty() || header[0] != "t") throw IoError(path + ": first column must be t");
      const auto it = std::find(header.begin(), header.end(), column);
      if (it == header.end()) throw IoError(path + ": no column '" + column + "'");
      vcol = static_cast<std::size_t>(it - header.begin());
      continue;
    }
    if (cells.size() != header.size()) throw IoError(path + ": ragged row");
    double t = 0, v = 0;
    const auto r1 = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), t);
    const auto r2 = std::from_chars(cells[vcol].data(), cells[vcol].data() + cells[vcol].size(), v);
    if (r1.ec != std::errc() || r2.ec != std::errc()) throw IoError(path + ": unparsable number in '" + line + "'");
    s.times.push_back(t);
    s.values.push_back(v);
  }
  if (s.times.empty()) throw IoError(path + ": no data rows");
  return s;
}

void run_fit(const RunConfig& cfg, const fs::path& dir, const Provenance& prov, json& summary) {
  if (cfg.fit.input.empty()) throw ConfigError("fit mode needs fit.input");
  TimeSeries s = read_series_csv(cfg.fit.input, cfg.fit.column);
  if (cfg.fit.log_space) {
    s.log_space = true;
  } else {
    s = log_average(std::vector<TimeSeries>{s});
  }
  Analysis a = analyze(s, cfg.fit);
  summary["input"] = cfg.fit.input;
  summary["column"] = cfg.fit.column;
  for (auto& [k, v] : a.summary.items()) summary[k] = v;
  json files = json::array();
  if (cfg.svg) {
    std::optional<SvgGuide> guide;
    if (a.fit) {
      guide = SvgGuide{a.fit->window.first, a.fit->window.second, a.fit->rate_or_exponent, a.fit->intercept,
                       a.fit->law == GrowthLaw::kPower};
    }
    const std::string chart = svg_chart(prov, cfg.fit.column, s, guide);
    if (!chart.empty()) {
      write_file(dir / "chart.svg", chart);
      files.push_back("chart.svg");
    }
  }
  summary["files"] = files;
}

std::string beta_key(double beta) { return "beta_" + format_double(beta); }

// One scan point: v_bar from the quantum OTOC and Delta from the spectrum.
json scan_point(const RunConfig& base, double beta) {
  RunConfig cfg = base;
  cfg.model = ModelParams::quartic(beta, base.model.coupling);
  json p = {{"beta", beta}, {"status", "ok"}};
  std::vector<std::string> errors;
  if (cfg.scan.otoc) {
    try {
      const auto q = quantum_setup(cfg);
      const auto r = quantum_series(cfg, q, true, false);
      const auto lg = log_average(r.otoc);
      p["conservation"] = quantum_stats_json(r.stats, q);
      const auto s = saturation_velocity(lg, cfg.fit.saturation);
      p["saturation"] = saturation_json(s);
      p["v_bar"] = s.v_bar;
      p["otoc_hbar"] = cfg.hbar;
    } catch (const Error& e) {
      errors.push_back(std::string("otoc: ") + e.what());
    }
  }
  if (cfg.scan.delta) {
    try {
      const double h = cfg.scan.spectrum_hbar > 0.0 ? cfg.scan.spectrum_hbar : cfg.hbar;
      const auto st = spectrum_stats(cfg, h);
      p["delta"] = st.delta;
      p["n_levels"] = st.levels.size();
      p["spectrum_hbar"] = h;
    } catch (const Error& e) {
      errors.push_back(std::string("delta: ") + e.what());
    }
  }
  if (!errors.empty()) {
    p["status"] = "failed";
    std::string all;
    for (const auto& e : errors) all += (all.empty() ? "" : "; ") + e;
    p["error"] = all;
  }
  return p;
}

void run_scan(const RunConfig& cfg, const fs::path& dir, const Provenance& prov, json& summary) {
  if (cfg.scan.betas.empty()) throw ConfigError("scan mode needs scan.betas");
  const auto quartic = ModelParams::quartic(cfg.model.beta, cfg.model.coupling).potential_terms;
  const bool is_quartic = std::equal(quartic.begin(), quartic.end(), cfg.model.potential_terms.begin(),
                                     cfg.model.potential_terms.end(), [](const Monomial& a, const Monomial& b) {
                                       return a.j == b.j && a.k == b.k && a.c == b.c;
                                     });
  if (!is_quartic) throw ConfigError("scan varies beta of the quartic model; model.kind must be quartic");
  const fs::path pts = dir / "points";
  fs::create_directories(pts);
  // Points are keyed by the configuration without the beta list.
  RunConfig key_cfg = cfg;
  key_cfg.scan.betas.clear();
  const std::string key = config_hash(key_cfg);
  std::vector<json> points;
  int reused = 0;
  for (double beta : cfg.scan.betas) {
    const fs::path f = pts / (beta_key(beta) + ".json");
    if (fs::exists(f)) {
      std::ifstream in(f);
      json prev = json::parse(in, nullptr, false);
      if (!prev.is_discarded() && prev.value("point_key", "") == key && prev.value("status", "") == "ok") {
        points.push_back(prev);
        ++reused;
        continue;
      }
    }
    json p = scan_point(cfg, beta);
    p["point_key"] = key;
    p["provenance"] = prov.to_json();
    write_file(f, p.dump(2) + "\n");
    points.push_back(p);
  }
  double vmax = 0.0;
  for (const auto& p : points) {
    if (p.contains("v_bar")) vmax = std::max(vmax, p["v_bar"].get<double>());
  }
  Csv out(prov, {"beta", "v_bar", "v_bar_normalized", "t_star", "delta", "n_levels", "status"});
  const std::string nan = "nan";
  for (const auto& p : points) {
    out.cell(p["beta"].get<double>());
    if (p.contains("v_bar")) {
      const double v = p["v_bar"].get<double>();
      out.cell(v).cell(vmax > 0.0 ? v / vmax : 0.0).cell(p["saturation"]["t_star"].get<double>());
    } else {
      out.cell(nan).cell(nan).cell(nan);
    }
    if (p.contains("delta")) {
      out.cell(p["delta"].get<double>()).cell(p["n_levels"].get<long>());
    } else {
      out.cell(nan).cell(nan);
    }
    out.cell(p["status"].get<std::string>()).end();
  }
  out.save(dir / "scan.csv");
  json arr = json::array();
  int failed = 0;
  for (auto p : points) {
    failed += p["status"] == "failed";
    p.erase("provenance");
    arr.push_back(p);
  }
  summary["points"] = arr;
  summary["reused_points"] = reused;
  summary["failed_points"] = failed;
  summary["v_bar_max"] = vmax;
  summary["files"] = {"scan.csv", "points/"};
}

}  // namespace

std::string run(const RunConfig& cfg_in, const std::string& out_dir, std::optional<RunMode> mode) {
  RunConfig cfg = cfg_in;
  if (mode) {
    if (cfg.mode && *cfg.mode != *mode) {
      throw ConfigError(std::string("config mode ") + to_string(*cfg.mode) + " conflicts with requested mode " +
                        to_string(*mode));
    }
    cfg.mode = mode;
  }
  if (!cfg.mode) throw ConfigError("no run mode given");
  cfg.validate();
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
  const Provenance prov{to_string(*cfg.mode), config_hash(cfg), cfg.seed};
  json summary;
  summary["mode"] = prov.mode;
  summary["provenance"] = prov.to_json();
  summary["config"] = canonical_json(cfg);
  switch (*cfg.mode) {
    case RunMode::kClassicalOtoc:
      run_classical(cfg, dir, prov, true, summary);
      break;
    case RunMode::kClassicalM2:
      run_classical(cfg, dir, prov, false, summary);
      break;
    case RunMode::kQuantumOtoc:
      run_quantum(cfg, dir, prov, true, summary);
      break;
    case RunMode::kQuantumM2:
      run_quantum(cfg, dir, prov, false, summary);
      break;
    case RunMode::kSpectrum:
      run_spectrum(cfg, dir, prov, summary);
      break;
    case RunMode::kMqc:
      run_mqc(cfg, dir, prov, summary);
      break;
    case RunMode::kScan:
      run_scan(cfg, dir, prov, summary);
      break;
    case RunMode::kFit:
      run_fit(cfg, dir, prov, summary);
      break;
  }
  const std::string text = summary.dump(2) + "\n";
  write_file(dir / "summary.json", text);
  return text;
}

}  // namespace qchaos
