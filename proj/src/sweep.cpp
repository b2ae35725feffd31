#include "rlab/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "json.hpp"
#include "json_util.hpp"
#include "rlab/error.hpp"
#include "rlab/exponents.hpp"
#include "rlab/serialization.hpp"

namespace rlab {

using detail::require;
using json = nlohmann::json;

namespace {

std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream ss;
  ss.precision(17);
  ss << x;
  return ss.str();
}

double parse_double(const YAML::Node& n) {
  const auto s = n.as<std::string>();
  if (s == "inf" || s == ".inf" || s == "infinity") return kInf;
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    throw DomainError("expected a number, got '" + s + "'");
  }
}

std::vector<double> parse_list(const YAML::Node& n) {
  std::vector<double> out;
  if (n.IsSequence()) {
    for (const auto& x : n) out.push_back(parse_double(x));
  } else {
    out.push_back(parse_double(n));
  }
  return out;
}

template <class T>
void read(const YAML::Node& node, const char* key, T& target) {
  if (node[key]) target = node[key].as<T>();
}

YAML::Node parse_yaml(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw DomainError(std::string("config is not valid YAML/JSON: ") + e.what());
  }
}

ModelSpec parse_model(const YAML::Node& n) {
  require(n && n.IsMap(), "config needs a 'model' table");
  ModelSpec m;
  read(n, "kind", m.kind);
  read(n, "n", m.n);
  read(n, "K", m.K);
  read(n, "G", m.G);
  read(n, "L_max", m.sphere.L_max);
  m.sphere.n_theta = m.sphere.L_max + 1;
  m.sphere.n_phi = 2 * m.sphere.L_max + 1;
  read(n, "n_theta", m.sphere.n_theta);
  read(n, "n_phi", m.sphere.n_phi);
  read(n, "l_min", m.sphere.l_min);
  read(n, "l_max", m.sphere.l_max);
  read(n, "bands", m.sphere_bands);
  read(n, "dim", m.rough.dim);
  read(n, "N", m.rough.N);
  read(n, "s", m.rough.s);
  read(n, "delta", m.rough.delta);
  read(n, "J", m.rough.J);
  read(n, "scale", m.rough.scale);
  if (m.kind == "random") read(n, "dim", m.dim);
  read(n, "tau_max", m.tau_max);
  read(n, "seed", m.seed);
  read(n, "path", m.path);
  return m;
}

json model_json(const ModelSpec& m) {
  json j{{"kind", m.kind}};
  if (m.kind == "torus") {
    j.update({{"n", m.n}, {"K", m.K}, {"G", m.G == 0 ? 4 * m.K + 1 : m.G}});
  } else if (m.kind == "sphere") {
    j.update({{"L_max", m.sphere.L_max}, {"n_theta", m.sphere.n_theta}, {"n_phi", m.sphere.n_phi},
              {"l_min", m.sphere.l_min}, {"l_max", m.sphere.l_max}, {"bands", m.sphere_bands}});
  } else if (m.kind == "rough") {
    j.update({{"dim", m.rough.dim}, {"N", m.rough.N}, {"s", m.rough.s}, {"delta", m.rough.delta}, {"J", m.rough.J},
              {"scale", m.rough.scale}});
  } else if (m.kind == "random") {
    j.update({{"dim", m.dim}, {"tau_max", m.tau_max}, {"seed", m.seed}});
  } else {
    j["path"] = m.path;
  }
  return j;
}

Schedule parse_schedule(const YAML::Node& n) {
  Schedule s;
  if (!n) return s;
  if (n.IsScalar()) {
    if (n.as<std::string>() == "lambda") return {Schedule::Kind::Power, 1.0, 1.0};
    s.value = parse_double(n);
  } else {
    const auto kind = n["kind"] ? n["kind"].as<std::string>() : std::string("constant");
    if (kind == "constant") {
      s.kind = Schedule::Kind::Constant;
    } else if (kind == "power") {
      s.kind = Schedule::Kind::Power;
    } else if (kind == "inverse-log") {
      s.kind = Schedule::Kind::InverseLog;
    } else {
      throw DomainError("unknown schedule kind '" + kind + "'");
    }
    if (n["value"]) s.value = parse_double(n["value"]);
    if (n["scale"]) s.value = parse_double(n["scale"]);
    if (n["rho"]) s.rho = parse_double(n["rho"]);
  }
  require(s.value > 0.0 && std::isfinite(s.value), "schedules must be positive");
  return s;
}

json schedule_json(const Schedule& s) {
  switch (s.kind) {
    case Schedule::Kind::Constant: return {{"kind", "constant"}, {"value", s.value}};
    case Schedule::Kind::Power: return {{"kind", "power"}, {"scale", s.value}, {"rho", s.rho}};
    case Schedule::Kind::InverseLog: return {{"kind", "inverse-log"}, {"scale", s.value}};
  }
  return {};
}

double snap_to_sphere(double lambda) {
  const double l = std::max(1.0, std::round(-0.5 + std::sqrt(0.25 + lambda * lambda)));
  return std::sqrt(l * (l + 1.0));
}

// Least squares y = a + b x; returns (b, a, max residual).
std::tuple<double, double, double> line_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw DomainError("degenerate fit: all lambda values are equal");
  const double b = sxy / sxx, a = my - b * mx;
  double res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) res = std::max(res, std::abs(a + b * x[i] - y[i]));
  return {b, a, res};
}

// ln(lambda) when every lambda exceeds 1, else ln<lambda>, so that powers of it stay positive.
std::vector<double> log_factor(const std::vector<SweepRecord>& records) {
  const bool above = std::all_of(records.begin(), records.end(), [](const auto& r) { return r.lambda > 1.0; });
  std::vector<double> out;
  for (const auto& r : records) out.push_back(std::log(above ? r.lambda : japanese(r.lambda)));
  return out;
}

int best_nu(const std::vector<double>& residuals) {
  int best = 0;
  for (int nu = 1; nu < static_cast<int>(residuals.size()); ++nu) {
    if (residuals[nu] < residuals[best] - 1e-9 * (1.0 + residuals[best])) best = nu;
  }
  return best;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json record_json(const SweepRecord& r) {
  return {{"model", r.model}, {"quantity", r.quantity}, {"q", number(r.q)},
          {"lambda", r.lambda}, {"eps", r.eps}, {"mu", r.mu},
          {"lower", number(r.norm.lower)}, {"upper", number(r.norm.upper)}, {"method", r.norm.method},
          {"seconds", r.seconds}};
}

SweepRecord record_from(const json& j) {
  SweepRecord r;
  r.model = j.at("model").get<std::string>();
  r.quantity = j.at("quantity").get<std::string>();
  r.q = number_from(j.at("q"));
  r.lambda = j.at("lambda").get<double>();
  r.eps = j.at("eps").get<double>();
  r.mu = j.at("mu").get<double>();
  r.norm = {number_from(j.at("lower")), number_from(j.at("upper")), j.at("method").get<std::string>()};
  r.seconds = j.at("seconds").get<double>();
  return r;
}

json fit_json(const FitResult& f) {
  return {{"model", f.model},
          {"quantity", f.quantity},
          {"q", number(f.q)},
          {"points", f.points},
          {"slope", number(f.slope)},
          {"intercept", number(f.intercept)},
          {"max_residual", number(f.max_residual)},
          {"nu", f.nu},
          {"slope_lower", number(f.slope_lower)},
          {"slope_upper", number(f.slope_upper)},
          {"slope_without_last", number(f.slope_without_last)}};
}

FitResult fit_from(const json& j) {
  FitResult f;
  f.model = j.at("model").get<std::string>();
  f.quantity = j.at("quantity").get<std::string>();
  f.q = number_from(j.at("q"));
  f.points = j.at("points").get<std::size_t>();
  f.slope = number_from(j.at("slope"));
  f.intercept = number_from(j.at("intercept"));
  f.max_residual = number_from(j.at("max_residual"));
  f.nu = j.at("nu").get<int>();
  f.slope_lower = number_from(j.at("slope_lower"));
  f.slope_upper = number_from(j.at("slope_upper"));
  f.slope_without_last = number_from(j.at("slope_without_last"));
  return f;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_';
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string ModelSpec::key() const {
  // kind, then name-value pairs in key order, e.g. "torus_G-33_K-8_n-2".
  const json j = model_json(*this);
  std::string out = kind;
  for (const auto& [name, value] : j.items()) {
    if (name == "kind") continue;
    out += "_" + name + "-" + (value.is_string() ? value.get<std::string>() : value.dump());
  }
  return sanitize(out);
}

Model build_model(const ModelSpec& spec) {
  if (spec.kind == "torus") return make_torus(spec.n, spec.K, spec.G == 0 ? 4 * spec.K + 1 : spec.G);
  if (spec.kind == "sphere") return make_sphere(spec.sphere);
  if (spec.kind == "rough") return make_rough(spec.rough);
  if (spec.kind == "random") return make_random(spec.dim, spec.tau_max, spec.seed);
  if (spec.kind == "file") {
    Model m;
    m.op = std::make_shared<SpectralOperator>(load_operator(spec.path));
    m.geometry = Geometry::Abstract;
    m.points.resize(m.op->size(), 1);
    for (Index i = 0; i < m.op->size(); ++i) m.points(i, 0) = static_cast<double>(i);
    m.trusted_lambda = m.op->eigenvalues().size() ? m.op->eigenvalues().maxCoeff() / 2.0 : 1.0;
    m.label = m.op->label().empty() ? spec.path : m.op->label();
    return m;
  }
  throw DomainError("unknown model kind '" + spec.kind + "'");
}

double Schedule::operator()(double lambda) const {
  switch (kind) {
    case Kind::Constant: return value;
    case Kind::Power: return value * std::pow(lambda, rho);
    case Kind::InverseLog: return value / std::log(japanese(lambda));
  }
  return value;
}

std::string Schedule::str() const { return schedule_json(*this).dump(); }

Quantity parse_quantity(const std::string& key) {
  if (key == "cluster-2q") return Quantity::Cluster2q;
  if (key == "resolvent-q'q" || key == "resolvent-qpq") return Quantity::ResolventQpQ;
  if (key == "resolvent-2q") return Quantity::Resolvent2q;
  if (key == "im-resolvent") return Quantity::ImResolvent;
  throw DomainError("unknown quantity '" + key + "'");
}

std::string quantity_key(Quantity q) {
  switch (q) {
    case Quantity::Cluster2q: return "cluster-2q";
    case Quantity::ResolventQpQ: return "resolvent-q'q";
    case Quantity::Resolvent2q: return "resolvent-2q";
    case Quantity::ImResolvent: return "im-resolvent";
  }
  return "?";
}

std::vector<double> SweepConfig::lambda_grid() const {
  std::vector<double> out = lambdas;
  if (out.empty()) {
    for (int j = dyadic_from; j <= dyadic_to; ++j) out.push_back(std::ldexp(1.0, j));
  }
  if (model.kind == "sphere" && snap_sphere) {
    for (double& l : out) l = snap_to_sphere(l);
  }
  return out;
}

IterationConfig SweepConfig::iteration() const {
  IterationConfig c;
  c.seed = seed;
  c.restarts = restarts;
  c.max_iters = max_iters;
  return c;
}

SweepConfig parse_sweep_config(const std::string& text) {
  const YAML::Node root = parse_yaml(text);
  require(root.IsMap(), "config must be a table");
  SweepConfig c;
  c.model = parse_model(root["model"]);
  if (root["q"]) c.qs = parse_list(root["q"]);
  if (const auto l = root["lambda"]) {
    if (l.IsMap() && l["dyadic"]) {
      const auto d = l["dyadic"];
      require(d.IsSequence() && d.size() == 2, "lambda.dyadic must be [from, to]");
      c.dyadic_from = d[0].as<int>();
      c.dyadic_to = d[1].as<int>();
    } else if (l.IsMap() && l["values"]) {
      c.lambdas = parse_list(l["values"]);
      if (c.lambdas.empty()) c.dyadic_to = c.dyadic_from - 1;
    } else {
      c.lambdas = parse_list(l);
    }
    if (l.IsMap() && l["snap"]) c.snap_sphere = l["snap"].as<bool>();
  }
  c.eps = parse_schedule(root["eps"]);
  c.mu = parse_schedule(root["mu"]);
  if (root["quantity"]) c.quantity = parse_quantity(root["quantity"].as<std::string>());
  read(root, "seed", c.seed);
  if (const auto it = root["iteration"]) {
    read(it, "restarts", c.restarts);
    read(it, "max_iters", c.max_iters);
  }
  for (double q : c.qs) require(q >= 2.0, "sweep exponents must satisfy q >= 2");
  for (double l : c.lambda_grid()) require(l >= 1.0, "sweep lambdas must be >= 1");
  return c;
}

SweepConfig load_sweep_config(const std::string& path) { return parse_sweep_config(read_text_file(path)); }

std::string sweep_config_json(const SweepConfig& c) {
  json qs = json::array();
  for (double q : c.qs) qs.push_back(number(q));
  json j{{"model", model_json(c.model)},
         {"q", qs},
         {"lambda", c.lambda_grid()},
         {"eps", schedule_json(c.eps)},
         {"mu", schedule_json(c.mu)},
         {"quantity", quantity_key(c.quantity)},
         {"seed", c.seed},
         {"iteration", {{"restarts", c.restarts}, {"max_iters", c.max_iters}}}};
  return j.dump();
}

// ---------------------------------------------------------------------------

NormBracket measure(const Model& model, Quantity quantity, double q, double lambda, double eps, double mu,
                    const IterationConfig& cfg) {
  const SpectralOperator& op = *model.op;
  switch (quantity) {
    case Quantity::Cluster2q: {
      const auto idx = op.indices_in(SpectralWindow(lambda, lambda + eps));
      if (idx.empty()) return {0.0, 0.0, "empty"};
      return op_norm(multiplier_on(op, idx, [](double) { return Complex(1.0); }), 2.0, q, cfg);
    }
    case Quantity::ResolventQpQ:
      return op_norm(resolvent_sq(op, ResolventQuery(lambda, mu)), dual_exponent(q), q, cfg);
    case Quantity::Resolvent2q:
      return op_norm(resolvent_sq(op, ResolventQuery(lambda, mu)), 2.0, q, cfg);
    case Quantity::ImResolvent:
      return op_norm(im_resolvent(op, ResolventQuery(lambda, mu)), dual_exponent(q), q, cfg);
  }
  throw DomainError("unknown quantity");
}

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg) {
  std::vector<SweepRecord> out;
  const auto grid = cfg.lambda_grid();
  if (grid.empty()) return out;
  const bool bands = cfg.model.kind == "sphere" && cfg.model.sphere_bands && cfg.quantity == Quantity::Cluster2q;
  std::optional<Model> whole;
  if (!bands) whole = build_model(cfg.model);
  std::map<std::pair<int, int>, Model> band_cache;
  const IterationConfig it = cfg.iteration();

  for (double q : cfg.qs) {
    for (double lambda : grid) {
      const double eps = cfg.eps(lambda), mu = cfg.mu(lambda);
      const auto start = std::chrono::steady_clock::now();
      const Model* model = whole ? &*whole : nullptr;
      if (bands) {
        // Degrees l with sqrt(l(l+1)) in [lambda, lambda + eps].
        const int lo = static_cast<int>(std::ceil(-0.5 + std::sqrt(0.25 + lambda * lambda) - 1e-9));
        int hi = lo;
        while (std::sqrt((hi + 1.0) * (hi + 2.0)) <= lambda + eps) ++hi;
        require(hi <= cfg.model.sphere.L_max, "sweep lambda beyond the sphere cutoff");
        auto key = std::make_pair(lo, hi);
        if (!band_cache.count(key)) {
          SphereGrid g = cfg.model.sphere;
          g.l_min = lo;
          g.l_max = hi;
          band_cache.emplace(key, make_sphere(g));
        }
        model = &band_cache.at(key);
      }
      require(lambda <= model->trusted_lambda + 1e-9,
              "sweep lambda " + fmt(lambda) + " beyond the trusted range " + fmt(model->trusted_lambda));
      SweepRecord r;
      r.model = bands ? "sphere(L=" + std::to_string(cfg.model.sphere.L_max) + ")" : model->label;
      r.quantity = quantity_key(cfg.quantity);
      r.q = q;
      r.lambda = lambda;
      r.eps = eps;
      r.mu = mu;
      r.norm = measure(*model, cfg.quantity, q, lambda, eps, mu, it);
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out.push_back(std::move(r));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

FitResult fit_slope(const std::vector<SweepRecord>& records) {
  require(records.size() >= 3, "slope fits need at least 3 records");
  std::vector<double> x, y, ylo, yhi;
  for (const auto& r : records) {
    require(r.lambda > 0.0 && r.norm.mid() > 0.0, "slope fits need positive lambda and values");
    x.push_back(std::log(r.lambda));
    y.push_back(std::log(r.norm.mid()));
    ylo.push_back(r.norm.lower > 0.0 ? std::log(r.norm.lower) : std::log(r.norm.mid()));
    yhi.push_back(std::log(r.norm.upper));
  }
  FitResult f;
  f.model = records.front().model;
  f.quantity = records.front().quantity;
  f.q = records.front().q;
  f.points = records.size();
  std::tie(f.slope, f.intercept, f.max_residual) = line_fit(x, y);
  f.slope_lower = std::get<0>(line_fit(x, ylo));
  f.slope_upper = std::get<0>(line_fit(x, yhi));
  f.slope_without_last = std::numeric_limits<double>::quiet_NaN();
  if (records.size() >= 4) {
    const auto last = std::max_element(x.begin(), x.end()) - x.begin();
    std::vector<double> x2, y2;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (static_cast<std::ptrdiff_t>(i) == last) continue;
      x2.push_back(x[i]);
      y2.push_back(y[i]);
    }
    f.slope_without_last = std::get<0>(line_fit(x2, y2));
  }
  // Joint fit ln y = a + b ln lambda + nu ln L(lambda).
  const auto L = log_factor(records);
  std::vector<double> residuals;
  for (int nu = 0; nu <= 3; ++nu) {
    std::vector<double> z(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) z[i] = y[i] - nu * std::log(L[i]);
    residuals.push_back(std::get<2>(line_fit(x, z)));
  }
  f.nu = best_nu(residuals);
  return f;
}

int detect_log(const std::vector<SweepRecord>& records, double assumed_slope) {
  require(records.size() >= 4, "log detection needs at least 4 records");
  const auto L = log_factor(records);
  std::vector<double> z;
  for (const auto& r : records) {
    require(r.lambda > 0.0 && r.norm.mid() > 0.0, "log detection needs positive lambda and values");
    z.push_back(std::log(r.norm.mid()) - assumed_slope * std::log(r.lambda));
  }
  std::vector<double> residuals;
  for (int nu = 0; nu <= 3; ++nu) {
    double c = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) c += z[i] - nu * std::log(L[i]);
    c /= static_cast<double>(z.size());
    double res = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) res = std::max(res, std::abs(z[i] - c - nu * std::log(L[i])));
    residuals.push_back(res);
  }
  return best_nu(residuals);
}

std::vector<std::vector<SweepRecord>> series(const std::vector<SweepRecord>& records) {
  std::vector<std::vector<SweepRecord>> out;
  std::map<std::tuple<std::string, std::string, double>, std::size_t> slot;
  for (const auto& r : records) {
    const auto key = std::make_tuple(r.model, r.quantity, r.q);
    auto it = slot.find(key);
    if (it == slot.end()) {
      it = slot.emplace(key, out.size()).first;
      out.emplace_back();
    }
    out[it->second].push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------

ReportFormat parse_format(const std::string& key) {
  if (key == "csv") return ReportFormat::Csv;
  if (key == "json") return ReportFormat::Json;
  if (key == "plotdata") return ReportFormat::Plotdata;
  throw DomainError("unknown report format '" + key + "'");
}

std::string records_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << csv_field(r.model) << ',' << csv_field(r.quantity) << ',' << fmt(r.q) << ',' << fmt(r.lambda) << ','
        << fmt(r.eps) << ',' << fmt(r.mu) << ',' << fmt(r.norm.lower) << ',' << fmt(r.norm.upper) << ','
        << csv_field(r.norm.method) << ',' << fmt(r.seconds) << '\n';
  }
  return out.str();
}

std::string report_json(const Report& report) {
  json doc;
  doc["schema"] = kReportSchema;
  doc["config"] = json::parse(report.config_json);
  doc["records"] = json::array();
  for (const auto& r : report.records) doc["records"].push_back(record_json(r));
  doc["fits"] = json::array();
  for (const auto& f : report.fits) doc["fits"].push_back(fit_json(f));
  doc["checks"] = json::array();
  for (const auto& c : report.checks) doc["checks"].push_back(check_json(c));
  return doc.dump(2) + "\n";
}

Report report_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    require(doc.at("schema").get<std::string>() == kReportSchema, "unsupported report schema");
    Report r;
    r.config_json = doc.value("config", json::object()).dump();
    for (const auto& j : doc.value("records", json::array())) r.records.push_back(record_from(j));
    for (const auto& j : doc.value("fits", json::array())) r.fits.push_back(fit_from(j));
    for (const auto& j : doc.value("checks", json::array())) r.checks.push_back(check_from(j));
    return r;
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed report: ") + e.what());
  }
}

Report load_report(const std::string& path) { return report_from_json(read_text_file(path)); }

std::vector<std::string> emit(const Report& report, ReportFormat format, const std::string& path) {
  switch (format) {
    case ReportFormat::Csv:
      write_file(path, records_csv(report.records));
      return {path};
    case ReportFormat::Json:
      write_file(path, report_json(report));
      return {path};
    case ReportFormat::Plotdata: {
      std::filesystem::create_directories(path);
      std::vector<std::string> files;
      for (const auto& s : series(report.records)) {
        const auto& h = s.front();
        const std::string file =
            (std::filesystem::path(path) / (sanitize(h.model + "_" + h.quantity + "_q" + fmt(h.q)) + ".dat")).string();
        std::ostringstream out;
        out << "# " << h.model << ' ' << h.quantity << " q=" << fmt(h.q) << '\n';
        for (const auto& r : s) out << fmt(r.lambda) << ' ' << fmt(r.norm.mid()) << '\n';
        write_file(file, out.str());
        files.push_back(file);
      }
      return files;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------

PerturbConfig parse_perturb_config(const std::string& text) {
  const YAML::Node root = parse_yaml(text);
  require(root.IsMap(), "config must be a table");
  PerturbConfig c;
  c.model = parse_model(root["model"]);
  if (root["q"]) c.q = parse_double(root["q"]);
  c.potential.p = c.q > 2.0 && std::isfinite(c.q) ? c.q / (c.q - 2.0) : 2.0;
  if (const auto p = root["potential"]) {
    if (p["kind"]) c.potential.kind = parse_potential_kind(p["kind"].as<std::string>());
    read(p, "height", c.potential.height);
    read(p, "radius", c.potential.radius);
    read(p, "gamma", c.potential.gamma);
    read(p, "p", c.potential.p);
    read(p, "center", c.potential.center);
    read(p, "seed", c.potential.seed);
  }
  if (root["lambda"]) c.lambdas = parse_list(root["lambda"]);
  read(root, "c", c.c);
  read(root, "neumann_terms", c.neumann_terms);
  read(root, "alpha", c.alpha);
  read(root, "seed", c.seed);
  read(root, "restarts", c.restarts);
  require(!c.lambdas.empty(), "perturbation runs need a lambda grid");
  return c;
}

PerturbConfig load_perturb_config(const std::string& path) { return parse_perturb_config(read_text_file(path)); }

std::pair<std::string, bool> run_perturb(const PerturbConfig& cfg) {
  const Model model = build_model(cfg.model);
  const Potential v = build_potential(cfg.potential, model);
  IterationConfig it;
  it.seed = cfg.seed;
  it.restarts = cfg.restarts;

  json doc;
  doc["schema"] = kReportSchema;
  doc["config"] = {{"model", model_json(cfg.model)},
                   {"q", number(cfg.q)},
                   {"lambda", cfg.lambdas},
                   {"c", cfg.c},
                   {"alpha", cfg.alpha},
                   {"neumann_terms", cfg.neumann_terms},
                   {"seed", cfg.seed}};
  doc["potential"] = {{"p", v.p}, {"norm", number(v.norm)}, {"max", v.values.cwiseAbs().maxCoeff()}};
  bool verdict = false;

  if (cfg.alpha != 2.0) {
    const auto rep = fractional_scan(model, v.values, cfg.alpha, cfg.q, cfg.lambdas, it);
    std::vector<SweepRecord> recs;
    json pts = json::array();
    for (const auto& p : rep.points) {
      recs.push_back({model.label, "fractional-q'q", cfg.q, p.lambda, 1.0, 1.0, p.norm, 0.0});
      pts.push_back({{"lambda", p.lambda}, {"norm", bracket_json(p.norm)}});
    }
    doc["fractional"] = {{"alpha", rep.alpha}, {"expected_exponent", rep.expected_exponent}, {"points", pts}};
    if (recs.size() >= 3) {
      const auto fit = fit_slope(recs);
      doc["fractional"]["fit"] = fit_json(fit);
      verdict = fit.slope <= rep.expected_exponent + 0.1;
    }
    doc["verified"] = verdict;
    return {doc.dump(2) + "\n", verdict};
  }

  StabilityOptions opts;
  opts.c = cfg.c;
  opts.cfg = it;
  const auto rep = stability_check(model, v.values, cfg.q, cfg.lambdas, opts);
  json ms = json::array();
  for (const auto& m : rep.M_of_Lambda) {
    ms.push_back({{"lambda", m.lambda}, {"lower", number(m.lower)}, {"upper", number(m.upper)},
                  {"surrogate", number(m.surrogate)}, {"l2_pair", number(m.l2_pair)}, {"lq_pair", number(m.lq_pair)}});
  }
  json checks = json::array();
  for (const auto& c : rep.checks) checks.push_back(check_json(c));
  doc["stability"] = {{"C0", number(rep.C0)},         {"c", rep.c},          {"Lambda0", number(rep.Lambda0)},
                      {"neumann_bound", number(rep.neumann_bound)}, {"verified", rep.verified},
                      {"M", ms},                       {"M_sup", rep.M_sup},  {"checks", checks}};

  json neumann = json::array();
  const double s = exponents::s_of_q(model.dimension, exponents::Exponent::approximate(cfg.q));
  for (std::size_t i = 0; i < cfg.lambdas.size(); ++i) {
    const double lambda = rep.M_of_Lambda[i].lambda;
    if (!(lambda >= rep.Lambda0)) continue;
    const auto r = op_norm_composite(free_resolvent(*model.op, lambda), x_dual_space(model.op, lambda, cfg.q, s),
                                     x_space(model.op, lambda, cfg.q, s), it);
    const auto pr = perturbed_resolvent(*model.op, v.values, lambda, ResolventMethod::neumann(cfg.neumann_terms),
                                        NeumannInputs{rep.M_of_Lambda[i].upper, rep.C0, r.total.upper});
    const auto& d = *pr.diagnostics;
    neumann.push_back({{"lambda", lambda},
                       {"contraction", number(d.contraction)},
                       {"certified", d.certified},
                       {"observed_ratio", number(d.observed_ratio)},
                       {"observed_error", d.observed_error},
                       {"geometric_bound", d.geometric_bound}});
  }
  doc["neumann"] = neumann;
  verdict = rep.verified;
  doc["verified"] = verdict;
  return {doc.dump(2) + "\n", verdict};
}

// ---------------------------------------------------------------------------

std::vector<CheckResult> verify_corpus(const std::string& estimate, const CorpusSpec& spec, const IterationConfig& cfg) {
  const bool all = estimate == "all";
  std::vector<Prop32Item> items;
  if (all) {
    items = {Prop32Item::I33, Prop32Item::I34, Prop32Item::I35, Prop32Item::I36, Prop32Item::I37, Prop32Item::I38};
  } else if (estimate != "L3.1" && estimate != "C3.4") {
    items = {parse_prop32(estimate)};
  }
  const bool lemma = all || estimate == "L3.1";
  const bool corollary = all || estimate == "C3.4";
  require(spec.models >= 0 && spec.min_dim >= 1 && spec.min_dim <= spec.max_dim, "invalid corpus specification");

  std::mt19937_64 rng(spec.seed);
  std::vector<CheckResult> out;
  for (int m = 0; m < spec.models; ++m) {
    const Index dim = spec.min_dim + static_cast<Index>(rng() % static_cast<std::uint64_t>(spec.max_dim - spec.min_dim + 1));
    const double tau_max = 24.0;
    const Model model = make_random(dim, tau_max, spec.seed * 1000003ULL + static_cast<std::uint64_t>(m));
    std::uniform_real_distribution<double> ul(2.0, 9.0);
    const double lambda = ul(rng);
    const double eps = std::ldexp(1.0, -static_cast<int>(rng() % 3));  // 1, 1/2, 1/4
    const std::vector<double> mus{eps, std::sqrt(lambda), lambda};
    const double beta = (rng() % 2) ? 2.0 : 1.5;
    const auto seed = static_cast<std::uint64_t>(rng());
    for (double q : spec.qs) {
      const Partition part = Partition::uniform(lambda, eps);
      if (!items.empty()) {
        const WindowProfile profile = window_norm_profile(*model.op, part, q, cfg);
        for (auto item : items) {
          const bool uses_mu = item == Prop32Item::I37 || item == Prop32Item::I38;
          for (double mu : uses_mu ? mus : std::vector<double>{eps}) {
            out.push_back(check_prop32(*model.op, item, {lambda, eps, mu, beta, q}, profile, cfg));
          }
        }
      }
      if (lemma) {
        for (double alpha : {0.5, 1.0}) {
          for (double mu : {eps, lambda / 2.0}) {
            const auto m1 = resolvent_multiplier(lambda, mu, alpha);
            auto check = check_multiplier_lemma(*model.op, part, q, m1, m1, cfg);
            check.context["alpha"] = alpha;
            check.context["mu"] = mu;
            out.push_back(std::move(check));
          }
        }
      }
      if (corollary) {
        for (auto v : {Cor34Variant::AB, Cor34Variant::BC, Cor34Variant::CA, Cor34Variant::C310, Cor34Variant::C311}) {
          Cor34Params p;
          p.lambda = lambda;
          p.eps = eps;
          p.delta = std::sqrt(eps);
          p.mu = std::max(eps, std::sqrt(lambda));
          p.q = q;
          p.seed = seed;
          out.push_back(check_cor34(*model.op, v, p, cfg));
        }
      }
    }
  }
  return out;
}

}  // namespace rlab
