#include "rlab/serialization.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "rlab/error.hpp"
#include "json_util.hpp"

namespace rlab {

using json = nlohmann::json;

std::string operator_to_json(const SpectralOperator& op) {
  json doc;
  doc["schema"] = kOperatorSchema;
  doc["label"] = op.label();
  doc["weights"] = std::vector<double>(op.space().weights().data(), op.space().weights().data() + op.size());
  doc["eigenvalues"] = std::vector<double>(op.eigenvalues().data(), op.eigenvalues().data() + op.rank());
  const CMatrix e = op.basis()->matrix();
  const bool real = op.basis()->real_vectors();
  json cols = json::array();
  for (Index c = 0; c < e.cols(); ++c) {
    json col = json::array();
    for (Index r = 0; r < e.rows(); ++r) {
      if (real) {
        col.push_back(e(r, c).real());
      } else {
        col.push_back({e(r, c).real(), e(r, c).imag()});
      }
    }
    cols.push_back(std::move(col));
  }
  doc["eigenvectors"] = std::move(cols);
  return doc.dump();
}

SpectralOperator operator_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("operator document is not valid JSON: ") + e.what());
  }
  try {
    if (doc.contains("schema")) {
      detail::require(doc["schema"] == kOperatorSchema, "unsupported operator schema");
    }
    const auto w = doc.at("weights").get<std::vector<double>>();
    const auto tau = doc.at("eigenvalues").get<std::vector<double>>();
    const auto& cols = doc.at("eigenvectors");
    detail::require(cols.size() == tau.size(), "eigenvector count does not match eigenvalue count");
    CMatrix e(static_cast<Index>(w.size()), static_cast<Index>(tau.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      detail::require(cols[c].size() == w.size(), "eigenvector length does not match the weights");
      for (std::size_t r = 0; r < w.size(); ++r) {
        const auto& v = cols[c][r];
        e(static_cast<Index>(r), static_cast<Index>(c)) =
            v.is_array() ? Complex(v.at(0).get<double>(), v.at(1).get<double>()) : Complex(v.get<double>(), 0.0);
      }
    }
    RVector weights = Eigen::Map<const RVector>(w.data(), static_cast<Index>(w.size()));
    RVector eig = Eigen::Map<const RVector>(tau.data(), static_cast<Index>(tau.size()));
    return SpectralOperator::from_eigenpairs(FiniteMeasureSpace(weights), eig, e, doc.value("label", std::string{}));
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed operator document: ") + e.what());
  }
}

void save_operator(const SpectralOperator& op, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << operator_to_json(op) << '\n';
}

SpectralOperator load_operator(const std::string& path) {
  return operator_from_json(read_text_file(path));
}

std::string check_to_json(const CheckResult& c) { return check_json(c).dump(); }

CheckResult check_from_json(const std::string& text) { return check_from(json::parse(text)); }

// Shared helpers ------------------------------------------------------------

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double number_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::numeric_limits<double>::quiet_NaN();
}

json bracket_json(const NormBracket& b) {
  return {{"lower", number(b.lower)}, {"upper", number(b.upper)}, {"method", b.method}};
}

NormBracket bracket_from(const json& j) {
  return {number_from(j.at("lower")), number_from(j.at("upper")), j.at("method").get<std::string>()};
}

json check_json(const CheckResult& c) {
  json ctx = json::object();
  for (const auto& [k, v] : c.context) ctx[k] = number(v);
  return {{"estimate", c.estimate_id}, {"lhs", bracket_json(c.lhs)}, {"rhs", number(c.rhs)},
          {"ratio", number(c.ratio)},   {"threshold", number(c.threshold)}, {"pass", c.pass},
          {"context", ctx},            {"label", c.label}};
}

CheckResult check_from(const json& j) {
  CheckResult c;
  c.estimate_id = j.at("estimate").get<std::string>();
  c.lhs = bracket_from(j.at("lhs"));
  c.rhs = number_from(j.at("rhs"));
  c.ratio = number_from(j.at("ratio"));
  c.threshold = number_from(j.at("threshold"));
  c.pass = j.at("pass").get<bool>();
  for (const auto& [k, v] : j.at("context").items()) c.context[k] = number_from(v);
  c.label = j.at("label").get<std::string>();
  return c;
}

}  // namespace rlab
