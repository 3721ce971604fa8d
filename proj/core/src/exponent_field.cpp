#include "dpeigen/exponent_field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dpeigen/expression.hpp"

namespace dpeigen {

namespace {

std::string describePoint(const Mesh& mesh, std::size_t qp) {
  auto p = mesh.quadrature_point(qp);
  std::ostringstream out;
  out.precision(6);
  out << "quadrature point " << qp << " at (" << p[0];
  if (mesh.dimension() == 2) {
    out << ", " << p[1];
  }
  out << ")";
  return out.str();
}

void checkExponentValues(const Mesh& mesh, const std::vector<double>& values,
                         const std::string& source) {
  if (values.size() != mesh.quadrature_count()) {
    throw std::invalid_argument(
        "exponent sample count (" + std::to_string(values.size()) +
        ") does not match the mesh quadrature point count (" +
        std::to_string(mesh.quadrature_count()) + ")");
  }
  for (std::size_t qp = 0; qp < values.size(); ++qp) {
    double v = values[qp];
    if (!std::isfinite(v)) {
      throw std::domain_error("exponent field '" + source +
                              "' is not finite at " + describePoint(mesh, qp));
    }
    if (!(v > 1.0)) {
      std::ostringstream out;
      out.precision(17);
      out << "exponent field '" << source << "' has value " << v
          << " <= 1 at " << describePoint(mesh, qp);
      throw std::domain_error(out.str());
    }
  }
}

}  // namespace

ExponentField::ExponentField(const Mesh& mesh, std::vector<double> values,
                             std::string source)
    : mesh_(&mesh), values_(std::move(values)), source_(std::move(source)) {
  auto [min_it, max_it] = std::minmax_element(values_.begin(), values_.end());
  min_value_ = *min_it;
  max_value_ = *max_it;
}

ExponentField ExponentField::from_values(const Mesh& mesh,
                                         std::vector<double> values,
                                         std::string source) {
  checkExponentValues(mesh, values, source);
  return ExponentField(mesh, std::move(values), std::move(source));
}

ExponentField parse_exponent_expression(const std::string& expression,
                                        const Mesh& mesh) {
  Expression parsed = Expression::parse(expression);
  const bool with_y = mesh.dimension() == 2;
  std::vector<double> values(mesh.quadrature_count());
  for (std::size_t qp = 0; qp < values.size(); ++qp) {
    auto p = mesh.quadrature_point(qp);
    values[qp] = parsed.evaluate(p[0], p[1], with_y);
  }
  return ExponentField::from_values(mesh, std::move(values), expression);
}

ExponentField load_exponent_field(const std::string& path, const Mesh& mesh) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open exponent file '" + path + "'");
  }
  std::vector<double> values;
  values.reserve(mesh.quadrature_count());
  double v = 0.0;
  while (in >> v) {
    values.push_back(v);
  }
  if (!in.eof()) {
    throw std::runtime_error("malformed number in exponent file '" + path +
                             "' near entry " + std::to_string(values.size()));
  }
  return ExponentField::from_values(mesh, std::move(values), path);
}

ExponentField conjugate_exponent(const ExponentField& p) {
  std::vector<double> values(p.values().size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = p.value(i) / (p.value(i) - 1.0);
  }
  return ExponentField::from_values(p.mesh(), std::move(values),
                                    "conjugate(" + p.source() + ")");
}

ValidationReport validate_triple(const ExponentField& p1,
                                 const ExponentField& p2,
                                 const ExponentField& q,
                                 int ambient_dimension) {
  const Mesh& mesh = p1.mesh();
  if (&p2.mesh() != &mesh || &q.mesh() != &mesh) {
    throw std::invalid_argument(
        "exponent triple is sampled on different meshes");
  }
  if (ambient_dimension < 1) {
    throw std::invalid_argument("ambient dimension must be positive");
  }

  ValidationReport report;
  report.chain_ok = true;
  report.subcritical_ok = true;

  const double n = static_cast<double>(ambient_dimension);
  const double q_min = q.min_value();
  const double q_max = q.max_value();
  constexpr std::size_t kMaxWitnesses = 8;
  bool saw_supercritical_p2 = false;

  auto addWitness = [&](std::size_t qp, const std::string& condition) {
    if (report.witness_points.size() >= kMaxWitnesses) {
      return;
    }
    auto p = mesh.quadrature_point(qp);
    report.witness_points.push_back({qp, p[0], p[1], condition});
  };

  for (std::size_t qp = 0; qp < mesh.quadrature_count(); ++qp) {
    const double p1v = p1.value(qp);
    const double p2v = p2.value(qp);

    if (!(p2v < q_min)) {
      report.chain_ok = false;
      std::ostringstream c;
      c.precision(6);
      c << "p2 = " << p2v << " is not below min q = " << q_min;
      addWitness(qp, c.str());
    }
    if (!(q_max < p1v)) {
      report.chain_ok = false;
      std::ostringstream c;
      c.precision(6);
      c << "max q = " << q_max << " is not below p1 = " << p1v;
      addWitness(qp, c.str());
    }

    if (p2v < n) {
      double critical = n * p2v / (n - p2v);
      if (!(q_max < critical)) {
        report.subcritical_ok = false;
        std::ostringstream c;
        c.precision(6);
        c << "max q = " << q_max << " reaches the critical exponent "
          << critical << " for p2 = " << p2v;
        addWitness(qp, c.str());
      }
    } else {
      saw_supercritical_p2 = true;
    }
  }

  if (ambient_dimension < 3) {
    report.dimension_warnings.push_back(
        "ambient dimension " + std::to_string(ambient_dimension) +
        " is below 3; the dimension bound on p1 is reported, not enforced");
  }
  if (p1.max_value() >= n) {
    std::ostringstream w;
    w.precision(6);
    w << "max p1 = " << p1.max_value() << " is not below the ambient dimension "
      << ambient_dimension;
    report.dimension_warnings.push_back(w.str());
  }
  if (saw_supercritical_p2) {
    report.dimension_warnings.push_back(
        "p2 reaches the ambient dimension somewhere; the subcriticality bound "
        "is vacuous there and treated as satisfied");
  }

  return report;
}

std::string describe_failure(const ValidationReport& report) {
  std::ostringstream out;
  out << "exponent validation failed:";
  if (!report.chain_ok) {
    out << " ordering chain violated;";
  }
  if (!report.subcritical_ok) {
    out << " subcriticality bound violated;";
  }
  if (!report.witness_points.empty()) {
    const auto& w = report.witness_points.front();
    out << " first witness: " << w.condition << " (quadrature point "
        << w.quadrature_point << ")";
  }
  return out.str();
}

}  // namespace dpeigen
