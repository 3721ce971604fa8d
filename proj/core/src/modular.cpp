#include "dpeigen/modular.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpeigen {

namespace {

void checkSameMesh(const Mesh& a, const Mesh& b, const char* what) {
  if (&a != &b) {
    throw std::invalid_argument(std::string(what) +
                                " are sampled on different meshes");
  }
}

double modularAt(const ScalarField& f, const ExponentField& p, double mu) {
  const Mesh& mesh = f.mesh();
  double sum = 0.0;
  for (std::size_t qp = 0; qp < mesh.quadrature_count(); ++qp) {
    double a = std::abs(f.value(qp)) / mu;
    if (a != 0.0) {
      sum += mesh.quadrature_weight(qp) * std::pow(a, p.value(qp));
    }
  }
  return sum;
}

}  // namespace

ScalarField::ScalarField(const Mesh& mesh, std::vector<double> values)
    : mesh_(&mesh), values_(std::move(values)) {
  if (values_.size() != mesh.quadrature_count()) {
    throw std::invalid_argument(
        "scalar field sample count does not match the quadrature point count");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw std::domain_error("scalar field values must be finite");
    }
  }
}

ScalarField ScalarField::constant(const Mesh& mesh, double value) {
  return ScalarField(mesh, std::vector<double>(mesh.quadrature_count(), value));
}

ScalarField absolute_values(const DiscreteFunction& u) {
  std::vector<double> values = values_at_quadrature(u);
  for (double& v : values) {
    v = std::abs(v);
  }
  return ScalarField(u.mesh(), std::move(values));
}

ScalarField gradient_magnitude(const DiscreteFunction& u) {
  return ScalarField(u.mesh(), gradient_magnitude_at_quadrature(u));
}

double modular(const ScalarField& f, const ExponentField& p) {
  checkSameMesh(f.mesh(), p.mesh(), "field and exponent");
  return modularAt(f, p, 1.0);
}

double luxemburg_norm(const ScalarField& f, const ExponentField& p) {
  checkSameMesh(f.mesh(), p.mesh(), "field and exponent");

  double max_abs = 0.0;
  for (double v : f.values()) {
    max_abs = std::max(max_abs, std::abs(v));
  }
  if (max_abs == 0.0) {
    return 0.0;
  }

  // The modular is strictly decreasing in mu for a nonzero field, so the
  // norm is the unique root of modular(f / mu) = 1. Bracket it by geometric
  // growth from an upper-bound style initial guess, then bisect.
  double mu = max_abs * std::max(1.0, f.mesh().total_measure());
  double lo = mu;
  double hi = mu;
  constexpr int kMaxBracket = 600;
  int steps = 0;
  if (modularAt(f, p, mu) > 1.0) {
    while (modularAt(f, p, hi) > 1.0) {
      hi *= 2.0;
      if (++steps > kMaxBracket) {
        throw std::runtime_error(
            "luxemburg norm bracketing did not converge (upper bound)");
      }
    }
    lo = hi / 2.0;
  } else {
    while (modularAt(f, p, lo) < 1.0) {
      lo /= 2.0;
      if (++steps > kMaxBracket) {
        throw std::runtime_error(
            "luxemburg norm bracketing did not converge (lower bound)");
      }
    }
    hi = lo * 2.0;
  }

  constexpr double kTolerance = 1e-12;
  for (int it = 0; it < 200 && hi - lo > kTolerance; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;  // interval exhausted at floating point resolution
    }
    if (modularAt(f, p, mid) >= 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double sobolev_norm(const DiscreteFunction& u, const ExponentField& p) {
  return luxemburg_norm(gradient_magnitude(u), p);
}

HolderBound holder_bound(const ScalarField& u, const ScalarField& v,
                         const ExponentField& p) {
  checkSameMesh(u.mesh(), v.mesh(), "the two fields");
  checkSameMesh(u.mesh(), p.mesh(), "field and exponent");

  const Mesh& mesh = u.mesh();
  double pairing = 0.0;
  for (std::size_t qp = 0; qp < mesh.quadrature_count(); ++qp) {
    pairing += mesh.quadrature_weight(qp) * u.value(qp) * v.value(qp);
  }

  ExponentField conjugate = conjugate_exponent(p);
  double norm_u = luxemburg_norm(u, p);
  double norm_v = luxemburg_norm(v, conjugate);
  double constant = 1.0 / p.min_value() + 1.0 / conjugate.min_value();
  return {std::abs(pairing), constant * norm_u * norm_v};
}

}  // namespace dpeigen
