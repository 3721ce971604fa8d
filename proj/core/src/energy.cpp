#include "dpeigen/energy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpeigen {

namespace {

void checkFields(const DiscreteFunction& u, const ExponentField& a,
                 const ExponentField& b) {
  if (&a.mesh() != &u.mesh() || &b.mesh() != &u.mesh()) {
    throw std::invalid_argument(
        "function and exponent fields are sampled on different meshes");
  }
}

void checkField(const DiscreteFunction& u, const ExponentField& a) {
  if (&a.mesh() != &u.mesh()) {
    throw std::invalid_argument(
        "function and exponent field are sampled on different meshes");
  }
}

void checkEpsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("regularization epsilon must be positive");
  }
}

double quotientOrInfinity(double numerator, double denominator) {
  if (denominator > 0.0) {
    return numerator / denominator;
  }
  return std::numeric_limits<double>::infinity();
}

// Shared element sweep for the two diffusion-type first variations. When
// `exponent_weighted` is set, each phase carries its pointwise exponent as a
// factor, which turns the variation of int (1/p)|g|^p into that of int |g|^p.
GradientVector diffusionGradient(const DiscreteFunction& u,
                                 const ExponentField& p1,
                                 const ExponentField& p2, double epsilon,
                                 bool exponent_weighted) {
  const Mesh& mesh = u.mesh();
  const int nv = mesh.nodes_per_element();
  const int nq = mesh.quadrature_per_element();
  const double eps2 = epsilon * epsilon;

  GradientVector gradient(mesh.node_count(), 0.0);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    double gx = 0.0;
    double gy = 0.0;
    for (int local = 0; local < nv; ++local) {
      double v = u.value(static_cast<std::size_t>(mesh.element_node(e, local)));
      auto g = mesh.basis_gradient(e, local);
      gx += v * g[0];
      gy += v * g[1];
    }
    double g2 = gx * gx + gy * gy;

    double coefficient = 0.0;
    for (int k = 0; k < nq; ++k) {
      std::size_t qp = e * static_cast<std::size_t>(nq) +
                       static_cast<std::size_t>(k);
      double w = mesh.quadrature_weight(qp);
      double p1v = p1.value(qp);
      double p2v = p2.value(qp);
      double s1 = std::pow(g2 + eps2, 0.5 * (p1v - 2.0));
      double s2 = std::pow(g2 + eps2, 0.5 * (p2v - 2.0));
      if (exponent_weighted) {
        coefficient += w * (p1v * s1 + p2v * s2);
      } else {
        coefficient += w * (s1 + s2);
      }
    }

    for (int local = 0; local < nv; ++local) {
      std::size_t node =
          static_cast<std::size_t>(mesh.element_node(e, local));
      if (mesh.is_boundary_node(node)) {
        continue;
      }
      auto g = mesh.basis_gradient(e, local);
      gradient[node] += coefficient * (gx * g[0] + gy * g[1]);
    }
  }
  return gradient;
}

GradientVector reactionGradient(const DiscreteFunction& u,
                                const ExponentField& q, double epsilon,
                                bool exponent_weighted) {
  const Mesh& mesh = u.mesh();
  const int nv = mesh.nodes_per_element();
  const int nq = mesh.quadrature_per_element();
  const double eps2 = epsilon * epsilon;

  GradientVector gradient(mesh.node_count(), 0.0);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    for (int k = 0; k < nq; ++k) {
      std::size_t qp = e * static_cast<std::size_t>(nq) +
                       static_cast<std::size_t>(k);
      double value = 0.0;
      for (int local = 0; local < nv; ++local) {
        value += mesh.basis_value(qp, local) *
                 u.value(static_cast<std::size_t>(mesh.element_node(e, local)));
      }
      double qv = q.value(qp);
      double m = std::pow(value * value + eps2, 0.5 * (qv - 2.0)) * value;
      if (exponent_weighted) {
        m *= qv;
      }
      double wm = mesh.quadrature_weight(qp) * m;
      for (int local = 0; local < nv; ++local) {
        std::size_t node =
            static_cast<std::size_t>(mesh.element_node(e, local));
        if (mesh.is_boundary_node(node)) {
          continue;
        }
        gradient[node] += wm * mesh.basis_value(qp, local);
      }
    }
  }
  return gradient;
}

}  // namespace

EnergyBreakdown energy_breakdown(const DiscreteFunction& u,
                                 const ExponentField& p1,
                                 const ExponentField& p2,
                                 const ExponentField& q) {
  checkFields(u, p1, p2);
  checkField(u, q);

  const Mesh& mesh = u.mesh();
  const int nv = mesh.nodes_per_element();
  const int nq = mesh.quadrature_per_element();

  EnergyBreakdown out;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    double gx = 0.0;
    double gy = 0.0;
    for (int local = 0; local < nv; ++local) {
      double v = u.value(static_cast<std::size_t>(mesh.element_node(e, local)));
      auto g = mesh.basis_gradient(e, local);
      gx += v * g[0];
      gy += v * g[1];
    }
    double gm = std::hypot(gx, gy);

    for (int k = 0; k < nq; ++k) {
      std::size_t qp = e * static_cast<std::size_t>(nq) +
                       static_cast<std::size_t>(k);
      double w = mesh.quadrature_weight(qp);
      double p1v = p1.value(qp);
      double p2v = p2.value(qp);
      double qv = q.value(qp);

      double g_p1 = std::pow(gm, p1v);
      double g_p2 = std::pow(gm, p2v);
      out.dirichlet += w * (g_p1 / p1v + g_p2 / p2v);
      out.dirichlet_raw += w * (g_p1 + g_p2);

      double value = 0.0;
      for (int local = 0; local < nv; ++local) {
        value += mesh.basis_value(qp, local) *
                 u.value(static_cast<std::size_t>(mesh.element_node(e, local)));
      }
      double u_q = std::pow(std::abs(value), qv);
      out.mass += w * u_q / qv;
      out.mass_raw += w * u_q;
    }
  }

  out.rayleigh = quotientOrInfinity(out.dirichlet, out.mass);
  out.rayleigh_raw = quotientOrInfinity(out.dirichlet_raw, out.mass_raw);
  return out;
}

GradientVector dirichlet_gradient(const DiscreteFunction& u,
                                  const ExponentField& p1,
                                  const ExponentField& p2, double epsilon) {
  checkFields(u, p1, p2);
  checkEpsilon(epsilon);
  return diffusionGradient(u, p1, p2, epsilon, /*exponent_weighted=*/false);
}

GradientVector mass_gradient(const DiscreteFunction& u, const ExponentField& q,
                             double epsilon) {
  checkField(u, q);
  checkEpsilon(epsilon);
  return reactionGradient(u, q, epsilon, /*exponent_weighted=*/false);
}

GradientVector dirichlet_raw_gradient(const DiscreteFunction& u,
                                      const ExponentField& p1,
                                      const ExponentField& p2,
                                      double epsilon) {
  checkFields(u, p1, p2);
  checkEpsilon(epsilon);
  return diffusionGradient(u, p1, p2, epsilon, /*exponent_weighted=*/true);
}

GradientVector mass_raw_gradient(const DiscreteFunction& u,
                                 const ExponentField& q, double epsilon) {
  checkField(u, q);
  checkEpsilon(epsilon);
  return reactionGradient(u, q, epsilon, /*exponent_weighted=*/true);
}

LambdaEnergy lambda_energy(const DiscreteFunction& u, double lambda,
                           const ExponentField& p1, const ExponentField& p2,
                           const ExponentField& q, double epsilon) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be positive and finite");
  }
  EnergyBreakdown energies = energy_breakdown(u, p1, p2, q);

  LambdaEnergy out;
  out.value = energies.dirichlet - lambda * energies.mass;
  out.gradient = dirichlet_gradient(u, p1, p2, epsilon);
  GradientVector mass_part = mass_gradient(u, q, epsilon);
  for (std::size_t i = 0; i < out.gradient.size(); ++i) {
    out.gradient[i] -= lambda * mass_part[i];
  }
  return out;
}

double weak_residual(const DiscreteFunction& u, double lambda,
                     const ExponentField& p1, const ExponentField& p2,
                     const ExponentField& q, double epsilon) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be positive and finite");
  }
  GradientVector defect = dirichlet_gradient(u, p1, p2, epsilon);
  GradientVector mass_part = mass_gradient(u, q, epsilon);
  double sum = 0.0;
  for (std::size_t i = 0; i < defect.size(); ++i) {
    double d = defect[i] - lambda * mass_part[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace dpeigen
