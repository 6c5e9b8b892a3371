#pragma once

#include "fem.hpp"

namespace bfem {

struct EdgeProbe {
  ProbeSpec::Kind kind = ProbeSpec::Kind::Cylinder;
  Vec3 point = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  double window_lo = -0.5, window_hi = 0.5; // axial window (cylinder only)
  std::vector<double> radii;                // decreasing

  // Geometric radii between max(2h, r_max/6) and r_max (6 radii, 5 shells).
  static EdgeProbe from_spec(const ProbeSpec& spec, double h);
  void validate(double h) const; // radii decreasing, min radius >= 2h
};

struct Shell {
  double r_in = 0.0, r_out = 0.0;
  double value = 0.0; // ∫_shell |grad u|^q
  int tet_count = 0;
};

struct ShellMoments {
  std::vector<Shell> shells; // outermost first
  double core = 0.0;         // energy inside the innermost radius
  double q = 2.0;
  double h = 0.0;
  ProbeSpec::Kind kind = ProbeSpec::Kind::Cylinder;
};

ShellMoments shell_moments(const TetMesh& mesh, const NodalField& u, const EdgeProbe& probe,
                           double q = 2.0);

struct ExponentReport {
  double lambda = 0.0;     // edge exponent (cylinder) or vertex exponent (sphere)
  double slope = 0.0;      // fitted d log S / d log r
  double residual = 0.0;   // rms log-fit residual
  double fitted_core = 0.0; // fitted unresolved-core energy
  double q_star = 0.0;   // 2/(1-lambda), inf for lambda >= 1
  bool above_3 = false;  // q* > 3
  bool below_4 = false;  // q* < 4
  bool unreliable = false;
  int shells_used = 0;
};

// Least-squares fit of log S(r) vs log r over the probe radii, S(r) being
// the cumulative energy inside radius r; for cylinders S(r) ~ r^(2 lambda),
// for spheres S(r) ~ r^(2 nu + 1).
ExponentReport fit_exponent(const ShellMoments& moments);

// q* = 2/(1-lambda) for lambda < 1, infinity otherwise.
double q_star(double lambda);

struct ConvergenceLevel {
  int n = 0;
  double error = 0.0; // H1 difference to the next level or to the reference
  double rate = 0.0;  // log2(error_prev / error)
};

struct ConvergenceStudy {
  std::vector<ConvergenceLevel> levels;
  double observed_rate = 0.0; // last rate
};

// Reference solution for manufactured studies: u*, grad u*, f = -div grad u*.
struct Manufactured {
  std::function<double(const Vec3&)> u;
  std::function<Vec3(const Vec3&)> grad;
  std::function<double(const Vec3&)> f;
};
Manufactured manufactured_sine();

// H1-seminorm error against an exact gradient (degree-2 quadrature per tet).
double h1_error(const TetMesh& mesh, const NodalField& u,
                const std::function<Vec3(const Vec3&)>& grad_exact);

using CoefficientFactory = std::function<CoefficientField(const TetMesh&)>;
using RhsFactory = std::function<RhsFunctional(const TetMesh&)>;

ConvergenceStudy convergence_study(const Constellation& c, const CoefficientFactory& rho,
                                   const RhsFactory& rhs, const std::vector<int>& levels,
                                   double tol, const Manufactured* reference = nullptr);

} // namespace bfem
