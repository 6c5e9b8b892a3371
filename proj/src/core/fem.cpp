#include "fem.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace bfem {

namespace {

double neumaier_sum(const std::vector<double>& xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  return s + c;
}

std::uint64_t bits_of(double x) {
  std::uint64_t u;
  std::memcpy(&u, &x, sizeof u);
  return u;
}

// Local slots sorted by the iota-invariant key (y, z, |x|); within one tet the
// key is strictly ordering, and mirrored tets sort into mirrored slots, which
// makes element contributions bitwise equal under the reflection.
struct ElementGeom {
  std::array<int, 4> v;
  std::array<Vec3, 4> grad;
  double volume = 0.0;
};

ElementGeom element_geometry(const TetMesh& mesh, int t) {
  ElementGeom g;
  g.v = mesh.tets[t];
  auto key = [&](int a) {
    const Vec3& p = mesh.vertices[a];
    return std::array<double, 3>{p.y(), p.z(), std::abs(p.x())};
  };
  std::sort(g.v.begin(), g.v.end(), [&](int a, int b) { return key(a) < key(b); });

  Mat3 B;
  for (int k = 0; k < 3; ++k) B.col(k) = mesh.vertices[g.v[k + 1]] - mesh.vertices[g.v[0]];
  const double det = B.determinant();
  g.volume = std::abs(det) / 6.0;
  const Mat3 Binv = B.inverse();
  for (int k = 0; k < 3; ++k) g.grad[k + 1] = Binv.row(k).transpose();
  g.grad[0] = -(g.grad[1] + g.grad[2] + g.grad[3]);
  return g;
}

struct Triplet {
  int i, j;
  double v;
};

CsrMatrix csr_from_triplets(int n, std::vector<Triplet>& trip) {
  // Canonical order: value bits break ties so that sums are independent of the
  // element iteration order.
  std::sort(trip.begin(), trip.end(), [](const Triplet& a, const Triplet& b) {
    if (a.i != b.i) return a.i < b.i;
    if (a.j != b.j) return a.j < b.j;
    return bits_of(a.v) < bits_of(b.v);
  });
  CsrMatrix m;
  m.n = n;
  m.rowptr.assign(n + 1, 0);
  std::vector<int> cols;
  std::vector<double> vals;
  for (std::size_t k = 0; k < trip.size();) {
    std::size_t e = k;
    double s = 0.0;
    while (e < trip.size() && trip[e].i == trip[k].i && trip[e].j == trip[k].j) s += trip[e++].v;
    m.rowptr[trip[k].i + 1]++;
    cols.push_back(trip[k].j);
    vals.push_back(s);
    k = e;
  }
  for (int i = 0; i < n; ++i) m.rowptr[i + 1] += m.rowptr[i];
  m.col = std::move(cols);
  m.val = std::move(vals);
  return m;
}

} // namespace

// ---- dof map ------------------------------------------------------------------

DofMap DofMap::build(const TetMesh& mesh) {
  DofMap d;
  d.dirichlet.assign(mesh.vertex_count(), 0);
  for (const auto& f : mesh.boundary) {
    if (f.bc == BoundaryCondition::Unset)
      fail(ErrorCode::Mesh, "dof map requires a classified mesh");
    if (f.bc == BoundaryCondition::Dirichlet)
      for (int v : f.v) d.dirichlet[v] = 1;
  }
  d.free_index.assign(mesh.vertex_count(), -1);
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v)
    if (!d.dirichlet[v]) d.free_index[v] = d.n_free++;
  return d;
}

// ---- csr ------------------------------------------------------------------------

void CsrMatrix::mul(const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = rowptr[i]; k < rowptr[i + 1]; ++k) s += val[k] * x[col[k]];
    y[i] = s;
  }
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = rowptr[i]; k < rowptr[i + 1]; ++k)
      if (col[k] == i) d[i] = val[k];
  return d;
}

double CsrMatrix::entry(int i, int j) const {
  for (int k = rowptr[i]; k < rowptr[i + 1]; ++k)
    if (col[k] == j) return val[k];
  return 0.0;
}

// ---- assembly -----------------------------------------------------------------

StiffnessSystem assemble(const TetMesh& mesh, const CoefficientField& rho) {
  rho.require_regions(mesh);
  StiffnessSystem sys;
  sys.ellipticity = ellipticity_constant(rho);
  sys.element_count = static_cast<int>(mesh.tet_count());

  std::vector<Triplet> trip;
  trip.reserve(mesh.tet_count() * 16);
  for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
    const ElementGeom g = element_geometry(mesh, static_cast<int>(t));
    const Mat3 r = rho.at_tet(mesh, static_cast<int>(t)).mat();
    for (int a = 0; a < 4; ++a) {
      const Vec3 rg = r * g.grad[a];
      for (int b = a; b < 4; ++b) {
        const double k = g.volume * g.grad[b].dot(rg);
        const int i = g.v[a], j = g.v[b];
        if (i == j) {
          trip.push_back({i, i, k});
        } else {
          trip.push_back({std::min(i, j), std::max(i, j), k});
        }
      }
    }
  }
  // Mirror below the diagonal so the pattern is complete and exactly symmetric.
  const std::size_t upper = trip.size();
  for (std::size_t k = 0; k < upper; ++k)
    if (trip[k].i != trip[k].j) trip.push_back({trip[k].j, trip[k].i, trip[k].v});
  sys.full = csr_from_triplets(static_cast<int>(mesh.vertex_count()), trip);
  sys.dofs = DofMap::build(mesh);
  apply_bc(sys);
  return sys;
}

void apply_bc(StiffnessSystem& sys) {
  const DofMap& d = sys.dofs;
  CsrMatrix r;
  r.n = d.n_free;
  r.rowptr.assign(d.n_free + 1, 0);
  for (int i = 0; i < sys.full.n; ++i) {
    const int fi = d.free_index[i];
    if (fi < 0) continue;
    for (int k = sys.full.rowptr[i]; k < sys.full.rowptr[i + 1]; ++k)
      if (d.free_index[sys.full.col[k]] >= 0) r.rowptr[fi + 1]++;
  }
  for (int i = 0; i < r.n; ++i) r.rowptr[i + 1] += r.rowptr[i];
  r.col.resize(r.rowptr[r.n]);
  r.val.resize(r.rowptr[r.n]);
  std::vector<int> cursor(r.n, 0);
  for (int i = 0; i < sys.full.n; ++i) {
    const int fi = d.free_index[i];
    if (fi < 0) continue;
    for (int k = sys.full.rowptr[i]; k < sys.full.rowptr[i + 1]; ++k) {
      const int fj = d.free_index[sys.full.col[k]];
      if (fj < 0) continue;
      const int pos = r.rowptr[fi] + cursor[fi]++;
      r.col[pos] = fj;
      r.val[pos] = sys.full.val[k];
    }
  }
  sys.reduced = r;
}

// ---- loads ----------------------------------------------------------------------

RhsFunctional RhsFunctional::constant(const TetMesh& mesh, double value) {
  RhsFunctional f;
  f.tet_density.assign(mesh.tet_count(), value);
  return f;
}

RhsFunctional RhsFunctional::nodal(std::vector<double> values) {
  RhsFunctional f;
  f.nodal_density = std::move(values);
  return f;
}

std::vector<double> assemble_load(const TetMesh& mesh, const RhsFunctional& f) {
  const std::size_t nv = mesh.vertex_count();
  if (!f.tet_density.empty() && f.tet_density.size() != mesh.tet_count())
    fail(ErrorCode::InvalidArgument, "tet density size mismatch");
  if (!f.nodal_density.empty() && f.nodal_density.size() != nv)
    fail(ErrorCode::InvalidArgument, "nodal density size mismatch");
  if (!f.tet_flux.empty() && f.tet_flux.size() != mesh.tet_count())
    fail(ErrorCode::InvalidArgument, "flux size mismatch");
  if (!f.extra_load.empty() && f.extra_load.size() != nv)
    fail(ErrorCode::InvalidArgument, "extra load size mismatch");

  std::vector<std::pair<int, double>> contrib;
  for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
    const ElementGeom g = element_geometry(mesh, static_cast<int>(t));
    const double V = g.volume;
    if (!f.tet_density.empty()) {
      const double f0 = f.tet_density[t];
      for (int a = 0; a < 4; ++a) contrib.emplace_back(g.v[a], f0 * V / 4.0);
    }
    if (!f.nodal_density.empty()) {
      double sum = 0.0;
      for (int a = 0; a < 4; ++a) sum += f.nodal_density[g.v[a]];
      for (int a = 0; a < 4; ++a)
        contrib.emplace_back(g.v[a], V / 20.0 * (f.nodal_density[g.v[a]] + sum));
    }
    if (!f.tet_flux.empty()) {
      const Vec3 F = f.tet_flux[t];
      for (int a = 0; a < 4; ++a) contrib.emplace_back(g.v[a], V * F.dot(g.grad[a]));
    }
  }
  std::sort(contrib.begin(), contrib.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return bits_of(a.second) < bits_of(b.second);
  });
  std::vector<double> load(nv, 0.0);
  for (const auto& [i, v] : contrib) load[i] += v;
  if (!f.extra_load.empty())
    for (std::size_t i = 0; i < nv; ++i) load[i] += f.extra_load[i];
  return load;
}

// ---- solver -------------------------------------------------------------------

NodalField solve(const StiffnessSystem& sys, const std::vector<double>& load, double tol,
                 SolveLog* log) {
  if (tol < 1e-14 || tol > 1e-6)
    fail(ErrorCode::InvalidArgument, "solver tolerance must lie in [1e-14, 1e-6]");
  const DofMap& d = sys.dofs;
  if (d.n_free == 0) fail(ErrorCode::Definiteness, "no free dofs: empty Dirichlet complement");
  if (d.n_free == static_cast<int>(d.free_index.size()))
    fail(ErrorCode::Definiteness, "pure Neumann problem: the Dirichlet part is empty");
  const CsrMatrix& A = sys.reduced;

  std::vector<double> b(d.n_free, 0.0);
  for (std::size_t v = 0; v < d.free_index.size(); ++v)
    if (d.free_index[v] >= 0) b[d.free_index[v]] = load[v];

  auto dot = [](const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
  };
  const double bnorm = std::sqrt(dot(b, b));
  SolveLog local_log;
  SolveLog& lg = log ? *log : local_log;

  std::vector<double> x(d.n_free, 0.0);
  if (bnorm > 0.0) {
    std::vector<double> diag = A.diagonal();
    for (double& v : diag) {
      if (v <= 0.0) fail(ErrorCode::Definiteness, "non-positive diagonal in the reduced system");
      v = 1.0 / v;
    }
    std::vector<double> r = b, z(d.n_free), p(d.n_free), Ap(d.n_free);
    for (int i = 0; i < d.n_free; ++i) z[i] = diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    const int max_iter = 50 * static_cast<int>(std::ceil(std::sqrt(double(d.n_free)))) + 10;
    bool converged = false;
    int it = 0;
    for (; it < max_iter; ++it) {
      A.mul(p, Ap);
      const double alpha = rz / dot(p, Ap);
      for (int i = 0; i < d.n_free; ++i) x[i] += alpha * p[i];
      for (int i = 0; i < d.n_free; ++i) r[i] -= alpha * Ap[i];
      const double rnorm = std::sqrt(dot(r, r));
      lg.residual_history.push_back(rnorm / bnorm);
      if (rnorm <= tol * bnorm) {
        converged = true;
        ++it;
        break;
      }
      for (int i = 0; i < d.n_free; ++i) z[i] = diag[i] * r[i];
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (int i = 0; i < d.n_free; ++i) p[i] = z[i] + beta * p[i];
    }
    lg.iterations = it;
    lg.converged = converged;
    lg.final_residual = lg.residual_history.empty() ? 0.0 : lg.residual_history.back();
    if (!converged) {
      std::ostringstream os;
      os << "conjugate gradients failed to reach " << tol << " within " << max_iter
         << " iterations (residual " << lg.final_residual << ")";
      fail(ErrorCode::Solver, os.str());
    }
  } else {
    lg.converged = true;
  }

  NodalField u(d.free_index.size(), 0.0);
  for (std::size_t v = 0; v < d.free_index.size(); ++v)
    if (d.free_index[v] >= 0) u[v] = x[d.free_index[v]];
  return u;
}

double residual(const StiffnessSystem& sys, const NodalField& u, const std::vector<double>& load) {
  const DofMap& d = sys.dofs;
  std::vector<double> x(d.n_free, 0.0), b(d.n_free, 0.0);
  for (std::size_t v = 0; v < d.free_index.size(); ++v)
    if (d.free_index[v] >= 0) {
      x[d.free_index[v]] = u[v];
      b[d.free_index[v]] = load[v];
    }
  std::vector<double> Ax;
  sys.reduced.mul(x, Ax);
  double rr = 0.0, bb = 0.0;
  for (int i = 0; i < d.n_free; ++i) {
    const double ri = b[i] - Ax[i];
    rr += ri * ri;
    bb += b[i] * b[i];
  }
  return bb > 0.0 ? std::sqrt(rr / bb) : std::sqrt(rr);
}

// ---- localization ----------------------------------------------------------------

RhsFunctional localize(const TetMesh& mesh, const CoefficientField& rho, const NodalField& u,
                       const NodalField& eta, const RhsFunctional& f) {
  for (double e : eta)
    if (e < -1e-12 || e > 1.0 + 1e-12)
      fail(ErrorCode::InvalidArgument, "cutoff function must take values in [0,1]");

  RhsFunctional out;
  out.tet_density.assign(mesh.tet_count(), 0.0);
  out.tet_flux.assign(mesh.tet_count(), Vec3::Zero());
  out.extra_load.assign(mesh.vertex_count(), 0.0);

  for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
    const ElementGeom g = element_geometry(mesh, static_cast<int>(t));
    const double V = g.volume;
    const Mat3 r = rho.at_tet(mesh, static_cast<int>(t)).mat();
    Vec3 grad_u = Vec3::Zero(), grad_eta = Vec3::Zero();
    double mean_u = 0.0, mean_eta = 0.0;
    for (int a = 0; a < 4; ++a) {
      grad_u += u[g.v[a]] * g.grad[a];
      grad_eta += eta[g.v[a]] * g.grad[a];
      mean_u += 0.25 * u[g.v[a]];
      mean_eta += 0.25 * eta[g.v[a]];
    }
    out.tet_density[t] = -(r * grad_u).dot(grad_eta);
    out.tet_flux[t] = mean_u * (r * grad_eta);

    // <f, eta v>, exact for the P1 data classes carried by f.
    if (!f.tet_density.empty()) {
      const double f0 = f.tet_density[t];
      double sum_eta = 0.0;
      for (int a = 0; a < 4; ++a) sum_eta += eta[g.v[a]];
      for (int a = 0; a < 4; ++a)
        out.extra_load[g.v[a]] += f0 * V / 20.0 * (eta[g.v[a]] + sum_eta);
    }
    if (!f.nodal_density.empty()) {
      for (int a = 0; a < 4; ++a) {
        double s = 0.0;
        for (int j = 0; j < 4; ++j)
          for (int k = 0; k < 4; ++k) {
            // ∫ λ_j λ_k λ_a over the tet, divided by V
            double w;
            if (j == k && k == a) w = 1.0 / 20.0;
            else if (j == k || k == a || j == a) w = 1.0 / 60.0;
            else w = 1.0 / 120.0;
            s += w * f.nodal_density[g.v[j]] * eta[g.v[k]];
          }
        out.extra_load[g.v[a]] += V * s;
      }
    }
    if (!f.tet_flux.empty()) {
      const Vec3 F = f.tet_flux[t];
      const double F_grad_eta = F.dot(grad_eta);
      for (int a = 0; a < 4; ++a)
        out.extra_load[g.v[a]] += V * (F.dot(g.grad[a]) * mean_eta + F_grad_eta / 4.0);
    }
  }
  if (!f.extra_load.empty())
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i)
      out.extra_load[i] += f.extra_load[i] * eta[i];
  return out;
}

double localization_residual(const TetMesh& mesh, const CoefficientField& rho, const NodalField& u,
                             const NodalField& eta, const RhsFunctional& f, double tol) {
  StiffnessSystem sys = assemble(mesh, rho);
  const RhsFunctional f_loc = localize(mesh, rho, u, eta, f);
  const NodalField w = solve(sys, assemble_load(mesh, f_loc), tol);
  NodalField eta_u(mesh.vertex_count());
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) eta_u[i] = eta[i] * u[i];
  NodalField diff(mesh.vertex_count());
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) diff[i] = w[i] - eta_u[i];
  const double num = std::sqrt(std::max(0.0, energy_product(mesh, rho, diff, diff)));
  const double den = std::sqrt(std::max(0.0, energy_product(mesh, rho, eta_u, eta_u)));
  return den > 0.0 ? num / den : num;
}

// ---- norms ------------------------------------------------------------------------

Vec3 tet_gradient(const TetMesh& mesh, int t, const NodalField& u) {
  const ElementGeom g = element_geometry(mesh, t);
  Vec3 s = Vec3::Zero();
  for (int a = 0; a < 4; ++a) s += u[g.v[a]] * g.grad[a];
  return s;
}

double h1_seminorm(const TetMesh& mesh, const NodalField& u) {
  std::vector<double> parts(mesh.tet_count());
  for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
    const ElementGeom g = element_geometry(mesh, static_cast<int>(t));
    Vec3 s = Vec3::Zero();
    for (int a = 0; a < 4; ++a) s += u[g.v[a]] * g.grad[a];
    parts[t] = g.volume * s.squaredNorm();
  }
  return std::sqrt(std::max(0.0, neumaier_sum(parts)));
}

double l2_norm(const TetMesh& mesh, const NodalField& u) {
  std::vector<double> parts(mesh.tet_count());
  for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
    const auto& T = mesh.tets[t];
    const double V = std::abs(mesh.tet_volume(static_cast<int>(t)));
    double q = 0.0, s = 0.0;
    for (int a = 0; a < 4; ++a) {
      q += u[T[a]] * u[T[a]];
      s += u[T[a]];
    }
    parts[t] = V / 20.0 * (q + s * s);
  }
  return std::sqrt(std::max(0.0, neumaier_sum(parts)));
}

double w1p_norm(const TetMesh& mesh, const NodalField& u, double p) {
  std::vector<double> parts(mesh.tet_count());
  for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
    const ElementGeom g = element_geometry(mesh, static_cast<int>(t));
    Vec3 s = Vec3::Zero();
    double mean = 0.0;
    for (int a = 0; a < 4; ++a) {
      s += u[g.v[a]] * g.grad[a];
      mean += 0.25 * u[g.v[a]];
    }
    parts[t] = g.volume * (std::pow(std::abs(mean), p) + std::pow(s.norm(), p));
  }
  return std::pow(neumaier_sum(parts), 1.0 / p);
}

double energy_product(const TetMesh& mesh, const CoefficientField& rho, const NodalField& u,
                      const NodalField& v) {
  std::vector<double> parts(mesh.tet_count());
  for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
    const ElementGeom g = element_geometry(mesh, static_cast<int>(t));
    const Mat3 r = rho.at_tet(mesh, static_cast<int>(t)).mat();
    Vec3 gu = Vec3::Zero(), gv = Vec3::Zero();
    for (int a = 0; a < 4; ++a) {
      gu += u[g.v[a]] * g.grad[a];
      gv += v[g.v[a]] * g.grad[a];
    }
    parts[t] = g.volume * gv.dot(r * gu);
  }
  return neumaier_sum(parts);
}

// ---- point evaluation ----------------------------------------------------------------

PointLocator::PointLocator(const TetMesh& mesh) : mesh_(mesh) {
  lo_ = mesh.vertices.front();
  Vec3 hi = lo_;
  for (const auto& v : mesh.vertices) {
    lo_ = lo_.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  cell_ = mesh.h > 0.0 ? mesh.h : (hi - lo_).maxCoeff() / 8.0;
  nx_ = std::max(1, int(std::ceil((hi.x() - lo_.x()) / cell_)));
  ny_ = std::max(1, int(std::ceil((hi.y() - lo_.y()) / cell_)));
  nz_ = std::max(1, int(std::ceil((hi.z() - lo_.z()) / cell_)));
  buckets_.resize(std::size_t(nx_) * ny_ * nz_);
  for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
    Vec3 tlo = mesh.vertices[mesh.tets[t][0]], thi = tlo;
    for (int k = 1; k < 4; ++k) {
      tlo = tlo.cwiseMin(mesh.vertices[mesh.tets[t][k]]);
      thi = thi.cwiseMax(mesh.vertices[mesh.tets[t][k]]);
    }
    const int i0 = std::clamp(int((tlo.x() - lo_.x()) / cell_ - 0.5), 0, nx_ - 1);
    const int i1 = std::clamp(int((thi.x() - lo_.x()) / cell_ + 0.5), 0, nx_ - 1);
    const int j0 = std::clamp(int((tlo.y() - lo_.y()) / cell_ - 0.5), 0, ny_ - 1);
    const int j1 = std::clamp(int((thi.y() - lo_.y()) / cell_ + 0.5), 0, ny_ - 1);
    const int k0 = std::clamp(int((tlo.z() - lo_.z()) / cell_ - 0.5), 0, nz_ - 1);
    const int k1 = std::clamp(int((thi.z() - lo_.z()) / cell_ + 0.5), 0, nz_ - 1);
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j)
        for (int k = k0; k <= k1; ++k)
          buckets_[(std::size_t(i) * ny_ + j) * nz_ + k].push_back(static_cast<int>(t));
  }
}

bool PointLocator::bary(int t, const Vec3& p, std::array<double, 4>& b) const {
  const auto& T = mesh_.tets[t];
  Mat3 B;
  for (int k = 0; k < 3; ++k) B.col(k) = mesh_.vertices[T[k + 1]] - mesh_.vertices[T[0]];
  const Vec3 lam = B.inverse() * (p - mesh_.vertices[T[0]]);
  b = {1.0 - lam.sum(), lam(0), lam(1), lam(2)};
  const double tol = -1e-9;
  return b[0] >= tol && b[1] >= tol && b[2] >= tol && b[3] >= tol;
}

double PointLocator::eval(const NodalField& u, const Vec3& p, int side) const {
  const int i = std::clamp(int((p.x() - lo_.x()) / cell_), 0, nx_ - 1);
  const int j = std::clamp(int((p.y() - lo_.y()) / cell_), 0, ny_ - 1);
  const int k = std::clamp(int((p.z() - lo_.z()) / cell_), 0, nz_ - 1);
  std::array<double, 4> b;
  for (int pass = 0; pass < 2; ++pass) {
    for (int t : buckets_[(std::size_t(i) * ny_ + j) * nz_ + k]) {
      if (pass == 0 && side != 0 && side * mesh_.tet_centroid(t).x() < 0.0) continue;
      if (!bary(t, p, b)) continue;
      double s = 0.0;
      for (int a = 0; a < 4; ++a) s += b[a] * u[mesh_.tets[t][a]];
      return s;
    }
    if (side == 0) break;
  }
  fail(ErrorCode::Mesh, "point evaluation failed: point outside the mesh");
}

NodalField interpolate_nodal(const TetMesh& coarse, const NodalField& u, const TetMesh& fine) {
  PointLocator loc(coarse);
  std::vector<int> side(fine.vertex_count(), 0);
  for (const auto& [plus, minus] : fine.crack_pairs) {
    side[plus] = 1;
    side[minus] = -1;
  }
  NodalField out(fine.vertex_count());
  for (std::size_t v = 0; v < fine.vertex_count(); ++v)
    out[v] = loc.eval(u, fine.vertices[v], side[v]);
  return out;
}

double spectral_norm_estimate(const CsrMatrix& a, int iterations) {
  if (a.n == 0) return 0.0;
  std::vector<double> x(a.n, 1.0 / std::sqrt(double(a.n))), y;
  double norm = 0.0;
  for (int it = 0; it < iterations; ++it) {
    a.mul(x, y);
    norm = 0.0;
    for (double v : y) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    for (int i = 0; i < a.n; ++i) x[i] = y[i] / norm;
  }
  return norm;
}

CsrMatrix csr_difference(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.n != b.n || a.rowptr != b.rowptr || a.col != b.col)
    fail(ErrorCode::InvalidArgument, "matrix difference requires identical patterns");
  CsrMatrix d = a;
  for (std::size_t k = 0; k < d.val.size(); ++k) d.val[k] -= b.val[k];
  return d;
}

} // namespace bfem
