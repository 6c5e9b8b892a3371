#include "coefficients.hpp"

#include <Eigen/Eigenvalues>

namespace bfem {

SymMat3 SymMat3::from(const Mat3& m) {
  SymMat3 s;
  s.xx = m(0, 0);
  s.yy = m(1, 1);
  s.zz = m(2, 2);
  s.xy = 0.5 * (m(0, 1) + m(1, 0));
  s.xz = 0.5 * (m(0, 2) + m(2, 0));
  s.yz = 0.5 * (m(1, 2) + m(2, 1));
  return s;
}

Mat3 SymMat3::mat() const {
  Mat3 m;
  m << xx, xy, xz, //
      xy, yy, yz,  //
      xz, yz, zz;
  return m;
}

double SymMat3::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Mat3> es(mat(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double SymMat3::spectral_norm() const {
  Eigen::SelfAdjointEigenSolver<Mat3> es(mat(), Eigen::EigenvaluesOnly);
  return std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(2)));
}

bool SymMat3::equals(const SymMat3& o, double tol) const {
  return std::abs(xx - o.xx) <= tol && std::abs(yy - o.yy) <= tol && std::abs(zz - o.zz) <= tol &&
         std::abs(xy - o.xy) <= tol && std::abs(xz - o.xz) <= tol && std::abs(yz - o.yz) <= tol;
}

CoefficientField CoefficientField::constant(const TetMesh& mesh, const SymMat3& value) {
  CoefficientField f;
  for (int r : mesh.tet_region) f.regions.emplace(r, value);
  return f;
}

const SymMat3& CoefficientField::at_region(int label) const {
  auto it = regions.find(label);
  if (it == regions.end())
    fail(ErrorCode::InvalidArgument, "coefficient field has no region " + std::to_string(label));
  return it->second;
}

void CoefficientField::require_regions(const TetMesh& mesh) const {
  for (int r : mesh.tet_region)
    if (!regions.count(r))
      fail(ErrorCode::InvalidArgument,
           "coefficient field misses mesh region " + std::to_string(r));
}

void CoefficientField::check_limits(const TetMesh& mesh) const {
  for (const auto& lim : limits) {
    bool found = false;
    for (std::size_t t = 0; t < mesh.tet_count() && !found; ++t) {
      const Vec3 cen = mesh.tet_centroid(static_cast<int>(t));
      if (lim.x_side * cen.x() <= 0.0) continue;
      bool touches = false;
      for (int k = 0; k < 4; ++k)
        if ((mesh.vertices[mesh.tets[t][k]] - lim.point).norm() == 0.0) touches = true;
      if (!touches) continue;
      found = true;
      if (!at_tet(mesh, static_cast<int>(t)).equals(lim.value, 1e-14))
        fail(ErrorCode::InvalidArgument, "declared limit disagrees with the adjacent region value");
    }
    if (!found) fail(ErrorCode::InvalidArgument, "declared limit point touches no tet on its side");
  }
}

double ellipticity_constant(const CoefficientField& c) {
  double emin = std::numeric_limits<double>::infinity();
  int argmin = -1;
  for (const auto& [label, m] : c.regions) {
    const double e = m.min_eigenvalue();
    if (e < emin) {
      emin = e;
      argmin = label;
    }
  }
  if (!(emin > 0.0))
    fail(ErrorCode::Definiteness,
         "coefficient field is not elliptic in region " + std::to_string(argmin));
  return emin;
}

bool check_iota_invariance(const CoefficientField& c, const TetMesh& mesh) {
  if (mesh.tet_symmetry.empty())
    fail(ErrorCode::Mesh, "iota invariance requires a symmetric mesh");
  for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
    const int r = mesh.tet_region[t];
    const int r_img = mesh.tet_region[mesh.tet_symmetry[t]];
    if (!c.at_region(r_img).equals(c.at_region(r).iota_conjugate(), 1e-14)) return false;
  }
  return true;
}

CoefficientField mirror_extend(const SymMat3& mu_plus, const TetMesh& mesh) {
  if (!mesh.symmetric()) fail(ErrorCode::Mesh, "mirror extension requires a symmetric mesh");
  CoefficientField f;
  const SymMat3 mu_minus = mu_plus.iota_conjugate();
  for (std::size_t t = 0; t < mesh.tet_count(); ++t) {
    const int r = mesh.tet_region[t];
    f.regions.emplace(r, (r & 1) ? mu_plus : mu_minus);
  }
  return f;
}

CoefficientField perturb(const CoefficientField& c, const CoefficientField& delta, double eps) {
  const double norm = linf_norm(delta);
  if (norm > eps)
    fail(ErrorCode::InvalidArgument, "perturbation exceeds the declared L-infinity bound");
  CoefficientField out = c;
  for (auto& [label, m] : out.regions) {
    auto it = delta.regions.find(label);
    if (it != delta.regions.end()) m = m + it->second;
  }
  out.perturb_eps = eps;
  ellipticity_constant(out); // throws if definiteness is lost
  return out;
}

double linf_norm(const CoefficientField& c) {
  double n = 0.0;
  for (const auto& [label, m] : c.regions) n = std::max(n, m.spectral_norm());
  return n;
}

CoefficientField pushforward_coefficient(const PiecewiseAffineMap& m, const CoefficientField& rho,
                                         const TransformedMesh& tm) {
  CoefficientField out;
  for (std::size_t label = 0; label < tm.region_old.size(); ++label) {
    const SymMat3& r = rho.at_region(tm.region_old[label]);
    const AffineMap& piece = m.cells[tm.region_piece[label]].map;
    const double det = std::abs(piece.linear.determinant());
    if (det == 0.0) fail(ErrorCode::Definiteness, "pushforward through a singular piece");
    const Mat3 omega = piece.linear * r.mat() * piece.linear.transpose() / det;
    out.regions.emplace(static_cast<int>(label), SymMat3::from(omega));
  }
  return out;
}

} // namespace bfem
