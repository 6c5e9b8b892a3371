#include "transforms.hpp"

#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace bfem {

AffineMap AffineMap::inverse() const {
  AffineMap inv;
  inv.linear = linear.inverse();
  inv.offset = -(inv.linear * offset);
  return inv;
}

int PiecewiseAffineMap::piece_at(const Vec3& x, double tol) const {
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i].contains(x, tol)) return static_cast<int>(i);
  fail(ErrorCode::InvalidArgument, "point outside the domain of a piecewise affine map");
}

Vec3 PiecewiseAffineMap::apply_inverse(const Vec3& y) const {
  for (const auto& cell : cells) {
    const Vec3 x = cell.map.inverse()(y);
    if (cell.contains(x, 1e-12)) return x;
  }
  fail(ErrorCode::InvalidArgument, "point outside the image of a piecewise affine map");
}

PiecewiseAffineMap identity_map() {
  PiecewiseAffineMap m;
  m.cells.push_back({{}, AffineMap{}});
  return m;
}

PiecewiseAffineMap linear_map(const Mat3& a) {
  PiecewiseAffineMap m;
  m.cells.push_back({{}, AffineMap{a, Vec3::Zero()}});
  return m;
}

PiecewiseAffineMap involution_map() {
  Mat3 iota = Mat3::Identity();
  iota(0, 0) = -1.0;
  return linear_map(iota);
}

PiecewiseAffineMap diagonal_map(double d1, double d2, double d3) {
  return linear_map(Vec3(d1, d2, d3).asDiagonal());
}

std::pair<double, double> bilipschitz_constants(const PiecewiseAffineMap& m) {
  double c1 = std::numeric_limits<double>::infinity(), c2 = 0.0;
  for (const auto& cell : m.cells) {
    Eigen::JacobiSVD<Mat3> svd(cell.map.linear);
    const double smax = svd.singularValues()(0), smin = svd.singularValues()(2);
    const double scale = std::max(smax, 1.0);
    if (std::abs(cell.map.linear.determinant()) <= 1e-14 * scale * scale * scale)
      fail(ErrorCode::Definiteness, "degenerate piece in piecewise affine map");
    c1 = std::min(c1, smin);
    c2 = std::max(c2, smax);
  }
  return {c1, c2};
}

namespace {

// Deterministic sign: first component of v larger than the tolerance decides.
Vec3 canonical_sign(const Vec3& v) {
  for (int i = 0; i < 3; ++i) {
    if (v[i] > 1e-13) return v;
    if (v[i] < -1e-13) return -v;
  }
  return v;
}

} // namespace

Mat3 normalize_matrix(const Mat3& a) {
  const Mat3 sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> es(sym);
  if (es.eigenvalues()(0) <= 1e-12 * sym.trace())
    fail(ErrorCode::Definiteness, "normalize_matrix requires a symmetric positive definite input");

  // Descending eigenvalues with a deterministic eigenvector sign convention;
  // rows of o diagonalize: o a o^T = diag(ev).
  Vec3 ev;
  Mat3 o;
  for (int i = 0; i < 3; ++i) {
    ev(i) = es.eigenvalues()(2 - i);
    o.row(i) = canonical_sign(es.eigenvectors().col(2 - i)).transpose();
  }
  const Mat3 s = Vec3(std::sqrt(ev(1) * ev(2)), std::sqrt(ev(0) * ev(2)),
                      std::sqrt(ev(0) * ev(1)))
                     .asDiagonal();
  const Mat3 so = s * o;

  // Orthonormal basis of the image of span{e2,e3} under so, rotated back.
  Vec3 h2 = canonical_sign(so.col(1).normalized());
  Vec3 h3 = so.col(2) - so.col(2).dot(h2) * h2;
  h3 = canonical_sign(h3.normalized());
  const Vec3 h1 = h2.cross(h3);
  Mat3 v;
  v.row(0) = h1.transpose();
  v.row(1) = h2.transpose();
  v.row(2) = h3.transpose();
  return v * so;
}

PiecewiseAffineMap build_l_map() {
  // Plane Q through (-1,0,-1/4) and the y-axis: {z = x/4}.
  const Vec3 q_normal(-0.25, 0.0, 1.0);
  PiecewiseAffineMap m;
  MapCell below;
  below.region.push_back({q_normal, 0.0});
  below.map = AffineMap{};
  m.cells.push_back(below);

  Mat3 upper;
  upper << 0, 0, 4, //
      0, 1, 0,      //
      -1, 0, 5;
  MapCell above;
  above.region.push_back({-q_normal, 0.0});
  above.map = AffineMap{upper, Vec3::Zero()};
  m.cells.push_back(above);
  return m;
}

PiecewiseAffineMap straighten_slit_triangle(SlitKind kind) {
  if (kind != SlitKind::Sigma2 && kind != SlitKind::Sigma3)
    fail(ErrorCode::InvalidArgument, "straightening is defined for the triangle slits only");
  const double r2 = std::sqrt(2.0);
  Mat3 lower, upper;
  lower << 1, 0, 0, //
      0, 1, -1,     //
      0, 0, r2;
  upper << 1, 0, 0, //
      0, 1, 1,      //
      0, 0, r2;
  if (kind == SlitKind::Sigma3) {
    // The straightened wedge is the complement; flip y so the slit ends up on
    // the Sigma1 side.
    const Mat3 flip = Vec3(1, -1, 1).asDiagonal();
    lower = flip * lower;
    upper = flip * upper;
  }
  PiecewiseAffineMap m;
  MapCell lo, hi;
  lo.region.push_back({Vec3::UnitZ(), 0.0});
  lo.map = AffineMap{lower, Vec3::Zero()};
  hi.region.push_back({-Vec3::UnitZ(), 0.0});
  hi.map = AffineMap{upper, Vec3::Zero()};
  m.cells = {lo, hi};
  return m;
}

double shrink_factor(const PiecewiseAffineMap& m) {
  // alpha*C is contained in the image iff every vertex direction d of the
  // per-piece image polytopes satisfies A^{-1}(alpha d) in C; the pieces are
  // linear and split by a plane through the origin, so alpha scales out.
  std::vector<Vec3> corners;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) corners.emplace_back(sx, sy, sz);

  double alpha = std::numeric_limits<double>::infinity();
  auto clip = [&](const AffineMap& piece, const std::vector<Vec3>& dirs) {
    const Mat3 inv = piece.linear.inverse();
    for (const auto& d : dirs) {
      const Vec3 w = inv * d;
      for (int i = 0; i < 3; ++i)
        if (w[i] != 0.0) alpha = std::min(alpha, 1.0 / std::abs(w[i]));
    }
  };

  if (m.cells.size() == 1) {
    clip(m.cells[0].map, corners);
    return alpha;
  }
  if (m.cells.size() != 2 || m.cells[0].region.size() != 1 || m.cells[0].region[0].bound != 0.0)
    fail(ErrorCode::InvalidArgument, "shrink_factor supports maps split by one plane through 0");

  const Vec3 nrm = m.cells[0].region[0].normal;
  // Image-side split plane equals the source plane (the pieces fix it).
  std::vector<Vec3> plane_points;
  for (std::size_t a = 0; a < corners.size(); ++a)
    for (std::size_t b = a + 1; b < corners.size(); ++b) {
      if ((corners[a] - corners[b]).cwiseAbs().sum() != 2.0) continue; // cube edges only
      const double fa = nrm.dot(corners[a]), fb = nrm.dot(corners[b]);
      if (fa * fb < 0.0) plane_points.push_back(corners[a] + fa / (fa - fb) * (corners[b] - corners[a]));
    }
  for (const auto& cell : m.cells) {
    const double side = cell.region[0].normal.dot(nrm) > 0.0 ? 1.0 : -1.0;
    std::vector<Vec3> dirs = plane_points;
    for (const auto& v : corners)
      if (side * nrm.dot(v) <= 0.0) dirs.push_back(v);
    clip(cell.map, dirs);
  }
  return alpha;
}

TransformedMesh transform_mesh(const PiecewiseAffineMap& m, const TetMesh& src) {
  TransformedMesh out;
  out.mesh = src;
  out.mesh.vertex_symmetry.clear(); // symmetry does not survive a general map
  out.mesh.tet_symmetry.clear();
  out.tet_piece.resize(src.tet_count());

  for (std::size_t i = 0; i < src.vertex_count(); ++i) out.mesh.vertices[i] = m(src.vertices[i]);

  // Refined region labels (region, piece) and the alignment check: vertex
  // images must agree with the centroid piece evaluation.
  std::map<std::pair<int, int>, int> refined;
  for (std::size_t t = 0; t < src.tet_count(); ++t) {
    const int p = m.piece_at(src.tet_centroid(static_cast<int>(t)), 0.0);
    out.tet_piece[t] = p;
    const AffineMap& piece = m.cells[p].map;
    for (int k = 0; k < 4; ++k) {
      const int v = src.tets[t][k];
      if ((piece(src.vertices[v]) - out.mesh.vertices[v]).norm() > 0.0)
        fail(ErrorCode::InvalidArgument,
             "mesh is not aligned with the map pieces at tet " + std::to_string(t));
    }
    const std::pair<int, int> key{src.tet_region[t], p};
    auto it = refined.find(key);
    if (it == refined.end()) {
      const int label = static_cast<int>(out.region_old.size());
      refined.emplace(key, label);
      out.region_old.push_back(key.first);
      out.region_piece.push_back(key.second);
      out.mesh.tet_region[t] = label;
    } else {
      out.mesh.tet_region[t] = it->second;
    }
  }

  // Orientation: pieces may reverse it; re-orient tets positively.
  for (std::size_t t = 0; t < src.tet_count(); ++t)
    if (out.mesh.tet_volume(static_cast<int>(t)) < 0.0)
      std::swap(out.mesh.tets[t][2], out.mesh.tets[t][3]);

  return out;
}

std::vector<double> pullback_function(const TransformedMesh& tm, const std::vector<double>& f_image) {
  if (f_image.size() != tm.mesh.vertex_count())
    fail(ErrorCode::Mesh, "pullback: field size does not match the image mesh");
  return f_image; // node-to-node correspondence by construction
}

} // namespace bfem
