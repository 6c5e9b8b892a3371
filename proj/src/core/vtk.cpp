#include "vtk.hpp"

#include <fstream>
#include <iomanip>

namespace bfem {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << std::setprecision(17);
  return out;
}

} // namespace

void write_vtk_volume(const TetMesh& mesh, const std::string& path,
                      const std::vector<std::pair<std::string, std::vector<double>>>& point_data) {
  auto out = open_out(path);
  out << "# vtk DataFile Version 2.0\nbfem volume mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertex_count() << " double\n";
  for (const auto& v : mesh.vertices) out << v.x() << " " << v.y() << " " << v.z() << "\n";
  out << "CELLS " << mesh.tet_count() << " " << 5 * mesh.tet_count() << "\n";
  for (const auto& t : mesh.tets) out << "4 " << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
  out << "CELL_TYPES " << mesh.tet_count() << "\n";
  for (std::size_t t = 0; t < mesh.tet_count(); ++t) out << "10\n";
  out << "CELL_DATA " << mesh.tet_count() << "\n";
  out << "SCALARS region int 1\nLOOKUP_TABLE default\n";
  for (int r : mesh.tet_region) out << r << "\n";
  if (!point_data.empty()) {
    out << "POINT_DATA " << mesh.vertex_count() << "\n";
    for (const auto& [name, values] : point_data) {
      if (values.size() != mesh.vertex_count())
        fail(ErrorCode::InvalidArgument, "point data '" + name + "' size mismatch");
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : values) out << v << "\n";
    }
  }
}

void write_vtk_surface(const TetMesh& mesh, const std::string& path) {
  auto out = open_out(path);
  out << "# vtk DataFile Version 2.0\nbfem boundary facets\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertex_count() << " double\n";
  for (const auto& v : mesh.vertices) out << v.x() << " " << v.y() << " " << v.z() << "\n";
  out << "CELLS " << mesh.boundary.size() << " " << 4 * mesh.boundary.size() << "\n";
  for (const auto& f : mesh.boundary) out << "3 " << f.v[0] << " " << f.v[1] << " " << f.v[2] << "\n";
  out << "CELL_TYPES " << mesh.boundary.size() << "\n";
  for (std::size_t f = 0; f < mesh.boundary.size(); ++f) out << "5\n";
  out << "CELL_DATA " << mesh.boundary.size() << "\n";
  out << "SCALARS label int 1\nLOOKUP_TABLE default\n";
  for (const auto& f : mesh.boundary) {
    int label = f.bc == BoundaryCondition::Neumann ? 2 : 1;
    if (f.side == FacetSide::SlitPlus) label = 3;
    if (f.side == FacetSide::SlitMinus) label = 4;
    out << label << "\n";
  }
}

} // namespace bfem
