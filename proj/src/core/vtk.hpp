#pragma once

#include <string>
#include <utility>
#include <vector>

#include "geometry.hpp"

namespace bfem {

// Legacy ASCII VTK unstructured grid: tets as cell type 10 with region labels
// as cell data, plus optional nodal scalar fields.
void write_vtk_volume(const TetMesh& mesh, const std::string& path,
                      const std::vector<std::pair<std::string, std::vector<double>>>& point_data = {});

// Companion surface file: boundary triangles (cell type 5) with facet labels
// (1 Dirichlet, 2 Neumann, 3 slit plus, 4 slit minus) as cell data.
void write_vtk_surface(const TetMesh& mesh, const std::string& path);

} // namespace bfem
