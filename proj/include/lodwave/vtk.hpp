#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lodwave/dense.hpp"
#include "lodwave/mesh.hpp"

namespace lodwave {

// Legacy ASCII VTK dump of a triangulation (cell type 5), optionally with one
// scalar field per vertex.
inline void write_vtk(const std::string& path, const Triangulation& tri,
                      const std::string& field_name = "", const Vector* field = nullptr) {
  if (field && static_cast<int>(field->size()) != tri.n_vertices())
    throw std::invalid_argument("write_vtk: field size mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_vtk: cannot open " + path);
  out.precision(17);
  out << "# vtk DataFile Version 3.0\n";
  out << "lodwave\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << tri.n_vertices() << " double\n";
  for (const auto& p : tri.vertices) out << p.x << " " << p.y << " 0\n";
  out << "CELLS " << tri.n_triangles() << " " << 4 * tri.n_triangles() << "\n";
  for (const auto& t : tri.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << tri.n_triangles() << "\n";
  for (int t = 0; t < tri.n_triangles(); ++t) out << "5\n";
  if (field) {
    out << "POINT_DATA " << tri.n_vertices() << "\n";
    out << "SCALARS " << field_name << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (double v : *field) out << v << "\n";
  }
}

}  // namespace lodwave
