#pragma once

#include "physid/mesh.hpp"

#include <optional>
#include <string_view>

namespace physid::primitives {

// Axis-aligned cube, 8 vertices and 12 outward-wound triangles.
TriMesh cube(const Vec3& center = Vec3::Zero(), double edge = 1.0);
TriMesh regular_tetrahedron(double edge = 1.0);
// Subdivided icosahedron; 20 * 4^subdivisions faces.
TriMesh icosphere(double radius = 1.0, int subdivisions = 2);
// Open rectangular sheet in the plane z = 0, spanning [-w/2, w/2] in x and
// [bottom, bottom + h] in y, facing +z. Nodes are (cols+1) x (rows+1), row 0 at the top.
TriMesh cloth(int cols, int rows, double width, double height, double bottom = 0.0);
// Closed capped cylinder standing on y = 0 along +y.
TriMesh cylinder(double radius, double height, int segments, int rings);

// Built-in scenes addressable by name: "cloth", "flag", "cube", "sphere",
// "cylinder", "plant".
std::optional<TriMesh> by_name(std::string_view name);

} // namespace physid::primitives
