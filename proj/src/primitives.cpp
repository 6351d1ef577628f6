#include "physid/primitives.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace physid::primitives {

TriMesh cube(const Vec3& center, double edge) {
  const double h = edge / 2.0;
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) {
    v.push_back(center + Vec3((i & 1) ? h : -h, (i & 2) ? h : -h, (i & 4) ? h : -h));
  }
  std::vector<Face> f = {
      {0, 2, 1}, {1, 2, 3}, // z-
      {4, 5, 6}, {5, 7, 6}, // z+
      {0, 1, 4}, {1, 5, 4}, // y-
      {2, 6, 3}, {3, 6, 7}, // y+
      {0, 4, 2}, {2, 4, 6}, // x-
      {1, 3, 5}, {3, 7, 5}, // x+
  };
  return TriMesh::build(std::move(v), std::move(f));
}

TriMesh regular_tetrahedron(double edge) {
  const double s = edge / (2.0 * std::numbers::sqrt2);
  std::vector<Vec3> v = {Vec3(s, s, s), Vec3(s, -s, -s), Vec3(-s, s, -s), Vec3(-s, -s, s)};
  std::vector<Face> f = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  return TriMesh::build(std::move(v), std::move(f));
}

TriMesh icosphere(double radius, int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
  };
  for (Vec3& p : v) p.normalize();
  std::vector<Face> f = {
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
      {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
  };
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back(((v[a] + v[b]) / 2.0).normalized());
      const int idx = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(f.size() * 4);
    for (const Face& tri : f) {
      const int ab = mid(tri[0], tri[1]);
      const int bc = mid(tri[1], tri[2]);
      const int ca = mid(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  for (Vec3& p : v) p *= radius;
  return TriMesh::build(std::move(v), std::move(f));
}

TriMesh cloth(int cols, int rows, double width, double height, double bottom) {
  std::vector<Vec3> v;
  v.reserve(static_cast<std::size_t>((cols + 1) * (rows + 1)));
  for (int r = 0; r <= rows; ++r) {
    for (int c = 0; c <= cols; ++c) {
      v.emplace_back(-width / 2.0 + width * c / cols, bottom + height - height * r / rows, 0.0);
    }
  }
  std::vector<Face> f;
  auto id = [cols](int r, int c) { return r * (cols + 1) + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      // Counter-clockwise seen from +z; alternate diagonals to avoid a bias.
      if ((r + c) % 2 == 0) {
        f.push_back({id(r, c), id(r + 1, c), id(r + 1, c + 1)});
        f.push_back({id(r, c), id(r + 1, c + 1), id(r, c + 1)});
      } else {
        f.push_back({id(r, c), id(r + 1, c), id(r, c + 1)});
        f.push_back({id(r + 1, c), id(r + 1, c + 1), id(r, c + 1)});
      }
    }
  }
  return TriMesh::build(std::move(v), std::move(f));
}

TriMesh cylinder(double radius, double height, int segments, int rings) {
  std::vector<Vec3> v;
  for (int r = 0; r <= rings; ++r) {
    const double y = height * r / rings;
    for (int s = 0; s < segments; ++s) {
      const double a = 2.0 * std::numbers::pi * s / segments;
      v.emplace_back(radius * std::cos(a), y, radius * std::sin(a));
    }
  }
  const int bottom = static_cast<int>(v.size());
  v.emplace_back(0.0, 0.0, 0.0);
  const int top = static_cast<int>(v.size());
  v.emplace_back(0.0, height, 0.0);

  std::vector<Face> f;
  auto id = [segments](int r, int s) { return r * segments + (s % segments); };
  for (int r = 0; r < rings; ++r) {
    for (int s = 0; s < segments; ++s) {
      f.push_back({id(r, s), id(r + 1, s), id(r + 1, s + 1)});
      f.push_back({id(r, s), id(r + 1, s + 1), id(r, s + 1)});
    }
  }
  for (int s = 0; s < segments; ++s) {
    f.push_back({bottom, id(0, s), id(0, s + 1)});
    f.push_back({top, id(rings, s + 1), id(rings, s)});
  }
  // build() re-winds if the orientation above turns out inward.
  return TriMesh::build(std::move(v), std::move(f));
}

std::optional<TriMesh> by_name(std::string_view name) {
  if (name == "cloth") return cloth(16, 16, 1.0, 1.0, 0.5);
  if (name == "flag") return cloth(24, 16, 1.5, 1.0, 1.0);
  if (name == "cube") return cube(Vec3(0.0, 1.0, 0.0), 1.0);
  if (name == "sphere") {
    const TriMesh ball = icosphere(0.5, 3);
    std::vector<Vec3> v = ball.vertices();
    for (Vec3& p : v) p.y() += 1.0;
    return TriMesh::build(std::move(v), ball.faces());
  }
  if (name == "cylinder") return cylinder(0.1, 1.0, 16, 8);
  if (name == "plant") return cylinder(0.05, 1.2, 8, 12);
  return std::nullopt;
}

} // namespace physid::primitives
