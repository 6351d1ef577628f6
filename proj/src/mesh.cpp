#include "physid/mesh.hpp"

#include "physid/codec.hpp"
#include "physid/errors.hpp"

#include <Eigen/Geometry>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <unordered_map>

namespace physid {

namespace {

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

struct EdgeUse {
  int face;
  int from; // directed as wound in this face
  int to;
  int opposite;
};

} // namespace

TriMesh TriMesh::build(std::vector<Vec3> vertices, std::vector<Face> faces) {
  if (vertices.empty()) throw Error(Errc::MalformedMesh, "mesh has no vertices");
  if (faces.empty()) throw Error(Errc::MalformedMesh, "mesh has no faces");
  const int n = static_cast<int>(vertices.size());
  for (const Vec3& v : vertices) {
    if (!v.allFinite()) throw Error(Errc::MalformedMesh, "non-finite vertex coordinate");
  }
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& face = faces[f];
    for (int idx : face) {
      if (idx < 0 || idx >= n) {
        throw Error(Errc::MalformedMesh,
                    "face " + std::to_string(f) + " index " + std::to_string(idx) + " out of range");
      }
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      throw Error(Errc::MalformedMesh, "face " + std::to_string(f) + " repeats a vertex");
    }
  }

  TriMesh mesh;
  mesh.vertices_ = std::move(vertices);
  mesh.faces_ = std::move(faces);

  std::unordered_map<std::uint64_t, int> edge_index;
  std::vector<std::vector<EdgeUse>> uses;
  for (int f = 0; f < static_cast<int>(mesh.faces_.size()); ++f) {
    const Face& face = mesh.faces_[f];
    for (int k = 0; k < 3; ++k) {
      const int from = face[k];
      const int to = face[(k + 1) % 3];
      const int opp = face[(k + 2) % 3];
      auto [it, inserted] = edge_index.try_emplace(edge_key(from, to), static_cast<int>(mesh.edges_.size()));
      if (inserted) {
        const double len = (mesh.vertices_[to] - mesh.vertices_[from]).norm();
        if (!(len > 0.0)) {
          throw Error(Errc::MalformedMesh,
                      "zero-length edge " + std::to_string(from) + "-" + std::to_string(to));
        }
        mesh.edges_.push_back({std::min(from, to), std::max(from, to), len});
        uses.emplace_back();
      }
      uses[it->second].push_back({f, from, to, opp});
    }
  }

  mesh.closed_ = true;
  for (const auto& u : uses) {
    if (u.size() != 2) mesh.closed_ = false;
  }

  if (mesh.closed_ && signed_volume(mesh.vertices_, mesh.faces_) < 0.0) {
    for (Face& face : mesh.faces_) std::swap(face[1], face[2]);
    for (auto& u : uses) {
      for (EdgeUse& e : u) std::swap(e.from, e.to);
    }
  }

  for (const auto& u : uses) {
    if (u.size() != 2) continue;
    const EdgeUse& a = u[0];
    const EdgeUse& b = u[1];
    BendingPair bp{a.face, b.face, a.from, a.to, a.opposite, b.opposite};
    const auto& x = mesh.vertices_;
    if (triangle_area(x[bp.v0], x[bp.v1], x[bp.opp_a]) < 1e-12 ||
        triangle_area(x[bp.v0], x[bp.v1], x[bp.opp_b]) < 1e-12) {
      continue;
    }
    bp.rest_angle = dihedral_angle(x[bp.v0], x[bp.v1], x[bp.opp_a], x[bp.opp_b]);
    const double edge = (x[bp.v1] - x[bp.v0]).norm();
    bp.rest_height_a = 2.0 * triangle_area(x[bp.v0], x[bp.v1], x[bp.opp_a]) / edge;
    bp.rest_height_b = 2.0 * triangle_area(x[bp.v0], x[bp.v1], x[bp.opp_b]) / edge;
    mesh.bending_pairs_.push_back(bp);
  }

  mesh.rest_volume_ = derive_rest_volume(mesh);
  return mesh;
}

namespace {

std::string_view next_token(std::string_view& line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  std::size_t j = i;
  while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
  std::string_view tok = line.substr(i, j - i);
  line.remove_prefix(j);
  return tok;
}

double parse_double(std::string_view tok, std::size_t line_no) {
  double value = 0.0;
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw Error(Errc::MalformedMesh, "line " + std::to_string(line_no) + ": bad number '" + std::string(tok) + "'");
  }
  return value;
}

int parse_index(std::string_view tok, std::size_t vertex_count, std::size_t line_no) {
  tok = tok.substr(0, tok.find('/'));
  long value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || value == 0) {
    throw Error(Errc::MalformedMesh, "line " + std::to_string(line_no) + ": bad face index '" + std::string(tok) + "'");
  }
  // Negative indices are relative to the vertices read so far.
  const long resolved = value > 0 ? value - 1 : static_cast<long>(vertex_count) + value;
  return static_cast<int>(resolved);
}

} // namespace

TriMesh parse_obj(std::string_view text) {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    const std::string_view kind = next_token(line);
    if (kind == "v") {
      Vec3 p;
      for (int k = 0; k < 3; ++k) {
        const std::string_view tok = next_token(line);
        if (tok.empty()) throw Error(Errc::MalformedMesh, "line " + std::to_string(line_no) + ": vertex needs 3 coordinates");
        p[k] = parse_double(tok, line_no);
      }
      vertices.push_back(p);
    } else if (kind == "f") {
      std::vector<int> poly;
      for (std::string_view tok = next_token(line); !tok.empty(); tok = next_token(line)) {
        poly.push_back(parse_index(tok, vertices.size(), line_no));
      }
      if (poly.size() < 3) {
        throw Error(Errc::MalformedMesh, "line " + std::to_string(line_no) + ": face with fewer than 3 vertices");
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) faces.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  return TriMesh::build(std::move(vertices), std::move(faces));
}

TriMesh load_obj(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(Errc::FileNotFound, path.string());
  return parse_obj(read_file(path));
}

std::string to_obj(const TriMesh& mesh) {
  std::string out;
  char buf[128];
  for (const Vec3& v : mesh.vertices()) {
    const int n = std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out.append(buf, static_cast<std::size_t>(n));
  }
  for (const Face& f : mesh.faces()) {
    const int n = std::snprintf(buf, sizeof buf, "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

void save_obj(const std::filesystem::path& path, const TriMesh& mesh) { write_file(path, to_obj(mesh)); }

double signed_volume(std::span<const Vec3> positions, std::span<const Face> faces) {
  double sum = 0.0;
  for (const Face& f : faces) {
    sum += positions[f[0]].dot(positions[f[1]].cross(positions[f[2]]));
  }
  return sum / 6.0;
}

double derive_rest_volume(const TriMesh& mesh) {
  if (!mesh.closed()) return 0.0;
  return std::abs(signed_volume(mesh.vertices(), mesh.faces()));
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

double surface_area(const TriMesh& mesh) {
  double area = 0.0;
  const auto& x = mesh.vertices();
  for (const Face& f : mesh.faces()) area += triangle_area(x[f[0]], x[f[1]], x[f[2]]);
  return area;
}

double dihedral_angle(const Vec3& x0, const Vec3& x1, const Vec3& xa, const Vec3& xb) {
  const Vec3 e = x1 - x0;
  const Vec3 na = e.cross(xa - x0).normalized();
  const Vec3 nb = (xb - x0).cross(e).normalized();
  return std::atan2(e.normalized().dot(na.cross(nb)), na.dot(nb));
}

MassDistribution lump_mass(const TriMesh& mesh, double total_mass) {
  if (!(total_mass > 0.0) || !std::isfinite(total_mass)) {
    throw Error(Errc::InvalidParameter, "total_mass must be positive");
  }
  const auto& x = mesh.vertices();
  std::vector<double> share(x.size(), 0.0);
  double total_area = 0.0;
  for (const Face& f : mesh.faces()) {
    const double a = triangle_area(x[f[0]], x[f[1]], x[f[2]]);
    total_area += a;
    for (int idx : f) share[idx] += a / 3.0;
  }
  if (!(total_area > 0.0)) throw Error(Errc::DegenerateMesh, "mesh has zero surface area");

  MassDistribution dist;
  dist.total_mass = total_mass;
  dist.node_mass.resize(x.size());
  dist.inverse_mass.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    dist.node_mass[i] = total_mass * share[i] / total_area;
    dist.inverse_mass[i] = dist.node_mass[i] > 0.0 ? 1.0 / dist.node_mass[i] : 0.0;
  }
  Vec3 com = Vec3::Zero();
  for (std::size_t i = 0; i < x.size(); ++i) com += dist.node_mass[i] * x[i];
  dist.center_of_mass = com / total_mass;
  dist.inertia_tensor = point_mass_inertia(x, dist.node_mass);
  return dist;
}

Mat3 point_mass_inertia(std::span<const Vec3> positions, std::span<const double> masses) {
  double m = 0.0;
  Vec3 com = Vec3::Zero();
  for (std::size_t i = 0; i < positions.size(); ++i) {
    m += masses[i];
    com += masses[i] * positions[i];
  }
  if (m > 0.0) com /= m;
  Mat3 inertia = Mat3::Zero();
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const Vec3 r = positions[i] - com;
    inertia += masses[i] * (r.squaredNorm() * Mat3::Identity() - r * r.transpose());
  }
  return inertia;
}

} // namespace physid
