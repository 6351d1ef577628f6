#pragma once

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace physid {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Face = std::array<int, 3>;

struct Edge {
  int a = 0;
  int b = 0;
  double rest_length = 0.0;
};

// Two faces sharing the directed edge v0->v1 (as wound in face_a). opp_a and
// opp_b are the vertices opposite the shared edge in each face.
struct BendingPair {
  int face_a = 0;
  int face_b = 0;
  int v0 = 0;
  int v1 = 0;
  int opp_a = 0;
  int opp_b = 0;
  double rest_angle = 0.0;
  // Distances of opp_a / opp_b from the shared edge at rest.
  double rest_height_a = 0.0;
  double rest_height_b = 0.0;
};

// Triangle mesh plus simulation topology. Immutable once built; simulation
// state lives in separate node arrays.
class TriMesh {
public:
  TriMesh() = default;

  // Validates indices and derives edges, bending pairs and rest volume.
  // Closed meshes wound inward are re-wound so the enclosed volume is positive.
  static TriMesh build(std::vector<Vec3> vertices, std::vector<Face> faces);

  [[nodiscard]] const std::vector<Vec3>& vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<Face>& faces() const { return faces_; }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] const std::vector<BendingPair>& bending_pairs() const { return bending_pairs_; }
  [[nodiscard]] double rest_volume() const { return rest_volume_; }
  // Every edge shared by exactly two faces.
  [[nodiscard]] bool closed() const { return closed_; }
  [[nodiscard]] std::size_t node_count() const { return vertices_.size(); }

private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<Edge> edges_;
  std::vector<BendingPair> bending_pairs_;
  double rest_volume_ = 0.0;
  bool closed_ = false;
};

struct MassDistribution {
  std::vector<double> node_mass;
  std::vector<double> inverse_mass;
  double total_mass = 0.0;
  Mat3 inertia_tensor = Mat3::Zero();
  Vec3 center_of_mass = Vec3::Zero();
};

TriMesh parse_obj(std::string_view text);
TriMesh load_obj(const std::filesystem::path& path);
std::string to_obj(const TriMesh& mesh);
void save_obj(const std::filesystem::path& path, const TriMesh& mesh);

// Divergence-theorem sum over faces; sign follows the winding.
double signed_volume(std::span<const Vec3> positions, std::span<const Face> faces);
// |signed_volume| for closed meshes, 0 for open surfaces.
double derive_rest_volume(const TriMesh& mesh);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
double surface_area(const TriMesh& mesh);

// Signed dihedral angle about the edge x0->x1 between the faces (x0,x1,xa)
// and (x1,x0,xb). Zero when flat.
double dihedral_angle(const Vec3& x0, const Vec3& x1, const Vec3& xa, const Vec3& xb);

// Area-weighted lumping: each vertex gets a third of its incident face areas.
MassDistribution lump_mass(const TriMesh& mesh, double total_mass);

// Inertia of point masses about their center of mass.
Mat3 point_mass_inertia(std::span<const Vec3> positions, std::span<const double> masses);

} // namespace physid
