#include "physid/softbody.hpp"

#include "physid/codec.hpp"
#include "physid/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace physid {

std::array<double, 5> MaterialProperties::to_array() const {
  return {linear_stiffness, damping_coefficient, angular_stiffness, volume_preservation, dynamic_friction};
}

MaterialProperties MaterialProperties::from_array(const std::array<double, 5>& v) {
  return {v[0], v[1], v[2], v[3], v[4]};
}

void MaterialProperties::validate() const {
  const auto values = to_array();
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] >= 0.0 && values[k] <= 1.0)) {
      throw Error(Errc::InvalidParameter, std::string(kKeys[k]) + " must lie in [0,1]");
    }
  }
}

MaterialProperties material_from_json(const nlohmann::json& j) {
  std::array<double, 5> values{};
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto it = j.find(MaterialProperties::kKeys[k]);
    if (it == j.end() || !it->is_number()) {
      throw Error(Errc::InvalidParameter, std::string("material is missing numeric '") +
                                              MaterialProperties::kKeys[k] + "'");
    }
    values[k] = it->get<double>();
  }
  const MaterialProperties m = MaterialProperties::from_array(values);
  m.validate();
  return m;
}

nlohmann::json material_to_json(const MaterialProperties& m) {
  nlohmann::json j = nlohmann::json::object();
  const auto values = m.to_array();
  for (std::size_t k = 0; k < values.size(); ++k) j[MaterialProperties::kKeys[k]] = values[k];
  return j;
}

MaterialProperties load_material(const std::filesystem::path& path) {
  try {
    return material_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidParameter, path.string() + ": " + e.what());
  }
}

StaticMask make_static_mask(const Image& image, const Camera& camera) {
  if (image.width == 0 || image.height == 0) throw Error(Errc::EmptyMask, "mask has zero size");
  const Image gray = to_grayscale(image);
  StaticMask mask;
  mask.width = gray.width;
  mask.height = gray.height;
  mask.data = gray.pixels;
  mask.camera = camera;
  return mask;
}

StaticMask load_static_mask(const std::filesystem::path& image, const std::filesystem::path& camera) {
  nlohmann::json cam;
  try {
    cam = nlohmann::json::parse(read_file(camera));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidParameter, camera.string() + ": " + e.what());
  }
  return make_static_mask(load_image(image), camera_from_json(cam));
}

void add_spring_forces(const TriMesh& mesh, std::span<const NodeState> states, double stiffness,
                       std::span<Vec3> out) {
  for (const Edge& e : mesh.edges()) {
    const Vec3 d = states[e.b].position - states[e.a].position;
    const double len = d.norm();
    if (len < 1e-12) continue;
    const Vec3 f = (stiffness * (len - e.rest_length) / len) * d;
    out[e.a] += f;
    out[e.b] -= f;
  }
}

namespace {

constexpr double kMinHeightFraction = 0.1;

double wrap_angle(double a) {
  constexpr double kPi = std::numbers::pi;
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}

} // namespace

void add_bending_forces(const TriMesh& mesh, std::span<const NodeState> states, double stiffness,
                        std::span<Vec3> out) {
  if (stiffness == 0.0) return;
  for (const BendingPair& bp : mesh.bending_pairs()) {
    const Vec3& x0 = states[bp.v0].position;
    const Vec3& x1 = states[bp.v1].position;
    const Vec3& xa = states[bp.opp_a].position;
    const Vec3& xb = states[bp.opp_b].position;
    const Vec3 e = x1 - x0;
    const double e_len2 = e.squaredNorm();
    const Vec3 na = e.cross(xa - x0);
    const Vec3 nb = (xb - x0).cross(e);
    const double na_len = na.norm();
    const double nb_len = nb.norm();
    // Twice the face areas.
    if (0.5 * na_len < 1e-12 || 0.5 * nb_len < 1e-12 || e_len2 < 1e-24) continue;
    const double e_len = std::sqrt(e_len2);
    const Vec3 ua = na / na_len;
    const Vec3 ub = nb / nb_len;
    const double theta = std::atan2((e / e_len).dot(ua.cross(ub)), ua.dot(ub));
    const double delta = wrap_angle(theta - bp.rest_angle);
    if (delta == 0.0) continue;

    // Gradient of the dihedral angle: opposite vertices move along their
    // face normals scaled by 1/height; edge vertices take the barycentric
    // complement so the quadruple carries no net force or torque.
    const Vec3 grad_a = -(e_len / na_len) * ua;
    const Vec3 grad_b = -(e_len / nb_len) * ub;
    const double ta = (xa - x0).dot(e) / e_len2;
    const double tb = (xb - x0).dot(e) / e_len2;
    const Vec3 grad_0 = -((1.0 - ta) * grad_a + (1.0 - tb) * grad_b);
    const Vec3 grad_1 = -(ta * grad_a + tb * grad_b);

    // A triangle crushed below a fraction of its rest height (against a
    // contact plane, say) would see an unbounded force. Scaling the whole
    // quadruple keeps it free of net force and torque.
    const double scale = std::min({1.0, na_len / e_len / (kMinHeightFraction * bp.rest_height_a),
                                   nb_len / e_len / (kMinHeightFraction * bp.rest_height_b)});
    const double s = -stiffness * delta * scale;
    out[bp.opp_a] += s * grad_a;
    out[bp.opp_b] += s * grad_b;
    out[bp.v0] += s * grad_0;
    out[bp.v1] += s * grad_1;
  }
}

namespace {

double current_volume(const TriMesh& mesh, std::span<const NodeState> states) {
  double sum = 0.0;
  for (const Face& f : mesh.faces()) {
    sum += states[f[0]].position.dot(states[f[1]].position.cross(states[f[2]].position));
  }
  return sum / 6.0;
}

} // namespace

void add_volume_forces(const TriMesh& mesh, std::span<const NodeState> states, double stiffness,
                       std::span<Vec3> out) {
  const double v0 = mesh.rest_volume();
  if (!(v0 > 0.0) || stiffness == 0.0) return;
  const double pressure = stiffness * (v0 - current_volume(mesh, states)) / v0;
  if (pressure == 0.0) return;
  for (const Face& f : mesh.faces()) {
    const Vec3& a = states[f[0]].position;
    const Vec3& b = states[f[1]].position;
    const Vec3& c = states[f[2]].position;
    // Area-weighted outward normal: area * n = 0.5 (b-a) x (c-a).
    const Vec3 share = (pressure / 6.0) * (b - a).cross(c - a);
    out[f[0]] += share;
    out[f[1]] += share;
    out[f[2]] += share;
  }
}

std::vector<Vec3> spring_forces(const TriMesh& mesh, std::span<const NodeState> states, double linear_stiffness,
                                const ModelConstants& k) {
  std::vector<Vec3> out(states.size(), Vec3::Zero());
  add_spring_forces(mesh, states, linear_stiffness * k.k_lin, out);
  return out;
}

std::vector<Vec3> bending_forces(const TriMesh& mesh, std::span<const NodeState> states, double angular_stiffness,
                                 const ModelConstants& k) {
  std::vector<Vec3> out(states.size(), Vec3::Zero());
  add_bending_forces(mesh, states, angular_stiffness * k.k_ang, out);
  return out;
}

std::vector<Vec3> volume_forces(const TriMesh& mesh, std::span<const NodeState> states, double volume_preservation,
                                const ModelConstants& k) {
  std::vector<Vec3> out(states.size(), Vec3::Zero());
  add_volume_forces(mesh, states, volume_preservation * k.k_vol, out);
  return out;
}

double spring_energy(const TriMesh& mesh, std::span<const Vec3> positions, double stiffness) {
  double e = 0.0;
  for (const Edge& edge : mesh.edges()) {
    const double stretch = (positions[edge.b] - positions[edge.a]).norm() - edge.rest_length;
    e += 0.5 * stiffness * stretch * stretch;
  }
  return e;
}

double bending_energy(const TriMesh& mesh, std::span<const Vec3> positions, double stiffness) {
  double e = 0.0;
  for (const BendingPair& bp : mesh.bending_pairs()) {
    const double theta =
        dihedral_angle(positions[bp.v0], positions[bp.v1], positions[bp.opp_a], positions[bp.opp_b]);
    const double delta = wrap_angle(theta - bp.rest_angle);
    e += 0.5 * stiffness * delta * delta;
  }
  return e;
}

double volume_energy(const TriMesh& mesh, std::span<const Vec3> positions, double stiffness) {
  const double v0 = mesh.rest_volume();
  if (!(v0 > 0.0)) return 0.0;
  const double dv = signed_volume(positions, mesh.faces()) - v0;
  return stiffness * dv * dv / (2.0 * v0);
}

std::vector<std::uint8_t> map_pixels_to_nodes(std::span<const NodeState> states, const StaticMask& mask) {
  if (mask.width <= 0 || mask.height <= 0) throw Error(Errc::EmptyMask, "mask has zero size");
  if (mask.data.size() != static_cast<std::size_t>(mask.width) * mask.height) {
    throw Error(Errc::InvalidParameter, "mask data length does not match its dimensions");
  }
  // The camera viewport may differ from the mask resolution; scale into it.
  const double sx = static_cast<double>(mask.width) / mask.camera.width;
  const double sy = static_cast<double>(mask.height) / mask.camera.height;
  std::vector<std::uint8_t> flags(states.size(), 0);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto pixel = mask.camera.project(states[i].position);
    if (!pixel) continue;
    const int px = std::clamp(static_cast<int>(std::floor(pixel->x() * sx)), 0, mask.width - 1);
    const int py = std::clamp(static_cast<int>(std::floor(pixel->y() * sy)), 0, mask.height - 1);
    flags[i] = mask.is_static_pixel(px, py) ? 1 : 0;
  }
  return flags;
}

MaskedMass apply_static_mask(const MassDistribution& dist, std::span<const std::uint8_t> flags) {
  if (flags.size() != dist.node_mass.size()) {
    throw Error(Errc::InvalidParameter, "flag count does not match node count");
  }
  MaskedMass out{dist, dist};
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (!flags[i]) continue;
    out.masked.inverse_mass[i] = 0.0;
    out.masked.node_mass[i] = std::numeric_limits<double>::infinity();
  }
  return out;
}

} // namespace physid
