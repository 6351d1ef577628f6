#pragma once

#include "physid/camera.hpp"
#include "physid/dynamics.hpp"
#include "physid/image.hpp"
#include "physid/mesh.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace physid {

// The five dimensionless soft-body knobs, each in [0,1], in this order.
struct MaterialProperties {
  double linear_stiffness = 0.5;
  double damping_coefficient = 0.1;
  double angular_stiffness = 0.5;
  double volume_preservation = 0.5;
  double dynamic_friction = 0.5;

  static constexpr std::array<const char*, 5> kKeys = {
      "linear_stiffness", "damping_coefficient", "angular_stiffness", "volume_preservation", "dynamic_friction"};

  [[nodiscard]] std::array<double, 5> to_array() const;
  static MaterialProperties from_array(const std::array<double, 5>& values);
  // Throws InvalidParameter if any field is outside [0,1] or not finite.
  void validate() const;

  bool operator==(const MaterialProperties&) const = default;
};

MaterialProperties material_from_json(const nlohmann::json& j);
nlohmann::json material_to_json(const MaterialProperties& m);
MaterialProperties load_material(const std::filesystem::path& path);

// Physical scales behind the dimensionless knobs.
struct ModelConstants {
  double k_lin = 500.0;     // N/m per unit linear_stiffness
  double k_ang = 1.0;       // N·m/rad per unit angular_stiffness
  double k_vol = 1000.0;    // Pa per unit volume_preservation
  double damp_rate = kDampRate;
};

// Grayscale mask over the camera viewport; pixels >= 128 are static.
struct StaticMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;
  Camera camera;

  [[nodiscard]] bool is_static_pixel(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x] >= kStaticThreshold;
  }
  static constexpr std::uint8_t kStaticThreshold = 128;
};

StaticMask make_static_mask(const Image& image, const Camera& camera);
// Mask image (PNG or PGM) plus camera descriptor JSON file.
StaticMask load_static_mask(const std::filesystem::path& image, const std::filesystem::path& camera);

// Per-node force fields. The add_* variants accumulate into out and take
// the physical stiffness directly; the plain variants apply the model
// constants to the dimensionless knob and return a fresh array.
void add_spring_forces(const TriMesh& mesh, std::span<const NodeState> states, double stiffness,
                       std::span<Vec3> out);
void add_bending_forces(const TriMesh& mesh, std::span<const NodeState> states, double stiffness,
                        std::span<Vec3> out);
void add_volume_forces(const TriMesh& mesh, std::span<const NodeState> states, double stiffness,
                       std::span<Vec3> out);

std::vector<Vec3> spring_forces(const TriMesh& mesh, std::span<const NodeState> states, double linear_stiffness,
                                const ModelConstants& k = {});
std::vector<Vec3> bending_forces(const TriMesh& mesh, std::span<const NodeState> states, double angular_stiffness,
                                 const ModelConstants& k = {});
std::vector<Vec3> volume_forces(const TriMesh& mesh, std::span<const NodeState> states, double volume_preservation,
                                const ModelConstants& k = {});

// Energies whose negative gradients are the force fields above.
double spring_energy(const TriMesh& mesh, std::span<const Vec3> positions, double stiffness);
double bending_energy(const TriMesh& mesh, std::span<const Vec3> positions, double stiffness);
double volume_energy(const TriMesh& mesh, std::span<const Vec3> positions, double stiffness);

// Nearest-pixel lookup of every node's projection; nodes behind the camera
// are never static. Throws EmptyMask for a zero-sized mask.
std::vector<std::uint8_t> map_pixels_to_nodes(std::span<const NodeState> states, const StaticMask& mask);

struct MaskedMass {
  MassDistribution masked;   // flagged nodes: inverse_mass 0, node_mass +inf
  MassDistribution original; // kept for undo
};

MaskedMass apply_static_mask(const MassDistribution& dist, std::span<const std::uint8_t> flags);

} // namespace physid
