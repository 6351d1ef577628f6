#pragma once

#include "physid/collision.hpp"
#include "physid/dynamics.hpp"
#include "physid/rigidbody.hpp"
#include "physid/softbody.hpp"

#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace physid {

enum class BodyKind { Soft, Rigid };

// A simulated object advanced in fixed frames of kSubsteps substeps.
class Body {
public:
  virtual ~Body() = default;

  [[nodiscard]] virtual BodyKind kind() const = 0;
  [[nodiscard]] virtual const TriMesh& mesh() const = 0;
  // World-space node positions/velocities for export and snapshots.
  [[nodiscard]] virtual std::vector<NodeState> node_states() const = 0;

  // Queued until the next frame; folded into its first substep.
  virtual void queue_impulse(const ImpulseEvent& event) = 0;
  virtual void set_material(const MaterialProperties& material) = 0;
  virtual void advance_frame(double frame_dt = kFrameDt, int substeps = kSubsteps) = 0;
};

struct SoftBodyConfig {
  // 0 selects 0.1 kg per node, which keeps the default constants stable at
  // the fixed substep.
  double total_mass = 0.0;
  Vec3 gravity = Vec3(0.0, -9.81, 0.0);
  Environment environment;
  ModelConstants constants;
};

double default_total_mass(const TriMesh& mesh);

class SoftBody final : public Body {
public:
  SoftBody(TriMesh mesh, const MaterialProperties& material, SoftBodyConfig config = {});

  [[nodiscard]] BodyKind kind() const override { return BodyKind::Soft; }
  [[nodiscard]] const TriMesh& mesh() const override { return mesh_; }
  [[nodiscard]] std::vector<NodeState> node_states() const override { return states_; }
  [[nodiscard]] std::span<const NodeState> states() const { return states_; }
  [[nodiscard]] const MaterialProperties& material() const { return material_; }
  [[nodiscard]] const MassDistribution& mass() const { return masked_.masked; }
  [[nodiscard]] const std::vector<std::uint8_t>& static_flags() const { return flags_; }
  [[nodiscard]] double current_volume() const;

  void queue_impulse(const ImpulseEvent& event) override;
  void set_material(const MaterialProperties& material) override;
  // Pins flagged nodes (zero inverse mass, zero velocity).
  void set_static_flags(std::span<const std::uint8_t> flags);
  void apply_mask(const StaticMask& mask);
  void clear_mask();

  void substep(double dt);
  void advance_frame(double frame_dt = kFrameDt, int substeps = kSubsteps) override;

private:
  void sync_inverse_mass();

  TriMesh mesh_;
  MaterialProperties material_;
  SoftBodyConfig config_;
  MaskedMass masked_;
  std::vector<std::uint8_t> flags_;
  std::vector<NodeState> states_;
  ForceAccumulator forces_;
  std::vector<NodeImpulse> pending_;
};

class RigidBody final : public Body {
public:
  RigidBody(TriMesh mesh, const ConstraintConfig& config = {}, double total_mass = 1.0);

  [[nodiscard]] BodyKind kind() const override { return BodyKind::Rigid; }
  [[nodiscard]] const TriMesh& mesh() const override { return mesh_; }
  [[nodiscard]] std::vector<NodeState> node_states() const override;
  [[nodiscard]] const RigidState& state() const { return state_; }
  [[nodiscard]] const HingeConeConstraint& constraint() const { return constraint_; }

  void queue_impulse(const ImpulseEvent& event) override;
  void set_material(const MaterialProperties&) override {}
  void advance_frame(double frame_dt = kFrameDt, int substeps = kSubsteps) override;

private:
  TriMesh mesh_;
  RigidState state_;
  HingeConeConstraint constraint_;
  std::vector<Vec3> body_points_;
  std::vector<std::pair<Vec3, Vec3>> pending_; // (contact, impulse)
};

} // namespace physid
