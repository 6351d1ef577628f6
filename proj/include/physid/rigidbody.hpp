#pragma once

#include "physid/mesh.hpp"

#include <Eigen/Geometry>
#include <json.hpp>

namespace physid {

using Quat = Eigen::Quaterniond;

// Single-body pose state. The body frame coincides with the world frame at
// rest, with its origin at the center of mass.
struct RigidState {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
  double mass = 1.0;
  Mat3 inertia = Mat3::Identity(); // body frame, about the center of mass

  [[nodiscard]] Mat3 world_inverse_inertia() const;
};

RigidState make_rigid_state(const TriMesh& mesh, double total_mass);

struct HingeConeConstraint {
  Vec3 anchor = Vec3::Zero();
  Vec3 rest_axis = Vec3::UnitY();
  double swing_limit = 0.5235987755982988; // 30 deg
  double twist_limit = 0.17453292519943295; // 10 deg
  double restoring_stiffness = 5.0;         // N·m/rad
  double restoring_damping = 0.5;           // N·m·s/rad
  // Anchor expressed in the body frame, fixed by bind_constraint().
  Vec3 body_anchor = Vec3::Zero();

  void validate() const;
};

// {"swing_limit_deg", "twist_limit_deg", "restoring_stiffness", "restoring_damping"}
struct ConstraintConfig {
  double swing_limit_deg = 30.0;
  double twist_limit_deg = 10.0;
  double restoring_stiffness = 5.0;
  double restoring_damping = 0.5;
};

ConstraintConfig constraint_config_from_json(const nlohmann::json& j);
nlohmann::json constraint_config_to_json(const ConstraintConfig& c);

// Records which body point sits at the anchor for later re-pinning.
void bind_constraint(HingeConeConstraint& constraint, const RigidState& state);

// Δv = J/m, Δω = I_world⁻¹ (r × J) with r = contact - position.
RigidState apply_impulse_rigid(RigidState state, const Vec3& impulse, const Vec3& contact);

// Restoring spring-damper torque, symplectic Euler on ω then orientation,
// anchor re-pinning, then the cone-twist clamp.
RigidState step_rigid(RigidState state, const HingeConeConstraint& constraint, double dt);

struct SwingTwist {
  Quat swing;
  Quat twist;
  double swing_angle = 0.0; // [0, pi]
  double twist_angle = 0.0; // (-pi, pi]
};

// q = swing * twist with twist about axis and swing about an axis ⟂ axis.
SwingTwist decompose_swing_twist(const Quat& q, const Vec3& axis);

Quat clamp_cone_twist(const Quat& orientation, const HingeConeConstraint& constraint);

// Anchor at the centroid of the lowest 5% band of the vertical extent.
HingeConeConstraint choose_hinge_anchor(const TriMesh& mesh, const ConstraintConfig& config = {});

} // namespace physid
