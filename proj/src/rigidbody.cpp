#include "physid/rigidbody.hpp"

#include "physid/errors.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace physid {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

bool finite(const RigidState& s) {
  return s.position.allFinite() && s.orientation.coeffs().allFinite() && s.linear_velocity.allFinite() &&
         s.angular_velocity.allFinite();
}

} // namespace

Mat3 RigidState::world_inverse_inertia() const {
  const Mat3 r = orientation.toRotationMatrix();
  return r * inertia.inverse() * r.transpose();
}

RigidState make_rigid_state(const TriMesh& mesh, double total_mass) {
  const MassDistribution dist = lump_mass(mesh, total_mass);
  RigidState s;
  s.position = dist.center_of_mass;
  s.mass = total_mass;
  // Point-mass inertia of a flat or thin mesh can be singular about one
  // axis; keep it positive definite.
  const double floor = 1e-6 * std::max(dist.inertia_tensor.trace(), 1e-12);
  s.inertia = dist.inertia_tensor + floor * Mat3::Identity();
  return s;
}

void HingeConeConstraint::validate() const {
  if (!(swing_limit > 0.0 && swing_limit <= std::numbers::pi / 2.0)) {
    throw Error(Errc::InvalidParameter, "swing_limit must lie in (0, pi/2]");
  }
  if (!(twist_limit >= 0.0) || !(restoring_stiffness >= 0.0) || !(restoring_damping >= 0.0)) {
    throw Error(Errc::InvalidParameter, "twist_limit, stiffness and damping must be non-negative");
  }
  if (std::abs(rest_axis.norm() - 1.0) > 1e-9) throw Error(Errc::InvalidParameter, "rest_axis must be unit");
}

ConstraintConfig constraint_config_from_json(const nlohmann::json& j) {
  ConstraintConfig c;
  try {
    c.swing_limit_deg = j.value("swing_limit_deg", c.swing_limit_deg);
    c.twist_limit_deg = j.value("twist_limit_deg", c.twist_limit_deg);
    c.restoring_stiffness = j.value("restoring_stiffness", c.restoring_stiffness);
    c.restoring_damping = j.value("restoring_damping", c.restoring_damping);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidParameter, std::string("constraint config: ") + e.what());
  }
  return c;
}

nlohmann::json constraint_config_to_json(const ConstraintConfig& c) {
  return {{"swing_limit_deg", c.swing_limit_deg},
          {"twist_limit_deg", c.twist_limit_deg},
          {"restoring_stiffness", c.restoring_stiffness},
          {"restoring_damping", c.restoring_damping}};
}

void bind_constraint(HingeConeConstraint& constraint, const RigidState& state) {
  constraint.body_anchor = state.orientation.conjugate() * (constraint.anchor - state.position);
}

RigidState apply_impulse_rigid(RigidState state, const Vec3& impulse, const Vec3& contact) {
  if (!impulse.allFinite() || !contact.allFinite() || !finite(state)) {
    throw Error(Errc::NonFiniteInput, "rigid impulse inputs must be finite");
  }
  const Vec3 r = contact - state.position;
  state.linear_velocity += impulse / state.mass;
  state.angular_velocity += state.world_inverse_inertia() * r.cross(impulse);
  return state;
}

SwingTwist decompose_swing_twist(const Quat& q, const Vec3& axis) {
  SwingTwist out;
  const Vec3 v = q.vec();
  const Vec3 p = v.dot(axis) * axis;
  Eigen::Vector4d t(p.x(), p.y(), p.z(), q.w());
  const double tn = t.norm();
  if (tn < 1e-12) {
    out.twist = Quat::Identity();
  } else {
    t /= tn;
    out.twist = Quat(t.w(), t.x(), t.y(), t.z());
  }
  out.swing = q * out.twist.conjugate();
  out.swing_angle = 2.0 * std::atan2(out.swing.vec().norm(), std::abs(out.swing.w()));
  double ta = 2.0 * std::atan2(out.twist.vec().dot(axis), out.twist.w());
  if (ta > std::numbers::pi) ta -= 2.0 * std::numbers::pi;
  if (ta <= -std::numbers::pi) ta += 2.0 * std::numbers::pi;
  out.twist_angle = ta;
  return out;
}

Quat clamp_cone_twist(const Quat& orientation, const HingeConeConstraint& constraint) {
  SwingTwist st = decompose_swing_twist(orientation, constraint.rest_axis);
  bool changed = false;
  if (st.swing_angle > constraint.swing_limit) {
    Vec3 swing_axis = st.swing.vec();
    if (st.swing.w() < 0.0) swing_axis = -swing_axis;
    st.swing = Quat(Eigen::AngleAxisd(constraint.swing_limit, swing_axis.normalized()));
    changed = true;
  }
  if (std::abs(st.twist_angle) > constraint.twist_limit) {
    const double limited = std::copysign(constraint.twist_limit, st.twist_angle);
    st.twist = Quat(Eigen::AngleAxisd(limited, constraint.rest_axis));
    changed = true;
  }
  if (!changed) return orientation;
  return (st.swing * st.twist).normalized();
}

namespace {

Quat integrate_orientation(const Quat& q, const Vec3& omega, double dt) {
  const double angle = omega.norm() * dt;
  if (angle == 0.0) return q;
  return (Quat(Eigen::AngleAxisd(angle, omega.normalized())) * q).normalized();
}

void repin(RigidState& s, const HingeConeConstraint& c) {
  s.position = c.anchor - s.orientation * c.body_anchor;
  s.linear_velocity = s.angular_velocity.cross(s.position - c.anchor);
}

} // namespace

RigidState step_rigid(RigidState state, const HingeConeConstraint& constraint, double dt) {
  if (!(dt > 0.0)) throw Error(Errc::InvalidParameter, "dt must be positive");
  const SwingTwist st = decompose_swing_twist(state.orientation, constraint.rest_axis);
  Vec3 swing_axis = Vec3::Zero();
  if (st.swing_angle > 0.0) {
    swing_axis = st.swing.vec().normalized();
    if (st.swing.w() < 0.0) swing_axis = -swing_axis;
  }
  const Vec3 torque = -constraint.restoring_stiffness * st.swing_angle * swing_axis -
                      constraint.restoring_damping * state.angular_velocity;

  RigidState next = state;
  next.angular_velocity += state.world_inverse_inertia() * torque * dt;
  next.orientation = integrate_orientation(state.orientation, next.angular_velocity, dt);
  repin(next, constraint);

  const Quat clamped = clamp_cone_twist(next.orientation, constraint);
  if (clamped.coeffs() != next.orientation.coeffs()) {
    const SwingTwist limit = decompose_swing_twist(clamped, constraint.rest_axis);
    // Drop the angular velocity components that push further past a limit.
    if (limit.swing_angle > 0.0) {
      Vec3 axis = limit.swing.vec().normalized();
      if (limit.swing.w() < 0.0) axis = -axis;
      const double outward = next.angular_velocity.dot(axis);
      if (limit.swing_angle >= constraint.swing_limit - 1e-12 && outward > 0.0) {
        next.angular_velocity -= outward * axis;
      }
    }
    const Vec3 twist_axis = next.orientation * constraint.rest_axis;
    const double spin = next.angular_velocity.dot(twist_axis);
    if (std::abs(limit.twist_angle) >= constraint.twist_limit - 1e-12 && spin * limit.twist_angle > 0.0) {
      next.angular_velocity -= spin * twist_axis;
    }
    next.orientation = clamped;
    repin(next, constraint);
  }

  if (!finite(next)) throw Error(Errc::NonFiniteState, "rigid state became non-finite");
  return next;
}

HingeConeConstraint choose_hinge_anchor(const TriMesh& mesh, const ConstraintConfig& config) {
  const auto& v = mesh.vertices();
  if (v.empty()) throw Error(Errc::MalformedMesh, "mesh has no vertices");
  double lo = v.front().y();
  double hi = lo;
  for (const Vec3& p : v) {
    lo = std::min(lo, p.y());
    hi = std::max(hi, p.y());
  }
  const double band = lo + 0.05 * (hi - lo);
  Vec3 sum = Vec3::Zero();
  int count = 0;
  for (const Vec3& p : v) {
    if (p.y() <= band) {
      sum += p;
      ++count;
    }
  }
  HingeConeConstraint c;
  c.anchor = sum / count;
  c.rest_axis = Vec3::UnitY();
  c.swing_limit = config.swing_limit_deg * kDeg;
  c.twist_limit = config.twist_limit_deg * kDeg;
  c.restoring_stiffness = config.restoring_stiffness;
  c.restoring_damping = config.restoring_damping;
  c.validate();
  return c;
}

} // namespace physid
