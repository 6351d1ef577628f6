#include "physid/body.hpp"

#include "physid/errors.hpp"

namespace physid {

double default_total_mass(const TriMesh& mesh) { return 0.1 * static_cast<double>(mesh.node_count()); }

SoftBody::SoftBody(TriMesh mesh, const MaterialProperties& material, SoftBodyConfig config)
    : mesh_(std::move(mesh)), material_(material), config_(std::move(config)) {
  material_.validate();
  config_.environment.validate();
  const double total = config_.total_mass > 0.0 ? config_.total_mass : default_total_mass(mesh_);
  const MassDistribution dist = lump_mass(mesh_, total);
  flags_.assign(mesh_.node_count(), 0);
  masked_ = apply_static_mask(dist, flags_);
  states_ = make_node_states(mesh_, masked_.masked.inverse_mass);
  forces_.resize(mesh_.node_count());
}

double SoftBody::current_volume() const {
  std::vector<Vec3> x(states_.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = states_[i].position;
  return signed_volume(x, mesh_.faces());
}

void SoftBody::queue_impulse(const ImpulseEvent& event) {
  for (const NodeImpulse& share : resolve_impulse_targets(states_, event)) pending_.push_back(share);
}

void SoftBody::set_material(const MaterialProperties& material) {
  material.validate();
  material_ = material;
}

void SoftBody::set_static_flags(std::span<const std::uint8_t> flags) {
  masked_ = apply_static_mask(masked_.original, flags);
  flags_.assign(flags.begin(), flags.end());
  sync_inverse_mass();
}

void SoftBody::apply_mask(const StaticMask& mask) { set_static_flags(map_pixels_to_nodes(states_, mask)); }

void SoftBody::clear_mask() {
  flags_.assign(mesh_.node_count(), 0);
  masked_.masked = masked_.original;
  sync_inverse_mass();
}

void SoftBody::sync_inverse_mass() {
  for (std::size_t i = 0; i < states_.size(); ++i) {
    states_[i].inverse_mass = masked_.masked.inverse_mass[i];
    if (states_[i].is_static()) states_[i].velocity.setZero();
  }
}

void SoftBody::substep(double dt) {
  const ModelConstants& k = config_.constants;
  auto f = forces_.forces();
  const auto& node_mass = masked_.masked.node_mass;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (!states_[i].is_static()) f[i] += node_mass[i] * config_.gravity;
  }
  add_spring_forces(mesh_, states_, material_.linear_stiffness * k.k_lin, f);
  add_bending_forces(mesh_, states_, material_.angular_stiffness * k.k_ang, f);
  add_volume_forces(mesh_, states_, material_.volume_preservation * k.k_vol, f);

  integrate_velocities(states_, forces_, dt);
  damp_velocities(states_, material_.damping_coefficient, dt, k.damp_rate);
  integrate_positions(states_, dt);
  collide(states_, config_.environment, material_.dynamic_friction);
  forces_.clear();
}

void SoftBody::advance_frame(double frame_dt, int substeps) {
  for (const NodeImpulse& p : pending_) forces_.add_impulse(p.node, p.impulse);
  pending_.clear();
  const double dt = frame_dt / substeps;
  for (int s = 0; s < substeps; ++s) substep(dt);
}

RigidBody::RigidBody(TriMesh mesh, const ConstraintConfig& config, double total_mass)
    : mesh_(std::move(mesh)), state_(make_rigid_state(mesh_, total_mass)),
      constraint_(choose_hinge_anchor(mesh_, config)) {
  bind_constraint(constraint_, state_);
  body_points_.reserve(mesh_.node_count());
  for (const Vec3& v : mesh_.vertices()) body_points_.push_back(v - state_.position);
}

std::vector<NodeState> RigidBody::node_states() const {
  std::vector<NodeState> out(body_points_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Vec3 r = state_.orientation * body_points_[i];
    out[i].position = state_.position + r;
    out[i].velocity = state_.linear_velocity + state_.angular_velocity.cross(r);
    out[i].inverse_mass = 1.0 / state_.mass;
  }
  return out;
}

void RigidBody::queue_impulse(const ImpulseEvent& event) {
  if (!event.impulse.allFinite()) throw Error(Errc::NonFiniteInput, "impulse must be finite");
  Vec3 contact;
  if (const auto* node = std::get_if<std::size_t>(&event.target)) {
    if (*node >= body_points_.size()) throw Error(Errc::InvalidParameter, "impulse target node out of range");
    contact = state_.position + state_.orientation * body_points_[*node];
  } else {
    contact = std::get<Vec3>(event.target);
  }
  pending_.emplace_back(contact, event.impulse);
}

void RigidBody::advance_frame(double frame_dt, int substeps) {
  for (const auto& [contact, impulse] : pending_) state_ = apply_impulse_rigid(state_, impulse, contact);
  pending_.clear();
  const double dt = frame_dt / substeps;
  for (int s = 0; s < substeps; ++s) state_ = step_rigid(state_, constraint_, dt);
}

} // namespace physid
