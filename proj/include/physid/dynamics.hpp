#pragma once

#include "physid/mesh.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

namespace physid {

inline constexpr double kFrameDt = 1.0 / 60.0;
inline constexpr int kSubsteps = 4;
// Velocity damping rate (1/s) scaling the dimensionless damping coefficient.
inline constexpr double kDampRate = 10.0;

struct NodeState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double inverse_mass = 0.0; // 0 = static

  [[nodiscard]] bool is_static() const { return inverse_mass == 0.0; }
};

std::vector<NodeState> make_node_states(const TriMesh& mesh, std::span<const double> inverse_mass);

// External forces and pending impulses for one step; cleared by step().
class ForceAccumulator {
public:
  ForceAccumulator() = default;
  explicit ForceAccumulator(std::size_t nodes) { resize(nodes); }

  void resize(std::size_t nodes);
  void clear();

  void add_force(std::size_t node, const Vec3& f) { force_[node] += f; }
  void add_impulse(std::size_t node, const Vec3& j) { impulse_[node] += j; }

  [[nodiscard]] std::size_t size() const { return force_.size(); }
  [[nodiscard]] std::span<Vec3> forces() { return force_; }
  [[nodiscard]] std::span<const Vec3> forces() const { return force_; }
  [[nodiscard]] std::span<Vec3> impulses() { return impulse_; }
  [[nodiscard]] std::span<const Vec3> impulses() const { return impulse_; }

private:
  std::vector<Vec3> force_;
  std::vector<Vec3> impulse_;
};

// A user interaction expressed as an impulse. target is a node index or a
// world-space contact point; radius 0 means the nearest single node.
struct ImpulseEvent {
  std::variant<std::size_t, Vec3> target;
  Vec3 impulse = Vec3::Zero();
  double radius = 0.0;
};

struct NodeImpulse {
  std::size_t node;
  Vec3 impulse;
};

// Δv = J / m. Static nodes are returned unchanged.
NodeState apply_impulse_node(NodeState state, const Vec3& impulse);

// Splits J over nodes within radius of the contact point using the
// triangular kernel max(0, 1 - d/radius), normalized to sum to one.
// Returns an empty list when no node lies within the radius.
std::vector<NodeImpulse> distribute_impulse(std::span<const NodeState> states, const Vec3& point,
                                            const Vec3& impulse, double radius);

// Resolves any ImpulseEvent into per-node shares (node targets, radius-0
// point targets hitting the nearest node, or the spatial kernel).
std::vector<NodeImpulse> resolve_impulse_targets(std::span<const NodeState> states, const ImpulseEvent& event);

// Immediate application of a spatial impulse; returns the number of nodes hit.
std::size_t apply_impulse_spatial(std::span<NodeState> states, const ImpulseEvent& event);

// v *= clamp(1 - damping * dt * damp_rate, 0, 1).
void damp_velocities(std::span<NodeState> states, double damping, double dt, double damp_rate = kDampRate);

// v += F/m dt + J/m for movable nodes; static nodes get zero velocity.
void integrate_velocities(std::span<NodeState> states, const ForceAccumulator& forces, double dt);
// x += v dt with the already-updated velocity.
void integrate_positions(std::span<NodeState> states, double dt);

// One symplectic Euler step: velocities first, then positions with the new
// velocities. Throws NonFiniteState without modifying the states if any
// result is NaN/Inf. Clears the accumulator.
void step(std::span<NodeState> states, ForceAccumulator& forces, double dt);

Vec3 total_momentum(std::span<const NodeState> states);
double kinetic_energy(std::span<const NodeState> states);

// CSV trajectory export: frame,node,x,y,z,vx,vy,vz.
void write_trajectory_header(std::ostream& out);
void write_trajectory_rows(std::ostream& out, std::uint64_t frame, std::span<const NodeState> states);

} // namespace physid
