#include "physid/dynamics.hpp"

#include "physid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace physid {

std::vector<NodeState> make_node_states(const TriMesh& mesh, std::span<const double> inverse_mass) {
  if (inverse_mass.size() != mesh.node_count()) {
    throw Error(Errc::InvalidParameter, "inverse_mass length does not match node count");
  }
  std::vector<NodeState> states(mesh.node_count());
  for (std::size_t i = 0; i < states.size(); ++i) {
    states[i].position = mesh.vertices()[i];
    states[i].inverse_mass = inverse_mass[i];
  }
  return states;
}

void ForceAccumulator::resize(std::size_t nodes) {
  force_.assign(nodes, Vec3::Zero());
  impulse_.assign(nodes, Vec3::Zero());
}

void ForceAccumulator::clear() {
  std::fill(force_.begin(), force_.end(), Vec3::Zero());
  std::fill(impulse_.begin(), impulse_.end(), Vec3::Zero());
}

NodeState apply_impulse_node(NodeState state, const Vec3& impulse) {
  if (!impulse.allFinite() || !state.velocity.allFinite() || !std::isfinite(state.inverse_mass)) {
    throw Error(Errc::NonFiniteInput, "impulse or state is not finite");
  }
  if (state.is_static()) return state;
  state.velocity += impulse * state.inverse_mass;
  return state;
}

std::vector<NodeImpulse> distribute_impulse(std::span<const NodeState> states, const Vec3& point,
                                            const Vec3& impulse, double radius) {
  std::vector<NodeImpulse> out;
  if (!(radius > 0.0)) return out;
  std::vector<std::pair<std::size_t, double>> weights;
  double total = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double w = std::max(0.0, 1.0 - (states[i].position - point).norm() / radius);
    if (w > 0.0) {
      weights.emplace_back(i, w);
      total += w;
    }
  }
  out.reserve(weights.size());
  for (const auto& [i, w] : weights) out.push_back({i, impulse * (w / total)});
  return out;
}

std::vector<NodeImpulse> resolve_impulse_targets(std::span<const NodeState> states, const ImpulseEvent& event) {
  if (!event.impulse.allFinite() || !(event.radius >= 0.0)) {
    throw Error(Errc::NonFiniteInput, "impulse event must be finite with radius >= 0");
  }
  if (const auto* node = std::get_if<std::size_t>(&event.target)) {
    if (*node >= states.size()) throw Error(Errc::InvalidParameter, "impulse target node out of range");
    return {{*node, event.impulse}};
  }
  const Vec3& point = std::get<Vec3>(event.target);
  if (event.radius > 0.0) return distribute_impulse(states, point, event.impulse, event.radius);
  if (states.empty()) return {};
  std::size_t nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double d = (states[i].position - point).squaredNorm();
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  return {{nearest, event.impulse}};
}

std::size_t apply_impulse_spatial(std::span<NodeState> states, const ImpulseEvent& event) {
  const auto shares = resolve_impulse_targets(states, event);
  for (const NodeImpulse& s : shares) states[s.node] = apply_impulse_node(states[s.node], s.impulse);
  return shares.size();
}

void damp_velocities(std::span<NodeState> states, double damping, double dt, double damp_rate) {
  if (!(damping >= 0.0 && damping <= 1.0)) {
    throw Error(Errc::InvalidParameter, "damping coefficient must lie in [0,1]");
  }
  if (!(dt > 0.0)) throw Error(Errc::InvalidParameter, "dt must be positive");
  if (damping == 0.0) return;
  const double factor = std::clamp(1.0 - damping * dt * damp_rate, 0.0, 1.0);
  for (NodeState& s : states) s.velocity *= factor;
}

namespace {

[[noreturn]] void report_non_finite(std::size_t node) {
  throw Error(Errc::NonFiniteState, "node " + std::to_string(node) + " became non-finite");
}

} // namespace

void integrate_velocities(std::span<NodeState> states, const ForceAccumulator& forces, double dt) {
  if (!(dt > 0.0)) throw Error(Errc::InvalidParameter, "dt must be positive");
  const auto f = forces.forces();
  const auto j = forces.impulses();
  for (std::size_t i = 0; i < states.size(); ++i) {
    const NodeState& s = states[i];
    if (s.is_static()) continue;
    const Vec3 v = s.velocity + (f[i] * dt + j[i]) * s.inverse_mass;
    if (!v.allFinite()) report_non_finite(i);
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    NodeState& s = states[i];
    if (s.is_static()) {
      s.velocity.setZero();
      continue;
    }
    s.velocity += (f[i] * dt + j[i]) * s.inverse_mass;
  }
}

void integrate_positions(std::span<NodeState> states, double dt) {
  if (!(dt > 0.0)) throw Error(Errc::InvalidParameter, "dt must be positive");
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (!states[i].is_static() && !(states[i].position + states[i].velocity * dt).allFinite()) {
      report_non_finite(i);
    }
  }
  for (NodeState& s : states) {
    if (!s.is_static()) s.position += s.velocity * dt;
  }
}

void step(std::span<NodeState> states, ForceAccumulator& forces, double dt) {
  if (!(dt > 0.0)) throw Error(Errc::InvalidParameter, "dt must be positive");
  if (forces.size() != states.size()) throw Error(Errc::InvalidParameter, "accumulator size mismatch");
  const auto f = forces.forces();
  const auto j = forces.impulses();
  for (std::size_t i = 0; i < states.size(); ++i) {
    const NodeState& s = states[i];
    if (s.is_static()) continue;
    const Vec3 v = s.velocity + (f[i] * dt + j[i]) * s.inverse_mass;
    if (!v.allFinite() || !(s.position + v * dt).allFinite()) report_non_finite(i);
  }
  integrate_velocities(states, forces, dt);
  integrate_positions(states, dt);
  forces.clear();
}

Vec3 total_momentum(std::span<const NodeState> states) {
  Vec3 p = Vec3::Zero();
  for (const NodeState& s : states) {
    if (!s.is_static()) p += s.velocity / s.inverse_mass;
  }
  return p;
}

double kinetic_energy(std::span<const NodeState> states) {
  double e = 0.0;
  for (const NodeState& s : states) {
    if (!s.is_static()) e += 0.5 * s.velocity.squaredNorm() / s.inverse_mass;
  }
  return e;
}

void write_trajectory_header(std::ostream& out) { out << "frame,node,x,y,z,vx,vy,vz\n"; }

void write_trajectory_rows(std::ostream& out, std::uint64_t frame, std::span<const NodeState> states) {
  char buf[256];
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Vec3& x = states[i].position;
    const Vec3& v = states[i].velocity;
    const int n = std::snprintf(buf, sizeof buf, "%llu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                                static_cast<unsigned long long>(frame), i, x.x(), x.y(), x.z(), v.x(),
                                v.y(), v.z());
    out.write(buf, n);
  }
}

} // namespace physid
