#pragma once

#include "physid/dynamics.hpp"

#include <json.hpp>

#include <span>
#include <vector>

namespace physid {

struct Plane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitY(); // unit, pointing out of the solid side
};

struct Environment {
  std::vector<Plane> planes{Plane{}};
  double restitution = 0.2;

  void validate() const;
};

// {"planes":[{"point":[x,y,z],"normal":[x,y,z]}],"restitution":e}
Environment environment_from_json(const nlohmann::json& j);
nlohmann::json environment_to_json(const Environment& env);

struct Contact {
  std::size_t node = 0;
  double signed_distance = 0.0; // < 0 when recorded
  Vec3 normal = Vec3::UnitY();
};

// One contact per penetrating node (deepest plane wins), in node order.
std::vector<Contact> detect(std::span<const NodeState> states, const Environment& env);

// Restitution on the approaching normal component, Coulomb-style reduction
// of the tangential part, and projection out of penetration. Static nodes
// are left untouched.
void resolve(std::span<NodeState> states, std::span<const Contact> contacts, double restitution, double friction);

// detect + resolve until contact-free (bounded passes, for plane corners).
std::size_t collide(std::span<NodeState> states, const Environment& env, double friction, int max_passes = 4);

} // namespace physid
