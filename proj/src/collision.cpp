#include "physid/collision.hpp"

#include "physid/errors.hpp"

#include <algorithm>
#include <cmath>

namespace physid {

void Environment::validate() const {
  if (!(restitution >= 0.0 && restitution <= 1.0)) {
    throw Error(Errc::InvalidParameter, "restitution must lie in [0,1]");
  }
  for (const Plane& p : planes) {
    if (!p.point.allFinite() || std::abs(p.normal.norm() - 1.0) > 1e-9) {
      throw Error(Errc::InvalidParameter, "plane normals must be unit length");
    }
  }
}

namespace {

Vec3 vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(Errc::InvalidParameter, "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

} // namespace

Environment environment_from_json(const nlohmann::json& j) {
  try {
    Environment env;
    if (j.contains("planes")) {
      env.planes.clear();
      for (const auto& p : j.at("planes")) {
        Plane plane{vec3_from_json(p.at("point")), vec3_from_json(p.at("normal"))};
        const double n = plane.normal.norm();
        if (!(n > 0.0)) throw Error(Errc::InvalidParameter, "plane normal is zero");
        plane.normal /= n;
        env.planes.push_back(plane);
      }
    }
    if (j.contains("restitution")) env.restitution = j.at("restitution").get<double>();
    env.validate();
    return env;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidParameter, std::string("environment: ") + e.what());
  }
}

nlohmann::json environment_to_json(const Environment& env) {
  nlohmann::json planes = nlohmann::json::array();
  for (const Plane& p : env.planes) {
    planes.push_back({{"point", {p.point.x(), p.point.y(), p.point.z()}},
                      {"normal", {p.normal.x(), p.normal.y(), p.normal.z()}}});
  }
  return {{"planes", planes}, {"restitution", env.restitution}};
}

std::vector<Contact> detect(std::span<const NodeState> states, const Environment& env) {
  std::vector<Contact> contacts;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Plane* deepest = nullptr;
    double depth = 0.0;
    for (const Plane& p : env.planes) {
      const double d = (states[i].position - p.point).dot(p.normal);
      if (d < depth) {
        depth = d;
        deepest = &p;
      }
    }
    if (deepest) contacts.push_back({i, depth, deepest->normal});
  }
  return contacts;
}

void resolve(std::span<NodeState> states, std::span<const Contact> contacts, double restitution, double friction) {
  if (!(restitution >= 0.0 && restitution <= 1.0) || !(friction >= 0.0 && friction <= 1.0)) {
    throw Error(Errc::InvalidParameter, "restitution and friction must lie in [0,1]");
  }
  for (const Contact& c : contacts) {
    NodeState& s = states[c.node];
    if (s.is_static()) continue;
    const Vec3& n = c.normal;
    const double vn = s.velocity.dot(n);
    if (vn < 0.0) {
      const Vec3 v_t = s.velocity - vn * n;
      const double dvn = (1.0 + restitution) * -vn;
      const double factor = std::max(0.0, 1.0 - friction * dvn / std::max(v_t.norm(), 1e-12));
      s.velocity = v_t * factor - restitution * vn * n;
    }
    s.position += n * -c.signed_distance;
  }
}

std::size_t collide(std::span<NodeState> states, const Environment& env, double friction, int max_passes) {
  std::size_t total = 0;
  for (int pass = 0; pass < max_passes; ++pass) {
    const auto contacts = detect(states, env);
    if (contacts.empty()) break;
    resolve(states, contacts, env.restitution, friction);
    total += contacts.size();
  }
  return total;
}

} // namespace physid
