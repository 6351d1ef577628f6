#include "physid/collision.hpp"
#include "physid/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace physid;

namespace {

NodeState at(Vec3 x, Vec3 v = Vec3::Zero()) {
  NodeState s;
  s.position = x;
  s.velocity = v;
  s.inverse_mass = 1.0;
  return s;
}

} // namespace

TEST_CASE("detect against the ground plane") {
  const Environment env;
  const std::vector<NodeState> s = {at(Vec3(0, 0.5, 0)), at(Vec3(0, -0.1, 0)), at(Vec3(0, 0, 0))};
  const auto contacts = detect(s, env);
  REQUIRE(contacts.size() == 1);
  CHECK(contacts[0].node == 1);
  CHECK(contacts[0].signed_distance == doctest::Approx(-0.1));
  CHECK(contacts[0].normal == Vec3(0, 1, 0));
}

TEST_CASE("detect keeps the deepest plane per node") {
  Environment env;
  env.planes.push_back({Vec3(1, 0, 0), Vec3(-1, 0, 0)});
  const std::vector<NodeState> s = {at(Vec3(1.3, -0.1, 0))};
  const auto c = detect(s, env);
  REQUIRE(c.size() == 1);
  CHECK(c[0].normal == Vec3(-1, 0, 0));
  CHECK(c[0].signed_distance == doctest::Approx(-0.3));
}

TEST_CASE("resolve: restitution and friction") {
  const Contact c{0, -0.1, Vec3(0, 1, 0)};
  std::vector<NodeState> s = {at(Vec3(0, -0.1, 0), Vec3(0, -1, 0))};
  resolve(s, std::span(&c, 1), 0.2, 0.0);
  CHECK(s[0].velocity == Vec3(0, 0.2, 0));
  CHECK(s[0].position.y() >= 0.0);

  s = {at(Vec3(0, -0.1, 0), Vec3(1, -1, 0))};
  resolve(s, std::span(&c, 1), 0.0, 0.0);
  CHECK(s[0].velocity == Vec3(1, 0, 0));

  // Δv_n = 1, factor max(0, 1 - 1*1/1) = 0.
  s = {at(Vec3(0, -0.1, 0), Vec3(1, -1, 0))};
  resolve(s, std::span(&c, 1), 0.0, 1.0);
  CHECK(s[0].velocity.norm() < 1e-15);

  s = {at(Vec3(0, -0.1, 0), Vec3(3, -1, 0))};
  resolve(s, std::span(&c, 1), 0.0, 0.5);
  CHECK(s[0].velocity.x() == doctest::Approx(2.5));
  CHECK(s[0].velocity.y() == 0.0);

  CHECK_THROWS_AS(resolve(s, std::span(&c, 1), 1.5, 0.0), Error);
}

TEST_CASE("fuzz: no residual penetration and no energy gain") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Environment env;
    env.restitution = u(rng);
    env.planes = {Plane{test::random_vec(rng, 0.2), test::random_vec(rng).normalized()}};
    std::vector<NodeState> s;
    for (int i = 0; i < 40; ++i) s.push_back(at(test::random_vec(rng), test::random_vec(rng, 3.0)));
    const auto before = s;
    const auto contacts = detect(s, env);
    resolve(s, contacts, env.restitution, u(rng));
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Plane& p = env.planes[0];
      CHECK((s[i].position - p.point).dot(p.normal) >= -1e-9);
      CHECK(s[i].velocity.squaredNorm() <= before[i].velocity.squaredNorm() * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("collide handles plane corners") {
  Environment env;
  env.planes.push_back({Vec3(0, 0, 0), Vec3(1, 0, 0)});
  std::mt19937_64 rng(53);
  std::vector<NodeState> s;
  for (int i = 0; i < 50; ++i) s.push_back(at(test::random_vec(rng), test::random_vec(rng)));
  collide(s, env, 0.3);
  for (const auto& n : s) {
    CHECK(n.position.y() >= -1e-9);
    CHECK(n.position.x() >= -1e-9);
  }
}

TEST_CASE("contact-free states are untouched") {
  std::vector<NodeState> s = {at(Vec3(0, 1, 0), Vec3(1, 2, 3)), at(Vec3(2, 3, 4), Vec3(-1, 0, 0))};
  const auto before = s;
  const auto contacts = detect(s, Environment{});
  CHECK(contacts.empty());
  resolve(s, contacts, 0.2, 0.5);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i].position == before[i].position);
    CHECK(s[i].velocity == before[i].velocity);
  }
}

TEST_CASE("static nodes are not moved by contacts") {
  std::vector<NodeState> s = {at(Vec3(0, -0.5, 0), Vec3::Zero())};
  s[0].inverse_mass = 0.0;
  collide(s, Environment{}, 0.5);
  CHECK(s[0].position == Vec3(0, -0.5, 0));
}

TEST_CASE("environment json") {
  const auto env = environment_from_json(nlohmann::json::parse(
      R"({"planes":[{"point":[0,1,0],"normal":[0,2,0]}],"restitution":0.5})"));
  REQUIRE(env.planes.size() == 1);
  CHECK(env.planes[0].normal == Vec3(0, 1, 0));
  CHECK(env.restitution == 0.5);
  CHECK(environment_from_json(environment_to_json(env)).planes[0].point == Vec3(0, 1, 0));
  CHECK_THROWS_AS(environment_from_json(nlohmann::json::parse(R"({"restitution":2})")), Error);
}
