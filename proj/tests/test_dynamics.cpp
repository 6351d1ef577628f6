#include "physid/dynamics.hpp"
#include "physid/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace physid;

namespace {

NodeState node(double inverse_mass, Vec3 v = Vec3::Zero(), Vec3 x = Vec3::Zero()) {
  NodeState s;
  s.position = x;
  s.velocity = v;
  s.inverse_mass = inverse_mass;
  return s;
}

// Unit mass-spring x'' = -x from x=1, v=0; max |x - cos t| over one period.
double oscillator_error(int steps_per_period) {
  const double dt = 2.0 * std::numbers::pi / steps_per_period;
  std::vector<NodeState> s = {node(1.0, Vec3::Zero(), Vec3(1, 0, 0))};
  ForceAccumulator acc(1);
  double err = 0.0;
  for (int n = 1; n <= steps_per_period; ++n) {
    acc.add_force(0, -s[0].position);
    step(s, acc, dt);
    err = std::max(err, std::abs(s[0].position.x() - std::cos(n * dt)));
  }
  return err;
}

} // namespace

TEST_CASE("apply_impulse_node") {
  CHECK(apply_impulse_node(node(0.5), Vec3(2, 0, 0)).velocity == Vec3(1, 0, 0));
  const NodeState pinned = node(0.0, Vec3::Zero(), Vec3(1, 2, 3));
  const NodeState after = apply_impulse_node(pinned, Vec3(100, 0, 0));
  CHECK(after.velocity == pinned.velocity);
  CHECK(after.position == pinned.position);
  CHECK(apply_impulse_node(node(1.0, Vec3(1, 1, 0)), Vec3(0, -1, 0)).velocity == Vec3(1, 0, 0));
  CHECK_THROWS_AS(apply_impulse_node(node(1.0), Vec3(NAN, 0, 0)), Error);
}

TEST_CASE("apply_impulse_spatial: triangular kernel") {
  const Vec3 j(0, 0, 3);
  SUBCASE("node at the contact point takes everything") {
    std::vector<NodeState> s = {node(1.0, Vec3::Zero(), Vec3(0, 0, 0)), node(1.0, Vec3::Zero(), Vec3(5, 0, 0))};
    CHECK(apply_impulse_spatial(s, {Vec3(0, 0, 0), j, 1.0}) == 1);
    CHECK(s[0].velocity == j);
    CHECK(s[1].velocity == Vec3::Zero());
  }
  SUBCASE("equidistant nodes split evenly") {
    std::vector<NodeState> s = {node(1.0, Vec3::Zero(), Vec3(-0.5, 0, 0)), node(1.0, Vec3::Zero(), Vec3(0.5, 0, 0))};
    CHECK(apply_impulse_spatial(s, {Vec3(0, 0, 0), j, 1.0}) == 2);
    CHECK((s[0].velocity - j / 2).norm() < 1e-15);
    CHECK((s[1].velocity - j / 2).norm() < 1e-15);
  }
  SUBCASE("no node within radius is a no-op") {
    std::vector<NodeState> s = {node(1.0, Vec3::Zero(), Vec3(3, 0, 0))};
    CHECK(apply_impulse_spatial(s, {Vec3(0, 0, 0), j, 1.0}) == 0);
    CHECK(s[0].velocity == Vec3::Zero());
  }
  SUBCASE("shares sum to the full impulse") {
    std::mt19937_64 rng(3);
    std::vector<NodeState> s;
    for (int i = 0; i < 50; ++i) s.push_back(node(1.0, Vec3::Zero(), test::random_vec(rng)));
    const auto shares = distribute_impulse(s, Vec3::Zero(), j, 0.8);
    Vec3 sum = Vec3::Zero();
    for (const auto& sh : shares) sum += sh.impulse;
    CHECK((sum - j).norm() < 1e-12);
  }
}

TEST_CASE("damp_velocities") {
  std::vector<NodeState> s = {node(1.0, Vec3(2, 0, 0))};
  damp_velocities(s, 0.0, 0.1);
  CHECK(s[0].velocity == Vec3(2, 0, 0));
  damp_velocities(s, 0.5, 1.0 / 60.0);
  // 2 * (1 - 0.5 * (1/60) * 10) = 2 * (1 - 1/12)
  CHECK(s[0].velocity.x() == doctest::Approx(1.8333).epsilon(1e-4));
  damp_velocities(s, 1.0, 0.1);
  CHECK(s[0].velocity == Vec3::Zero());
  CHECK_THROWS_AS(damp_velocities(s, 1.5, 0.1), Error);
  CHECK_THROWS_AS(damp_velocities(s, -0.1, 0.1), Error);
}

TEST_CASE("step: symplectic Euler sequence") {
  // Hand iteration of both variants for m=1, F=(0,-10,0), dt=0.1:
  //   symplectic: v1=-1, x1=-0.1; v2=-2, x2=-0.3
  //   explicit:   x1=0, v1=-1;    x2=-0.1, v2=-2
  double sx = 0, sv = 0, ex = 0, ev = 0;
  for (int n = 0; n < 2; ++n) {
    sv += -10.0 * 0.1;
    sx += sv * 0.1;
    ex += ev * 0.1;
    ev += -10.0 * 0.1;
  }
  REQUIRE(sx != doctest::Approx(ex));

  std::vector<NodeState> s = {node(1.0)};
  ForceAccumulator acc(1);
  acc.add_force(0, Vec3(0, -10, 0));
  step(s, acc, 0.1);
  CHECK(s[0].velocity.y() == doctest::Approx(-1.0));
  CHECK(s[0].position.y() == doctest::Approx(-0.1));
  CHECK(acc.forces()[0] == Vec3::Zero());
  acc.add_force(0, Vec3(0, -10, 0));
  step(s, acc, 0.1);
  CHECK(s[0].velocity.y() == doctest::Approx(sv));
  CHECK(s[0].position.y() == doctest::Approx(sx));
  CHECK(s[0].position.y() == doctest::Approx(-0.3));
}

TEST_CASE("step: force-free drift and pending impulse") {
  std::vector<NodeState> s = {node(1.0, Vec3(1, 0, 0))};
  ForceAccumulator acc(1);
  step(s, acc, 0.5);
  CHECK(s[0].position == Vec3(0.5, 0, 0));
  CHECK(s[0].velocity == Vec3(1, 0, 0));

  acc.add_impulse(0, Vec3(0, 2, 0));
  step(s, acc, 0.5);
  CHECK(s[0].velocity == Vec3(1, 2, 0));
  CHECK(acc.impulses()[0] == Vec3::Zero());
}

TEST_CASE("step: non-finite result aborts without modifying state") {
  std::vector<NodeState> s = {node(1.0, Vec3(1, 0, 0)), node(1.0)};
  const auto before = s;
  ForceAccumulator acc(2);
  acc.add_force(1, Vec3(INFINITY, 0, 0));
  try {
    step(s, acc, 0.1);
    FAIL("expected NonFiniteState");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonFiniteState);
    CHECK(e.detail().find("node 1") != std::string::npos);
  }
  CHECK(s[0].position == before[0].position);
  CHECK(s[0].velocity == before[0].velocity);
}

TEST_CASE("property: static nodes are bit-identical under any forcing") {
  std::mt19937_64 rng(5);
  std::vector<NodeState> s;
  for (int i = 0; i < 20; ++i) s.push_back(node(i % 3 == 0 ? 0.0 : 1.0, Vec3::Zero(), test::random_vec(rng)));
  const auto initial = s;
  ForceAccumulator acc(s.size());
  for (int n = 0; n < 200; ++n) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      acc.add_force(i, test::random_vec(rng, 50.0));
      if (n % 7 == 0) acc.add_impulse(i, test::random_vec(rng, 5.0));
    }
    step(s, acc, 1.0 / 240.0);
  }
  for (std::size_t i = 0; i < s.size(); i += 3) {
    CHECK(s[i].position == initial[i].position);
    CHECK(s[i].velocity == Vec3::Zero());
  }
}

TEST_CASE("property: impulses change free-body momentum by exactly J") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> mass(0.1, 5.0);
  std::vector<NodeState> s;
  for (int i = 0; i < 30; ++i) s.push_back(node(1.0 / mass(rng), test::random_vec(rng), test::random_vec(rng)));
  const Vec3 p0 = total_momentum(s);
  Vec3 applied = Vec3::Zero();
  for (int k = 0; k < 20; ++k) {
    const Vec3 j = test::random_vec(rng, 3.0);
    applied += j;
    apply_impulse_spatial(s, {test::random_vec(rng), j, 1.5});
  }
  const Vec3 dp = total_momentum(s) - p0;
  CHECK((dp - applied).norm() <= 1e-9 * std::max(1.0, applied.norm()));
}

TEST_CASE("oscillator: first-order convergence and bounded energy drift") {
  const double coarse = oscillator_error(1000);
  const double fine = oscillator_error(2000);
  CHECK(coarse < 0.01);
  const double ratio = coarse / fine;
  CHECK(ratio >= 1.7);
  CHECK(ratio <= 2.3);

  const double dt = 2.0 * std::numbers::pi / 1000.0;
  std::vector<NodeState> s = {node(1.0, Vec3::Zero(), Vec3(1, 0, 0))};
  ForceAccumulator acc(1);
  double max_drift = 0.0;
  for (int n = 0; n < 10000; ++n) {
    acc.add_force(0, -s[0].position);
    step(s, acc, dt);
    const double e = 0.5 * s[0].velocity.squaredNorm() + 0.5 * s[0].position.squaredNorm();
    max_drift = std::max(max_drift, std::abs(e - 0.5) / 0.5);
  }
  CHECK(max_drift < 0.01);
}

TEST_CASE("property: damping never increases kinetic energy") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> coeff(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<NodeState> s;
    for (int i = 0; i < 5; ++i) s.push_back(node(1.0, test::random_vec(rng, 4.0)));
    const double before = kinetic_energy(s);
    damp_velocities(s, coeff(rng), 1.0 / 240.0);
    CHECK(kinetic_energy(s) <= before);
  }
}

TEST_CASE("trajectory CSV rows") {
  std::ostringstream out;
  write_trajectory_header(out);
  std::vector<NodeState> s = {node(1.0, Vec3(0.5, 0, 0), Vec3(1, 2, 3))};
  write_trajectory_rows(out, 7, s);
  CHECK(out.str() == "frame,node,x,y,z,vx,vy,vz\n7,0,1,2,3,0.5,0,0\n");
}
