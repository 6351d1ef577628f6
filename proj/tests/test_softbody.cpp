#include "physid/body.hpp"
#include "physid/errors.hpp"
#include "physid/primitives.hpp"
#include "physid/softbody.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace physid;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Vec3> positions_of(std::span<const NodeState> s) {
  std::vector<Vec3> x;
  for (const auto& n : s) x.push_back(n.position);
  return x;
}

// Two triangles sharing the edge (0,0,0)-(1,0,0); vertex 3 is rotated about
// the x axis by `fold` radians out of the flat configuration.
std::vector<Vec3> hinge_positions(double fold) {
  return {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.4, 1, 0), Vec3(0.6, -std::cos(fold), -std::sin(fold))};
}

TriMesh hinge_mesh() { return TriMesh::build(hinge_positions(0.0), {Face{0, 1, 2}, Face{1, 0, 3}}); }

TriMesh perturbed(const TriMesh& base, std::mt19937_64& rng, double amount) {
  std::vector<Vec3> v;
  for (const Vec3& p : base.vertices()) v.push_back(p + test::random_vec(rng, amount));
  return TriMesh::build(v, base.faces());
}

} // namespace

TEST_CASE("material properties: order, json and validation") {
  const MaterialProperties m{0.6, 0.3, 0.4, 0.2, 0.5};
  CHECK(m.to_array() == std::array<double, 5>{0.6, 0.3, 0.4, 0.2, 0.5});
  CHECK(material_from_json(material_to_json(m)) == m);
  CHECK_THROWS_AS(material_from_json({{"linear_stiffness", 0.5}}), Error);
  auto j = material_to_json(m);
  j["dynamic_friction"] = 1.5;
  CHECK_THROWS_AS(material_from_json(j), Error);
}

TEST_CASE("spring forces: Hooke's law") {
  // Vertex 2 sits far away so only edge 0-1 changes when vertex 1 moves.
  const TriMesh m = TriMesh::build({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 5, 0)}, {Face{0, 1, 2}});
  ModelConstants k;
  k.k_lin = 1.0;
  auto s = test::states_from(m.vertices());
  CHECK(test::relative_field_error(spring_forces(m, s, 1.0, k), std::vector<Vec3>(3, Vec3::Zero()), 1.0) == 0.0);

  s[1].position = Vec3(2, 0, 0);
  const auto f = spring_forces(m, s, 1.0, k);
  CHECK((f[0] - Vec3(1, 0, 0)).norm() < 1e-12); // 1 N toward vertex 1
  Vec3 net = Vec3::Zero();
  for (const Vec3& fi : f) net += fi;
  CHECK(net.norm() < 1e-12);
}

TEST_CASE("spring forces sum to zero for any configuration") {
  std::mt19937_64 rng(21);
  const TriMesh m = primitives::icosphere(1.0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec3> x;
    for (const Vec3& p : m.vertices()) x.push_back(p + test::random_vec(rng, 0.3));
    const auto s = test::states_from(x);
    for (const auto& field : {spring_forces(m, s, 1.0), bending_forces(m, s, 1.0), volume_forces(m, s, 1.0)}) {
      Vec3 net = Vec3::Zero();
      for (const Vec3& fi : field) net += fi;
      CHECK(net.norm() < 1e-9);
    }
  }
}

TEST_CASE("bending forces") {
  const TriMesh m = hinge_mesh();
  REQUIRE(m.bending_pairs().size() == 1);
  CHECK(m.bending_pairs()[0].rest_angle == doctest::Approx(0.0));
  ModelConstants k;

  SUBCASE("flat at rest gives zero force") {
    for (const Vec3& f : bending_forces(m, test::states_from(m.vertices()), 1.0, k)) CHECK(f == Vec3::Zero());
  }

  SUBCASE("a +10 degree fold matches the dihedral-energy gradient and relaxes") {
    const auto x = hinge_positions(10.0 * kPi / 180.0);
    const auto s = test::states_from(x);
    const auto f = bending_forces(m, s, 1.0, k);
    const auto grad = test::numeric_gradient(
        [&](const std::vector<Vec3>& p) { return bending_energy(m, p, k.k_ang); }, x);
    std::vector<Vec3> neg;
    for (const Vec3& g : grad) neg.push_back(-g);
    CHECK(test::relative_field_error(f, neg) < 1e-4);

    // Net torque of the force quadruple is zero.
    Vec3 torque = Vec3::Zero();
    for (std::size_t i = 0; i < x.size(); ++i) torque += x[i].cross(f[i]);
    CHECK(torque.norm() < 1e-9);

    std::vector<Vec3> moved = x;
    for (std::size_t i = 0; i < x.size(); ++i) moved[i] += 1e-3 * f[i];
    const auto& bp = m.bending_pairs()[0];
    const double before = std::abs(dihedral_angle(x[bp.v0], x[bp.v1], x[bp.opp_a], x[bp.opp_b]));
    const double after = std::abs(dihedral_angle(moved[bp.v0], moved[bp.v1], moved[bp.opp_a], moved[bp.opp_b]));
    CHECK(after < before);
  }

  SUBCASE("mirror fold gives mirrored forces") {
    const auto fp = bending_forces(m, test::states_from(hinge_positions(10.0 * kPi / 180.0)), 1.0, k);
    const auto fm = bending_forces(m, test::states_from(hinge_positions(-10.0 * kPi / 180.0)), 1.0, k);
    for (std::size_t i = 0; i < fp.size(); ++i) {
      const Vec3 mirrored(fp[i].x(), fp[i].y(), -fp[i].z());
      CHECK((fm[i] - mirrored).norm() < 1e-12);
    }
  }

  SUBCASE("a wing crushed onto the hinge gets a bounded force") {
    // Vertex 3 sits 1e-6 from the hinge line at a 90 degree fold; rest height is 1.
    std::vector<Vec3> x = hinge_positions(0.0);
    x[3] = Vec3(0.6, 0.0, -1e-6);
    const auto f = bending_forces(m, test::states_from(x), 1.0, k);
    const auto& bp = m.bending_pairs()[0];
    const double delta = std::abs(dihedral_angle(x[bp.v0], x[bp.v1], x[bp.opp_a], x[bp.opp_b]));
    CHECK(f[3].norm() <= k.k_ang * delta / (0.1 * bp.rest_height_b) * (1.0 + 1e-12));
    Vec3 net = Vec3::Zero(), torque = Vec3::Zero();
    for (std::size_t i = 0; i < x.size(); ++i) {
      net += f[i];
      torque += x[i].cross(f[i]);
    }
    CHECK(net.norm() < 1e-9);
    CHECK(torque.norm() < 1e-9);
  }
}

TEST_CASE("volume forces") {
  const TriMesh cube = primitives::cube();
  const auto rest = test::states_from(cube.vertices());
  for (const Vec3& f : volume_forces(cube, rest, 1.0)) CHECK(f == Vec3::Zero());

  std::vector<Vec3> squeezed;
  const double s = std::cbrt(0.9);
  for (const Vec3& v : cube.vertices()) squeezed.push_back(v * s);
  const auto f = volume_forces(cube, test::states_from(squeezed), 1.0);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i].dot(squeezed[i]) > 0.0);
  // Per face: pressure times area vector has positive dot with the outward normal.
  const double v0 = cube.rest_volume();
  const double pressure = (v0 - signed_volume(squeezed, cube.faces())) / v0;
  CHECK(pressure > 0.0);

  const TriMesh cloth = primitives::cloth(4, 4, 1.0, 1.0);
  auto cs = test::states_from(cloth.vertices());
  cs[3].position.z() += 0.2;
  for (const Vec3& fi : volume_forces(cloth, cs, 1.0)) CHECK(fi == Vec3::Zero());
}

TEST_CASE("force fields are negative energy gradients on random small meshes") {
  std::mt19937_64 rng(31);
  const ModelConstants k;
  const std::vector<TriMesh> bases = {primitives::icosphere(0.5, 1), primitives::cube(), primitives::cloth(3, 3, 1.0, 1.0),
                                      primitives::regular_tetrahedron(0.8)};
  for (int trial = 0; trial < 8; ++trial) {
    const TriMesh m = perturbed(bases[trial % bases.size()], rng, 0.05);
    std::vector<Vec3> x;
    for (const Vec3& p : m.vertices()) x.push_back(p + test::random_vec(rng, 0.08));
    const auto s = test::states_from(x);

    struct Field {
      std::vector<Vec3> force;
      std::function<double(const std::vector<Vec3>&)> energy;
    };
    const std::vector<Field> fields = {
        {spring_forces(m, s, 0.7, k), [&](const auto& p) { return spring_energy(m, p, 0.7 * k.k_lin); }},
        {bending_forces(m, s, 0.7, k), [&](const auto& p) { return bending_energy(m, p, 0.7 * k.k_ang); }},
        {volume_forces(m, s, 0.7, k), [&](const auto& p) { return volume_energy(m, p, 0.7 * k.k_vol); }},
    };
    for (const Field& field : fields) {
      auto grad = test::numeric_gradient(field.energy, x);
      for (Vec3& g : grad) g = -g;
      CHECK(test::relative_field_error(field.force, grad) < 1e-4);
    }
  }
}

TEST_CASE("map_pixels_to_nodes") {
  const Camera cam = look_at(Vec3(0, 0, 5), Vec3::Zero(), Vec3::UnitY(), 45.0, 64, 48);
  const TriMesh cloth = primitives::cloth(4, 4, 1.0, 1.0, -0.5);
  const auto s = test::states_from(cloth.vertices());
  StaticMask mask{64, 48, std::vector<std::uint8_t>(64 * 48, 255), cam};
  for (auto f : map_pixels_to_nodes(s, mask)) CHECK(f == 1);
  std::fill(mask.data.begin(), mask.data.end(), 0);
  for (auto f : map_pixels_to_nodes(s, mask)) CHECK(f == 0);

  // A node placed on the ray through the center of pixel (10,20).
  const Ray ray = cam.pixel_ray(10.5, 20.5);
  const auto single = test::states_from({ray.origin + 4.0 * ray.direction, Vec3(0, 0, 10)});
  mask.data[20 * 64 + 10] = 200;
  const auto flags = map_pixels_to_nodes(single, mask);
  CHECK(flags[0] == 1);
  CHECK(flags[1] == 0); // behind the camera

  mask.data[20 * 64 + 10] = 127;
  CHECK(map_pixels_to_nodes(single, mask)[0] == 0);

  StaticMask empty{0, 0, {}, cam};
  try {
    map_pixels_to_nodes(s, empty);
    FAIL("expected EmptyMask");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyMask);
  }
}

TEST_CASE("apply_static_mask") {
  const MassDistribution dist = lump_mass(primitives::cube(), 1.0);
  const std::vector<std::uint8_t> none(8, 0);
  const MaskedMass unchanged = apply_static_mask(dist, none);
  CHECK(unchanged.masked.node_mass == dist.node_mass);
  CHECK(unchanged.masked.inverse_mass == dist.inverse_mass);

  std::vector<std::uint8_t> some(8, 0);
  some[2] = 1;
  const MaskedMass masked = apply_static_mask(dist, some);
  CHECK(masked.masked.inverse_mass[2] == 0.0);
  CHECK(std::isinf(masked.masked.node_mass[2]));
  CHECK(masked.original.inverse_mass[2] == dist.inverse_mass[2]);
  CHECK(masked.masked.inverse_mass[3] == dist.inverse_mass[3]);

  SoftBodyConfig cfg;
  cfg.gravity = Vec3(0, -9.81, 0);
  SoftBody body(primitives::cube(Vec3(0, 2, 0)), MaterialProperties{}, cfg);
  body.set_static_flags(std::vector<std::uint8_t>(8, 1));
  const auto before = body.node_states();
  for (int i = 0; i < 10; ++i) body.advance_frame();
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(body.states()[i].position == before[i].position);
}

TEST_CASE("pinned top row of a hanging cloth stays put while the rest falls") {
  const TriMesh cloth = primitives::cloth(8, 8, 1.0, 1.0, 0.5);
  std::vector<std::uint8_t> top(cloth.node_count(), 0);
  for (int c = 0; c <= 8; ++c) top[c] = 1;

  SoftBody masked(cloth, MaterialProperties{}, {});
  SoftBody free(cloth, MaterialProperties{}, {});
  masked.set_static_flags(top);
  for (int i = 0; i < 100; ++i) {
    masked.substep(1.0 / 240.0);
    free.substep(1.0 / 240.0);
  }
  for (std::size_t i = 0; i < cloth.node_count(); ++i) {
    if (top[i]) {
      CHECK(masked.states()[i].position == cloth.vertices()[i]);
      CHECK(free.states()[i].position != cloth.vertices()[i]);
    }
  }
  // Bottom row sags.
  const std::size_t bottom = cloth.node_count() - 1;
  CHECK(masked.states()[bottom].position.y() < cloth.vertices()[bottom].y());
}

TEST_CASE("free-floating soft body conserves linear momentum") {
  SoftBodyConfig cfg;
  cfg.gravity = Vec3::Zero();
  cfg.environment.planes.clear();
  SoftBody body(primitives::icosphere(0.5, 1), MaterialProperties{0.8, 0.0, 0.6, 0.7, 0.5}, cfg);
  body.queue_impulse({Vec3(0.5, 0, 0), Vec3(0.3, 0.1, 0), 0.4});
  body.queue_impulse({std::size_t{3}, Vec3(0, 0, -0.2), 0.0});
  body.advance_frame();
  const Vec3 p0 = total_momentum(body.states());
  CHECK((p0 - Vec3(0.3, 0.1, -0.2)).norm() < 1e-9);
  for (int i = 0; i < 120; ++i) body.advance_frame();
  CHECK((total_momentum(body.states()) - p0).norm() < 1e-9);
}

TEST_CASE("volume stays within 5% of rest under gentle impulses") {
  SoftBodyConfig cfg;
  cfg.total_mass = 1.0;
  cfg.gravity = Vec3::Zero();
  SoftBody body(primitives::cube(Vec3(0, 1, 0)), MaterialProperties{0.5, 0.1, 0.5, 1.0, 0.5}, cfg);
  const double rest = body.mesh().rest_volume();
  std::mt19937_64 rng(17);
  double worst = 0.0;
  for (int step = 0; step < 600; ++step) {
    if (step % 20 == 0) {
      Vec3 j = test::random_vec(rng, 1.0);
      j *= 0.01 / j.norm();
      body.queue_impulse({std::size_t(step / 20 % 8), j, 0.0});
    }
    body.advance_frame();
    worst = std::max(worst, std::abs(body.current_volume() - rest) / rest);
  }
  CHECK(worst < 0.05);
}

TEST_CASE("stiffer springs do not stretch more under the same load") {
  const TriMesh cloth = primitives::cloth(6, 6, 1.0, 1.0, 0.5);
  std::vector<std::uint8_t> top(cloth.node_count(), 0);
  for (int c = 0; c <= 6; ++c) top[c] = 1;
  auto settled_strain = [&](double kl) {
    SoftBody body(cloth, MaterialProperties{kl, 0.5, 0.5, 0.0, 0.5}, {});
    body.set_static_flags(top);
    for (int i = 0; i < 600; ++i) body.advance_frame();
    double worst = 0.0;
    for (const Edge& e : cloth.edges()) {
      const double len = (body.states()[e.b].position - body.states()[e.a].position).norm();
      worst = std::max(worst, std::abs(len - e.rest_length) / e.rest_length);
    }
    return worst;
  };
  const double soft = settled_strain(0.2);
  const double mid = settled_strain(0.5);
  const double stiff = settled_strain(1.0);
  CHECK(mid <= soft);
  CHECK(stiff <= mid);
}
