#pragma once

#include "physid/dynamics.hpp"
#include "physid/mesh.hpp"

#include <Eigen/Geometry>

#include <filesystem>
#include <functional>
#include <random>
#include <string>

namespace physid::test {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("physid_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Vec3 random_vec(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

inline Eigen::Quaterniond random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized();
}

inline std::vector<NodeState> states_from(const std::vector<Vec3>& positions, double inverse_mass = 1.0) {
  std::vector<NodeState> s(positions.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i].position = positions[i];
    s[i].inverse_mass = inverse_mass;
  }
  return s;
}

// Central-difference gradient of a scalar function of node positions.
inline std::vector<Vec3> numeric_gradient(const std::function<double(const std::vector<Vec3>&)>& energy,
                                          std::vector<Vec3> x, double h = 1e-6) {
  std::vector<Vec3> g(x.size(), Vec3::Zero());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const double orig = x[i][k];
      x[i][k] = orig + h;
      const double ep = energy(x);
      x[i][k] = orig - h;
      const double em = energy(x);
      x[i][k] = orig;
      g[i][k] = (ep - em) / (2.0 * h);
    }
  }
  return g;
}

// max_i |a_i - b_i| / max(max_i |b_i|, floor)
inline double relative_field_error(const std::vector<Vec3>& a, const std::vector<Vec3>& b, double floor = 1e-12) {
  double err = 0.0;
  double scale = floor;
  for (std::size_t i = 0; i < a.size(); ++i) {
    err = std::max(err, (a[i] - b[i]).norm());
    scale = std::max(scale, b[i].norm());
  }
  return err / scale;
}

} // namespace physid::test
