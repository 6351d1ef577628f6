#include "physid/camera.hpp"

#include "physid/errors.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>

#include <cmath>
#include <numbers>

namespace physid {

namespace {

double tan_half_fov(double fov_y_deg) { return std::tan(fov_y_deg * std::numbers::pi / 360.0); }

} // namespace

std::optional<Eigen::Vector2d> Camera::project(const Vec3& world) const {
  const Eigen::Vector4d c = view * world.homogeneous();
  if (!(c.z() < 0.0)) return std::nullopt;
  const double t = tan_half_fov(fov_y_deg);
  const double aspect = static_cast<double>(width) / height;
  const double ndc_x = (c.x() / -c.z()) / (t * aspect);
  const double ndc_y = (c.y() / -c.z()) / t;
  return Eigen::Vector2d((ndc_x + 1.0) * 0.5 * width, (1.0 - ndc_y) * 0.5 * height);
}

Ray Camera::pixel_ray(double px, double py) const {
  const double t = tan_half_fov(fov_y_deg);
  const double aspect = static_cast<double>(width) / height;
  const double ndc_x = 2.0 * px / width - 1.0;
  const double ndc_y = 1.0 - 2.0 * py / height;
  const Vec3 dir_cam(ndc_x * t * aspect, ndc_y * t, -1.0);
  const Mat4 inv = view.inverse();
  const Vec3 dir = (inv.topLeftCorner<3, 3>() * dir_cam).normalized();
  return {eye(), dir};
}

Vec3 Camera::screen_direction(double dx, double dy) const {
  const Vec3 cam(dx, -dy, 0.0);
  const Mat4 inv = view.inverse();
  const Vec3 world = inv.topLeftCorner<3, 3>() * cam;
  const double n = world.norm();
  return n > 0.0 ? Vec3(world / n) : Vec3::Zero();
}

Vec3 Camera::eye() const { return view.inverse().topRightCorner<3, 1>(); }

Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fov_y_deg, int width, int height) {
  const Vec3 f = (target - eye).normalized();
  const Vec3 r = f.cross(up).normalized();
  const Vec3 u = r.cross(f);
  Camera cam;
  cam.view.setIdentity();
  cam.view.block<1, 3>(0, 0) = r.transpose();
  cam.view.block<1, 3>(1, 0) = u.transpose();
  cam.view.block<1, 3>(2, 0) = -f.transpose();
  cam.view(0, 3) = -r.dot(eye);
  cam.view(1, 3) = -u.dot(eye);
  cam.view(2, 3) = f.dot(eye);
  cam.fov_y_deg = fov_y_deg;
  cam.width = width;
  cam.height = height;
  return cam;
}

Camera default_camera(const TriMesh& mesh, int width, int height) {
  Vec3 lo = mesh.vertices().front();
  Vec3 hi = lo;
  for (const Vec3& v : mesh.vertices()) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const Vec3 center = (lo + hi) / 2.0;
  const double radius = std::max(0.5 * (hi - lo).norm(), 1e-3);
  constexpr double kFov = 45.0;
  const double distance = radius / std::sin(kFov * std::numbers::pi / 360.0);
  return look_at(center + Vec3(0.0, 0.0, distance), center, Vec3::UnitY(), kFov, width, height);
}

Camera camera_from_json(const nlohmann::json& j) {
  try {
    Camera cam;
    const auto& view = j.at("view");
    if (!view.is_array() || view.size() != 16) throw Error(Errc::InvalidParameter, "camera view needs 16 numbers");
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) cam.view(r, c) = view.at(static_cast<std::size_t>(r * 4 + c)).get<double>();
    }
    cam.fov_y_deg = j.at("fov_y_deg").get<double>();
    const auto& vp = j.at("viewport");
    cam.width = vp.at(0).get<int>();
    cam.height = vp.at(1).get<int>();
    if (cam.width <= 0 || cam.height <= 0 || !(cam.fov_y_deg > 0.0 && cam.fov_y_deg < 180.0)) {
      throw Error(Errc::InvalidParameter, "camera viewport/fov out of range");
    }
    return cam;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidParameter, std::string("camera descriptor: ") + e.what());
  }
}

nlohmann::json camera_to_json(const Camera& camera) {
  nlohmann::json view = nlohmann::json::array();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) view.push_back(camera.view(r, c));
  }
  return {{"view", view}, {"fov_y_deg", camera.fov_y_deg}, {"viewport", {camera.width, camera.height}}};
}

std::optional<double> intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b, const Vec3& c) {
  constexpr double kEps = 1e-12;
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = ray.direction.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < kEps) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = ray.origin - a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = ray.direction.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(q) * inv;
  if (t <= kEps) return std::nullopt;
  return t;
}

} // namespace physid
