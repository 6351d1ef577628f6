#pragma once

#include "physid/mesh.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <optional>

namespace physid {

using Mat4 = Eigen::Matrix4d;

struct Ray {
  Vec3 origin;
  Vec3 direction; // unit
};

// Pinhole camera. The view matrix maps world to camera space; the camera
// looks down -z with +y up. Pixel (0,0) is the top-left corner of the
// viewport and pixel centers sit at half-integer coordinates.
struct Camera {
  Mat4 view = Mat4::Identity();
  double fov_y_deg = 45.0;
  int width = 0;
  int height = 0;

  // Continuous pixel coordinates, or nullopt for points at or behind the eye.
  [[nodiscard]] std::optional<Eigen::Vector2d> project(const Vec3& world) const;
  // Ray through the given continuous pixel coordinate.
  [[nodiscard]] Ray pixel_ray(double px, double py) const;
  // World-space direction of a screen-space motion (dx right, dy down), unit length.
  [[nodiscard]] Vec3 screen_direction(double dx, double dy) const;
  [[nodiscard]] Vec3 eye() const;
};

Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fov_y_deg, int width, int height);
// Frames the mesh bounding box from +z.
Camera default_camera(const TriMesh& mesh, int width, int height);

// {"view":[16 numbers, row-major], "fov_y_deg":x, "viewport":[w,h]}
Camera camera_from_json(const nlohmann::json& j);
nlohmann::json camera_to_json(const Camera& camera);

// Möller–Trumbore; returns the ray parameter of the hit.
std::optional<double> intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b, const Vec3& c);

} // namespace physid
