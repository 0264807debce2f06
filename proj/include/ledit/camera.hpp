// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace ledit {

struct Ray {
  Eigen::Vector3d origin;
  Eigen::Vector3d dir;  // unit length
};

/// Pinhole camera. `rotation` columns are the camera's (right, down, forward)
/// axes in world coordinates; image v grows downward.
struct Camera {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double near = 0.1, far = 10.0;

  void validate() const {
    if (fx <= 0 || fy <= 0) throw std::invalid_argument("Camera: focal lengths must be positive");
    if (width <= 0 || height <= 0) throw std::invalid_argument("Camera: resolution must be positive");
    if (!(near < far)) throw std::invalid_argument("Camera: near must be < far");
    if ((rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9)
      throw std::invalid_argument("Camera: rotation must be orthonormal");
  }

  /// Ray through the center of pixel (u,v).
  Ray pixel_ray(int u, int v) const {
    if (u < 0 || u >= width || v < 0 || v >= height) throw std::invalid_argument("Camera: pixel out of bounds");
    Eigen::Vector3d dir_cam((u + 0.5 - cx) / fx, (v + 0.5 - cy) / fy, 1.0);
    Eigen::Vector3d dir = (rotation * dir_cam).normalized();
    return Ray{center, dir};
  }

  /// Camera at 1/factor resolution viewing the same frustum (for
  /// latent-resolution renders).
  Camera scaled_down(int factor) const {
    if (factor < 1 || width % factor != 0 || height % factor != 0)
      throw std::invalid_argument("Camera: resolution not divisible by factor");
    Camera c = *this;
    c.fx /= factor;
    c.fy /= factor;
    c.cx /= factor;
    c.cy /= factor;
    c.width /= factor;
    c.height /= factor;
    return c;
  }
};

/// Camera at `eye` looking at `target`.
inline Camera look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                      const Eigen::Vector3d& up, int width, int height, double focal_px,
                      double near, double far) {
  Eigen::Vector3d forward = (target - eye).normalized();
  Eigen::Vector3d up_ref = up;
  if (std::abs(forward.dot(up_ref.normalized())) > 1.0 - 1e-9) up_ref = Eigen::Vector3d(0, 1, 0);
  const Eigen::Vector3d right = up_ref.cross(forward).normalized();
  const Eigen::Vector3d down = right.cross(forward);

  Camera cam;
  cam.fx = cam.fy = focal_px;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.width = width;
  cam.height = height;
  cam.rotation.col(0) = right;
  cam.rotation.col(1) = down;
  cam.rotation.col(2) = forward;
  cam.center = eye;
  cam.near = near;
  cam.far = far;
  cam.validate();
  return cam;
}

struct OrbitParams {
  Eigen::Vector3d target = Eigen::Vector3d::Zero();
  double radius = 3.0;
  double elevation_rad = 0.4;
  double fov_rad = 0.9;
  double phase_rad = 0.0;
  double near = 0.5;
  double far = 6.0;
};

/// Evenly spaced ring of cameras looking at the target.
inline std::vector<Camera> orbit_cameras(int n_views, const OrbitParams& p, int width, int height) {
  if (n_views < 1) throw std::invalid_argument("orbit_cameras: need at least one view");
  const double focal = 0.5 * width / std::tan(p.fov_rad / 2.0);
  std::vector<Camera> cams;
  cams.reserve(n_views);
  for (int k = 0; k < n_views; ++k) {
    const double theta = p.phase_rad + 2.0 * M_PI * k / n_views;
    const Eigen::Vector3d eye =
        p.target + p.radius * Eigen::Vector3d(std::cos(theta) * std::cos(p.elevation_rad),
                                              std::sin(theta) * std::cos(p.elevation_rad),
                                              std::sin(p.elevation_rad));
    cams.push_back(look_at(eye, p.target, Eigen::Vector3d(0, 0, 1), width, height, focal, p.near, p.far));
  }
  return cams;
}

}  // namespace ledit
