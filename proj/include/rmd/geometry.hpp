#ifndef RMD_GEOMETRY_HPP_
#define RMD_GEOMETRY_HPP_

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rmd {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = std::numbers::pi;

//! Wraps an angle to (-pi, pi].
inline double wrap_angle(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

inline Mat3 yaw_matrix(double yaw) {
  return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

inline Quat yaw_quaternion(double yaw) {
  return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
}

//! Heading of the body x-axis projected onto the ground plane. Returns false
//! when the axis is (numerically) vertical.
inline bool heading_of(const Mat3& rotation, double& yaw, double tolerance = 1e-6) {
  const double fx = rotation(0, 0);
  const double fy = rotation(1, 0);
  if (std::hypot(fx, fy) < tolerance) return false;
  yaw = std::atan2(fy, fx);
  return true;
}

/*
 * Intrinsic XYZ Euler angles: R = Rx(a) * Ry(b) * Rz(c).
 */
inline Mat3 euler_xyz_to_matrix(const Vec3& euler) {
  return (Eigen::AngleAxisd(euler.x(), Vec3::UnitX()) *
          Eigen::AngleAxisd(euler.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(euler.z(), Vec3::UnitZ()))
      .toRotationMatrix();
}

inline Vec3 matrix_to_euler_xyz(const Mat3& r) {
  const double sb = std::clamp(r(0, 2), -1.0, 1.0);
  const double b = std::asin(sb);
  double a = 0.0;
  double c = 0.0;
  if (std::sqrt(r(0, 0) * r(0, 0) + r(0, 1) * r(0, 1)) > 1e-9) {
    a = std::atan2(-r(1, 2), r(2, 2));
    c = std::atan2(-r(0, 1), r(0, 0));
  } else {
    // gimbal lock: fold the whole twist into the x angle
    a = std::atan2(r(2, 1), r(1, 1));
  }
  return {wrap_angle(a), wrap_angle(b), wrap_angle(c)};
}

//! Moves `from` towards `to` by at most `max_step`.
inline Vec3 step_toward(const Vec3& from, const Vec3& to, double max_step) {
  const Vec3 delta = to - from;
  const double dist = delta.norm();
  if (dist <= max_step || dist == 0.0) return to;
  return from + delta * (max_step / dist);
}

//! Rotates `from` towards `to` by at most `max_angle` radians.
inline Quat rotate_toward(const Quat& from, const Quat& to, double max_angle) {
  const double angle = from.angularDistance(to);
  if (angle <= max_angle || angle == 0.0) return to.normalized();
  return from.slerp(max_angle / angle, to).normalized();
}

//! Angular velocity that carries q0 to q1 over dt (world frame).
inline Vec3 angular_velocity(const Quat& q0, const Quat& q1, double dt) {
  Quat dq = q1 * q0.conjugate();
  if (dq.w() < 0.0) dq.coeffs() *= -1.0;
  const Eigen::AngleAxisd aa(dq.normalized());
  if (aa.angle() == 0.0) return Vec3::Zero();
  return aa.axis() * (aa.angle() / dt);
}

}  // namespace rmd

#endif  // RMD_GEOMETRY_HPP_
