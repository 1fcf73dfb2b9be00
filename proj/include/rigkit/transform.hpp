#pragma once

#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "rigkit/types.hpp"

namespace rigkit {

/// Proper rigid-body transform: p' = rotation * p + translation.
/// Rotation is kept orthonormal with determinant +1; composition
/// re-orthonormalizes when accumulated drift exceeds
/// kRotationDriftTolerance.
template <class Scalar>
struct RigidTransform {
  Mat3<Scalar> rotation = Mat3<Scalar>::Identity();
  Vec3<Scalar> translation = Vec3<Scalar>::Zero();

  static RigidTransform identity() { return RigidTransform{}; }

  static RigidTransform from_parts(const Mat3<Scalar>& r, const Vec3<Scalar>& t) {
    return RigidTransform{r, t};
  }

  static RigidTransform from_quaternion(const Eigen::Quaternion<Scalar>& q,
                                        const Vec3<Scalar>& t) {
    return RigidTransform{q.normalized().toRotationMatrix(), t};
  }

  Eigen::Quaternion<Scalar> quaternion() const {
    return Eigen::Quaternion<Scalar>(rotation).normalized();
  }

  Vec3<Scalar> operator*(const Vec3<Scalar>& p) const {
    return rotation * p + translation;
  }
};

using RigidTransformd = RigidTransform<double>;
using RigidTransformf = RigidTransform<float>;

inline constexpr double kRotationDriftTolerance = 1e-9;

/// Max-norm of R^T R - I.
template <class Scalar>
Scalar orthonormality_error(const Mat3<Scalar>& r) {
  return (r.transpose() * r - Mat3<Scalar>::Identity()).template lpNorm<Eigen::Infinity>();
}

/// Nearest rotation in the Frobenius sense (polar factor), determinant +1.
template <class Scalar>
Mat3<Scalar> orthonormalized(const Mat3<Scalar>& r) {
  Eigen::JacobiSVD<Mat3<Scalar>> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3<Scalar> u = svd.matrixU();
  Mat3<Scalar> v = svd.matrixV();
  Mat3<Scalar> out = u * v.transpose();
  if (out.determinant() < Scalar(0)) {
    u.col(2) *= Scalar(-1);
    out = u * v.transpose();
  }
  return out;
}

template <class Scalar>
bool is_rigid(const RigidTransform<Scalar>& t, Scalar tol = Scalar(kRotationDriftTolerance)) {
  return t.translation.allFinite() && t.rotation.allFinite() &&
         orthonormality_error(t.rotation) <= tol && t.rotation.determinant() > Scalar(0);
}

/// a then-applied-after b: result maps p via b first, then a.
template <class Scalar>
RigidTransform<Scalar> compose(const RigidTransform<Scalar>& a,
                               const RigidTransform<Scalar>& b) {
  RigidTransform<Scalar> out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  if (orthonormality_error(out.rotation) > Scalar(kRotationDriftTolerance)) {
    out.rotation = orthonormalized(out.rotation);
  }
  return out;
}

template <class Scalar>
RigidTransform<Scalar> operator*(const RigidTransform<Scalar>& a,
                                 const RigidTransform<Scalar>& b) {
  return compose(a, b);
}

template <class Scalar>
RigidTransform<Scalar> invert(const RigidTransform<Scalar>& t) {
  RigidTransform<Scalar> out;
  out.rotation = t.rotation.transpose();
  out.translation = -(out.rotation * t.translation);
  return out;
}

/// Geodesic interpolation: quaternion slerp for rotation, linear translation.
template <class Scalar>
RigidTransform<Scalar> interpolate(const RigidTransform<Scalar>& a,
                                   const RigidTransform<Scalar>& b, Scalar alpha) {
  Eigen::Quaternion<Scalar> q = a.quaternion().slerp(alpha, b.quaternion());
  Vec3<Scalar> t = (Scalar(1) - alpha) * a.translation + alpha * b.translation;
  return RigidTransform<Scalar>::from_quaternion(q, t);
}

/// Rotation angle between the two transforms, radians.
template <class Scalar>
Scalar angular_distance(const RigidTransform<Scalar>& a, const RigidTransform<Scalar>& b) {
  Eigen::AngleAxis<Scalar> aa(a.rotation.transpose() * b.rotation);
  return std::abs(aa.angle());
}

template <class Scalar>
RigidTransform<Scalar> rotation_about_x(Scalar angle_rad) {
  return {Eigen::AngleAxis<Scalar>(angle_rad, Vec3<Scalar>::UnitX()).toRotationMatrix(),
          Vec3<Scalar>::Zero()};
}

template <class Scalar>
RigidTransform<Scalar> rotation_about_y(Scalar angle_rad) {
  return {Eigen::AngleAxis<Scalar>(angle_rad, Vec3<Scalar>::UnitY()).toRotationMatrix(),
          Vec3<Scalar>::Zero()};
}

template <class Scalar>
RigidTransform<Scalar> rotation_about_z(Scalar angle_rad) {
  return {Eigen::AngleAxis<Scalar>(angle_rad, Vec3<Scalar>::UnitZ()).toRotationMatrix(),
          Vec3<Scalar>::Zero()};
}

template <class Scalar>
RigidTransform<Scalar> translation_of(const Vec3<Scalar>& t) {
  return {Mat3<Scalar>::Identity(), t};
}

}  // namespace rigkit
