#include "rigkit/trajectory_eval.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rigkit/sync.hpp"

namespace rigkit {

AteResult trajectory_ate(const PoseTrajectory& est, const PoseTrajectory& ref,
                         std::uint64_t tol_ticks) {
  std::vector<Timestamp> est_ts;
  est_ts.reserve(est.size());
  for (const PoseSample& s : est.samples()) est_ts.push_back(s.t);
  std::vector<Timestamp> ref_ts;
  ref_ts.reserve(ref.size());
  for (const PoseSample& s : ref.samples()) ref_ts.push_back(s.t);

  std::vector<Vec3d> p_est;
  std::vector<Vec3d> p_ref;
  for (const Association& a : associate_nearest(est_ts, ref_ts, tol_ticks)) {
    if (!a.match) continue;
    p_est.push_back(est.samples()[a.ref_index].world_from_rig.translation);
    p_ref.push_back(ref.samples()[*a.match].world_from_rig.translation);
  }
  if (p_est.size() < 3) {
    raise(ErrorCode::InsufficientOverlap,
          "trajectory alignment needs at least 3 associated pose pairs, got " +
              std::to_string(p_est.size()));
  }

  const std::size_t n = p_est.size();
  Vec3d c_est = Vec3d::Zero();
  Vec3d c_ref = Vec3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    c_est += p_est[i];
    c_ref += p_ref[i];
  }
  c_est /= static_cast<double>(n);
  c_ref /= static_cast<double>(n);

  Mat3d h = Mat3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    h += (p_est[i] - c_est) * (p_ref[i] - c_ref).transpose();
  }
  const Eigen::JacobiSVD<Mat3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3d rotation = svd.matrixV() * svd.matrixU().transpose();
  if (rotation.determinant() < 0) {
    Mat3d flip = Mat3d::Identity();
    flip(2, 2) = -1.0;
    rotation = svd.matrixV() * flip * svd.matrixU().transpose();
  }

  AteResult out;
  out.ref_from_est = RigidTransformd::from_parts(rotation, c_ref - rotation * c_est);
  out.pair_count = n;
  out.residuals_m.reserve(n);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (out.ref_from_est * p_est[i] - p_ref[i]).norm();
    out.residuals_m.push_back(r);
    sum_sq += r * r;
  }
  out.rmse_m = std::sqrt(sum_sq / static_cast<double>(n));
  return out;
}

std::string ate_report(const AteResult& result) {
  std::vector<double> sorted = result.residuals_m;
  std::sort(sorted.begin(), sorted.end());
  const double median =
      sorted.empty() ? 0.0
                     : (sorted.size() % 2 == 1
                            ? sorted[sorted.size() / 2]
                            : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]));
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "pairs %zu\nrmse_m %.9g\nmin_m %.9g\nmedian_m %.9g\nmax_m %.9g\n",
                result.pair_count, result.rmse_m, sorted.empty() ? 0.0 : sorted.front(), median,
                sorted.empty() ? 0.0 : sorted.back());
  return buf;
}

}  // namespace rigkit
