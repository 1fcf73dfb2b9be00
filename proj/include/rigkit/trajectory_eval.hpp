#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rigkit/trajectory.hpp"
#include "rigkit/transform.hpp"

namespace rigkit {

struct AteResult {
  double rmse_m = 0.0;
  std::vector<double> residuals_m;           // per associated pose pair
  RigidTransformd ref_from_est = RigidTransformd::identity();  // applied to est
  std::size_t pair_count = 0;
};

/// Absolute trajectory error: estimated poses are associated to reference
/// poses by nearest timestamp within tol_ticks, the rigid transform that
/// best aligns the estimated translations onto the reference (closed-form,
/// cross-covariance SVD, no scale) is solved, and the RMS translational
/// residual after alignment is reported. Throws InsufficientOverlap with
/// fewer than 3 associated pairs.
AteResult trajectory_ate(const PoseTrajectory& est, const PoseTrajectory& ref,
                         std::uint64_t tol_ticks);

/// Plain-text report: pair count, rmse, min/median/max residuals.
std::string ate_report(const AteResult& result);

}  // namespace rigkit
