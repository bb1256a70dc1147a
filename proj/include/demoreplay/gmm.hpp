#pragma once

#include <cstdint>
#include <vector>

#include "demoreplay/trajectory.hpp"

namespace demoreplay {

/// Concatenated multi-trial samples. Column 0 is time (s); columns 1-3
/// gripper position (m); columns 4-6 the branch-continuous rotation log
/// (rad); column 7 the finger aperture (m).
struct DemoDataset {
  MatX samples;                // N x 8
  std::vector<int> trial_ids;  // length N

  Eigen::Index size() const { return samples.rows(); }
  static constexpr int kDim = 8;
};

/// Weighted full-covariance Gaussian mixture over [time; spatial] vectors.
struct GaussianMixture {
  VecX weights;                    // K, nonnegative, sums to 1
  MatX means;                      // K x dim
  std::vector<MatX> covariances;   // K of dim x dim, SPD

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(means.cols()); }
  void validate() const;
};

struct EmOptions {
  int k = 16;
  std::uint64_t seed = 0;
  double reg = 1e-6;     // covariance ridge, standardized units
  double tol = 1e-8;     // stop when mean log-likelihood gain drops below
  int max_iter = 300;
};

/// Rows [t; p; log(R); d] per sample, trial ids recorded. The rotation log
/// is kept branch-continuous within each trial (consecutive samples pick the
/// branch minimizing the jump), so Gaussian statistics see a continuous
/// chart. Throws AngleNearPi only on unresolvable first-sample ambiguity.
DemoDataset build_dataset(const std::vector<DemoTrajectory>& trials);

/// Full-covariance EM, k-means++ initialized (seeded), data standardized
/// per dimension internally and de-standardized on output. A component
/// whose weight underflows 1/(10N) is reseeded once, then the fit faults
/// with DegenerateComponent. `ll_history`, when given, receives the mean
/// per-sample log-likelihood after every iteration.
GaussianMixture em_fit(const DemoDataset& data, const EmOptions& opts,
                       std::vector<double>* ll_history = nullptr);

struct GmrResult {
  VecX mean;           // dim-1 (spatial part)
  MatX cov;            // (dim-1) x (dim-1)
  bool extrapolated = false;  // all component likelihoods < 1e-300 at t
};

/// Condition the mixture on time: responsibility-weighted per-component
/// Gaussian conditionals combined by the mixture moment formula.
GmrResult gmr(const GaussianMixture& mixture, double t);

struct RegressedTrajectory {
  VecX times;                       // M
  MatX mean;                        // M x 7: p, r, d
  std::vector<MatX> cov;            // M of 7x7
  std::vector<uint8_t> extrapolated;
};

RegressedTrajectory regress_trajectory(const GaussianMixture& mixture,
                                       const VecX& times);

/// Re-exponentiate the regressed rotation logs into poses; the result feeds
/// the joint-space solver and the replay gripper command.
DemoTrajectory to_demo_trajectory(const RegressedTrajectory& reg);

}  // namespace demoreplay
