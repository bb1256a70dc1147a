#include "demoreplay/gmm.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "demoreplay/errors.hpp"

namespace demoreplay {

void GaussianMixture::validate() const {
  const int k = components();
  if (k < 1 || means.rows() != k ||
      covariances.size() != static_cast<size_t>(k)) {
    throw DimensionMismatch("GaussianMixture: inconsistent component count");
  }
  if ((weights.array() < 0.0).any() ||
      std::abs(weights.sum() - 1.0) > 1e-12) {
    throw DimensionMismatch("GaussianMixture: weights must sum to 1");
  }
  for (const auto& c : covariances) {
    if (c.rows() != dim() || c.cols() != dim()) {
      throw DimensionMismatch("GaussianMixture: covariance shape mismatch");
    }
    Eigen::SelfAdjointEigenSolver<MatX> es(c);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw DegenerateComponent("GaussianMixture: covariance not SPD");
    }
  }
}

DemoDataset build_dataset(const std::vector<DemoTrajectory>& trials) {
  if (trials.empty()) {
    throw DimensionMismatch("build_dataset: needs at least one trial");
  }
  Eigen::Index total = 0;
  for (const auto& t : trials) total += t.size();

  DemoDataset data;
  data.samples.resize(total, DemoDataset::kDim);
  data.trial_ids.resize(static_cast<size_t>(total));

  Eigen::Index row = 0;
  int trial = 0;
  for (const auto& tr : trials) {
    check_strictly_increasing(tr.times, "build_dataset");
    RotVec prev = RotVec::Zero();
    for (Eigen::Index i = 0; i < tr.size(); ++i) {
      RotVec r;
      if (i == 0) {
        // First sample must sit on the canonical branch; near pi there is
        // no context to resolve the sign, so the strict log's fault is the
        // right outcome.
        r = so3_log(tr.poses[static_cast<size_t>(i)].rot);
      } else {
        r = so3_log_continuous(tr.poses[static_cast<size_t>(i)].rot, prev);
      }
      prev = r;
      data.samples(row, 0) = tr.times(i);
      data.samples.row(row).segment<3>(1) = tr.poses[static_cast<size_t>(i)].pos;
      data.samples.row(row).segment<3>(4) = r;
      data.samples(row, 7) = tr.aperture(i);
      data.trial_ids[static_cast<size_t>(row)] = trial;
      ++row;
    }
    ++trial;
  }
  if (!data.samples.allFinite()) {
    throw NonFinite("build_dataset: non-finite sample");
  }
  return data;
}

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;  // log(2*pi)

struct Standardizer {
  VecX mu, sd;

  static Standardizer fit(const MatX& x) {
    Standardizer s;
    s.mu = x.colwise().mean();
    MatX centered = x.rowwise() - s.mu.transpose();
    s.sd = (centered.array().square().colwise().mean()).sqrt();
    for (Eigen::Index j = 0; j < s.sd.size(); ++j) {
      if (!(s.sd(j) > 0.0)) s.sd(j) = 1.0;  // constant column
    }
    return s;
  }

  MatX apply(const MatX& x) const {
    return (x.rowwise() - mu.transpose()).array().rowwise() /
           sd.transpose().array();
  }
};

// k-means++ seeding followed by Lloyd iterations, all draws from rng.
MatX kmeans_centers(const MatX& x, int k, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  MatX centers(k, d);
  centers.row(0) = x.row(static_cast<Eigen::Index>(
      unif(rng) * static_cast<double>(n)) % n);
  VecX dist2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = dist2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = unif(rng) * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= dist2(i);
        if (target <= 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(unif(rng) * static_cast<double>(n)) % n;
    }
    centers.row(c) = x.row(pick);
    dist2 = dist2.cwiseMin(
        (x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> assign(static_cast<size_t>(n), -1);
  for (int iter = 0; iter < 50; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double dd = (x.row(i) - centers.row(c)).squaredNorm();
        if (dd < bd) {
          bd = dd;
          best = c;
        }
      }
      if (assign[static_cast<size_t>(i)] != best) {
        assign[static_cast<size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    MatX sums = MatX::Zero(k, d);
    VecX counts = VecX::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<size_t>(i)]) += x.row(i);
      counts(assign[static_cast<size_t>(i)]) += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (counts(c) > 0.0) {
        centers.row(c) = sums.row(c) / counts(c);
      } else {
        // Re-seed an empty cluster on the sample farthest from its center.
        Eigen::Index far = 0;
        double fd = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double dd =
              (x.row(i) - centers.row(assign[static_cast<size_t>(i)]))
                  .squaredNorm();
          if (dd > fd) {
            fd = dd;
            far = i;
          }
        }
        centers.row(c) = x.row(far);
      }
    }
  }
  return centers;
}

struct ComponentCache {
  Eigen::LLT<MatX> llt;
  double log_norm = 0.0;  // -0.5 (d log 2pi + log det)
};

ComponentCache cache_component(const MatX& cov) {
  ComponentCache cc;
  cc.llt.compute(cov);
  if (cc.llt.info() != Eigen::Success) {
    throw DegenerateComponent("em_fit: covariance not positive definite");
  }
  const double logdet =
      2.0 * cc.llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  cc.log_norm =
      -0.5 * (static_cast<double>(cov.rows()) * kLogTwoPi + logdet);
  return cc;
}

double log_gauss(const ComponentCache& cc, const VecX& centered) {
  const VecX y = cc.llt.matrixL().solve(centered);
  return cc.log_norm - 0.5 * y.squaredNorm();
}

}  // namespace

GaussianMixture em_fit(const DemoDataset& data, const EmOptions& opts,
                       std::vector<double>* ll_history) {
  const Eigen::Index n = data.size();
  const int k = opts.k;
  const int d = DemoDataset::kDim;
  if (k < 1) throw DimensionMismatch("em_fit: k must be >= 1");
  if (n < k) throw DimensionMismatch("em_fit: fewer samples than components");
  if (!(opts.reg > 0.0)) throw DimensionMismatch("em_fit: reg must be > 0");

  const Standardizer std_ = Standardizer::fit(data.samples);
  const MatX x = std_.apply(data.samples);

  std::mt19937_64 rng(opts.seed);
  const MatX centers = kmeans_centers(x, k, rng);

  // Moment-match each k-means cluster for the initial components.
  MatX means = centers;
  VecX weights = VecX::Constant(k, 1.0 / static_cast<double>(k));
  const MatX global_cov =
      (x.transpose() * x) / static_cast<double>(n) +
      opts.reg * MatX::Identity(d, d);
  std::vector<MatX> covs(static_cast<size_t>(k), global_cov);
  {
    std::vector<int> assign(static_cast<size_t>(n));
    VecX counts = VecX::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double dd = (x.row(i) - centers.row(c)).squaredNorm();
        if (dd < bd) {
          bd = dd;
          best = c;
        }
      }
      assign[static_cast<size_t>(i)] = best;
      counts(best) += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (counts(c) < 2.0) continue;
      MatX cov = MatX::Zero(d, d);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (assign[static_cast<size_t>(i)] != c) continue;
        const VecX diff = (x.row(i) - centers.row(c)).transpose();
        cov += diff * diff.transpose();
      }
      covs[static_cast<size_t>(c)] =
          cov / counts(c) + opts.reg * MatX::Identity(d, d);
      weights(c) = counts(c) / static_cast<double>(n);
    }
    weights /= weights.sum();
  }

  MatX log_resp(n, k);
  bool reseeded_once = false;
  double prev_ll = -std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    // E step in the log domain.
    std::vector<ComponentCache> cache;
    cache.reserve(static_cast<size_t>(k));
    for (int c = 0; c < k; ++c) {
      cache.push_back(cache_component(covs[static_cast<size_t>(c)]));
    }
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const VecX diff = (x.row(i) - means.row(c)).transpose();
        log_resp(i, c) = std::log(weights(c)) +
                         log_gauss(cache[static_cast<size_t>(c)], diff);
        mx = std::max(mx, log_resp(i, c));
      }
      const double lse =
          mx + std::log((log_resp.row(i).array() - mx).exp().sum());
      log_resp.row(i).array() -= lse;
      ll += lse;
    }
    ll /= static_cast<double>(n);
    if (ll_history != nullptr) ll_history->push_back(ll);

    // M step: fixed-order reductions keep the fit bit-reproducible.
    const MatX resp = log_resp.array().exp();
    VecX nk = resp.colwise().sum();
    std::vector<bool> reseeded(static_cast<size_t>(k), false);
    for (int c = 0; c < k; ++c) {
      // weight = nk/N; underflow below 1/(10N) means nk < 0.1.
      if (nk(c) < 0.1) {
        if (reseeded_once) {
          throw DegenerateComponent("em_fit: component " + std::to_string(c) +
                                    " collapsed twice");
        }
        reseeded_once = true;
        reseeded[static_cast<size_t>(c)] = true;
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const auto pick = static_cast<Eigen::Index>(
            unif(rng) * static_cast<double>(n)) % n;
        means.row(c) = x.row(pick);
        covs[static_cast<size_t>(c)] = global_cov;
        nk(c) = 1.0;
      }
    }
    const double nk_total = nk.sum();
    for (int c = 0; c < k; ++c) {
      weights(c) = nk(c) / nk_total;
      if (reseeded[static_cast<size_t>(c)]) continue;
      VecX mean = VecX::Zero(d);
      for (Eigen::Index i = 0; i < n; ++i) {
        mean += resp(i, c) * x.row(i).transpose();
      }
      mean /= nk(c);
      means.row(c) = mean.transpose();
      MatX cov = MatX::Zero(d, d);
      for (Eigen::Index i = 0; i < n; ++i) {
        const VecX diff = x.row(i).transpose() - mean;
        cov += resp(i, c) * (diff * diff.transpose());
      }
      covs[static_cast<size_t>(c)] =
          cov / nk(c) + opts.reg * MatX::Identity(d, d);
    }

    if (iter > 0 && ll - prev_ll < opts.tol) {
      prev_ll = ll;
      break;
    }
    prev_ll = ll;
  }

  // De-standardize: x = (orig - mu) / sd.
  GaussianMixture out;
  out.weights = weights;
  out.means.resize(k, d);
  out.covariances.resize(static_cast<size_t>(k));
  const MatX scale = std_.sd.asDiagonal();
  for (int c = 0; c < k; ++c) {
    out.means.row(c) =
        (means.row(c).array() * std_.sd.transpose().array()) +
        std_.mu.transpose().array();
    out.covariances[static_cast<size_t>(c)] =
        scale * covs[static_cast<size_t>(c)] * scale;
  }
  return out;
}

GmrResult gmr(const GaussianMixture& mixture, double t) {
  const int k = mixture.components();
  const int d = mixture.dim();
  const int s = d - 1;  // spatial block size

  VecX log_h(k);
  double mx = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < k; ++c) {
    const double mu_t = mixture.means(c, 0);
    const double var_t = mixture.covariances[static_cast<size_t>(c)](0, 0);
    const double z = t - mu_t;
    log_h(c) = std::log(mixture.weights(c)) -
               0.5 * (kLogTwoPi + std::log(var_t) + z * z / var_t);
    mx = std::max(mx, log_h(c));
  }
  GmrResult res;
  res.extrapolated = mx < std::log(1e-300);
  const double lse = mx + std::log((log_h.array() - mx).exp().sum());
  const VecX h = (log_h.array() - lse).exp();

  res.mean = VecX::Zero(s);
  MatX second = MatX::Zero(s, s);
  std::vector<VecX> cond_means(static_cast<size_t>(k));
  for (int c = 0; c < k; ++c) {
    const auto& cov = mixture.covariances[static_cast<size_t>(c)];
    const double var_t = cov(0, 0);
    const VecX cov_st = cov.block(1, 0, s, 1);
    const VecX mu_s = mixture.means.row(c).segment(1, s).transpose();
    const VecX m = mu_s + cov_st * ((t - mixture.means(c, 0)) / var_t);
    const MatX cond =
        cov.block(1, 1, s, s) - (cov_st * cov_st.transpose()) / var_t;
    cond_means[static_cast<size_t>(c)] = m;
    res.mean += h(c) * m;
    second += h(c) * (cond + m * m.transpose());
  }
  res.cov = second - res.mean * res.mean.transpose();
  res.cov = 0.5 * (res.cov + res.cov.transpose());
  return res;
}

RegressedTrajectory regress_trajectory(const GaussianMixture& mixture,
                                       const VecX& times) {
  RegressedTrajectory out;
  out.times = times;
  const int s = mixture.dim() - 1;
  out.mean.resize(times.size(), s);
  out.cov.resize(static_cast<size_t>(times.size()));
  out.extrapolated.resize(static_cast<size_t>(times.size()), 0);
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    GmrResult r = gmr(mixture, times(i));
    out.mean.row(i) = r.mean.transpose();
    out.cov[static_cast<size_t>(i)] = std::move(r.cov);
    out.extrapolated[static_cast<size_t>(i)] = r.extrapolated ? 1 : 0;
  }
  return out;
}

DemoTrajectory to_demo_trajectory(const RegressedTrajectory& reg) {
  DemoTrajectory demo;
  demo.times = reg.times;
  demo.poses.reserve(static_cast<size_t>(reg.times.size()));
  demo.aperture.resize(reg.times.size());
  for (Eigen::Index i = 0; i < reg.times.size(); ++i) {
    Pose p;
    p.pos = reg.mean.row(i).segment<3>(0).transpose();
    p.rot = so3_exp(reg.mean.row(i).segment<3>(3).transpose());
    demo.poses.push_back(p);
    demo.aperture(i) = std::max(reg.mean(i, 6), 0.0);
  }
  return demo;
}

}  // namespace demoreplay
