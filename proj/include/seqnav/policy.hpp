#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "seqnav/mlp.hpp"

namespace seqnav {

/// Separate actor and critic networks plus a state-independent log standard
/// deviation over the action dimensions. Actions are Gaussian in normalized
/// units; the environment scales and clamps them.
struct ActorCritic {
    Mlp actor;                // obs -> action mean
    Mlp critic;               // obs -> scalar value
    Eigen::VectorXd log_std;  // act_dim

    static ActorCritic make(Eigen::Index obs_dim, const std::vector<Eigen::Index>& hidden,
                            Eigen::Index act_dim, double init_log_std, RngStream& rng);

    Eigen::Index param_count() const;
    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& flat);
    bool all_finite() const;
};

/// Evaluate both heads on a batch. Returns (mean B x A, value B).
/// Throws on an observation-dimension mismatch.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> forward_actor_critic(const ActorCritic& ac,
                                                                 const Eigen::MatrixXd& obs);

/// Diagonal-Gaussian log probability of each action row.
Eigen::VectorXd gaussian_log_prob(const Eigen::MatrixXd& actions, const Eigen::MatrixXd& mean,
                                  const Eigen::VectorXd& log_std);

/// Entropy of the diagonal Gaussian (identical for every sample).
double gaussian_entropy(const Eigen::VectorXd& log_std);

/// Running per-channel mean/variance (Welford with batch merging) used to
/// normalize observations. Statistics freeze when update stops being called,
/// which is how evaluation runs them.
class RunningNorm {
public:
    explicit RunningNorm(Eigen::Index dim);

    void update(const Eigen::MatrixXd& batch);
    Eigen::MatrixXd normalize(const Eigen::MatrixXd& batch) const;

    Eigen::Index dim() const { return mean_.size(); }
    double count() const { return count_; }
    const Eigen::VectorXd& mean() const { return mean_; }
    Eigen::VectorXd variance() const;

    // Checkpoint plumbing.
    void restore(double count, const Eigen::VectorXd& mean, const Eigen::VectorXd& m2);
    const Eigen::VectorXd& m2() const { return m2_; }

    static constexpr double kClip = 10.0;  // normalized values clamp to +/- this

private:
    double count_ = 0.0;
    Eigen::VectorXd mean_;
    Eigen::VectorXd m2_;
};

}  // namespace seqnav
