#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "seqnav/policy.hpp"

namespace seqnav {

struct PpoConfig {
    double gamma = 0.99;
    double lambda_gae = 0.95;
    double clip = 0.2;
    std::size_t epochs = 5;
    std::size_t minibatches = 4;
    double lr = 3e-4;
    bool lr_anneal = false;  // linear decay to zero over the run
    double vf_coef = 0.5;
    double ent_coef = 0.005;
    double max_grad_norm = 1.0;
    std::size_t iterations = 1500;
    std::size_t steps_per_env = 48;
    std::vector<Eigen::Index> hidden = {128, 128};
    double init_log_std = 0.0;

    void validate() const;  // throws invalid_argument on out-of-range values
};

/// Flattened on-policy batch: one row per (step, env) sample.
struct Rollout {
    Eigen::MatrixXd obs;        // M x obs_dim, already normalized
    Eigen::MatrixXd actions;    // M x act_dim
    Eigen::VectorXd log_probs;  // M
    Eigen::VectorXd values;     // M, V(s) at collection time
    Eigen::VectorXd advantages; // M, normalized before the update
    Eigen::VectorXd returns;    // M
};

/// Generalized advantage estimation over a time-major rollout.
/// rewards/values/dones are T x B; bootstrap holds V(s_T) per environment.
/// A done step cuts bootstrapping (time-limit bootstrapping is handled by
/// the caller folding gamma*V(final_obs) into that step's reward).
void gae(const Eigen::MatrixXd& rewards, const Eigen::MatrixXd& values,
         const Eigen::MatrixXd& dones, const Eigen::VectorXd& bootstrap, double gamma,
         double lambda, Eigen::MatrixXd& advantages, Eigen::MatrixXd& returns);

struct UpdateStats {
    double loss_policy = 0.0;
    double loss_value = 0.0;
    double entropy = 0.0;
    double kl = 0.0;         // mean(logp_old - logp_new)
    double clip_fraction = 0.0;
    double grad_norm = 0.0;  // pre-clip global norm, averaged over minibatches
    std::size_t aborted_minibatches = 0;
};

/// Full PPO loss and its analytic gradient for one minibatch; exposed
/// separately so the gradient can be checked against finite differences.
/// Returns the scalar loss; grad receives d(loss)/d(params) (flat layout).
double ppo_loss_and_grad(const ActorCritic& ac, const Rollout& batch, const PpoConfig& cfg,
                         Eigen::VectorXd& grad, UpdateStats* stats = nullptr);

/// One PPO update over the rollout: epochs x minibatches with a seeded
/// shuffle, Adam steps, gradient-norm clipping. Advantages must already be
/// normalized. Minibatches with a non-finite loss are skipped and counted.
UpdateStats ppo_update(ActorCritic& ac, const Rollout& rollout, const PpoConfig& cfg, Adam& adam,
                       std::uint64_t seed, std::uint64_t iteration);

}  // namespace seqnav
