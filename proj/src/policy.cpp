#include "seqnav/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace seqnav {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)
}

ActorCritic ActorCritic::make(Eigen::Index obs_dim, const std::vector<Eigen::Index>& hidden,
                              Eigen::Index act_dim, double init_log_std, RngStream& rng) {
    std::vector<Eigen::Index> actor_sizes;
    actor_sizes.push_back(obs_dim);
    actor_sizes.insert(actor_sizes.end(), hidden.begin(), hidden.end());
    actor_sizes.push_back(act_dim);

    std::vector<Eigen::Index> critic_sizes;
    critic_sizes.push_back(obs_dim);
    critic_sizes.insert(critic_sizes.end(), hidden.begin(), hidden.end());
    critic_sizes.push_back(1);

    ActorCritic ac;
    ac.actor = Mlp(actor_sizes);
    ac.actor.init(rng, 0.01);  // small head: initial means near zero
    ac.critic = Mlp(critic_sizes);
    ac.critic.init(rng, 1.0);
    ac.log_std = Eigen::VectorXd::Constant(act_dim, init_log_std);
    return ac;
}

Eigen::Index ActorCritic::param_count() const {
    return actor.param_count() + critic.param_count() + log_std.size();
}

Eigen::VectorXd ActorCritic::flatten() const {
    Eigen::VectorXd flat(param_count());
    actor.copy_to(flat.data());
    critic.copy_to(flat.data() + actor.param_count());
    flat.tail(log_std.size()) = log_std;
    return flat;
}

void ActorCritic::unflatten(const Eigen::VectorXd& flat) {
    if (flat.size() != param_count()) {
        throw std::invalid_argument("ActorCritic::unflatten: size mismatch");
    }
    actor.copy_from(flat.data());
    critic.copy_from(flat.data() + actor.param_count());
    log_std = flat.tail(log_std.size());
}

bool ActorCritic::all_finite() const {
    return actor.all_finite() && critic.all_finite() && log_std.allFinite();
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> forward_actor_critic(const ActorCritic& ac,
                                                                 const Eigen::MatrixXd& obs) {
    if (obs.cols() != ac.actor.input_dim()) {
        throw std::invalid_argument("forward_actor_critic: observation dimension mismatch");
    }
    Eigen::MatrixXd mean = ac.actor.forward(obs);
    Eigen::VectorXd value = ac.critic.forward(obs).col(0);
    return {std::move(mean), std::move(value)};
}

Eigen::VectorXd gaussian_log_prob(const Eigen::MatrixXd& actions, const Eigen::MatrixXd& mean,
                                  const Eigen::VectorXd& log_std) {
    if (actions.rows() != mean.rows() || actions.cols() != mean.cols() ||
        actions.cols() != log_std.size()) {
        throw std::invalid_argument("gaussian_log_prob: shape mismatch");
    }
    const Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();
    const Eigen::MatrixXd diff = actions - mean;
    Eigen::VectorXd logp(actions.rows());
    const double base = -log_std.sum() -
                        0.5 * static_cast<double>(actions.cols()) * kLog2Pi;
    for (Eigen::Index i = 0; i < actions.rows(); ++i) {
        logp(i) = base - 0.5 * (diff.row(i).transpose().array().square() * inv_var).sum();
    }
    return logp;
}

double gaussian_entropy(const Eigen::VectorXd& log_std) {
    return log_std.sum() +
           0.5 * static_cast<double>(log_std.size()) * (kLog2Pi + 1.0);
}

RunningNorm::RunningNorm(Eigen::Index dim) {
    mean_.setZero(dim);
    m2_.setZero(dim);
}

void RunningNorm::update(const Eigen::MatrixXd& batch) {
    if (batch.cols() != mean_.size()) {
        throw std::invalid_argument("RunningNorm::update: dimension mismatch");
    }
    const double n = static_cast<double>(batch.rows());
    if (n == 0.0) {
        return;
    }
    const Eigen::VectorXd bmean = batch.colwise().mean();
    Eigen::VectorXd bm2 = Eigen::VectorXd::Zero(mean_.size());
    for (Eigen::Index i = 0; i < batch.rows(); ++i) {
        bm2 += (batch.row(i).transpose() - bmean).array().square().matrix();
    }
    const double total = count_ + n;
    const Eigen::VectorXd delta = bmean - mean_;
    mean_ += delta * (n / total);
    m2_ += bm2 + delta.array().square().matrix() * (count_ * n / total);
    count_ = total;
}

Eigen::VectorXd RunningNorm::variance() const {
    if (count_ <= 0.0) {
        return Eigen::VectorXd::Ones(mean_.size());
    }
    return m2_ / count_;
}

Eigen::MatrixXd RunningNorm::normalize(const Eigen::MatrixXd& batch) const {
    if (batch.cols() != mean_.size()) {
        throw std::invalid_argument("RunningNorm::normalize: dimension mismatch");
    }
    const Eigen::ArrayXd scale = (variance().array() + 1e-8).sqrt();
    Eigen::MatrixXd out(batch.rows(), batch.cols());
    for (Eigen::Index i = 0; i < batch.rows(); ++i) {
        out.row(i) = ((batch.row(i).transpose().array() - mean_.array()) / scale)
                         .cwiseMax(-kClip)
                         .cwiseMin(kClip)
                         .matrix()
                         .transpose();
    }
    return out;
}

void RunningNorm::restore(double count, const Eigen::VectorXd& mean, const Eigen::VectorXd& m2) {
    if (mean.size() != mean_.size() || m2.size() != m2_.size()) {
        throw std::invalid_argument("RunningNorm::restore: dimension mismatch");
    }
    count_ = count;
    mean_ = mean;
    m2_ = m2;
}

}  // namespace seqnav
