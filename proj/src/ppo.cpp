#include "seqnav/ppo.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace seqnav {

void PpoConfig::validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("PpoConfig: gamma must be in (0, 1]");
    }
    if (!(lambda_gae > 0.0 && lambda_gae <= 1.0)) {
        throw std::invalid_argument("PpoConfig: lambda_gae must be in (0, 1]");
    }
    if (!(clip > 0.0)) {
        throw std::invalid_argument("PpoConfig: clip must be positive");
    }
    if (epochs == 0 || minibatches == 0 || iterations == 0 || steps_per_env == 0) {
        throw std::invalid_argument("PpoConfig: counts must be positive");
    }
    if (!(lr > 0.0) || !(max_grad_norm > 0.0)) {
        throw std::invalid_argument("PpoConfig: lr and max_grad_norm must be positive");
    }
    if (hidden.empty()) {
        throw std::invalid_argument("PpoConfig: need at least one hidden layer");
    }
}

void gae(const Eigen::MatrixXd& rewards, const Eigen::MatrixXd& values,
         const Eigen::MatrixXd& dones, const Eigen::VectorXd& bootstrap, double gamma,
         double lambda, Eigen::MatrixXd& advantages, Eigen::MatrixXd& returns) {
    const Eigen::Index t_len = rewards.rows();
    const Eigen::Index n_env = rewards.cols();
    if (values.rows() != t_len || values.cols() != n_env || dones.rows() != t_len ||
        dones.cols() != n_env || bootstrap.size() != n_env) {
        throw std::invalid_argument("gae: shape mismatch");
    }
    advantages.resize(t_len, n_env);
    returns.resize(t_len, n_env);
    for (Eigen::Index b = 0; b < n_env; ++b) {
        double acc = 0.0;
        double next_value = bootstrap(b);
        for (Eigen::Index t = t_len - 1; t >= 0; --t) {
            const double nonterminal = 1.0 - dones(t, b);
            const double delta =
                rewards(t, b) + gamma * next_value * nonterminal - values(t, b);
            acc = delta + gamma * lambda * nonterminal * acc;
            advantages(t, b) = acc;
            next_value = values(t, b);
        }
    }
    returns = advantages + values;
}

double ppo_loss_and_grad(const ActorCritic& ac, const Rollout& batch, const PpoConfig& cfg,
                         Eigen::VectorXd& grad, UpdateStats* stats) {
    const Eigen::Index m = batch.obs.rows();
    const Eigen::Index act_dim = ac.log_std.size();
    if (batch.actions.rows() != m || batch.log_probs.size() != m ||
        batch.advantages.size() != m || batch.returns.size() != m) {
        throw std::invalid_argument("ppo_loss_and_grad: rollout shape mismatch");
    }

    Mlp::Cache actor_cache;
    Mlp::Cache critic_cache;
    const Eigen::MatrixXd mean = ac.actor.forward(batch.obs, actor_cache);
    const Eigen::VectorXd value = ac.critic.forward(batch.obs, critic_cache).col(0);

    const Eigen::ArrayXd inv_var = (-2.0 * ac.log_std.array()).exp();
    const Eigen::MatrixXd diff = batch.actions - mean;
    const Eigen::VectorXd logp_new = gaussian_log_prob(batch.actions, mean, ac.log_std);
    const Eigen::ArrayXd log_ratio = (logp_new - batch.log_probs).array();
    const Eigen::ArrayXd ratio = log_ratio.exp();
    const Eigen::ArrayXd adv = batch.advantages.array();

    const double lo = 1.0 - cfg.clip;
    const double hi = 1.0 + cfg.clip;
    const Eigen::ArrayXd surr1 = ratio * adv;
    const Eigen::ArrayXd surr2 = ratio.min(hi).max(lo) * adv;
    const double loss_policy = -surr1.min(surr2).mean();

    const Eigen::ArrayXd value_err = value.array() - batch.returns.array();
    const double loss_value = 0.5 * value_err.square().mean();
    const double entropy = gaussian_entropy(ac.log_std);
    const double total = loss_policy + cfg.vf_coef * loss_value - cfg.ent_coef * entropy;

    // d(total)/d(logp_new): only through samples where the unclipped term is
    // the active branch of the min.
    const double inv_m = 1.0 / static_cast<double>(m);
    Eigen::ArrayXd d_logp(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const bool clipped = (ratio(i) > hi && adv(i) > 0.0) || (ratio(i) < lo && adv(i) < 0.0);
        d_logp(i) = clipped ? 0.0 : -inv_m * adv(i) * ratio(i);
    }

    // Actor gradients: dlogp/dmean_j = diff_j * inv_var_j.
    Eigen::MatrixXd d_mean(m, act_dim);
    for (Eigen::Index i = 0; i < m; ++i) {
        d_mean.row(i) = d_logp(i) * (diff.row(i).array() * inv_var.transpose()).matrix();
    }

    Mlp grad_actor(ac.actor.sizes());
    Mlp grad_critic(ac.critic.sizes());
    ac.actor.backward(actor_cache, d_mean, grad_actor);

    Eigen::VectorXd d_log_std = Eigen::VectorXd::Zero(act_dim);
    for (Eigen::Index j = 0; j < act_dim; ++j) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            s += d_logp(i) * (diff(i, j) * diff(i, j) * inv_var(j) - 1.0);
        }
        d_log_std(j) = s - cfg.ent_coef;  // entropy term: dH/dlog_std = 1
    }

    Eigen::MatrixXd d_value(m, 1);
    d_value.col(0) = (cfg.vf_coef * inv_m) * value_err.matrix();
    ac.critic.backward(critic_cache, d_value, grad_critic);

    grad.resize(ac.param_count());
    grad_actor.copy_to(grad.data());
    grad_critic.copy_to(grad.data() + grad_actor.param_count());
    grad.tail(act_dim) = d_log_std;

    if (stats != nullptr) {
        stats->loss_policy = loss_policy;
        stats->loss_value = loss_value;
        stats->entropy = entropy;
        stats->kl = -log_ratio.mean();
        stats->clip_fraction = ((ratio - 1.0).abs() > cfg.clip).cast<double>().mean();
    }
    return total;
}

UpdateStats ppo_update(ActorCritic& ac, const Rollout& rollout, const PpoConfig& cfg, Adam& adam,
                       std::uint64_t seed, std::uint64_t iteration) {
    const Eigen::Index m_total = rollout.obs.rows();
    if (m_total < static_cast<Eigen::Index>(cfg.minibatches)) {
        throw std::invalid_argument("ppo_update: rollout smaller than minibatch count");
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(m_total));
    std::iota(order.begin(), order.end(), 0);

    UpdateStats avg;
    std::size_t executed = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        RngStream shuffle_rng{seed, kRngShuffle, iteration, static_cast<std::uint64_t>(epoch)};
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            const std::size_t j = shuffle_rng.uniform_index(i + 1);
            std::swap(order[i], order[j]);
        }

        const Eigen::Index base_size = m_total / static_cast<Eigen::Index>(cfg.minibatches);
        for (std::size_t mb = 0; mb < cfg.minibatches; ++mb) {
            const Eigen::Index begin = static_cast<Eigen::Index>(mb) * base_size;
            const Eigen::Index size =
                (mb + 1 == cfg.minibatches) ? m_total - begin : base_size;

            Rollout batch;
            batch.obs.resize(size, rollout.obs.cols());
            batch.actions.resize(size, rollout.actions.cols());
            batch.log_probs.resize(size);
            batch.advantages.resize(size);
            batch.returns.resize(size);
            for (Eigen::Index r = 0; r < size; ++r) {
                const Eigen::Index src = order[static_cast<std::size_t>(begin + r)];
                batch.obs.row(r) = rollout.obs.row(src);
                batch.actions.row(r) = rollout.actions.row(src);
                batch.log_probs(r) = rollout.log_probs(src);
                batch.advantages(r) = rollout.advantages(src);
                batch.returns(r) = rollout.returns(src);
            }

            Eigen::VectorXd grad;
            UpdateStats local;
            const double loss = ppo_loss_and_grad(ac, batch, cfg, grad, &local);
            if (!std::isfinite(loss) || !grad.allFinite()) {
                std::fprintf(stderr,
                             "ppo_update: non-finite loss in iteration %llu epoch %zu "
                             "minibatch %zu, skipping\n",
                             static_cast<unsigned long long>(iteration), epoch, mb);
                avg.aborted_minibatches += 1;
                continue;
            }

            const double norm = grad.norm();
            if (norm > cfg.max_grad_norm && norm > 0.0) {
                grad *= cfg.max_grad_norm / norm;
            }
            Eigen::VectorXd flat = ac.flatten();
            adam.step(flat, grad);
            ac.unflatten(flat);

            avg.loss_policy += local.loss_policy;
            avg.loss_value += local.loss_value;
            avg.entropy += local.entropy;
            avg.kl += local.kl;
            avg.clip_fraction += local.clip_fraction;
            avg.grad_norm += norm;
            executed += 1;
        }
    }

    if (executed > 0) {
        const double inv = 1.0 / static_cast<double>(executed);
        avg.loss_policy *= inv;
        avg.loss_value *= inv;
        avg.entropy *= inv;
        avg.kl *= inv;
        avg.clip_fraction *= inv;
        avg.grad_norm *= inv;
    }
    return avg;
}

}  // namespace seqnav
