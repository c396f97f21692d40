#include "seqnav/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace seqnav {

namespace {

// ELU applied in place. f(z) = z for z > 0, exp(z) - 1 otherwise; the
// derivative is 1 for z > 0 and f(z) + 1 otherwise.
void elu_inplace(Eigen::MatrixXd& z) {
    z = z.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
}

Eigen::MatrixXd elu_grad_from_output(const Eigen::MatrixXd& act) {
    return act.unaryExpr([](double a) { return a > 0.0 ? 1.0 : a + 1.0; });
}

}  // namespace

Mlp::Mlp(const std::vector<Eigen::Index>& sizes) : sizes_(sizes) {
    if (sizes.size() < 2) {
        throw std::invalid_argument("Mlp: need at least input and output sizes");
    }
    for (Eigen::Index s : sizes) {
        if (s <= 0) {
            throw std::invalid_argument("Mlp: layer sizes must be positive");
        }
    }
    layers_.resize(sizes.size() - 1);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        layers_[i].W.setZero(sizes[i + 1], sizes[i]);
        layers_[i].b.setZero(sizes[i + 1]);
    }
}

void Mlp::init(RngStream& rng, double head_gain) {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        Layer& layer = layers_[i];
        const double fan_in = static_cast<double>(layer.W.cols());
        const bool head = i + 1 == layers_.size();
        const double scale =
            head ? head_gain * std::sqrt(1.0 / fan_in) : std::sqrt(2.0 / fan_in);
        for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.W.cols(); ++c) {
                layer.W(r, c) = scale * rng.normal();
            }
        }
        layer.b.setZero();
    }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
    Cache cache;
    return forward(x, cache);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache& cache) const {
    if (x.cols() != input_dim()) {
        throw std::invalid_argument("Mlp::forward: input dimension mismatch");
    }
    cache.act.clear();
    cache.act.reserve(layers_.size() + 1);
    cache.act.push_back(x);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        Eigen::MatrixXd z =
            (cache.act.back() * layers_[i].W.transpose()).rowwise() + layers_[i].b.transpose();
        if (i + 1 < layers_.size()) {
            elu_inplace(z);
        }
        cache.act.push_back(std::move(z));
    }
    return cache.act.back();
}

void Mlp::backward(const Cache& cache, const Eigen::MatrixXd& d_out, Mlp& grad) const {
    if (cache.act.size() != layers_.size() + 1) {
        throw std::invalid_argument("Mlp::backward: cache does not match network depth");
    }
    Eigen::MatrixXd delta = d_out;  // dL/d(pre-activation) of the current layer
    for (std::size_t i = layers_.size(); i-- > 0;) {
        grad.layers_[i].W.noalias() += delta.transpose() * cache.act[i];
        grad.layers_[i].b += delta.colwise().sum().transpose();
        if (i > 0) {
            Eigen::MatrixXd d_act = delta * layers_[i].W;
            delta = d_act.cwiseProduct(elu_grad_from_output(cache.act[i]));
        }
    }
}

Eigen::Index Mlp::param_count() const {
    Eigen::Index n = 0;
    for (const Layer& layer : layers_) {
        n += layer.W.size() + layer.b.size();
    }
    return n;
}

void Mlp::copy_to(double* dst) const {
    for (const Layer& layer : layers_) {
        for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.W.cols(); ++c) {
                *dst++ = layer.W(r, c);
            }
        }
        for (Eigen::Index r = 0; r < layer.b.size(); ++r) {
            *dst++ = layer.b(r);
        }
    }
}

void Mlp::copy_from(const double* src) {
    for (Layer& layer : layers_) {
        for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.W.cols(); ++c) {
                layer.W(r, c) = *src++;
            }
        }
        for (Eigen::Index r = 0; r < layer.b.size(); ++r) {
            layer.b(r) = *src++;
        }
    }
}

void Mlp::set_zero() {
    for (Layer& layer : layers_) {
        layer.W.setZero();
        layer.b.setZero();
    }
}

bool Mlp::all_finite() const {
    for (const Layer& layer : layers_) {
        if (!layer.W.allFinite() || !layer.b.allFinite()) {
            return false;
        }
    }
    return true;
}

Adam::Adam(Eigen::Index n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.setZero(n);
    v_.setZero(n);
}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
        throw std::invalid_argument("Adam::step: parameter size mismatch");
    }
    t_ += 1;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params -= (lr_ / bc1) * m_.cwiseQuotient(((v_ / bc2).cwiseSqrt().array() + eps_).matrix());
}

}  // namespace seqnav
