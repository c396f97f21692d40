#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "seqnav/rng.hpp"

namespace seqnav {

/// Fully connected network with ELU hidden activations and a linear head.
/// Batches are row-major (one sample per row). Gradients come from a
/// hand-rolled backward pass so the whole dependency surface stays Eigen.
class Mlp {
public:
    struct Layer {
        Eigen::MatrixXd W;  // out x in
        Eigen::VectorXd b;  // out
    };

    /// Post-activation values per layer; entry 0 is the input batch. ELU's
    /// derivative is recoverable from its output, so nothing else is cached.
    struct Cache {
        std::vector<Eigen::MatrixXd> act;
    };

    Mlp() = default;
    /// sizes = {input, hidden..., output}
    explicit Mlp(const std::vector<Eigen::Index>& sizes);

    /// He-scaled normal weights, zero biases; the head is scaled by
    /// head_gain so initial outputs start near zero when it is small.
    void init(RngStream& rng, double head_gain = 1.0);

    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache& cache) const;

    /// Accumulate parameter gradients for dL/dY into grad (same topology).
    void backward(const Cache& cache, const Eigen::MatrixXd& d_out, Mlp& grad) const;

    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }
    const std::vector<Eigen::Index>& sizes() const { return sizes_; }
    Eigen::Index input_dim() const { return sizes_.front(); }
    Eigen::Index output_dim() const { return sizes_.back(); }

    Eigen::Index param_count() const;
    void copy_to(double* dst) const;
    void copy_from(const double* src);
    void set_zero();
    bool all_finite() const;

private:
    std::vector<Eigen::Index> sizes_;
    std::vector<Layer> layers_;
};

/// Adam with bias correction over one flat parameter vector.
class Adam {
public:
    Adam(Eigen::Index n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }
    std::uint64_t t() const { return t_; }
    const Eigen::VectorXd& m() const { return m_; }
    const Eigen::VectorXd& v() const { return v_; }
    Eigen::VectorXd& m() { return m_; }
    Eigen::VectorXd& v() { return v_; }
    void set_t(std::uint64_t t) { t_ = t; }

private:
    double lr_;
    double beta1_;
    double beta2_;
    double eps_;
    std::uint64_t t_ = 0;
    Eigen::VectorXd m_;
    Eigen::VectorXd v_;
};

}  // namespace seqnav
