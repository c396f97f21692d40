#include "seqnav/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace seqnav {

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'Q', 'N', 'V', 'C', 'K', 'P', 'T'};

void write_bytes(std::ofstream& out, const void* data, std::size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

template <typename T>
void write_pod(std::ofstream& out, T value) {
    write_bytes(out, &value, sizeof(T));
}

void read_bytes(std::ifstream& in, void* data, std::size_t n) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (!in) {
        throw std::runtime_error("checkpoint: truncated file");
    }
}

template <typename T>
T read_pod(std::ifstream& in) {
    T value;
    read_bytes(in, &value, sizeof(T));
    return value;
}

void write_matrix(std::ofstream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            write_pod(out, m(r, c));
        }
    }
}

void read_matrix(std::ifstream& in, Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = read_pod<double>(in);
        }
    }
}

void write_vector(std::ofstream& out, const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        write_pod(out, v(i));
    }
}

Eigen::VectorXd read_vector(std::ifstream& in, Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = read_pod<double>(in);
    }
    return v;
}

void write_mlp_shapes(std::ofstream& out, const Mlp& mlp) {
    for (const Mlp::Layer& layer : mlp.layers()) {
        write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(layer.W.rows()));
        write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(layer.W.cols()));
        write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(layer.b.size()));
        write_pod<std::uint32_t>(out, 1u);
    }
}

std::vector<Eigen::Index> read_mlp_sizes(std::ifstream& in, std::uint32_t n_tensors) {
    if (n_tensors == 0 || n_tensors % 2 != 0) {
        throw std::runtime_error("checkpoint: malformed shape table");
    }
    std::vector<Eigen::Index> sizes;
    for (std::uint32_t t = 0; t < n_tensors; t += 2) {
        const auto w_rows = read_pod<std::uint32_t>(in);
        const auto w_cols = read_pod<std::uint32_t>(in);
        const auto b_rows = read_pod<std::uint32_t>(in);
        const auto b_cols = read_pod<std::uint32_t>(in);
        if (b_rows != w_rows || b_cols != 1) {
            throw std::runtime_error("checkpoint: bias shape inconsistent with weights");
        }
        if (t == 0) {
            sizes.push_back(static_cast<Eigen::Index>(w_cols));
        } else if (sizes.back() != static_cast<Eigen::Index>(w_cols)) {
            throw std::runtime_error("checkpoint: layer shapes do not chain");
        }
        sizes.push_back(static_cast<Eigen::Index>(w_rows));
    }
    return sizes;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("checkpoint: cannot open for writing: " + path);
    }
    write_bytes(out, kMagic, sizeof(kMagic));
    write_pod<std::uint32_t>(out, Checkpoint::kVersion);
    write_pod<std::uint64_t>(out, ckpt.config_hash);
    write_pod<std::uint64_t>(out, ckpt.seed);
    write_pod<std::uint64_t>(out, ckpt.iteration);

    const auto act_dim = static_cast<std::uint32_t>(ckpt.params.log_std.size());
    write_pod<std::uint32_t>(out,
                             static_cast<std::uint32_t>(ckpt.params.actor.layers().size() * 2));
    write_pod<std::uint32_t>(out,
                             static_cast<std::uint32_t>(ckpt.params.critic.layers().size() * 2));
    write_pod<std::uint32_t>(out, act_dim);
    write_mlp_shapes(out, ckpt.params.actor);
    write_mlp_shapes(out, ckpt.params.critic);

    for (const Mlp::Layer& layer : ckpt.params.actor.layers()) {
        write_matrix(out, layer.W);
        write_vector(out, layer.b);
    }
    for (const Mlp::Layer& layer : ckpt.params.critic.layers()) {
        write_matrix(out, layer.W);
        write_vector(out, layer.b);
    }
    write_vector(out, ckpt.params.log_std);

    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.norm_mean.size()));
    write_pod<double>(out, ckpt.norm_count);
    write_vector(out, ckpt.norm_mean);
    write_vector(out, ckpt.norm_m2);

    write_pod<std::uint8_t>(out, ckpt.train_state ? 1 : 0);
    if (ckpt.train_state) {
        const TrainState& ts = *ckpt.train_state;
        write_pod<std::uint64_t>(out, ts.adam_t);
        write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(ts.adam_m.size()));
        write_vector(out, ts.adam_m);
        write_vector(out, ts.adam_v);
        write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(ts.env.doubles.size()));
        for (double d : ts.env.doubles) {
            write_pod(out, d);
        }
        write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(ts.env.counters.size()));
        for (std::uint64_t c : ts.env.counters) {
            write_pod(out, c);
        }
    }
    out.flush();
    if (!out) {
        throw std::runtime_error("checkpoint: write failed: " + path);
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("checkpoint: cannot open: " + path);
    }
    char magic[8];
    read_bytes(in, magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("checkpoint: bad magic in " + path);
    }
    const auto version = read_pod<std::uint32_t>(in);
    if (version != Checkpoint::kVersion) {
        throw std::runtime_error("checkpoint: unsupported format version " +
                                 std::to_string(version));
    }

    Checkpoint ckpt;
    ckpt.config_hash = read_pod<std::uint64_t>(in);
    ckpt.seed = read_pod<std::uint64_t>(in);
    ckpt.iteration = read_pod<std::uint64_t>(in);

    const auto n_actor = read_pod<std::uint32_t>(in);
    const auto n_critic = read_pod<std::uint32_t>(in);
    const auto act_dim = read_pod<std::uint32_t>(in);
    const std::vector<Eigen::Index> actor_sizes = read_mlp_sizes(in, n_actor);
    const std::vector<Eigen::Index> critic_sizes = read_mlp_sizes(in, n_critic);

    ckpt.params.actor = Mlp(actor_sizes);
    ckpt.params.critic = Mlp(critic_sizes);
    for (Mlp::Layer& layer : ckpt.params.actor.layers()) {
        read_matrix(in, layer.W);
        layer.b = read_vector(in, layer.b.size());
    }
    for (Mlp::Layer& layer : ckpt.params.critic.layers()) {
        read_matrix(in, layer.W);
        layer.b = read_vector(in, layer.b.size());
    }
    ckpt.params.log_std = read_vector(in, static_cast<Eigen::Index>(act_dim));

    const auto obs_dim = read_pod<std::uint32_t>(in);
    ckpt.norm_count = read_pod<double>(in);
    ckpt.norm_mean = read_vector(in, static_cast<Eigen::Index>(obs_dim));
    ckpt.norm_m2 = read_vector(in, static_cast<Eigen::Index>(obs_dim));

    const auto has_train = read_pod<std::uint8_t>(in);
    if (has_train == 1) {
        TrainState ts;
        ts.adam_t = read_pod<std::uint64_t>(in);
        const auto plen = read_pod<std::uint64_t>(in);
        ts.adam_m = read_vector(in, static_cast<Eigen::Index>(plen));
        ts.adam_v = read_vector(in, static_cast<Eigen::Index>(plen));
        const auto nd = read_pod<std::uint64_t>(in);
        ts.env.doubles.resize(nd);
        for (double& d : ts.env.doubles) {
            d = read_pod<double>(in);
        }
        const auto nc = read_pod<std::uint64_t>(in);
        ts.env.counters.resize(nc);
        for (std::uint64_t& c : ts.env.counters) {
            c = read_pod<std::uint64_t>(in);
        }
        ckpt.train_state = std::move(ts);
    } else if (has_train != 0) {
        throw std::runtime_error("checkpoint: malformed training-state flag");
    }
    return ckpt;
}

}  // namespace seqnav
