#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace viewbias {

/// Fully connected network with rectifier activations on every hidden layer
/// and a linear output layer. All weights and biases live in one flat vector
/// so optimizers and checkpoints can treat them uniformly. Batches are
/// column-major: one sample per column.
class Mlp {
  public:
    Mlp() = default;
    explicit Mlp(std::vector<int> layer_sizes);

    // He-normal weights, zero biases.
    void init(uint64_t seed);

    const std::vector<int> &layer_sizes() const { return sizes_; }
    int input_size() const { return sizes_.front(); }
    int output_size() const { return sizes_.back(); }
    int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }

    Eigen::VectorXd &params() { return params_; }
    const Eigen::VectorXd &params() const { return params_; }
    Eigen::Index num_params() const { return params_.size(); }

    using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
    using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
    using VectorMap = Eigen::Map<Eigen::VectorXd>;
    using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

    ConstMatrixMap weight(int layer) const;
    ConstVectorMap bias(int layer) const;
    MatrixMap weight(int layer, Eigen::VectorXd &storage) const;
    VectorMap bias(int layer, Eigen::VectorXd &storage) const;

    struct Cache {
        // activations[0] is the input; activations[l + 1] the output of layer l.
        std::vector<Eigen::MatrixXd> activations;
    };

    Eigen::MatrixXd forward(const Eigen::MatrixXd &input, Cache *cache = nullptr) const;

    /// Gradient of sum(grad_output .* output) w.r.t. the flat parameters,
    /// using the cache from the matching forward call. The optional
    /// grad_input receives the gradient w.r.t. the input batch.
    Eigen::VectorXd backward(const Cache &cache, const Eigen::MatrixXd &grad_output,
                             Eigen::MatrixXd *grad_input = nullptr) const;

  private:
    std::vector<int> sizes_;
    std::vector<Eigen::Index> weight_offset_;
    std::vector<Eigen::Index> bias_offset_;
    Eigen::VectorXd params_;
};

struct AdamOptions {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

class Adam {
  public:
    Adam(Eigen::Index size, AdamOptions options);
    void step(Eigen::VectorXd &params, const Eigen::VectorXd &grad, double learning_rate);
    const AdamOptions &options() const { return options_; }

  private:
    AdamOptions options_;
    Eigen::VectorXd m_;
    Eigen::VectorXd v_;
    int64_t t_ = 0;
};

} // namespace viewbias
