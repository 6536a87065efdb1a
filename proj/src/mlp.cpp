#include "viewbias/mlp.hpp"

#include <cmath>

#include "viewbias/error.hpp"
#include "viewbias/rng.hpp"

namespace viewbias {

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) {
        throw Error(ErrorCode::kInvalidArgument, "an MLP needs at least an input and an output size");
    }
    Eigen::Index offset = 0;
    for (int l = 0; l < num_layers(); ++l) {
        if (sizes_[l] < 1 || sizes_[l + 1] < 1) {
            throw Error(ErrorCode::kInvalidArgument, "layer sizes must be positive");
        }
        weight_offset_.push_back(offset);
        offset += static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l];
        bias_offset_.push_back(offset);
        offset += sizes_[l + 1];
    }
    params_ = Eigen::VectorXd::Zero(offset);
}

void Mlp::init(uint64_t seed) {
    Rng rng(seed);
    params_.setZero();
    for (int l = 0; l < num_layers(); ++l) {
        const double stddev = std::sqrt(2.0 / sizes_[l]);
        MatrixMap w = weight(l, params_);
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            for (Eigen::Index r = 0; r < w.rows(); ++r) {
                w(r, c) = rng.normal(0.0, stddev);
            }
        }
    }
}

Mlp::ConstMatrixMap Mlp::weight(int layer) const {
    return ConstMatrixMap(params_.data() + weight_offset_[layer], sizes_[layer + 1], sizes_[layer]);
}

Mlp::ConstVectorMap Mlp::bias(int layer) const {
    return ConstVectorMap(params_.data() + bias_offset_[layer], sizes_[layer + 1]);
}

Mlp::MatrixMap Mlp::weight(int layer, Eigen::VectorXd &storage) const {
    return MatrixMap(storage.data() + weight_offset_[layer], sizes_[layer + 1], sizes_[layer]);
}

Mlp::VectorMap Mlp::bias(int layer, Eigen::VectorXd &storage) const {
    return VectorMap(storage.data() + bias_offset_[layer], sizes_[layer + 1]);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd &input, Cache *cache) const {
    if (input.rows() != input_size()) {
        throw Error(ErrorCode::kShapeMismatch,
                    "input has " + std::to_string(input.rows()) + " rows, expected " + std::to_string(input_size()));
    }
    if (cache != nullptr) {
        cache->activations.clear();
        cache->activations.push_back(input);
    }
    Eigen::MatrixXd x = input;
    for (int l = 0; l < num_layers(); ++l) {
        // One matrix-vector product per column: results then do not depend on
        // batch composition (a GEMM reorders the sums by batch width).
        Eigen::MatrixXd z(weight(l).rows(), x.cols());
        for (Eigen::Index b = 0; b < x.cols(); ++b) {
            z.col(b).noalias() = weight(l) * x.col(b);
        }
        z.colwise() += bias(l);
        if (l + 1 < num_layers()) {
            z = z.cwiseMax(0.0);
        }
        if (cache != nullptr) {
            cache->activations.push_back(z);
        }
        x = std::move(z);
    }
    return x;
}

Eigen::VectorXd Mlp::backward(const Cache &cache, const Eigen::MatrixXd &grad_output, Eigen::MatrixXd *grad_input) const {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
    Eigen::MatrixXd delta = grad_output;
    for (int l = num_layers() - 1; l >= 0; --l) {
        if (l + 1 < num_layers()) {
            // Rectifier derivative, 0 at the kink.
            delta = (cache.activations[l + 1].array() > 0.0).select(delta, 0.0);
        }
        weight(l, grad).noalias() = delta * cache.activations[l].transpose();
        bias(l, grad) = delta.rowwise().sum();
        if (l > 0 || grad_input != nullptr) {
            Eigen::MatrixXd next(weight(l).cols(), delta.cols());
            for (Eigen::Index b = 0; b < delta.cols(); ++b) {
                next.col(b).noalias() = weight(l).transpose() * delta.col(b);
            }
            delta = std::move(next);
        }
    }
    if (grad_input != nullptr) {
        *grad_input = std::move(delta);
    }
    return grad;
}

Adam::Adam(Eigen::Index size, AdamOptions options)
    : options_(options), m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {}

void Adam::step(Eigen::VectorXd &params, const Eigen::VectorXd &grad, double learning_rate) {
    ++t_;
    m_ = options_.beta1 * m_ + (1.0 - options_.beta1) * grad;
    v_ = options_.beta2 * v_ + (1.0 - options_.beta2) * grad.cwiseAbs2();
    const double bias1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
    const double bias2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
    params.array() -= learning_rate * (m_.array() / bias1) / ((v_.array() / bias2).sqrt() + options_.epsilon);
}

} // namespace viewbias
