#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "deepsum/matrix.hpp"

namespace deepsum {

/// Fully connected network: ReLU on hidden layers, identity on the output layer.
///
/// All parameters live in one flat buffer so optimizers can treat the net as a
/// single vector. Layer l occupies [W_l (in x out, row-major), b_l (out)].
struct Mlp {
    std::vector<std::size_t> widths;  // input, hidden..., output
    std::vector<double> params;

    std::size_t num_layers() const noexcept { return widths.size() - 1; }
    std::size_t input_dim() const noexcept { return widths.front(); }
    std::size_t output_dim() const noexcept { return widths.back(); }

    std::size_t weight_offset(std::size_t layer) const noexcept;
    std::size_t bias_offset(std::size_t layer) const noexcept {
        return weight_offset(layer) + widths[layer] * widths[layer + 1];
    }

    friend bool operator==(const Mlp&, const Mlp&) = default;
};

// Sum over layers of (in + 1) * out.
std::size_t mlp_param_count(std::span<const std::size_t> widths);

// He-normal weights (std = sqrt(2 / fan_in)) and zero biases.
Mlp mlp_init(std::span<const std::size_t> widths, std::uint64_t seed);
Mlp mlp_zeros(std::span<const std::size_t> widths);

// Layer-wise activations retained for the backward pass. acts[0] is the input.
struct MlpTape {
    std::vector<Matrix> acts;
};

Matrix mlp_forward(const Mlp& net, const Matrix& input);
Matrix mlp_forward(const Mlp& net, const Matrix& input, MlpTape& tape);

struct MlpGradients {
    std::vector<double> params;  // same layout as Mlp::params
    Matrix input;                // d(loss)/d(input), n x p
};

// Gradients of sum_ij upstream_ij * output_ij. ReLU'(0) is taken as 0.
MlpGradients mlp_backward(const Mlp& net, const Matrix& input, const Matrix& upstream);
MlpGradients mlp_backward(const Mlp& net, const MlpTape& tape, const Matrix& upstream);

}  // namespace deepsum
