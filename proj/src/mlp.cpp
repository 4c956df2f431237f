#include "deepsum/mlp.hpp"

#include <cmath>
#include <string>

#include "deepsum/error.hpp"
#include "deepsum/rng.hpp"

namespace deepsum {

namespace {

void check_widths(std::span<const std::size_t> widths) {
    if (widths.size() < 2) throw ConfigError("mlp needs at least an input and an output width");
    for (auto w : widths)
        if (w == 0) throw ConfigError("mlp layer widths must be positive");
}

// out = in * W + b, optionally followed by ReLU.
void dense_forward(const Matrix& in, const double* W, const double* b, bool relu, Matrix& out) {
    const std::size_t n = in.rows(), ni = in.cols(), no = out.cols();
    for (std::size_t r = 0; r < n; ++r) {
        double* o = &out(r, 0);
        for (std::size_t j = 0; j < no; ++j) o[j] = b[j];
        const double* x = &in(r, 0);
        for (std::size_t k = 0; k < ni; ++k) {
            const double xk = x[k];
            if (xk == 0.0) continue;
            const double* w = W + k * no;
            for (std::size_t j = 0; j < no; ++j) o[j] += xk * w[j];
        }
        if (relu)
            for (std::size_t j = 0; j < no; ++j) o[j] = o[j] > 0.0 ? o[j] : 0.0;
    }
}

}  // namespace

std::size_t Mlp::weight_offset(std::size_t layer) const noexcept {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layer; ++l) off += (widths[l] + 1) * widths[l + 1];
    return off;
}

std::size_t mlp_param_count(std::span<const std::size_t> widths) {
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) total += (widths[l] + 1) * widths[l + 1];
    return total;
}

Mlp mlp_zeros(std::span<const std::size_t> widths) {
    check_widths(widths);
    Mlp net;
    net.widths.assign(widths.begin(), widths.end());
    net.params.assign(mlp_param_count(widths), 0.0);
    return net;
}

Mlp mlp_init(std::span<const std::size_t> widths, std::uint64_t seed) {
    Mlp net = mlp_zeros(widths);
    Rng rng(seed);
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const double stddev = std::sqrt(2.0 / static_cast<double>(net.widths[l]));
        const std::size_t off = net.weight_offset(l);
        const std::size_t count = net.widths[l] * net.widths[l + 1];
        for (std::size_t i = 0; i < count; ++i) net.params[off + i] = stddev * rng.normal();
    }
    return net;
}

Matrix mlp_forward(const Mlp& net, const Matrix& input, MlpTape& tape) {
    if (input.cols() != net.input_dim())
        throw ShapeError("mlp_forward: input has " + std::to_string(input.cols()) +
                         " columns, network expects " + std::to_string(net.input_dim()));
    tape.acts.resize(net.num_layers() + 1);
    tape.acts[0] = input;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        Matrix out(input.rows(), net.widths[l + 1]);
        dense_forward(tape.acts[l], net.params.data() + net.weight_offset(l),
                      net.params.data() + net.bias_offset(l), l + 1 < net.num_layers(), out);
        tape.acts[l + 1] = std::move(out);
    }
    return tape.acts.back();
}

Matrix mlp_forward(const Mlp& net, const Matrix& input) {
    if (input.cols() != net.input_dim())
        throw ShapeError("mlp_forward: input has " + std::to_string(input.cols()) +
                         " columns, network expects " + std::to_string(net.input_dim()));
    Matrix cur = input;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        Matrix out(input.rows(), net.widths[l + 1]);
        dense_forward(cur, net.params.data() + net.weight_offset(l),
                      net.params.data() + net.bias_offset(l), l + 1 < net.num_layers(), out);
        cur = std::move(out);
    }
    return cur;
}

MlpGradients mlp_backward(const Mlp& net, const MlpTape& tape, const Matrix& upstream) {
    const std::size_t L = net.num_layers();
    if (tape.acts.size() != L + 1) throw ShapeError("mlp_backward: tape does not match network");
    const std::size_t n = tape.acts[0].rows();
    if (upstream.rows() != n || upstream.cols() != net.output_dim())
        throw ShapeError("mlp_backward: upstream gradient shape mismatch");

    MlpGradients g;
    g.params.assign(net.params.size(), 0.0);
    Matrix delta = upstream;  // gradient w.r.t. pre-activation of the current layer
    for (std::size_t l = L; l-- > 0;) {
        const Matrix& in = tape.acts[l];
        const std::size_t ni = net.widths[l], no = net.widths[l + 1];
        double* dW = g.params.data() + net.weight_offset(l);
        double* db = g.params.data() + net.bias_offset(l);
        const double* W = net.params.data() + net.weight_offset(l);
        Matrix dIn(n, ni);
        for (std::size_t r = 0; r < n; ++r) {
            const double* d = &delta(r, 0);
            const double* x = &in(r, 0);
            for (std::size_t j = 0; j < no; ++j) db[j] += d[j];
            double* dx = &dIn(r, 0);
            for (std::size_t k = 0; k < ni; ++k) {
                const double* w = W + k * no;
                double* dw = dW + k * no;
                const double xk = x[k];
                double acc = 0.0;
                for (std::size_t j = 0; j < no; ++j) {
                    dw[j] += xk * d[j];
                    acc += w[j] * d[j];
                }
                dx[k] = acc;
            }
        }
        if (l > 0) {
            // through the ReLU that produced `in`; zero where the unit was not active
            for (std::size_t i = 0; i < dIn.size(); ++i)
                if (!(in.flat()[i] > 0.0)) dIn.flat()[i] = 0.0;
        }
        delta = std::move(dIn);
    }
    g.input = std::move(delta);
    return g;
}

MlpGradients mlp_backward(const Mlp& net, const Matrix& input, const Matrix& upstream) {
    MlpTape tape;
    mlp_forward(net, input, tape);
    return mlp_backward(net, tape, upstream);
}

}  // namespace deepsum
