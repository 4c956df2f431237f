#include "deepsum/adam.hpp"

#include <cmath>
#include <string>

#include "deepsum/error.hpp"

namespace deepsum {

AdamState::AdamState(std::size_t n, AdamConfig c) : cfg(c), m(n, 0.0), v(n, 0.0) {
    if (!(c.lr > 0.0)) throw ConfigError("adam learning rate must be positive");
}

void adam_step(AdamState& s, std::span<double> params, std::span<const double> grads) {
    if (params.size() != grads.size() || params.size() != s.m.size())
        throw ShapeError("adam_step: parameter/gradient/state sizes differ");
    for (std::size_t i = 0; i < grads.size(); ++i)
        if (!std::isfinite(grads[i]))
            throw TrainingError("non-finite gradient at adam step " + std::to_string(s.step + 1),
                                s.step + 1);

    ++s.step;
    const double b1 = s.cfg.beta1, b2 = s.cfg.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(s.step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(s.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        s.m[i] = b1 * s.m[i] + (1.0 - b1) * g;
        s.v[i] = b2 * s.v[i] + (1.0 - b2) * g * g;
        const double mhat = s.m[i] / c1;
        const double vhat = s.v[i] / c2;
        params[i] -= s.cfg.lr * mhat / (std::sqrt(vhat) + s.cfg.eps);
    }
}

}  // namespace deepsum
