#pragma once

#include <span>
#include <vector>

namespace deepsum {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    long step = 0;
    std::vector<double> m;
    std::vector<double> v;

    AdamState() = default;
    AdamState(std::size_t n, AdamConfig c = {});
};

// Bias-corrected Adam update in place. Throws TrainingError (carrying the step
// index about to be taken) if any gradient entry is non-finite; nothing is
// modified in that case.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

}  // namespace deepsum
