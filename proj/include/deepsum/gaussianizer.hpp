#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "deepsum/matrix.hpp"
#include "deepsum/mlp.hpp"

namespace deepsum {

// Scalar-output network separating latent particles (low output) from
// standard-normal reference draws (high output). At the optimum of the
// logistic objective, D(z) = log(gamma(z) / mu(z)).
struct Discriminator {
    Mlp net;
};

struct ParticleSet {
    Matrix particles;  // n x d
    std::size_t modality = 0;
};

struct ReferenceSample {
    Matrix w;  // n x d, iid N(0, I)
    std::uint64_t seed = 0;
};

struct DiscriminatorConfig {
    std::vector<std::size_t> hidden{16, 8};
    std::size_t steps = 200;
    double lr = 1e-3;
    std::size_t batch = 128;
    std::uint64_t seed = 0;
};

struct DiscriminatorFit {
    Discriminator disc;
    double initial_loss = 0.0;  // full-data logistic loss before training
    double final_loss = 0.0;
    bool retried = false;       // first attempt did not reduce the loss; reran at lr / 10
    bool improved = true;       // training lowered the loss; otherwise the initial net is returned
};

ReferenceSample draw_reference(std::size_t n, std::size_t d, std::uint64_t seed);

Discriminator make_discriminator(std::size_t dim, const DiscriminatorConfig& cfg);

// (1/n) sum softplus(D(Z_i)) + (1/m) sum softplus(-D(W_i))
double discriminator_loss(const Discriminator& disc, const Matrix& particles, const Matrix& reference);

// Adam on minibatches of the logistic objective. `warm` replaces the fresh
// initialisation when given.
DiscriminatorFit train_discriminator(const ParticleSet& particles, const ReferenceSample& reference,
                                     const DiscriminatorConfig& cfg,
                                     const std::optional<Discriminator>& warm = std::nullopt);

// exp(-D(z)), with D clamped to [-30, 30].
std::vector<double> density_ratio(const Discriminator& disc, const Matrix& z);

// Residual map for f(x) = x log x:  T(z) = z - s grad f'(r(z)) = z + s grad D(z).
ParticleSet push_particles(const Discriminator& disc, const ParticleSet& particles, double step);

}  // namespace deepsum
