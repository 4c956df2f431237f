#include "deepsum/gaussianizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deepsum/adam.hpp"
#include "deepsum/error.hpp"
#include "deepsum/rng.hpp"

namespace deepsum {

namespace {

// log(1 + e^x) without overflow
inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Cycles through shuffled indices, reshuffling at the end of each pass.
class BatchSampler {
public:
    BatchSampler(std::size_t n, Rng& rng) : n_(n), rng_(rng) { reshuffle(); }
    std::vector<std::size_t> next(std::size_t batch) {
        std::vector<std::size_t> idx;
        idx.reserve(batch);
        while (idx.size() < std::min(batch, n_)) {
            if (pos_ == order_.size()) reshuffle();
            idx.push_back(order_[pos_++]);
        }
        return idx;
    }

private:
    void reshuffle() {
        order_ = rng_.permutation(n_);
        pos_ = 0;
    }
    std::size_t n_;
    Rng& rng_;
    std::vector<std::size_t> order_;
    std::size_t pos_ = 0;
};

Discriminator run_adam(Discriminator disc, const Matrix& z, const Matrix& w,
                       const DiscriminatorConfig& cfg, double lr, std::uint64_t seed) {
    Rng rng(seed);
    BatchSampler zs(z.rows(), rng), ws(w.rows(), rng);
    AdamState opt(disc.net.params.size(), AdamConfig{.lr = lr});
    MlpTape tz, tw;
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        const Matrix zb = take_rows(z, zs.next(cfg.batch));
        const Matrix wb = take_rows(w, ws.next(cfg.batch));
        const Matrix dz = mlp_forward(disc.net, zb, tz);
        const Matrix dw = mlp_forward(disc.net, wb, tw);
        Matrix gz(zb.rows(), 1), gw(wb.rows(), 1);
        const double inv_z = 1.0 / static_cast<double>(zb.rows());
        const double inv_w = 1.0 / static_cast<double>(wb.rows());
        for (std::size_t i = 0; i < zb.rows(); ++i) gz(i, 0) = sigmoid(dz(i, 0)) * inv_z;
        for (std::size_t i = 0; i < wb.rows(); ++i) gw(i, 0) = -sigmoid(-dw(i, 0)) * inv_w;
        auto g1 = mlp_backward(disc.net, tz, gz);
        const auto g2 = mlp_backward(disc.net, tw, gw);
        for (std::size_t i = 0; i < g1.params.size(); ++i) g1.params[i] += g2.params[i];
        adam_step(opt, disc.net.params, g1.params);
    }
    return disc;
}

}  // namespace

ReferenceSample draw_reference(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    return {rng.normal_matrix(n, d), seed};
}

Discriminator make_discriminator(std::size_t dim, const DiscriminatorConfig& cfg) {
    std::vector<std::size_t> widths{dim};
    widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
    widths.push_back(1);
    return {mlp_init(widths, derive_seed(cfg.seed, 0))};
}

double discriminator_loss(const Discriminator& disc, const Matrix& particles, const Matrix& reference) {
    const Matrix dz = mlp_forward(disc.net, particles);
    const Matrix dw = mlp_forward(disc.net, reference);
    double lz = 0.0, lw = 0.0;
    for (double v : dz.flat()) lz += softplus(v);
    for (double v : dw.flat()) lw += softplus(-v);
    return lz / static_cast<double>(dz.rows()) + lw / static_cast<double>(dw.rows());
}

DiscriminatorFit train_discriminator(const ParticleSet& particles, const ReferenceSample& reference,
                                     const DiscriminatorConfig& cfg,
                                     const std::optional<Discriminator>& warm) {
    const Matrix& z = particles.particles;
    const Matrix& w = reference.w;
    if (z.cols() != w.cols()) throw ShapeError("train_discriminator: particle/reference dims differ");
    if (z.rows() == 0 || w.rows() == 0) throw DataError("train_discriminator: empty sample");
    if (!z.all_finite()) throw DataError("train_discriminator: non-finite particles");

    DiscriminatorFit fit;
    const Discriminator init = warm ? *warm : make_discriminator(z.cols(), cfg);
    if (init.net.input_dim() != z.cols() || init.net.output_dim() != 1)
        throw ShapeError("train_discriminator: discriminator shape does not match particles");
    fit.initial_loss = discriminator_loss(init, z, w);
    if (cfg.steps == 0) {
        fit.disc = init;
        fit.final_loss = fit.initial_loss;
        return fit;
    }

    fit.disc = run_adam(init, z, w, cfg, cfg.lr, derive_seed(cfg.seed, 1));
    fit.final_loss = discriminator_loss(fit.disc, z, w);
    if (!std::isfinite(fit.final_loss) || fit.final_loss > fit.initial_loss) {
        fit.retried = true;
        fit.disc = run_adam(init, z, w, cfg, cfg.lr / 10.0, derive_seed(cfg.seed, 2));
        fit.final_loss = discriminator_loss(fit.disc, z, w);
    }
    if (!std::isfinite(fit.final_loss))
        throw TrainingError("discriminator loss diverged", static_cast<long>(cfg.steps));
    fit.improved = fit.final_loss <= fit.initial_loss;
    if (!fit.improved) {
        fit.disc = init;
        fit.final_loss = fit.initial_loss;
    }
    return fit;
}

std::vector<double> density_ratio(const Discriminator& disc, const Matrix& z) {
    const Matrix d = mlp_forward(disc.net, z);
    std::vector<double> r(d.rows());
    for (std::size_t i = 0; i < d.rows(); ++i) r[i] = std::exp(-std::clamp(d(i, 0), -30.0, 30.0));
    return r;
}

ParticleSet push_particles(const Discriminator& disc, const ParticleSet& particles, double step) {
    if (!(step >= 0.0)) throw ConfigError("push_particles: step size must be non-negative");
    ParticleSet out = particles;
    if (step == 0.0) return out;
    const Matrix& z = particles.particles;
    const Matrix ones(z.rows(), 1, 1.0);
    const auto g = mlp_backward(disc.net, z, ones);
    for (std::size_t i = 0; i < z.rows(); ++i)
        for (std::size_t c = 0; c < z.cols(); ++c) {
            const double gi = g.input(i, c);
            if (!std::isfinite(gi))
                throw NumericError("push_particles: non-finite discriminator gradient at particle " +
                                   std::to_string(i));
            out.particles(i, c) += step * gi;
        }
    return out;
}

}  // namespace deepsum
