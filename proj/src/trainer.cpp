#include "deepsum/trainer.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "deepsum/dcov.hpp"
#include "deepsum/error.hpp"
#include "deepsum/rng.hpp"

namespace deepsum {

namespace {

enum SeedStream : std::uint64_t { kEncoderInit = 100, kOuterBase = 1000 };

std::uint64_t step_seed(std::uint64_t seed, std::size_t outer, std::size_t k, std::uint64_t purpose) {
    return derive_seed(derive_seed(derive_seed(seed, kOuterBase + outer), k), purpose);
}

std::vector<std::size_t> encoder_widths(std::size_t in, std::size_t out, const TrainConfig& cfg) {
    std::vector<std::size_t> w{in};
    w.insert(w.end(), cfg.encoder_hidden.begin(), cfg.encoder_hidden.end());
    w.push_back(out);
    return w;
}

void check_compatible(const MultimodalDataset& data, const TrainConfig& cfg) {
    if (cfg.num_modalities() != data.num_modalities())
        throw ConfigError("train config describes " + std::to_string(cfg.num_modalities()) +
                          " modalities, dataset has " + std::to_string(data.num_modalities()));
}

}  // namespace

TrainConfig TrainConfig::defaults(std::size_t K) {
    TrainConfig c;
    c.latent_dims.assign(K, 5);
    c.lambda.assign(K, 1.0);
    c.push_step.assign(K, 0.2);
    c.disc.lr = 1e-2;
    c.xi = Matrix(K, K, 1.0);
    for (std::size_t k = 0; k < K; ++k) c.xi(k, k) = 0.0;
    return c;
}

void TrainConfig::validate() const {
    const std::size_t K = latent_dims.size();
    if (K == 0) throw ConfigError("train config: no modalities");
    if (lambda.size() != K || push_step.size() != K || xi.rows() != K || xi.cols() != K)
        throw ConfigError("train config: per-modality parameter lists have inconsistent lengths");
    if (!frozen.empty() && frozen.size() != K) throw ConfigError("train config: frozen mask length");
    for (std::size_t k = 0; k < K; ++k) {
        if (latent_dims[k] < 1) throw ConfigError("train config: latent dimension must be >= 1");
        if (!(lambda[k] >= 0.0)) throw ConfigError("train config: lambda must be >= 0");
        if (!(push_step[k] > 0.0)) throw ConfigError("train config: push step must be > 0");
        for (std::size_t l = 0; l < K; ++l) {
            if (!(xi(k, l) >= 0.0)) throw ConfigError("train config: xi must be >= 0");
            if (xi(k, l) != xi(l, k)) throw ConfigError("train config: xi must be symmetric");
        }
    }
    if (batch < 2) throw ConfigError("train config: batch size must be >= 2");
    if (!(lr > 0.0)) throw ConfigError("train config: learning rate must be > 0");
    for (auto w : encoder_hidden)
        if (w == 0) throw ConfigError("train config: zero encoder width");
}

EncoderBank init_encoders(const MultimodalDataset& data, const TrainConfig& cfg) {
    check_compatible(data, cfg);
    EncoderBank bank;
    const std::uint64_t base = derive_seed(cfg.seed, kEncoderInit);
    for (std::size_t k = 0; k < data.num_modalities(); ++k)
        bank.encoders.push_back(mlp_init(
            encoder_widths(data.modalities[k].cols(), cfg.latent_dims[k], cfg), derive_seed(base, k)));
    return bank;
}

TrainState init_state(const MultimodalDataset& data, const TrainConfig& cfg) {
    TrainState st;
    st.bank = init_encoders(data, cfg);
    for (const auto& e : st.bank.encoders) st.opt.emplace_back(e.params.size(), AdamConfig{.lr = cfg.lr});
    return st;
}

RepresentationSet encode_all(const EncoderBank& bank, const MultimodalDataset& data) {
    if (bank.encoders.size() != data.num_modalities())
        throw ShapeError("encode_all: encoder count does not match modality count");
    RepresentationSet out;
    for (std::size_t k = 0; k < bank.encoders.size(); ++k)
        out.reps.push_back(mlp_forward(bank.encoders[k], data.modalities[k]));
    return out;
}

ObjectiveBreakdown objective_from_reps(const RepresentationSet& reps, const Matrix& response,
                                       const std::vector<ParticleSet>& pushed,
                                       const TrainConfig& cfg) {
    const std::size_t K = reps.reps.size();
    if (pushed.size() != K) throw ShapeError("objective: one particle set per modality required");
    ObjectiveBreakdown ob;
    ob.dependence.resize(K);
    ob.matching.resize(K);
    ob.cross = Matrix(K, K);
    for (std::size_t k = 0; k < K; ++k) {
        const Matrix& r = reps.reps[k];
        const Matrix& z = pushed[k].particles;
        if (z.rows() != r.rows() || z.cols() != r.cols())
            throw ShapeError("objective: pushed particles do not match representation " + std::to_string(k));
        ob.dependence[k] = dcov_v(r, response).value;
        double sq = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double t = r.flat()[i] - z.flat()[i];
            sq += t * t;
        }
        ob.matching[k] = cfg.lambda[k] * sq / static_cast<double>(r.rows());
        ob.total += -ob.dependence[k] + ob.matching[k];
    }
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = k + 1; l < K; ++l) {
            ob.cross(k, l) = dcov_v(reps.reps[k], reps.reps[l]).value;
            ob.cross_total += cfg.xi(k, l) * ob.cross(k, l);
        }
    ob.total += ob.cross_total;
    return ob;
}

ObjectiveBreakdown empirical_objective(const EncoderBank& bank, const MultimodalDataset& data,
                                       const std::vector<ParticleSet>& pushed,
                                       const TrainConfig& cfg) {
    return objective_from_reps(encode_all(bank, data), data.response, pushed, cfg);
}

void update_modality(std::size_t k, EncoderBank& bank, AdamState& opt,
                     const MultimodalDataset& data, const ParticleSet& pushed_k,
                     const RepresentationSet& frozen_reps, const TrainConfig& cfg,
                     std::uint64_t seed) {
    const std::size_t K = data.num_modalities();
    const std::size_t n = data.num_samples();
    Mlp& enc = bank.encoders.at(k);
    if (pushed_k.particles.rows() != n || pushed_k.particles.cols() != enc.output_dim())
        throw ShapeError("update_modality: pushed particles shape mismatch for modality " + std::to_string(k));
    if (frozen_reps.reps.size() != K) throw ShapeError("update_modality: frozen representations incomplete");

    Rng rng(seed);
    std::vector<std::size_t> order = rng.permutation(n);
    std::size_t pos = 0;
    const std::size_t bsz = std::min(cfg.batch, n);
    const double lam = cfg.lambda[k];
    MlpTape tape;

    for (std::size_t step = 0; step < cfg.inner_steps; ++step) {
        std::vector<std::size_t> idx(bsz);
        for (auto& i : idx) {
            if (pos == n) {
                order = rng.permutation(n);
                pos = 0;
            }
            i = order[pos++];
        }
        const Matrix xb = take_rows(data.modalities[k], idx);
        const Matrix yb = take_rows(data.response, idx);
        const Matrix zb = take_rows(pushed_k.particles, idx);
        const Matrix g = mlp_forward(enc, xb, tape);
        auto non_finite = [&] {
            return TrainingError("non-finite loss for modality " + std::to_string(k) + " at inner step " +
                                     std::to_string(step),
                                 static_cast<long>(step));
        };
        if (!g.all_finite()) throw non_finite();

        double loss = -dcov_v(g, yb).value;
        Matrix up = dcov_grad(g, yb);
        for (double& v : up.flat()) v = -v;

        double sq = 0.0;
        const double w = 2.0 * lam / static_cast<double>(bsz);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double t = g.flat()[i] - zb.flat()[i];
            sq += t * t;
            up.flat()[i] += w * t;
        }
        loss += lam * sq / static_cast<double>(bsz);

        for (std::size_t l = 0; l < K; ++l) {
            if (l == k || cfg.xi(k, l) == 0.0) continue;
            const Matrix rb = take_rows(frozen_reps.reps[l], idx);
            loss += cfg.xi(k, l) * dcov_v(g, rb).value;
            const Matrix gc = dcov_grad(g, rb);
            for (std::size_t i = 0; i < up.size(); ++i) up.flat()[i] += cfg.xi(k, l) * gc.flat()[i];
        }

        if (!std::isfinite(loss)) throw non_finite();
        const auto grads = mlp_backward(enc, tape, up);
        adam_step(opt, enc.params, grads.params);
    }
}

TrainResult train_deepsum(const MultimodalDataset& data, const TrainConfig& cfg,
                          std::optional<TrainState> resume, const OuterCallback& on_outer) {
    data.validate();
    cfg.validate();
    check_compatible(data, cfg);
    const std::size_t K = data.num_modalities();
    const std::size_t n = data.num_samples();

    TrainState st = resume ? std::move(*resume) : init_state(data, cfg);
    if (st.bank.encoders.size() != K || st.opt.size() != K)
        throw ConfigError("resume state does not match the dataset");
    for (std::size_t k = 0; k < K; ++k)
        if (st.bank.encoders[k].input_dim() != data.modalities[k].cols() ||
            st.bank.encoders[k].output_dim() != cfg.latent_dims[k])
            throw ShapeError("encoder " + std::to_string(k) + " does not match data/config dimensions");

    TrainResult res;
    RepresentationSet reps = encode_all(st.bank, data);
    if (!st.disc.empty() && st.disc.size() != K) throw ConfigError("resume state does not match the dataset");
    st.disc.resize(K);
    auto& last_disc = st.disc;
    std::vector<ParticleSet> pushed(K);
    for (std::size_t k = 0; k < K; ++k) pushed[k] = {reps.reps[k], k};

    for (std::size_t outer = st.outer_done; outer < cfg.outer_iters; ++outer) {
        OuterLogEntry entry;
        entry.outer = outer;
        entry.disc_loss.assign(K, std::numeric_limits<double>::quiet_NaN());
        for (std::size_t k = 0; k < K; ++k) {
            if (cfg.is_frozen(k)) {
                pushed[k] = {reps.reps[k], k};
                continue;
            }
            ParticleSet particles{reps.reps[k], k};
            const auto ref = draw_reference(n, cfg.latent_dims[k], step_seed(cfg.seed, outer, k, 0));
            DiscriminatorConfig dcfg = cfg.disc;
            dcfg.seed = step_seed(cfg.seed, outer, k, 1);
            const auto fit = train_discriminator(
                particles, ref, dcfg, cfg.warm_start_disc ? last_disc[k] : std::nullopt);
            entry.disc_loss[k] = fit.final_loss;
            last_disc[k] = fit.disc;
            for (std::size_t p = 0; p < cfg.pushes_per_iter; ++p)
                particles = push_particles(fit.disc, particles, cfg.push_step[k]);
            pushed[k] = particles;

            update_modality(k, st.bank, st.opt[k], data, pushed[k], reps, cfg,
                            step_seed(cfg.seed, outer, k, 2));
            reps.reps[k] = mlp_forward(st.bank.encoders[k], data.modalities[k]);
            if (!reps.reps[k].all_finite())
                throw TrainingError("encoder " + std::to_string(k) + " produced non-finite output",
                                    static_cast<long>(outer));
        }
        if (cfg.log_objective) entry.objective = objective_from_reps(reps, data.response, pushed, cfg);
        st.outer_done = outer + 1;
        if (on_outer) on_outer(entry);
        res.log.push_back(std::move(entry));
    }

    res.bank = st.bank;
    res.reps = std::move(reps);
    res.state = std::move(st);
    return res;
}

}  // namespace deepsum
