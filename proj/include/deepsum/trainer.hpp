#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "deepsum/adam.hpp"
#include "deepsum/dataset.hpp"
#include "deepsum/gaussianizer.hpp"
#include "deepsum/matrix.hpp"
#include "deepsum/mlp.hpp"

namespace deepsum {

/// Block-coordinate trainer for per-modality sufficient representations.
///
/// Each outer iteration visits the modalities in order. For modality k the
/// current latent particles Z_k = g_k(X_k) are pushed once towards N(0, I) by
/// a discriminator (warm-started from the previous outer iteration by default),
/// then g_k takes `inner_steps` Adam steps on
///
///     -V(g_k(X_k), Y) + (lambda_k / |B|) sum_B |g_k(X_i) - Z_ik|^2
///                     + sum_{l != k} xi_kl V(g_k(X_k), g_l(X_l))
///
/// over minibatches B, with every other encoder held fixed. V is the
/// V-statistic distance covariance.
struct TrainConfig {
    std::vector<std::size_t> latent_dims;  // d_k
    std::vector<double> lambda;            // normality weight per modality
    Matrix xi;                             // K x K symmetric independence weights, diagonal ignored
    std::vector<double> push_step;         // s_k
    std::vector<bool> frozen;              // encoders excluded from updates (may be empty)

    std::vector<std::size_t> encoder_hidden{32, 16, 8};
    std::size_t outer_iters = 50;
    std::size_t inner_steps = 50;
    std::size_t batch = 128;
    double lr = 3e-3;
    std::size_t pushes_per_iter = 1;
    DiscriminatorConfig disc{};  // disc.seed is overridden per (outer, k)
    bool warm_start_disc = true;
    bool log_objective = true;     // full-data objective after each outer iteration
    std::uint64_t seed = 0;

    // Defaults for K modalities: d = 5, lambda = 1, xi = 1, s = 0.2, discriminator lr 1e-2.
    static TrainConfig defaults(std::size_t K);
    std::size_t num_modalities() const noexcept { return latent_dims.size(); }
    bool is_frozen(std::size_t k) const noexcept { return k < frozen.size() && frozen[k]; }
    void validate() const;
};

struct EncoderBank {
    std::vector<Mlp> encoders;
    friend bool operator==(const EncoderBank&, const EncoderBank&) = default;
};

struct RepresentationSet {
    std::vector<Matrix> reps;
};

struct ObjectiveBreakdown {
    double total = 0.0;
    std::vector<double> dependence;  // V(rep_k, Y)
    std::vector<double> matching;    // (lambda_k / n) sum |rep_k - Z_k|^2
    Matrix cross;                    // V(rep_k, rep_l) for k < l (upper triangle)
    double cross_total = 0.0;        // sum_{k<l} xi_kl V(rep_k, rep_l)
};

struct OuterLogEntry {
    std::size_t outer = 0;
    std::vector<double> disc_loss;  // final discriminator loss per modality (NaN when frozen)
    std::optional<ObjectiveBreakdown> objective;
};

// Encoders, optimizer moments and warm-start discriminators: everything
// needed to resume training exactly.
struct TrainState {
    EncoderBank bank;
    std::vector<AdamState> opt;
    std::vector<std::optional<Discriminator>> disc;  // empty or one slot per modality
    std::size_t outer_done = 0;
};

struct TrainResult {
    EncoderBank bank;
    RepresentationSet reps;
    std::vector<OuterLogEntry> log;
    TrainState state;
};

EncoderBank init_encoders(const MultimodalDataset& data, const TrainConfig& cfg);
TrainState init_state(const MultimodalDataset& data, const TrainConfig& cfg);

RepresentationSet encode_all(const EncoderBank& bank, const MultimodalDataset& data);

ObjectiveBreakdown empirical_objective(const EncoderBank& bank, const MultimodalDataset& data,
                                       const std::vector<ParticleSet>& pushed,
                                       const TrainConfig& cfg);
ObjectiveBreakdown objective_from_reps(const RepresentationSet& reps, const Matrix& response,
                                       const std::vector<ParticleSet>& pushed,
                                       const TrainConfig& cfg);

// inner_steps Adam updates of encoder k; other modalities enter only through
// frozen_reps. Throws TrainingError naming k and the step on a non-finite loss.
void update_modality(std::size_t k, EncoderBank& bank, AdamState& opt,
                     const MultimodalDataset& data, const ParticleSet& pushed_k,
                     const RepresentationSet& frozen_reps, const TrainConfig& cfg,
                     std::uint64_t seed);

using OuterCallback = std::function<void(const OuterLogEntry&)>;

TrainResult train_deepsum(const MultimodalDataset& data, const TrainConfig& cfg,
                          std::optional<TrainState> resume = std::nullopt,
                          const OuterCallback& on_outer = {});

}  // namespace deepsum
