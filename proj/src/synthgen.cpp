#include "deepsum/synthgen.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "deepsum/error.hpp"
#include "deepsum/rng.hpp"

namespace deepsum {

namespace {

enum Stream : std::uint64_t { kLatent = 1, kTransitions, kNoiseX, kNoiseU, kNoiseV, kNoiseW, kResponse };

void zero_row(Matrix& a, std::size_t r) {
    for (double& v : a.row(r)) v = 0.0;
}

// Z A + sqrt(var) * noise
Matrix mix(const Matrix& Z, const Matrix& A, double var, std::uint64_t seed) {
    Rng rng(seed);
    const double sd = std::sqrt(var);
    Matrix out(Z.rows(), A.cols());
    for (std::size_t i = 0; i < Z.rows(); ++i)
        for (std::size_t c = 0; c < A.cols(); ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < A.rows(); ++r) s += Z(i, r) * A(r, c);
            out(i, c) = s;
        }
    for (double& v : out.flat()) v += sd * rng.normal();
    return out;
}

}  // namespace

void SynthConfig::validate() const {
    if (scenario < 1 || scenario > 3) throw ConfigError("scenario must be 1, 2 or 3");
    if (case_id < 1 || case_id > 3) throw ConfigError("case must be 1, 2 or 3");
    if (n < 1) throw ConfigError("n must be >= 1");
    if (p < 1 || q < 1) throw ConfigError("modality dimensions must be >= 1");
    if (!(sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
    if (!(var_x >= 0.0) || !(noise_u() >= 0.0) || !(noise_v() >= 0.0) || !(noise_w() >= 0.0))
        throw ConfigError("noise variances must be non-negative");
    if (scenario1_literal) throw ConfigError("scenario1_literal is reserved: X_2 is undefined before X exists");
}

Matrix gen_latent(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return rng.normal_matrix(n, kLatentDim);
}

Matrix response_signal(const Matrix& Z, int scenario, bool scenario1_literal) {
    if (Z.cols() != kLatentDim) throw ShapeError("response: latent matrix must have 3 columns");
    if (scenario < 1 || scenario > 3) throw ConfigError("scenario must be 1, 2 or 3");
    if (scenario1_literal) throw ConfigError("scenario1_literal is reserved: X_2 is undefined before X exists");
    Matrix y(Z.rows(), 1);
    for (std::size_t i = 0; i < Z.rows(); ++i) {
        const double z1 = Z(i, 0), z2 = Z(i, 1);
        double v = 0.0;
        switch (scenario) {
            case 1: {
                const double s = z1 + z2, t = 1.0 + std::exp(z2);
                v = s * s + t * t;
                break;
            }
            case 2:
                v = std::sin(std::numbers::pi / 10.0 * (z1 + z2)) + z2 * z2;
                break;
            case 3: {
                const double r = std::sqrt(z1 * z1 + z2 * z2);
                v = r > 0.0 ? r * std::log(r) : 0.0;
                break;
            }
        }
        y(i, 0) = v;
    }
    return y;
}

Matrix gen_response(const Matrix& Z, int scenario, double sigma, std::uint64_t seed, bool scenario1_literal) {
    Matrix y = response_signal(Z, scenario, scenario1_literal);
    Rng rng(seed);
    for (double& v : y.flat()) v += sigma * rng.normal();
    return y;
}

TransitionSet gen_transitions(int case_id, std::size_t p, std::size_t q, std::uint64_t seed) {
    if (case_id < 1 || case_id > 3) throw ConfigError("case must be 1, 2 or 3");
    Rng rng(seed);
    TransitionSet t{rng.normal_matrix(kLatentDim, p), rng.normal_matrix(kLatentDim, q),
                    rng.normal_matrix(kLatentDim, q), rng.normal_matrix(kLatentDim, q)};
    // rows are 0-based here: row 0 carries Z1, row 1 carries Z2
    switch (case_id) {
        case 1:
            zero_row(t.a_u, 0);
            zero_row(t.a_v, 1);
            t.a_w = Matrix(kLatentDim, q);
            break;
        case 2:
            zero_row(t.a_x, 1);
            zero_row(t.a_v, 1);
            zero_row(t.a_u, 0);
            t.a_w = Matrix(kLatentDim, q);
            break;
        case 3: {
            zero_row(t.a_x, 1);
            zero_row(t.a_u, 0);
            zero_row(t.a_v, 0);
            zero_row(t.a_w, 0);
            const auto shared = t.a_u.row(1);
            std::copy(shared.begin(), shared.end(), t.a_v.row(1).begin());
            std::copy(shared.begin(), shared.end(), t.a_w.row(1).begin());
            break;
        }
    }
    return t;
}

SynthDataset gen_dataset(const SynthConfig& cfg) {
    cfg.validate();
    SynthDataset out;
    out.latent = gen_latent(cfg.n, derive_seed(cfg.seed, kLatent));
    out.transitions = gen_transitions(cfg.case_id, cfg.p, cfg.q, derive_seed(cfg.seed, kTransitions));
    const auto& t = out.transitions;
    out.data.modalities.push_back(mix(out.latent, t.a_x, cfg.var_x, derive_seed(cfg.seed, kNoiseX)));
    out.data.modalities.push_back(mix(out.latent, t.a_u, cfg.noise_u(), derive_seed(cfg.seed, kNoiseU)));
    out.data.modalities.push_back(mix(out.latent, t.a_v, cfg.noise_v(), derive_seed(cfg.seed, kNoiseV)));
    out.data.modalities.push_back(mix(out.latent, t.a_w, cfg.noise_w(), derive_seed(cfg.seed, kNoiseW)));
    out.data.names = {"X", "U", "V", "W"};
    out.signal = response_signal(out.latent, cfg.scenario);
    out.data.response = out.signal;
    Rng rng(derive_seed(cfg.seed, kResponse));
    for (double& v : out.data.response.flat()) v += cfg.sigma * rng.normal();
    return out;
}

}  // namespace deepsum
