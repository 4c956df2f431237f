#pragma once

#include <cstdint>
#include <optional>

#include "deepsum/dataset.hpp"
#include "deepsum/matrix.hpp"

namespace deepsum {

// Synthetic benchmark: latent Z ~ N(0, I_3), response from one of three
// scenarios, modalities X = Z A_x + e_x and U, V, W likewise, with zero-row
// patterns in the transition matrices set by the case.
//
//   Scenario 1: Y = (Z1 + Z2)^2 + (1 + exp(Z2))^2 + e
//   Scenario 2: Y = sin(pi/10 (Z1 + Z2)) + Z2^2 + e
//   Scenario 3: Y = r log r + e,  r = sqrt(Z1^2 + Z2^2),  0 log 0 := 0
//
//   Case 1: A_u row 1 = 0, A_v row 2 = 0, A_w = 0
//   Case 2: A_x row 2 = 0, A_v row 2 = 0, A_u row 1 = 0, A_w = 0
//   Case 3: A_x row 2 = 0, row 1 of A_u, A_v, A_w = 0, rows 2 of A_u, A_v, A_w identical
//
// Read literally, Scenario 1 uses exp(X_2), which is not defined when Y is
// generated; Z2 is used instead.

constexpr std::size_t kLatentDim = 3;

struct SynthConfig {
    int scenario = 2;
    int case_id = 2;
    std::size_t n = 3000;
    std::size_t p = 10;
    std::size_t q = 10;
    double sigma = 1.0;  // response noise standard deviation
    double var_x = 1.0;
    std::optional<double> var_u, var_v, var_w;  // default 1, or 1 / 2 / 4 in case 3
    std::uint64_t seed = 0;
    bool scenario1_literal = false;  // reserved: the literal X_2 form is undefined, so setting it errors

    double noise_u() const { return var_u.value_or(1.0); }
    double noise_v() const { return var_v.value_or(case_id == 3 ? 2.0 : 1.0); }
    double noise_w() const { return var_w.value_or(case_id == 3 ? 4.0 : 1.0); }
    void validate() const;
};

struct TransitionSet {
    Matrix a_x, a_u, a_v, a_w;  // 3 x p, 3 x q
};

struct SynthDataset {
    MultimodalDataset data;  // modalities X, U, V, W; response Y
    Matrix latent;           // Z, n x 3
    Matrix signal;           // noise-free response, n x 1
    TransitionSet transitions;
};

Matrix gen_latent(std::size_t n, std::uint64_t seed);

// Noise-free scenario function of Z, n x 1.
Matrix response_signal(const Matrix& Z, int scenario, bool scenario1_literal = false);

Matrix gen_response(const Matrix& Z, int scenario, double sigma, std::uint64_t seed,
                    bool scenario1_literal = false);

TransitionSet gen_transitions(int case_id, std::size_t p, std::size_t q, std::uint64_t seed);

SynthDataset gen_dataset(const SynthConfig& cfg);

}  // namespace deepsum
