#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deepsum/dataset.hpp"
#include "deepsum/matrix.hpp"
#include "deepsum/trainer.hpp"

namespace deepsum {

// Modality utilities and active-set estimation.
//
// utility_k = dcov_u(g_k(X_k), Y); Ahat = { k : utility_k > tau }.
// In conditional mode the candidates are trained alongside the preselected
// modalities with the cross-modality independence penalty active, so a
// candidate's utility reflects what it adds beyond the preselected set.

enum class SelectionMode { Marginal, Conditional };

struct ThresholdPolicy {
    enum class Kind { Fixed, Permutation } kind = Kind::Permutation;
    double tau = 0.0;            // Fixed
    double level = 0.05;         // Permutation
    std::size_t num_perms = 199; // Permutation
};

struct SelectionConfig {
    SelectionMode mode = SelectionMode::Marginal;
    std::vector<std::size_t> preselected;  // Conditional only
    ThresholdPolicy threshold{};
    // Fraction of rows held out from encoder training; utilities and
    // permutation thresholds are then computed on those rows only. 0 scores
    // in-sample.
    double holdout_frac = 0.0;
    std::uint64_t seed = 0;
};

struct Utility {
    double v_n = 0.0;
    double dcor = 0.0;
};

struct CandidateScore {
    std::size_t index = 0;  // modality index in the source dataset
    std::string name;
    double v_n = 0.0;
    double dcor = 0.0;
    double tau = 0.0;
    bool active = false;
};

struct SelectionReport {
    SelectionMode mode = SelectionMode::Marginal;
    std::uint64_t seed = 0;
    std::vector<std::size_t> preselected;
    std::vector<CandidateScore> candidates;  // input order
    std::vector<std::size_t> ranking;        // positions into candidates, utility desc, ties by modality index
    std::vector<std::size_t> active;         // modality indices with v_n > tau, ascending

    // Candidate with the largest utility (lowest modality index on ties).
    std::optional<std::size_t> top() const;
};

std::vector<Utility> modality_utilities(const RepresentationSet& reps, const Matrix& y);

// `candidates` maps rep positions to dataset modality indices; `names` is
// indexed by those modality indices.
SelectionReport estimate_active_set(const std::vector<Utility>& utilities, const SelectionConfig& cfg,
                                    const RepresentationSet& reps, const Matrix& y,
                                    const std::vector<std::size_t>& candidates,
                                    const std::vector<std::string>& names);

// Active set for a fixed threshold: { k : utility_k > tau }.
std::vector<std::size_t> threshold_active(const std::vector<double>& utilities, double tau);

// Per-modality entries of a K-sized config restricted to `idx` (in order).
TrainConfig restrict_config(const TrainConfig& cfg, const std::vector<std::size_t>& idx);

struct ConditionalResult {
    SelectionReport report;
    TrainResult training;                 // over preselected ++ candidates, in that order
    std::vector<std::size_t> trained_idx; // dataset modality index per trained position
};

// Trains preselected ++ candidates and scores only the candidates (on the
// held-out rows when holdout_frac > 0). With
// `preselected_encoders` (one per preselected modality, same order) those
// encoders are loaded and frozen instead of retrained. An empty candidate list
// yields an empty report without training.
ConditionalResult conditional_select(const MultimodalDataset& data,
                                     const std::vector<std::size_t>& preselected,
                                     const std::vector<std::size_t>& candidates,
                                     const TrainConfig& train_cfg, const SelectionConfig& sel_cfg,
                                     const std::optional<std::vector<Mlp>>& preselected_encoders =
                                         std::nullopt);

const char* to_string(SelectionMode m);

}  // namespace deepsum
