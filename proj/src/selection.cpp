#include "deepsum/selection.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "deepsum/dcov.hpp"
#include "deepsum/downstream.hpp"
#include "deepsum/error.hpp"
#include "deepsum/rng.hpp"

namespace deepsum {

const char* to_string(SelectionMode m) { return m == SelectionMode::Marginal ? "marginal" : "conditional"; }

std::optional<std::size_t> SelectionReport::top() const {
    if (ranking.empty()) return std::nullopt;
    return candidates[ranking.front()].index;
}

std::vector<Utility> modality_utilities(const RepresentationSet& reps, const Matrix& y) {
    if (reps.reps.empty()) throw ConfigError("modality_utilities: no representations");
    std::vector<Utility> out;
    out.reserve(reps.reps.size());
    for (const auto& r : reps.reps) out.push_back({dcov_u(r, y).value, dcor(r, y)});
    return out;
}

std::vector<std::size_t> threshold_active(const std::vector<double>& utilities, double tau) {
    std::vector<std::size_t> a;
    for (std::size_t k = 0; k < utilities.size(); ++k)
        if (utilities[k] > tau) a.push_back(k);
    return a;
}

SelectionReport estimate_active_set(const std::vector<Utility>& utilities, const SelectionConfig& cfg,
                                    const RepresentationSet& reps, const Matrix& y,
                                    const std::vector<std::size_t>& candidates,
                                    const std::vector<std::string>& names) {
    if (utilities.empty()) throw ConfigError("estimate_active_set: empty candidate list");
    if (candidates.size() != utilities.size())
        throw ConfigError("estimate_active_set: one modality index per utility required");
    if (cfg.threshold.kind == ThresholdPolicy::Kind::Fixed && !(cfg.threshold.tau >= 0.0))
        throw ConfigError("fixed threshold must be >= 0");
    const bool perm = cfg.threshold.kind == ThresholdPolicy::Kind::Permutation;
    if (perm && reps.reps.size() != utilities.size())
        throw ConfigError("permutation threshold needs the candidate representations");

    SelectionReport rep;
    rep.mode = cfg.mode;
    rep.seed = cfg.seed;
    rep.preselected = cfg.mode == SelectionMode::Conditional ? cfg.preselected : std::vector<std::size_t>{};
    for (std::size_t c = 0; c < utilities.size(); ++c) {
        CandidateScore s;
        s.index = candidates[c];
        s.name = s.index < names.size() ? names[s.index] : std::to_string(s.index);
        s.v_n = utilities[c].v_n;
        s.dcor = utilities[c].dcor;
        s.tau = perm ? perm_threshold(reps.reps[c], y, cfg.threshold.num_perms, cfg.threshold.level,
                                      derive_seed(cfg.seed, s.index))
                     : cfg.threshold.tau;
        s.active = s.v_n > s.tau;
        if (s.active) rep.active.push_back(s.index);
        rep.candidates.push_back(std::move(s));
    }
    std::sort(rep.active.begin(), rep.active.end());
    rep.ranking.resize(rep.candidates.size());
    std::iota(rep.ranking.begin(), rep.ranking.end(), std::size_t{0});
    std::sort(rep.ranking.begin(), rep.ranking.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = rep.candidates[a];
        const auto& z = rep.candidates[b];
        if (x.v_n != z.v_n) return x.v_n > z.v_n;
        return x.index < z.index;
    });
    return rep;
}

TrainConfig restrict_config(const TrainConfig& cfg, const std::vector<std::size_t>& idx) {
    TrainConfig out = cfg;
    const std::size_t K = idx.size();
    out.latent_dims.clear();
    out.lambda.clear();
    out.push_step.clear();
    out.frozen.clear();
    out.xi = Matrix(K, K);
    for (std::size_t a = 0; a < K; ++a) {
        const std::size_t k = idx[a];
        if (k >= cfg.num_modalities()) throw ConfigError("restrict_config: modality index out of range");
        out.latent_dims.push_back(cfg.latent_dims[k]);
        out.lambda.push_back(cfg.lambda[k]);
        out.push_step.push_back(cfg.push_step[k]);
        if (!cfg.frozen.empty()) out.frozen.push_back(cfg.frozen[k]);
        for (std::size_t b = 0; b < K; ++b) out.xi(a, b) = a == b ? 0.0 : cfg.xi(k, idx[b]);
    }
    return out;
}

ConditionalResult conditional_select(const MultimodalDataset& data,
                                     const std::vector<std::size_t>& preselected,
                                     const std::vector<std::size_t>& candidates,
                                     const TrainConfig& train_cfg, const SelectionConfig& sel_cfg,
                                     const std::optional<std::vector<Mlp>>& preselected_encoders) {
    if (!(sel_cfg.holdout_frac >= 0.0 && sel_cfg.holdout_frac < 1.0))
        throw ConfigError("conditional_select: holdout_frac must lie in [0, 1)");
    std::set<std::size_t> pre(preselected.begin(), preselected.end());
    for (auto c : candidates) {
        if (pre.count(c)) throw ConfigError("conditional_select: candidate also preselected");
        if (c >= data.num_modalities()) throw ConfigError("conditional_select: candidate index out of range");
    }
    for (auto p : preselected)
        if (p >= data.num_modalities()) throw ConfigError("conditional_select: preselected index out of range");
    if (std::set<std::size_t>(candidates.begin(), candidates.end()).size() != candidates.size() ||
        pre.size() != preselected.size())
        throw ConfigError("conditional_select: duplicate modality indices");

    ConditionalResult out;
    SelectionConfig cfg = sel_cfg;
    cfg.mode = preselected.empty() ? SelectionMode::Marginal : SelectionMode::Conditional;
    cfg.preselected = preselected;
    if (candidates.empty()) {
        out.report.mode = cfg.mode;
        out.report.seed = cfg.seed;
        out.report.preselected = preselected;
        return out;
    }

    out.trained_idx = preselected;
    out.trained_idx.insert(out.trained_idx.end(), candidates.begin(), candidates.end());
    const MultimodalDataset sub = data.select(out.trained_idx);
    TrainConfig tcfg = restrict_config(train_cfg, out.trained_idx);

    std::optional<TrainState> resume;
    if (preselected_encoders) {
        if (preselected_encoders->size() != preselected.size())
            throw ConfigError("conditional_select: one encoder per preselected modality required");
        TrainState st = init_state(sub, tcfg);
        tcfg.frozen.assign(out.trained_idx.size(), false);
        for (std::size_t i = 0; i < preselected.size(); ++i) {
            st.bank.encoders[i] = (*preselected_encoders)[i];
            tcfg.frozen[i] = true;
        }
        resume = std::move(st);
    }
    if (cfg.holdout_frac == 0.0) {
        out.training = train_deepsum(sub, tcfg, std::move(resume));
        RepresentationSet cand_reps;
        for (std::size_t i = preselected.size(); i < out.trained_idx.size(); ++i)
            cand_reps.reps.push_back(out.training.reps.reps[i]);
        const auto util = modality_utilities(cand_reps, sub.response);
        out.report = estimate_active_set(util, cfg, cand_reps, sub.response, candidates, data.names);
        return out;
    }

    const Split split = make_split(sub.num_samples(), 1.0 - cfg.holdout_frac, 0.0, derive_seed(cfg.seed, 0));
    if (split.train.size() < 2 || split.test.size() < 2)
        throw InsufficientSamplesError("conditional_select: holdout leaves fewer than 2 rows on one side");
    out.training = train_deepsum(sub.rows(split.train), tcfg, std::move(resume));
    const MultimodalDataset held = sub.rows(split.test);
    RepresentationSet cand_reps;
    for (std::size_t i = preselected.size(); i < out.trained_idx.size(); ++i)
        cand_reps.reps.push_back(mlp_forward(out.training.bank.encoders[i], held.modalities[i]));
    const auto util = modality_utilities(cand_reps, held.response);
    out.report = estimate_active_set(util, cfg, cand_reps, held.response, candidates, data.names);
    return out;
}

}  // namespace deepsum
