#include "deepsum/serialize.hpp"

#include <fstream>
#include <sstream>

#include "deepsum/error.hpp"

namespace deepsum {

namespace {

template <class T>
std::vector<T> per_modality(const json& j, const char* key, std::vector<T> current) {
    if (!j.contains(key)) return current;
    const auto& v = j.at(key);
    if (v.is_array()) {
        if (v.size() != current.size())
            throw ConfigError(std::string(key) + ": expected " + std::to_string(current.size()) + " entries");
        return v.get<std::vector<T>>();
    }
    return std::vector<T>(current.size(), v.get<T>());
}

template <class T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

json adam_to_json(const AdamState& s) {
    return {{"step", s.step}, {"lr", s.cfg.lr},  {"beta1", s.cfg.beta1}, {"beta2", s.cfg.beta2},
            {"eps", s.cfg.eps}, {"m", s.m},       {"v", s.v}};
}

AdamState adam_from_json(const json& j) {
    AdamState s;
    s.step = j.at("step").get<long>();
    s.cfg.lr = j.at("lr").get<double>();
    s.cfg.beta1 = j.at("beta1").get<double>();
    s.cfg.beta2 = j.at("beta2").get<double>();
    s.cfg.eps = j.at("eps").get<double>();
    s.m = j.at("m").get<std::vector<double>>();
    s.v = j.at("v").get<std::vector<double>>();
    return s;
}

}  // namespace

json to_json(const TrainConfig& c) {
    json xi = json::array();
    for (std::size_t k = 0; k < c.xi.rows(); ++k) {
        std::vector<double> row(c.xi.row(k).begin(), c.xi.row(k).end());
        xi.push_back(row);
    }
    std::vector<bool> frozen(c.frozen.begin(), c.frozen.end());
    return {{"latent_dims", c.latent_dims},
            {"lambda", c.lambda},
            {"xi", xi},
            {"push_step", c.push_step},
            {"frozen", frozen},
            {"encoder_hidden", c.encoder_hidden},
            {"outer_iters", c.outer_iters},
            {"inner_steps", c.inner_steps},
            {"batch", c.batch},
            {"lr", c.lr},
            {"pushes_per_iter", c.pushes_per_iter},
            {"disc", {{"hidden", c.disc.hidden}, {"steps", c.disc.steps}, {"lr", c.disc.lr}, {"batch", c.disc.batch}}},
            {"warm_start_disc", c.warm_start_disc},
            {"log_objective", c.log_objective},
            {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j, std::size_t K) {
    TrainConfig c = TrainConfig::defaults(K);
    try {
        c.latent_dims = per_modality(j, "latent_dims", c.latent_dims);
        c.lambda = per_modality(j, "lambda", c.lambda);
        c.push_step = per_modality(j, "push_step", c.push_step);
        if (j.contains("frozen") && !(j.at("frozen").is_array() && j.at("frozen").empty())) {
            auto f = per_modality<bool>(j, "frozen", std::vector<bool>(K, false));
            c.frozen.assign(f.begin(), f.end());
        }
        if (j.contains("xi")) {
            const auto& x = j.at("xi");
            if (x.is_number()) {
                for (std::size_t a = 0; a < K; ++a)
                    for (std::size_t b = 0; b < K; ++b) c.xi(a, b) = a == b ? 0.0 : x.get<double>();
            } else {
                if (x.size() != K) throw ConfigError("xi: expected a K x K matrix");
                for (std::size_t a = 0; a < K; ++a) {
                    if (x[a].size() != K) throw ConfigError("xi: expected a K x K matrix");
                    for (std::size_t b = 0; b < K; ++b) c.xi(a, b) = x[a][b].get<double>();
                }
            }
        }
        maybe(j, "encoder_hidden", c.encoder_hidden);
        maybe(j, "outer_iters", c.outer_iters);
        maybe(j, "inner_steps", c.inner_steps);
        maybe(j, "batch", c.batch);
        maybe(j, "lr", c.lr);
        maybe(j, "pushes_per_iter", c.pushes_per_iter);
        if (j.contains("disc")) {
            const auto& d = j.at("disc");
            maybe(d, "hidden", c.disc.hidden);
            maybe(d, "steps", c.disc.steps);
            maybe(d, "lr", c.disc.lr);
            maybe(d, "batch", c.disc.batch);
        }
        maybe(j, "warm_start_disc", c.warm_start_disc);
        maybe(j, "log_objective", c.log_objective);
        maybe(j, "seed", c.seed);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("train config: ") + e.what());
    }
    c.validate();
    return c;
}

json to_json(const SynthConfig& c) {
    json j = {{"scenario", c.scenario}, {"case", c.case_id}, {"n", c.n},         {"p", c.p},
              {"q", c.q},               {"sigma", c.sigma},  {"var_x", c.var_x}, {"seed", c.seed}};
    if (c.var_u) j["var_u"] = *c.var_u;
    if (c.var_v) j["var_v"] = *c.var_v;
    if (c.var_w) j["var_w"] = *c.var_w;
    return j;
}

SynthConfig synth_config_from_json(const json& j, SynthConfig c) {
    try {
        maybe(j, "scenario", c.scenario);
        maybe(j, "case", c.case_id);
        maybe(j, "n", c.n);
        maybe(j, "p", c.p);
        maybe(j, "q", c.q);
        maybe(j, "sigma", c.sigma);
        maybe(j, "var_x", c.var_x);
        if (j.contains("var_u")) c.var_u = j.at("var_u").get<double>();
        if (j.contains("var_v")) c.var_v = j.at("var_v").get<double>();
        if (j.contains("var_w")) c.var_w = j.at("var_w").get<double>();
        maybe(j, "seed", c.seed);
        maybe(j, "scenario1_literal", c.scenario1_literal);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("synth config: ") + e.what());
    }
    c.validate();
    return c;
}

json to_json(const FitConfig& c) {
    return {{"hidden", c.hidden},         {"lr", c.lr},           {"batch", c.batch},
            {"max_epochs", c.max_epochs}, {"patience", c.patience}, {"seed", c.seed}};
}

FitConfig fit_config_from_json(const json& j, FitConfig c) {
    try {
        maybe(j, "hidden", c.hidden);
        maybe(j, "lr", c.lr);
        maybe(j, "batch", c.batch);
        maybe(j, "max_epochs", c.max_epochs);
        maybe(j, "patience", c.patience);
        maybe(j, "seed", c.seed);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("fit config: ") + e.what());
    }
    return c;
}

json to_json(const SelectionConfig& c) {
    json t;
    if (c.threshold.kind == ThresholdPolicy::Kind::Fixed)
        t = {{"kind", "fixed"}, {"tau", c.threshold.tau}};
    else
        t = {{"kind", "permutation"}, {"level", c.threshold.level}, {"num_perms", c.threshold.num_perms}};
    return {{"mode", to_string(c.mode)}, {"preselected", c.preselected}, {"threshold", t},
            {"holdout_frac", c.holdout_frac}, {"seed", c.seed}};
}

SelectionConfig selection_config_from_json(const json& j, SelectionConfig c) {
    try {
        if (j.contains("mode")) {
            const auto m = j.at("mode").get<std::string>();
            if (m == "marginal") c.mode = SelectionMode::Marginal;
            else if (m == "conditional") c.mode = SelectionMode::Conditional;
            else throw ConfigError("selection mode must be 'marginal' or 'conditional'");
        }
        maybe(j, "preselected", c.preselected);
        if (j.contains("threshold")) {
            const auto& t = j.at("threshold");
            if (t.contains("kind")) {
                const auto k = t.at("kind").get<std::string>();
                if (k == "fixed") c.threshold.kind = ThresholdPolicy::Kind::Fixed;
                else if (k == "permutation") c.threshold.kind = ThresholdPolicy::Kind::Permutation;
                else throw ConfigError("threshold kind must be 'fixed' or 'permutation'");
            }
            maybe(t, "tau", c.threshold.tau);
            maybe(t, "level", c.threshold.level);
            maybe(t, "num_perms", c.threshold.num_perms);
        }
        maybe(j, "holdout_frac", c.holdout_frac);
        if (!(c.holdout_frac >= 0.0 && c.holdout_frac < 1.0))
            throw ConfigError("selection config: holdout_frac must lie in [0, 1)");
        maybe(j, "seed", c.seed);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("selection config: ") + e.what());
    }
    return c;
}

json to_json(const SelectionReport& r) {
    json cands = json::array();
    for (const auto& c : r.candidates)
        cands.push_back({{"name", c.name}, {"v_n", c.v_n}, {"dcor", c.dcor}, {"tau", c.tau}, {"active", c.active}});
    std::vector<std::string> ranking;
    for (auto i : r.ranking) ranking.push_back(r.candidates[i].name);
    return {{"candidates", cands}, {"mode", to_string(r.mode)}, {"seed", r.seed},
            {"preselected", r.preselected}, {"ranking", ranking}};
}

json to_json(const EvalReport& r) {
    json j = {{"task", r.task == Task::Regression ? "regression" : "binary_classification"},
              {"n_train", r.n_train},
              {"n_val", r.n_val},
              {"n_test", r.n_test},
              {"seed", r.seed}};
    if (r.task == Task::Regression) {
        j["mse"] = r.mse;
    } else {
        j["accuracy"] = r.accuracy;
        j["auc"] = r.auc;
    }
    return j;
}

json to_json(const ObjectiveBreakdown& o) {
    json cross = json::array();
    for (std::size_t k = 0; k < o.cross.rows(); ++k)
        for (std::size_t l = k + 1; l < o.cross.cols(); ++l) cross.push_back({{"k", k}, {"l", l}, {"v", o.cross(k, l)}});
    return {{"total", o.total}, {"dependence", o.dependence}, {"matching", o.matching},
            {"cross", cross},   {"cross_total", o.cross_total}};
}

namespace {

Mlp mlp_from_json(const json& e, const char* what) {
    Mlp m;
    m.widths = e.at("widths").get<std::vector<std::size_t>>();
    m.params = e.at("params").get<std::vector<double>>();
    if (m.widths.size() < 2 || m.params.size() != mlp_param_count(m.widths))
        throw DataError(std::string("checkpoint: ") + what + " parameter count does not match widths");
    return m;
}

}  // namespace

json to_json(const Checkpoint& c) {
    json enc = json::array();
    for (const auto& e : c.state.bank.encoders) enc.push_back({{"widths", e.widths}, {"params", e.params}});
    json opt = json::array();
    for (const auto& s : c.state.opt) opt.push_back(adam_to_json(s));
    json disc = json::array();
    for (const auto& d : c.state.disc)
        disc.push_back(d ? json{{"widths", d->net.widths}, {"params", d->net.params}} : json(nullptr));
    return {{"format", "deepsum-checkpoint"},
            {"version", 1},
            {"config", to_json(c.config)},
            {"names", c.names},
            {"encoders", enc},
            {"optimizer", opt},
            {"discriminators", disc},
            {"split", c.split ? json{{"train_frac", c.split->train_frac},
                                     {"val_frac", c.split->val_frac},
                                     {"seed", c.split->seed}}
                              : json(nullptr)},
            {"rng", {{"seed", c.config.seed}, {"outer_done", c.state.outer_done}}}};
}

Checkpoint checkpoint_from_json(const json& j) {
    try {
        if (j.value("format", "") != "deepsum-checkpoint") throw DataError("not a deepsum checkpoint");
        Checkpoint c;
        c.names = j.at("names").get<std::vector<std::string>>();
        c.config = train_config_from_json(j.at("config"), c.names.size());
        for (const auto& e : j.at("encoders")) c.state.bank.encoders.push_back(mlp_from_json(e, "encoder"));
        if (j.contains("discriminators"))
            for (const auto& d : j.at("discriminators")) {
                if (d.is_null())
                    c.state.disc.emplace_back();
                else
                    c.state.disc.emplace_back(Discriminator{mlp_from_json(d, "discriminator")});
            }
        for (const auto& s : j.at("optimizer")) c.state.opt.push_back(adam_from_json(s));
        if (j.contains("split") && !j.at("split").is_null()) {
            const auto& sp = j.at("split");
            c.split = SplitSpec{sp.at("train_frac").get<double>(), sp.at("val_frac").get<double>(),
                                sp.at("seed").get<std::uint64_t>()};
        }
        c.state.outer_done = j.at("rng").at("outer_done").get<std::size_t>();
        c.config.seed = j.at("rng").at("seed").get<std::uint64_t>();
        if (c.state.bank.encoders.size() != c.names.size() || c.state.opt.size() != c.names.size())
            throw DataError("checkpoint: encoder/optimizer/name counts differ");
        if (!c.state.disc.empty() && c.state.disc.size() != c.names.size())
            throw DataError("checkpoint: discriminator count differs from modality count");
        return c;
    } catch (const json::exception& e) {
        throw DataError(std::string("checkpoint: ") + e.what());
    }
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("'" + path.string() + "': " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
    write_text_file(path, to_json(c).dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return checkpoint_from_json(read_json_file(path)); }

}  // namespace deepsum
