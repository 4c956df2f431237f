// deepsum command-line driver: gen, train, select, eval, bench.
//
// Every command accepts --config FILE (a JSON document with optional
// "synth", "train", "fit", "selection", "bench" and "output_dir" entries);
// explicit flags override the file. The output directory is --out, else
// $DEEPSUM_OUTPUT_DIR, else the config's "output_dir", else "deepsum_out".
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric or
// training error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deepsum/bench.hpp"
#include "deepsum/downstream.hpp"
#include "deepsum/error.hpp"
#include "deepsum/io.hpp"
#include "deepsum/selection.hpp"
#include "deepsum/serialize.hpp"
#include "deepsum/synthgen.hpp"
#include "deepsum/trainer.hpp"

using namespace deepsum;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config;
    std::string out;
};

json load_config(const Common& c) {
    if (c.config.empty()) return json::object();
    std::ifstream in(c.config);
    if (!in) throw ConfigError("cannot open config '" + c.config + "'");
    try {
        json j = json::parse(in);
        if (!j.is_object()) throw ConfigError("config '" + c.config + "' must be a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + c.config + "': " + e.what());
    }
}

json section(const json& cfg, const char* key) {
    if (!cfg.contains(key)) return json::object();
    if (!cfg.at(key).is_object()) throw ConfigError(std::string("config section '") + key + "' must be an object");
    return cfg.at(key);
}

fs::path output_dir(const Common& c, const json& cfg) {
    if (!c.out.empty()) return c.out;
    if (const char* env = std::getenv("DEEPSUM_OUTPUT_DIR"); env && *env) return env;
    if (cfg.contains("output_dir")) return cfg.at("output_dir").get<std::string>();
    return "deepsum_out";
}

template <class T>
void put(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "JSON config file");
    cmd->add_option("--out", c.out, "output directory");
}

struct SynthFlags {
    std::optional<int> case_id, scenario;
    std::optional<std::size_t> n, p, q;
    std::optional<double> sigma;
    std::optional<std::uint64_t> seed;

    void add(CLI::App* cmd) {
        cmd->add_option("--case", case_id, "case 1-3");
        cmd->add_option("--scenario", scenario, "scenario 1-3");
        cmd->add_option("--n", n, "sample size");
        cmd->add_option("--p", p, "dimension of X");
        cmd->add_option("--q", q, "dimension of U, V, W");
        cmd->add_option("--sigma", sigma, "response noise standard deviation");
        cmd->add_option("--seed", seed, "generator seed");
    }
    SynthConfig resolve(json j) const {
        put(j, "case", case_id);
        put(j, "scenario", scenario);
        put(j, "n", n);
        put(j, "p", p);
        put(j, "q", q);
        put(j, "sigma", sigma);
        put(j, "seed", seed);
        return synth_config_from_json(j);
    }
};

struct TrainFlags {
    std::optional<std::size_t> outer, inner, batch, latent, disc_steps, pushes;
    std::optional<double> lr, lambda, xi, push_step, disc_lr;
    std::optional<std::uint64_t> seed;

    void add(CLI::App* cmd) {
        cmd->add_option("--outer-iters", outer, "outer iterations");
        cmd->add_option("--inner-steps", inner, "encoder steps per modality per outer iteration");
        cmd->add_option("--batch", batch, "encoder minibatch size");
        cmd->add_option("--latent-dim", latent, "latent dimension for every modality");
        cmd->add_option("--lr", lr, "encoder learning rate");
        cmd->add_option("--lambda", lambda, "normality weight for every modality");
        cmd->add_option("--xi", xi, "independence weight for every pair");
        cmd->add_option("--push-step", push_step, "particle push step");
        cmd->add_option("--pushes", pushes, "particle pushes per outer iteration");
        cmd->add_option("--disc-steps", disc_steps, "discriminator steps");
        cmd->add_option("--disc-lr", disc_lr, "discriminator learning rate");
        cmd->add_option("--train-seed", seed, "training seed");
    }
    TrainConfig resolve(json j, std::size_t K) const {
        put(j, "outer_iters", outer);
        put(j, "inner_steps", inner);
        put(j, "batch", batch);
        put(j, "latent_dims", latent);
        put(j, "lr", lr);
        put(j, "lambda", lambda);
        put(j, "xi", xi);
        put(j, "push_step", push_step);
        put(j, "pushes_per_iter", pushes);
        if (disc_steps || disc_lr) {
            json d = j.value("disc", json::object());
            put(d, "steps", disc_steps);
            put(d, "lr", disc_lr);
            j["disc"] = d;
        }
        put(j, "seed", seed);
        return train_config_from_json(j, K);
    }
};

struct FitFlags {
    std::optional<std::vector<std::size_t>> hidden;
    std::optional<double> lr;
    std::optional<std::size_t> batch, max_epochs, patience;
    std::optional<std::uint64_t> seed;

    void add(CLI::App* cmd) {
        cmd->add_option("--head-hidden", hidden, "head hidden widths")->delimiter(',');
        cmd->add_option("--head-lr", lr, "head learning rate");
        cmd->add_option("--head-batch", batch, "head minibatch size");
        cmd->add_option("--max-epochs", max_epochs, "head epoch cap");
        cmd->add_option("--patience", patience, "early-stopping patience");
        cmd->add_option("--head-seed", seed, "head seed");
    }
    FitConfig resolve(json j) const {
        put(j, "hidden", hidden);
        put(j, "lr", lr);
        put(j, "batch", batch);
        put(j, "max_epochs", max_epochs);
        put(j, "patience", patience);
        put(j, "seed", seed);
        return fit_config_from_json(j);
    }
};

struct SplitFlags {
    std::optional<double> train_frac, val_frac;
    std::optional<std::uint64_t> seed;

    void add(CLI::App* cmd) {
        cmd->add_option("--train-frac", train_frac, "training fraction of rows");
        cmd->add_option("--val-frac", val_frac, "validation fraction of rows");
        cmd->add_option("--split-seed", seed, "split seed");
    }
};

std::vector<std::size_t> modality_indices(const MultimodalDataset& d, const std::vector<std::string>& names) {
    std::vector<std::size_t> idx;
    if (names.empty()) {
        for (std::size_t k = 0; k < d.num_modalities(); ++k) idx.push_back(k);
        return idx;
    }
    for (const auto& n : names) idx.push_back(d.index_of(n));
    return idx;
}

void write_json(const fs::path& p, const json& j) { write_text_file(p, j.dump(2) + "\n"); }

// ---- gen ----

struct GenCmd {
    Common common;
    SynthFlags synth;
    int run() {
        const json cfg = load_config(common);
        const SynthConfig sc = synth.resolve(section(cfg, "synth"));
        const auto ds = gen_dataset(sc);
        const fs::path out = output_dir(common, cfg);
        const auto manifest = export_synthetic(ds, sc, out);
        std::cout << manifest.string() << "\n";
        return 0;
    }
};

// ---- train ----

struct TrainCmd {
    Common common;
    std::string data;
    std::vector<std::string> modalities;
    std::string resume;
    TrainFlags train;
    SplitFlags split;

    int run() {
        const json cfg = load_config(common);
        const auto full = load_multimodal_csv(data);
        const auto idx = modality_indices(full, modalities);
        MultimodalDataset sub = full.select(idx);
        const TrainConfig tc = train.resolve(section(cfg, "train"), idx.size());

        Checkpoint ck;
        ck.config = tc;
        ck.names = sub.names;
        if (split.train_frac && *split.train_frac < 1.0) {
            SplitSpec sp{*split.train_frac, split.val_frac.value_or(0.2), split.seed.value_or(0)};
            ck.split = sp;
            sub = sub.rows(make_split(sub.num_samples(), sp.train_frac, sp.val_frac, sp.seed).train);
        }

        std::optional<TrainState> start;
        if (!resume.empty()) {
            auto prev = load_checkpoint(resume);
            if (prev.names != ck.names) throw ConfigError("resume checkpoint was trained on different modalities");
            start = std::move(prev.state);
        }

        const fs::path out = output_dir(common, cfg);
        json log = json::array();
        auto flush_log = [&] { write_json(out / "train_log.json", log); };
        TrainResult res;
        try {
            res = train_deepsum(sub, tc, std::move(start), [&](const OuterLogEntry& e) {
                json row = {{"outer", e.outer}, {"disc_loss", e.disc_loss}};
                if (e.objective) row["objective"] = to_json(*e.objective);
                log.push_back(row);
            });
        } catch (...) {
            flush_log();
            throw;
        }
        flush_log();
        ck.state = res.state;
        save_checkpoint(out / "checkpoint.json", ck);
        std::cout << (out / "checkpoint.json").string() << "\n";
        return 0;
    }
};

// ---- select ----

struct SelectCmd {
    Common common;
    std::string data;
    std::vector<std::string> preselected, candidates;
    std::string checkpoint;
    std::optional<std::string> threshold;
    std::optional<double> tau, level, holdout;
    std::optional<std::size_t> perms;
    std::optional<std::uint64_t> seed;
    TrainFlags train;

    int run() {
        const json cfg = load_config(common);
        const auto d = load_multimodal_csv(data);
        json sj = section(cfg, "selection");
        if (threshold || tau || level || perms) {
            json t = sj.value("threshold", json::object());
            put(t, "kind", threshold);
            put(t, "tau", tau);
            put(t, "level", level);
            put(t, "num_perms", perms);
            sj["threshold"] = t;
        }
        put(sj, "holdout_frac", holdout);
        put(sj, "seed", seed);
        const SelectionConfig sc = selection_config_from_json(sj);

        std::vector<std::size_t> pre, cand;
        for (const auto& n : preselected) pre.push_back(d.index_of(n));
        if (candidates.empty()) {
            for (std::size_t k = 0; k < d.num_modalities(); ++k)
                if (std::find(pre.begin(), pre.end(), k) == pre.end()) cand.push_back(k);
        } else {
            for (const auto& n : candidates) cand.push_back(d.index_of(n));
        }
        const TrainConfig tc = train.resolve(section(cfg, "train"), d.num_modalities());

        std::optional<std::vector<Mlp>> pre_enc;
        if (!checkpoint.empty()) {
            const auto ck = load_checkpoint(checkpoint);
            std::vector<Mlp> enc;
            for (auto p : pre) {
                const auto it = std::find(ck.names.begin(), ck.names.end(), d.names[p]);
                if (it == ck.names.end())
                    throw ConfigError("checkpoint has no encoder for preselected modality '" + d.names[p] + "'");
                enc.push_back(ck.state.bank.encoders[static_cast<std::size_t>(it - ck.names.begin())]);
            }
            pre_enc = std::move(enc);
        }

        const auto res = conditional_select(d, pre, cand, tc, sc, pre_enc);
        const fs::path out = output_dir(common, cfg);
        write_json(out / "selection.json", to_json(res.report));
        std::cout << to_json(res.report).dump(2) << "\n";
        return 0;
    }
};

// ---- eval ----

struct EvalCmd {
    Common common;
    std::string data, checkpoint, task = "regression";
    std::vector<std::string> modalities;
    SplitFlags split;
    FitFlags fit;

    int run() {
        const json cfg = load_config(common);
        const auto d = load_multimodal_csv(data);
        const auto ck = load_checkpoint(checkpoint);
        Task t;
        if (task == "regression") t = Task::Regression;
        else if (task == "binary") t = Task::BinaryClassification;
        else throw ConfigError("task must be 'regression' or 'binary'");

        SplitSpec sp = ck.split.value_or(SplitSpec{});
        if (ck.split && (split.train_frac || split.val_frac || split.seed))
            throw ConfigError("checkpoint fixes the split its encoders were trained on; drop the split flags");
        if (split.train_frac) sp.train_frac = *split.train_frac;
        if (split.val_frac) sp.val_frac = *split.val_frac;
        if (split.seed) sp.seed = *split.seed;
        const Split s = make_split(d.num_samples(), sp.train_frac, sp.val_frac, sp.seed);

        const std::vector<std::string>& use = modalities.empty() ? ck.names : modalities;
        RepresentationSet reps;
        for (const auto& name : use) {
            const auto it = std::find(ck.names.begin(), ck.names.end(), name);
            if (it == ck.names.end()) throw ConfigError("checkpoint has no encoder for modality '" + name + "'");
            const auto& enc = ck.state.bank.encoders[static_cast<std::size_t>(it - ck.names.begin())];
            reps.reps.push_back(mlp_forward(enc, d.modalities[d.index_of(name)]));
        }
        std::vector<std::size_t> all(reps.reps.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        const Matrix features = fuse(reps, all);

        const FitConfig fc = fit.resolve(section(cfg, "fit"));
        const auto pred = fit_head(features, d.response, s, t, fc);
        auto report = evaluate(pred, features, d.response, s);
        report.seed = fc.seed;

        const Matrix p = predict(pred, features);
        Matrix rows(p.rows(), 2);
        for (std::size_t i = 0; i < p.rows(); ++i) {
            rows(i, 0) = static_cast<double>(i);
            rows(i, 1) = p(i, 0);
        }
        const fs::path out = output_dir(common, cfg);
        fs::create_directories(out);
        write_csv(out / "predictions.csv", rows, {"row", "prediction"});
        json rj = to_json(report);
        rj["modalities"] = use;
        rj["split"] = {{"train_frac", sp.train_frac}, {"val_frac", sp.val_frac}, {"seed", sp.seed}};
        write_json(out / "eval.json", rj);
        std::cout << rj.dump(2) << "\n";
        return 0;
    }
};

// ---- bench ----

struct BenchCmd {
    Common common;
    std::optional<std::vector<int>> cases, scenarios;
    std::optional<std::vector<std::size_t>> ns;
    std::optional<std::vector<std::string>> combos;
    std::optional<std::size_t> replicates, workers;
    std::optional<std::uint64_t> seed;
    std::optional<double> holdout;
    bool no_selection = false, no_prediction = false;
    std::vector<std::string> formats{"json", "csv", "md"};
    TrainFlags train;

    int run() {
        const json cfg = load_config(common);
        json bj = section(cfg, "bench");
        put(bj, "cases", cases);
        put(bj, "scenarios", scenarios);
        put(bj, "ns", ns);
        put(bj, "combos", combos);
        put(bj, "replicates", replicates);
        put(bj, "workers", workers);
        put(bj, "seed", seed);
        put(bj, "selection_holdout", holdout);
        if (no_selection) bj["run_selection"] = false;
        if (no_prediction) bj["run_prediction"] = false;
        BenchConfig bc = bench_config_from_json(bj);
        bc.train = train.resolve(bj.value("train", json::object()), 4);
        bc.validate();

        std::vector<ReportFormat> fm;
        for (const auto& f : formats) {
            if (f == "json") fm.push_back(ReportFormat::Json);
            else if (f == "csv") fm.push_back(ReportFormat::Csv);
            else if (f == "md" || f == "markdown") fm.push_back(ReportFormat::Markdown);
            else throw ConfigError("unknown report format '" + f + "'");
        }
        const auto res = run_benchmark(bc);
        const fs::path out = output_dir(common, cfg);
        for (const auto& p : emit_report(res, fm, out)) std::cout << p.string() << "\n";
        for (const auto& m : res.failure_messages) std::cerr << "replicate failure: " << m << "\n";
        return 0;
    }
};

int exit_code(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::Config: return 1;
        case ErrorKind::Shape:
        case ErrorKind::Data: return 2;
        case ErrorKind::Numeric: return 3;
    }
    return 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multimodal representation learning and modality selection"};
    app.require_subcommand(1);

    GenCmd gen;
    auto* g = app.add_subcommand("gen", "write a synthetic dataset (CSV + manifest)");
    add_common(g, gen.common);
    gen.synth.add(g);

    TrainCmd train;
    auto* t = app.add_subcommand("train", "fit encoders and write a checkpoint");
    add_common(t, train.common);
    t->add_option("--data", train.data, "dataset manifest")->required();
    t->add_option("--modalities", train.modalities, "modality names (default: all)")->delimiter(',');
    t->add_option("--resume", train.resume, "checkpoint to continue from");
    train.train.add(t);
    train.split.add(t);

    SelectCmd sel;
    auto* s = app.add_subcommand("select", "modality utilities and the estimated active set");
    add_common(s, sel.common);
    s->add_option("--data", sel.data, "dataset manifest")->required();
    s->add_option("--preselected", sel.preselected, "already selected modality names")->delimiter(',');
    s->add_option("--candidates", sel.candidates, "candidate names (default: the rest)")->delimiter(',');
    s->add_option("--checkpoint", sel.checkpoint, "load and freeze preselected encoders from a checkpoint");
    s->add_option("--threshold", sel.threshold, "fixed or permutation")->check(CLI::IsMember({"fixed", "permutation"}));
    s->add_option("--tau", sel.tau, "fixed threshold");
    s->add_option("--level", sel.level, "permutation test level");
    s->add_option("--perms", sel.perms, "number of permutations");
    s->add_option("--holdout", sel.holdout, "fraction of rows held out for scoring");
    s->add_option("--seed", sel.seed, "selection seed");
    sel.train.add(s);

    EvalCmd ev;
    auto* e = app.add_subcommand("eval", "fit the prediction head on fused representations and score it");
    add_common(e, ev.common);
    e->add_option("--data", ev.data, "dataset manifest")->required();
    e->add_option("--checkpoint", ev.checkpoint, "trained encoders")->required();
    e->add_option("--modalities", ev.modalities, "modalities to fuse (default: all in checkpoint)")->delimiter(',');
    e->add_option("--task", ev.task, "regression or binary");
    ev.split.add(e);
    ev.fit.add(e);

    BenchCmd bench;
    auto* b = app.add_subcommand("bench", "synthetic benchmark tables");
    add_common(b, bench.common);
    b->add_option("--cases", bench.cases, "cases")->delimiter(',');
    b->add_option("--scenarios", bench.scenarios, "scenarios")->delimiter(',');
    b->add_option("--ns", bench.ns, "sample sizes")->delimiter(',');
    b->add_option("--combos", bench.combos, "modality combinations")->delimiter(',');
    b->add_option("--replicates", bench.replicates, "replicates per cell");
    b->add_option("--workers", bench.workers, "parallel replicates (0: OpenMP default)");
    b->add_option("--seed", bench.seed, "benchmark seed");
    b->add_option("--selection-holdout", bench.holdout, "held-out fraction for selection scoring");
    b->add_flag("--no-selection", bench.no_selection, "skip the selection runs");
    b->add_flag("--no-prediction", bench.no_prediction, "skip the prediction runs");
    b->add_option("--formats", bench.formats, "json,csv,md")->delimiter(',');
    bench.train.add(b);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int rc = app.exit(err);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*g) return gen.run();
        if (*t) return train.run();
        if (*s) return sel.run();
        if (*e) return ev.run();
        if (*b) return bench.run();
    } catch (const Error& err) {
        std::cerr << "deepsum: " << err.what() << "\n";
        return exit_code(err);
    } catch (const json::exception& err) {
        std::cerr << "deepsum: config: " << err.what() << "\n";
        return 1;
    } catch (const std::filesystem::filesystem_error& err) {
        std::cerr << "deepsum: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "deepsum: " << err.what() << "\n";
        return 3;
    }
    return 1;
}
