#include "deepsum/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <omp.h>

#include "deepsum/error.hpp"
#include "deepsum/io.hpp"
#include "deepsum/rng.hpp"
#include "deepsum/serialize.hpp"
#include "deepsum/synthgen.hpp"

namespace deepsum {

using nlohmann::json;

namespace {

const std::vector<std::string> kFixedOrder{"X", "XU", "XV", "XW"};

struct ComboOutcome {
    bool ok = false;
    double mse = 0.0, signal_mse = 0.0;
};

struct ReplicateOutcome {
    std::vector<ComboOutcome> combos;
    bool selection_ok = false;
    std::size_t top = 0;
    std::vector<std::size_t> active;
    std::vector<std::string> errors;
    double seconds = 0.0;
};

struct CellKey {
    int case_id, scenario;
    std::size_t n;
};

ReplicateOutcome run_replicate(const BenchConfig& cfg, const CellKey& cell, std::size_t r) {
    ReplicateOutcome out;
    out.combos.resize(cfg.combos.size());
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t seed_r = derive_seed(cfg.seed, r);
    const std::string where = "case " + std::to_string(cell.case_id) + " scenario " +
                              std::to_string(cell.scenario) + " n " + std::to_string(cell.n) + " replicate " +
                              std::to_string(r);

    SynthDataset ds;
    try {
        SynthConfig sc;
        sc.case_id = cell.case_id;
        sc.scenario = cell.scenario;
        sc.n = cell.n;
        sc.p = cfg.p;
        sc.q = cfg.q;
        sc.sigma = cfg.sigma;
        sc.seed = derive_seed(seed_r, 0);
        ds = gen_dataset(sc);
    } catch (const std::exception& e) {
        out.errors.push_back(where + ": " + e.what());
        return out;
    }

    if (cfg.run_prediction) {
        const Split split = make_split(cell.n, cfg.train_frac, cfg.val_frac, derive_seed(seed_r, 1));
        for (std::size_t c = 0; c < cfg.combos.size(); ++c) {
            try {
                const auto idx = combo_indices(cfg.combos[c]);
                const MultimodalDataset sub = ds.data.select(idx);
                TrainConfig tcfg = restrict_config(cfg.train, idx);
                tcfg.seed = derive_seed(seed_r, 2);
                tcfg.log_objective = false;
                const TrainResult res = train_deepsum(sub.rows(split.train), tcfg);
                const RepresentationSet reps = encode_all(res.bank, sub);
                std::vector<std::size_t> all(idx.size());
                for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
                const Matrix f = fuse(reps, all);
                FitConfig fc = cfg.fit;
                fc.seed = derive_seed(seed_r, 3);
                const Predictor pred = fit_head(f, sub.response, split, Task::Regression, fc);
                out.combos[c].mse = evaluate(pred, f, sub.response, split).mse;
                out.combos[c].signal_mse = evaluate(pred, f, ds.signal, split).mse;
                out.combos[c].ok = std::isfinite(out.combos[c].mse) && std::isfinite(out.combos[c].signal_mse);
                if (!out.combos[c].ok) out.errors.push_back(where + " " + cfg.combos[c] + ": non-finite MSE");
            } catch (const std::exception& e) {
                out.errors.push_back(where + " " + cfg.combos[c] + ": " + e.what());
            }
        }
    }

    if (cfg.run_selection) {
        try {
            SelectionConfig scfg;
            scfg.mode = SelectionMode::Conditional;
            scfg.preselected = {0};
            scfg.threshold = cfg.threshold;
            scfg.holdout_frac = cfg.selection_holdout;
            scfg.seed = derive_seed(seed_r, 4);
            TrainConfig tcfg = cfg.train;
            tcfg.seed = derive_seed(seed_r, 4);
            tcfg.log_objective = false;
            const auto res = conditional_select(ds.data, {0}, {1, 2, 3}, tcfg, scfg);
            out.top = *res.report.top();
            out.active = res.report.active;
            out.selection_ok = true;
        } catch (const std::exception& e) {
            out.errors.push_back(where + " selection: " + e.what());
        }
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

void finish_stats(BenchCell& cell) {
    for (auto& c : cell.combos) {
        std::tie(c.mse_mean, c.mse_std) = mean_std(c.mse);
        std::tie(c.signal_mse_mean, c.signal_mse_std) = mean_std(c.signal_mse);
    }
    auto& s = cell.selection;
    s.top_prop.assign(s.candidates.size(), 0.0);
    s.active_prop.assign(s.candidates.size(), 0.0);
    if (s.runs == 0) return;
    for (std::size_t i = 0; i < s.candidates.size(); ++i) {
        s.top_prop[i] = static_cast<double>(s.top_counts[i]) / static_cast<double>(s.runs);
        s.active_prop[i] = static_cast<double>(s.active_counts[i]) / static_cast<double>(s.runs);
    }
}

std::vector<std::string> ordered_combos(const BenchmarkResult& r) {
    std::vector<std::string> out;
    auto seen = [&](const std::string& c) { return std::find(out.begin(), out.end(), c) != out.end(); };
    auto present = [&](const std::string& name) {
        for (const auto& cell : r.cells)
            for (const auto& c : cell.combos)
                if (c.combo == name) return true;
        return false;
    };
    for (const auto& c : kFixedOrder)
        if (present(c)) out.push_back(c);
    for (const auto& cell : r.cells)
        for (const auto& c : cell.combos)
            if (!seen(c.combo)) out.push_back(c.combo);
    return out;
}

json threshold_json(const ThresholdPolicy& t) {
    SelectionConfig s;
    s.threshold = t;
    return to_json(s).at("threshold");
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

}  // namespace

void BenchConfig::validate() const {
    if (replicates < 1) throw ConfigError("bench: replicates must be >= 1");
    if (cases.empty() || scenarios.empty() || ns.empty()) throw ConfigError("bench: empty case/scenario/n list");
    for (int c : cases)
        if (c < 1 || c > 3) throw ConfigError("bench: case must be 1, 2 or 3");
    for (int s : scenarios)
        if (s < 1 || s > 3) throw ConfigError("bench: scenario must be 1, 2 or 3");
    for (auto n : ns)
        if (n < 10) throw ConfigError("bench: n must be >= 10");
    for (const auto& c : combos) combo_indices(c);
    if (train.num_modalities() != 4) throw ConfigError("bench: train config must cover X, U, V, W");
    if (!(train_frac > 0.0) || !(val_frac >= 0.0) || train_frac + val_frac >= 1.0)
        throw ConfigError("bench: split fractions must leave a non-empty test part");
    if (!(selection_holdout >= 0.0 && selection_holdout < 1.0))
        throw ConfigError("bench: selection_holdout must lie in [0, 1)");
    train.validate();
}

std::vector<std::size_t> combo_indices(const std::string& combo) {
    static const std::string letters = "XUVW";
    std::vector<std::size_t> out;
    for (char ch : combo) {
        const auto pos = letters.find(ch);
        if (pos == std::string::npos) throw ConfigError("combination '" + combo + "': unknown modality '" + ch + "'");
        if (std::find(out.begin(), out.end(), pos) != out.end())
            throw ConfigError("combination '" + combo + "': repeated modality");
        out.push_back(pos);
    }
    if (out.empty()) throw ConfigError("empty modality combination");
    return out;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
    if (v.empty()) return {0.0, 0.0};
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    if (v.size() < 2) return {m, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

BenchmarkResult run_benchmark(const BenchConfig& cfg) {
    cfg.validate();
    std::vector<CellKey> cells;
    for (int c : cfg.cases)
        for (int s : cfg.scenarios)
            for (auto n : cfg.ns) cells.push_back({c, s, n});

    const std::size_t R = cfg.replicates;
    const std::size_t tasks = cells.size() * R;
    std::vector<ReplicateOutcome> outcomes(tasks);
    const int width = cfg.workers ? static_cast<int>(cfg.workers) : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 1) num_threads(width)
    for (std::size_t t = 0; t < tasks; ++t) outcomes[t] = run_replicate(cfg, cells[t / R], t % R);

    BenchmarkResult res;
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        BenchCell cell;
        cell.case_id = cells[ci].case_id;
        cell.scenario = cells[ci].scenario;
        cell.n = cells[ci].n;
        cell.replicates = R;
        if (cfg.run_prediction)
            for (const auto& c : cfg.combos) {
                ComboStats st;
                st.combo = c;
                cell.combos.push_back(std::move(st));
            }
        if (cfg.run_selection) {
            cell.selection.candidates = {"U", "V", "W"};
            cell.selection.top_counts.assign(3, 0);
            cell.selection.active_counts.assign(3, 0);
        }
        std::vector<double> secs;
        for (std::size_t r = 0; r < R; ++r) {
            const auto& o = outcomes[ci * R + r];
            secs.push_back(o.seconds);
            if (!o.errors.empty()) cell.failed.push_back(r);
            for (const auto& e : o.errors) res.failure_messages.push_back(e);
            for (std::size_t c = 0; c < cell.combos.size(); ++c) {
                if (!o.combos[c].ok) continue;
                cell.combos[c].mse.push_back(o.combos[c].mse);
                cell.combos[c].signal_mse.push_back(o.combos[c].signal_mse);
            }
            if (cfg.run_selection && o.selection_ok) {
                ++cell.selection.runs;
                ++cell.selection.top_counts[o.top - 1];
                for (auto a : o.active) ++cell.selection.active_counts[a - 1];
            }
        }
        finish_stats(cell);
        res.cells.push_back(std::move(cell));
        res.seconds.push_back(std::move(secs));
    }
    return res;
}

json to_json(const BenchConfig& c) {
    return {{"cases", c.cases},
            {"scenarios", c.scenarios},
            {"ns", c.ns},
            {"replicates", c.replicates},
            {"combos", c.combos},
            {"run_selection", c.run_selection},
            {"run_prediction", c.run_prediction},
            {"p", c.p},
            {"q", c.q},
            {"sigma", c.sigma},
            {"train_frac", c.train_frac},
            {"val_frac", c.val_frac},
            {"train", to_json(c.train)},
            {"fit", to_json(c.fit)},
            {"threshold", threshold_json(c.threshold)},
            {"selection_holdout", c.selection_holdout},
            {"seed", c.seed}};
}

BenchConfig bench_config_from_json(const json& j, BenchConfig c) {
    try {
        if (j.contains("cases")) c.cases = j.at("cases").get<std::vector<int>>();
        if (j.contains("scenarios")) c.scenarios = j.at("scenarios").get<std::vector<int>>();
        if (j.contains("ns")) c.ns = j.at("ns").get<std::vector<std::size_t>>();
        if (j.contains("replicates")) c.replicates = j.at("replicates").get<std::size_t>();
        if (j.contains("combos")) c.combos = j.at("combos").get<std::vector<std::string>>();
        if (j.contains("run_selection")) c.run_selection = j.at("run_selection").get<bool>();
        if (j.contains("run_prediction")) c.run_prediction = j.at("run_prediction").get<bool>();
        if (j.contains("p")) c.p = j.at("p").get<std::size_t>();
        if (j.contains("q")) c.q = j.at("q").get<std::size_t>();
        if (j.contains("sigma")) c.sigma = j.at("sigma").get<double>();
        if (j.contains("train_frac")) c.train_frac = j.at("train_frac").get<double>();
        if (j.contains("val_frac")) c.val_frac = j.at("val_frac").get<double>();
        if (j.contains("train")) c.train = train_config_from_json(j.at("train"), 4);
        if (j.contains("fit")) c.fit = fit_config_from_json(j.at("fit"), c.fit);
        if (j.contains("threshold")) {
            SelectionConfig s;
            s.threshold = c.threshold;
            c.threshold = selection_config_from_json({{"threshold", j.at("threshold")}}, s).threshold;
        }
        if (j.contains("selection_holdout")) c.selection_holdout = j.at("selection_holdout").get<double>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("workers")) c.workers = j.at("workers").get<std::size_t>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bench config: ") + e.what());
    }
    return c;
}

json report_json(const BenchmarkResult& r) {
    json cells = json::array();
    for (const auto& cell : r.cells) {
        json combos = json::array();
        for (const auto& c : cell.combos)
            combos.push_back({{"combo", c.combo},
                              {"mse", c.mse},
                              {"signal_mse", c.signal_mse},
                              {"mse_mean", c.mse_mean},
                              {"mse_std", c.mse_std},
                              {"signal_mse_mean", c.signal_mse_mean},
                              {"signal_mse_std", c.signal_mse_std}});
        const auto& s = cell.selection;
        json sel = {{"candidates", s.candidates}, {"top_counts", s.top_counts}, {"active_counts", s.active_counts},
                    {"top_prop", s.top_prop},     {"active_prop", s.active_prop}, {"runs", s.runs}};
        cells.push_back({{"case", cell.case_id},
                         {"scenario", cell.scenario},
                         {"n", cell.n},
                         {"replicates", cell.replicates},
                         {"failed", cell.failed},
                         {"combos", combos},
                         {"selection", sel}});
    }
    return {{"cells", cells}};
}

BenchmarkResult result_from_json(const json& j) {
    BenchmarkResult res;
    try {
        for (const auto& jc : j.at("cells")) {
            BenchCell cell;
            cell.case_id = jc.at("case").get<int>();
            cell.scenario = jc.at("scenario").get<int>();
            cell.n = jc.at("n").get<std::size_t>();
            cell.replicates = jc.at("replicates").get<std::size_t>();
            cell.failed = jc.at("failed").get<std::vector<std::size_t>>();
            for (const auto& c : jc.at("combos")) {
                ComboStats st;
                st.combo = c.at("combo").get<std::string>();
                st.mse = c.at("mse").get<std::vector<double>>();
                st.signal_mse = c.at("signal_mse").get<std::vector<double>>();
                st.mse_mean = c.at("mse_mean").get<double>();
                st.mse_std = c.at("mse_std").get<double>();
                st.signal_mse_mean = c.at("signal_mse_mean").get<double>();
                st.signal_mse_std = c.at("signal_mse_std").get<double>();
                cell.combos.push_back(std::move(st));
            }
            const auto& s = jc.at("selection");
            cell.selection.candidates = s.at("candidates").get<std::vector<std::string>>();
            cell.selection.top_counts = s.at("top_counts").get<std::vector<std::size_t>>();
            cell.selection.active_counts = s.at("active_counts").get<std::vector<std::size_t>>();
            cell.selection.top_prop = s.at("top_prop").get<std::vector<double>>();
            cell.selection.active_prop = s.at("active_prop").get<std::vector<double>>();
            cell.selection.runs = s.at("runs").get<std::size_t>();
            res.cells.push_back(std::move(cell));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("benchmark report: ") + e.what());
    }
    return res;
}

// Long format, one value per row:
//   case,scenario,n,replicates,kind,name,index,value
std::string report_csv(const BenchmarkResult& r) {
    std::ostringstream os;
    os << "case,scenario,n,replicates,kind,name,index,value\n";
    for (const auto& cell : r.cells) {
        const std::string key = std::to_string(cell.case_id) + "," + std::to_string(cell.scenario) + "," +
                                std::to_string(cell.n) + "," + std::to_string(cell.replicates) + ",";
        auto row = [&](const std::string& kind, const std::string& name, std::size_t i, double v) {
            os << key << kind << "," << name << "," << i << "," << format_double(v) << "\n";
        };
        row("cell", "", 0, 0.0);
        for (std::size_t i = 0; i < cell.failed.size(); ++i) row("failed", "", i, static_cast<double>(cell.failed[i]));
        for (const auto& c : cell.combos) {
            row("combo", c.combo, 0, static_cast<double>(c.mse.size()));
            for (std::size_t i = 0; i < c.mse.size(); ++i) row("mse", c.combo, i, c.mse[i]);
            for (std::size_t i = 0; i < c.signal_mse.size(); ++i) row("signal_mse", c.combo, i, c.signal_mse[i]);
            row("mse_mean", c.combo, 0, c.mse_mean);
            row("mse_std", c.combo, 0, c.mse_std);
            row("signal_mse_mean", c.combo, 0, c.signal_mse_mean);
            row("signal_mse_std", c.combo, 0, c.signal_mse_std);
        }
        const auto& s = cell.selection;
        row("selection_runs", "", 0, static_cast<double>(s.runs));
        for (std::size_t i = 0; i < s.candidates.size(); ++i) {
            row("top_count", s.candidates[i], i, static_cast<double>(s.top_counts[i]));
            row("active_count", s.candidates[i], i, static_cast<double>(s.active_counts[i]));
            row("top_prop", s.candidates[i], i, s.top_prop[i]);
            row("active_prop", s.candidates[i], i, s.active_prop[i]);
        }
    }
    return os.str();
}

BenchmarkResult result_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != "case,scenario,n,replicates,kind,name,index,value")
        throw ParseError("benchmark csv: unexpected header");
    BenchmarkResult res;
    std::size_t lineno = 1;
    auto combo_of = [](BenchCell& cell, const std::string& name) -> ComboStats& {
        for (auto& c : cell.combos)
            if (c.combo == name) return c;
        throw ParseError("benchmark csv: value for undeclared combination '" + name + "'");
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) f.push_back(field);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 8) throw ParseError("benchmark csv:" + std::to_string(lineno) + ": expected 8 fields");
        double v;
        if (!parse_double(f[7], v)) throw ParseError("benchmark csv:" + std::to_string(lineno) + ": bad value");
        const std::string& kind = f[4];
        const std::string& name = f[5];
        const auto idx = static_cast<std::size_t>(std::stoull(f[6]));
        if (kind == "cell") {
            BenchCell cell;
            cell.case_id = std::stoi(f[0]);
            cell.scenario = std::stoi(f[1]);
            cell.n = std::stoull(f[2]);
            cell.replicates = std::stoull(f[3]);
            cell.selection.candidates.clear();
            res.cells.push_back(std::move(cell));
            continue;
        }
        if (res.cells.empty()) throw ParseError("benchmark csv:" + std::to_string(lineno) + ": row before cell");
        BenchCell& cell = res.cells.back();
        auto& s = cell.selection;
        const auto count = static_cast<std::size_t>(v);
        if (kind == "failed") cell.failed.push_back(count);
        else if (kind == "combo") {
            ComboStats st;
            st.combo = name;
            cell.combos.push_back(std::move(st));
        }
        else if (kind == "mse") combo_of(cell, name).mse.push_back(v);
        else if (kind == "signal_mse") combo_of(cell, name).signal_mse.push_back(v);
        else if (kind == "mse_mean") combo_of(cell, name).mse_mean = v;
        else if (kind == "mse_std") combo_of(cell, name).mse_std = v;
        else if (kind == "signal_mse_mean") combo_of(cell, name).signal_mse_mean = v;
        else if (kind == "signal_mse_std") combo_of(cell, name).signal_mse_std = v;
        else if (kind == "selection_runs") s.runs = count;
        else if (kind == "top_count" || kind == "active_count" || kind == "top_prop" || kind == "active_prop") {
            if (idx == s.candidates.size()) {
                s.candidates.push_back(name);
                s.top_counts.push_back(0);
                s.active_counts.push_back(0);
                s.top_prop.push_back(0.0);
                s.active_prop.push_back(0.0);
            }
            if (idx >= s.candidates.size()) throw ParseError("benchmark csv:" + std::to_string(lineno) + ": bad index");
            if (kind == "top_count") s.top_counts[idx] = count;
            else if (kind == "active_count") s.active_counts[idx] = count;
            else if (kind == "top_prop") s.top_prop[idx] = v;
            else s.active_prop[idx] = v;
        } else {
            throw ParseError("benchmark csv:" + std::to_string(lineno) + ": unknown kind '" + kind + "'");
        }
    }
    return res;
}

std::string report_markdown(const BenchmarkResult& r) {
    std::ostringstream os;
    const auto combos = ordered_combos(r);

    std::vector<int> scenarios;
    std::vector<std::pair<int, std::size_t>> groups;  // (case, n)
    for (const auto& c : r.cells) {
        if (std::find(scenarios.begin(), scenarios.end(), c.scenario) == scenarios.end())
            scenarios.push_back(c.scenario);
        if (std::find(groups.begin(), groups.end(), std::pair{c.case_id, c.n}) == groups.end())
            groups.emplace_back(c.case_id, c.n);
    }
    std::sort(scenarios.begin(), scenarios.end());

    auto mse_tables = [&](const char* title, bool signal) {
        os << "## " << title << "\n\n";
        if (groups.empty() || combos.empty()) {
            os << "| Modalities |\n|---|\n\n";
            return;
        }
        for (const auto& [case_id, n] : groups) {
            os << "### Case " << case_id << ", n = " << n << "\n\n| Modalities |";
            for (int s : scenarios) os << " Scenario " << s << " |";
            os << "\n|---|";
            for (std::size_t i = 0; i < scenarios.size(); ++i) os << "---|";
            os << "\n";
            for (const auto& name : combos) {
                os << "| " << name << " |";
                for (int s : scenarios) {
                    const BenchCell* cell = nullptr;
                    for (const auto& c : r.cells)
                        if (c.case_id == case_id && c.n == n && c.scenario == s) cell = &c;
                    const ComboStats* st = nullptr;
                    if (cell)
                        for (const auto& c : cell->combos)
                            if (c.combo == name) st = &c;
                    if (!st || st->mse.empty()) {
                        os << " - |";
                        continue;
                    }
                    const double m = signal ? st->signal_mse_mean : st->mse_mean;
                    const double sd = signal ? st->signal_mse_std : st->mse_std;
                    os << " " << fmt("%.3f", m) << " (" << fmt("%.3f", sd) << ") |";
                }
                os << "\n";
            }
            os << "\n";
        }
    };
    mse_tables("Test MSE against the noise-free signal, mean (std)", true);
    mse_tables("Test MSE against the observed response, mean (std)", false);

    os << "## Selection with X preselected (share of replicates where each candidate has the largest utility)\n\n";
    os << "| Case | Scenario | n | U | V | W | runs |\n|---|---|---|---|---|---|---|\n";
    for (const auto& c : r.cells) {
        const auto& s = c.selection;
        if (s.candidates.empty() || s.top_prop.size() != s.candidates.size()) continue;
        os << "| " << c.case_id << " | " << c.scenario << " | " << c.n << " |";
        for (std::size_t i = 0; i < s.candidates.size(); ++i) os << " " << fmt("%.1f", 100.0 * s.top_prop[i]) << "% |";
        os << " " << s.runs << " |\n";
    }
    os << "\n## Estimated active set with X preselected (share of replicates where each candidate exceeds its threshold)\n\n";
    os << "| Case | Scenario | n | U | V | W | runs |\n|---|---|---|---|---|---|---|\n";
    for (const auto& c : r.cells) {
        const auto& s = c.selection;
        if (s.candidates.empty() || s.active_prop.size() != s.candidates.size()) continue;
        os << "| " << c.case_id << " | " << c.scenario << " | " << c.n << " |";
        for (std::size_t i = 0; i < s.candidates.size(); ++i)
            os << " " << fmt("%.1f", 100.0 * s.active_prop[i]) << "% |";
        os << " " << s.runs << " |\n";
    }
    os << "\n";
    return os.str();
}

std::vector<std::filesystem::path> emit_report(const BenchmarkResult& r, const std::vector<ReportFormat>& formats,
                                               const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> out;
    try {
        std::filesystem::create_directories(dir);
    } catch (const std::filesystem::filesystem_error& e) {
        throw DataError("cannot create output directory '" + dir.string() + "': " + e.what());
    }
    for (auto f : formats) {
        std::filesystem::path p;
        switch (f) {
            case ReportFormat::Json:
                p = dir / "report.json";
                write_text_file(p, report_json(r).dump(2) + "\n");
                break;
            case ReportFormat::Csv:
                p = dir / "report.csv";
                write_text_file(p, report_csv(r));
                break;
            case ReportFormat::Markdown:
                p = dir / "report.md";
                write_text_file(p, report_markdown(r));
                break;
        }
        out.push_back(p);
    }
    return out;
}

}  // namespace deepsum
