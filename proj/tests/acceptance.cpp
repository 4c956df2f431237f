// Acceptance run: one PASS/FAIL line per criterion, then a summary.
//
//   acceptance            all criteria
//   acceptance 1 3 9      a subset
//
// Exit status is 0 only if every requested criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "deepsum/bench.hpp"
#include "deepsum/dcov.hpp"
#include "deepsum/mlp.hpp"
#include "deepsum/rng.hpp"
#include "deepsum/synthgen.hpp"
#include "deepsum/trainer.hpp"
#include "oracles.hpp"

using namespace deepsum;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---- 1: estimators against brute-force loops ----

Outcome estimator_oracles() {
    const auto t0 = Clock::now();
    Rng r(20240101);
    double worst_v = 0.0, worst_u = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 4 + r.index(27);  // 4..30
        const std::size_t d = 1 + r.index(4), q = 1 + r.index(4);
        const Matrix z = r.normal_matrix(n, d), y = r.normal_matrix(n, q);
        worst_v = std::max(worst_v, oracle::rel_err(dcov_v(z, y).value, oracle::dcov_v(z, y)));
        worst_u = std::max(worst_u, oracle::rel_err(dcov_u(z, y).value, oracle::dcov_u(z, y)));
    }
    const double secs = seconds_since(t0);
    return {worst_v <= 1e-12 && worst_u <= 1e-12 && secs < 10.0,
            fmt("max relative error V %.2e, U %.2e over 100 instances (tol 1e-12); %.1f s (limit 10 s)", worst_v,
                worst_u, secs)};
}

// ---- 2: gradients against central differences ----

// Relative error with an absolute floor for entries that are zero up to
// finite-difference noise.
double grad_err(double got, double want) {
    return std::abs(got - want) / std::max({std::abs(got), std::abs(want), 1e-3});
}

Outcome gradient_suite() {
    const auto t0 = Clock::now();
    double worst_dcov = 0.0, worst_mlp = 0.0;
    std::size_t checked = 0;
    Rng r(77);
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 5 + r.index(12);
        const Matrix z = r.normal_matrix(n, 1 + r.index(5)), y = r.normal_matrix(n, 1 + r.index(3));
        const Matrix g = dcov_grad(z, y);
        const Matrix fd = oracle::fd_matrix(z, 1e-5, [&](const Matrix& zz) { return oracle::dcov_v(zz, y); });
        for (std::size_t i = 0; i < g.values().size(); ++i, ++checked)
            worst_dcov = std::max(worst_dcov, grad_err(g.values()[i], fd.values()[i]));
    }
    const std::vector<std::vector<std::size_t>> shapes{{3, 2}, {4, 5, 1}, {10, 32, 16, 8, 5}, {5, 32, 16, 1}, {2, 7, 3, 2}};
    std::uint64_t seed = 500;
    for (const auto& w : shapes)
        for (int trial = 0; trial < 4; ++trial, ++seed) {
            Mlp net = mlp_init(w, seed);
            Rng rr(seed);
            for (std::size_t l = 0; l < net.num_layers(); ++l)
                for (std::size_t j = 0; j < w[l + 1]; ++j) net.params[net.bias_offset(l) + j] = 0.1 * rr.normal();
            const Matrix x = rr.normal_matrix(6, w.front()), up = rr.normal_matrix(6, w.back());
            const auto g = mlp_backward(net, x, up);
            const auto fdp = oracle::mlp_fd_params(net, x, up, 1e-5);
            for (std::size_t i = 0; i < fdp.size(); ++i, ++checked)
                worst_mlp = std::max(worst_mlp, grad_err(g.params[i], fdp[i]));
            const auto fdx = oracle::mlp_fd_input(net, x, up, 1e-5);
            for (std::size_t i = 0; i < fdx.values().size(); ++i, ++checked)
                worst_mlp = std::max(worst_mlp, grad_err(g.input.values()[i], fdx.values()[i]));
        }
    const double secs = seconds_since(t0);
    return {worst_dcov <= 1e-6 && worst_mlp <= 1e-6 && secs < 30.0,
            fmt("max relative error dcov_grad %.2e, mlp_backward %.2e over %zu entries (tol 1e-6, floor 1e-3); "
                "%.1f s (limit 30 s)",
                worst_dcov, worst_mlp, checked, secs)};
}

// ---- 3: permutation test calibration ----

Outcome permutation_calibration() {
    const auto t0 = Clock::now();
    const std::size_t reps = 200;
    std::size_t rejected = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        Rng r(derive_seed(3, rep));
        const Matrix z = r.normal_matrix(500, 1), y = r.normal_matrix(500, 1);
        const auto t = perm_test(z, y, 200, 0.05, derive_seed(33, rep));
        if (t.observed > t.threshold) ++rejected;
    }
    const double rate = double(rejected) / reps;
    const double secs = seconds_since(t0);
    return {rate >= 0.02 && rate <= 0.10 && secs < 300.0,
            fmt("rejection rate %.1f%% (%zu/200, band 2-10%%); %.1f s (limit 300 s)", 100 * rate, rejected, secs)};
}

// ---- 4: Gaussianization of a single trained modality ----

Outcome gaussianization() {
    const auto t0 = Clock::now();
    int pass = 0;
    std::string per_seed;
    for (std::uint64_t s = 1; s <= 10; ++s) {
        SynthConfig sc;
        sc.case_id = 1;
        sc.scenario = 3;
        sc.n = 3000;
        sc.seed = derive_seed(4, s);
        const auto ds = gen_dataset(sc);
        const std::vector<std::size_t> x{0};
        auto cfg = TrainConfig::defaults(1);
        cfg.lambda = {1.0};
        cfg.log_objective = false;
        cfg.seed = derive_seed(40, s);
        const auto res = train_deepsum(ds.data.select(x), cfg);
        const Matrix& rep = res.reps.reps[0];
        const auto mu = column_means(rep);
        const Matrix cov = covariance(rep);
        double norm = 0.0, dev = 0.0;
        for (double m : mu) norm += m * m;
        norm = std::sqrt(norm);
        for (std::size_t a = 0; a < cov.rows(); ++a)
            for (std::size_t b = 0; b < cov.cols(); ++b) dev = std::max(dev, std::abs(cov(a, b) - (a == b ? 1.0 : 0.0)));
        const bool ok = rep.cols() == 5 && norm <= 0.3 && dev <= 0.35;
        pass += ok;
        per_seed += fmt(" %s(%.2f,%.2f)", ok ? "ok" : "no", norm, dev);
    }
    return {pass >= 8, fmt("%d/10 seeds with mean norm <= 0.3 and max |cov - I| <= 0.35 (need 8); "
                           "per seed (norm, dev):%s; %.0f s",
                           pass, per_seed.c_str(), seconds_since(t0))};
}

// ---- 5, 6: prediction tables ----

const ComboStats* find_combo(const BenchCell& c, const std::string& name) {
    for (const auto& s : c.combos)
        if (s.combo == name) return &s;
    return nullptr;
}

Outcome table1_band() {
    const auto t0 = Clock::now();
    BenchConfig bc;
    bc.cases = {1};
    bc.scenarios = {3};
    bc.ns = {3000};
    bc.replicates = 10;
    bc.combos = {"X"};
    bc.run_selection = false;
    bc.seed = 5;
    const auto res = run_benchmark(bc);
    const auto* x = find_combo(res.cells.at(0), "X");
    const double secs = seconds_since(t0);
    if (!x || x->signal_mse.size() != 10)
        return {false, fmt("%zu/10 replicates succeeded", x ? x->signal_mse.size() : 0)};
    const double m = x->signal_mse_mean;
    return {m >= 0.15 && m <= 0.45 && secs <= 1800.0,
            fmt("Case 1/Scenario 3/n=3000 X: mean test MSE %.3f (sd %.3f) over 10 replicates, band [0.15, 0.45], "
                "reference 0.281 (0.13); %.0f s (limit 1800 s)",
                m, x->signal_mse_std, secs)};
}

Outcome table2_ordering(std::string& info) {
    const auto t0 = Clock::now();
    BenchConfig bc;
    bc.cases = {2};
    bc.scenarios = {2};
    bc.ns = {3000};
    bc.replicates = 10;
    bc.combos = {"X", "XU", "XV", "XW"};
    bc.run_selection = false;
    bc.seed = 6;
    const auto res = run_benchmark(bc);
    struct Ref {
        const char* name;
        double mean, sd;
    };
    const Ref refs[] = {{"XU", 0.62, 0.175}, {"X", 1.718, 0.877}, {"XV", 2.679, 0.642}, {"XW", 2.861, 0.684}};
    std::map<std::string, double> got;
    bool within = true, complete = true;
    std::string detail;
    for (const auto& ref : refs) {
        const auto* c = find_combo(res.cells.at(0), ref.name);
        if (!c || c->signal_mse.size() != 10) {
            complete = false;
            continue;
        }
        got[ref.name] = c->signal_mse_mean;
        const bool in = std::abs(c->signal_mse_mean - ref.mean) <= 2 * ref.sd;
        within = within && in;
        detail += fmt("%s %.3f (sd %.3f; reference %.3f +- 2x%.3f %s), ", ref.name, c->signal_mse_mean,
                      c->signal_mse_std, ref.mean, ref.sd, in ? "in" : "OUT");
    }
    if (!complete) return {false, detail + "some replicates failed"};
    const bool ordered = got["XU"] < got["X"] && got["X"] < got["XV"] && got["XV"] < got["XW"];
    info = fmt("MSEXW >= MSEX: %s (%.3f vs %.3f)", got["XW"] >= got["X"] ? "yes" : "no", got["XW"], got["X"]);
    return {ordered && within, detail + fmt("strict order XU < X < XV < XW: %s; %.0f s", ordered ? "yes" : "no",
                                            seconds_since(t0))};
}

// ---- 7, 8: selection ----

struct SelectionRun {
    std::vector<std::size_t> ns;
    std::vector<SelectionStats> stats;
    double seconds = 0.0;
};

SelectionRun selection_runs() {
    const auto t0 = Clock::now();
    BenchConfig bc;
    bc.cases = {2};
    bc.scenarios = {2};
    bc.ns = {500, 1500, 3000};
    bc.replicates = 20;
    bc.run_prediction = false;
    bc.seed = 7;
    const auto res = run_benchmark(bc);
    SelectionRun out;
    for (const auto& c : res.cells) {
        out.ns.push_back(c.n);
        out.stats.push_back(c.selection);
    }
    out.seconds = seconds_since(t0);
    return out;
}

double share(const SelectionStats& s, const std::string& name, bool active) {
    for (std::size_t i = 0; i < s.candidates.size(); ++i)
        if (s.candidates[i] == name) return active ? s.active_prop[i] : s.top_prop[i];
    return std::nan("");
}

Outcome table4_selection(const SelectionRun& sr, std::string& info) {
    const auto it = std::find(sr.ns.begin(), sr.ns.end(), std::size_t{3000});
    if (it == sr.ns.end()) return {false, "no n=3000 cell"};
    const auto& s = sr.stats[static_cast<std::size_t>(it - sr.ns.begin())];
    if (s.runs != 20) return {false, fmt("%zu/20 selection replicates succeeded", s.runs)};
    const double u = share(s, "U", false), v = share(s, "V", false), w = share(s, "W", false);
    info = fmt("active-set shares at n=3000 (utility above its permutation threshold): U %.0f%%, V %.0f%%, W %.0f%%",
               100 * share(s, "U", true), 100 * share(s, "V", true), 100 * share(s, "W", true));
    return {u >= 0.90 && w == 0.0,
            fmt("Case 2/Scenario 2/n=3000, X preselected, 20 replicates: U top %.0f%% (need >= 90%%), V %.0f%%, "
                "W %.0f%% (need 0%%); reference U 100%%",
                100 * u, 100 * v, 100 * w)};
}

Outcome consistency(const SelectionRun& sr) {
    std::string detail;
    bool monotone = true, complete = true;
    double prev = -1.0;
    for (std::size_t i = 0; i < sr.ns.size(); ++i) {
        const double u = share(sr.stats[i], "U", false);
        complete = complete && sr.stats[i].runs == 20;
        detail += fmt("n=%zu %.0f%%, ", sr.ns[i], 100 * u);
        monotone = monotone && u >= prev;
        prev = u;
    }
    return {monotone && complete,
            fmt("U-top proportion over n (20 replicates each): %snon-decreasing: %s; selection runs %.0f s",
                detail.c_str(), monotone ? "yes" : "no", sr.seconds)};
}

// ---- 9: determinism ----

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
    const auto t0 = Clock::now();
    BenchConfig bc;
    bc.cases = {1, 2};
    bc.scenarios = {2};
    bc.ns = {300};
    bc.replicates = 2;
    bc.combos = {"X", "XU"};
    bc.train.outer_iters = 4;
    bc.train.inner_steps = 10;
    bc.threshold.num_perms = 49;
    bc.seed = 9;
    const auto dir = std::filesystem::temp_directory_path() / fmt("deepsum_accept_%d", int(::getpid()));
    std::filesystem::remove_all(dir);
    emit_report(run_benchmark(bc), {ReportFormat::Json}, dir / "a");
    bc.workers = 1;
    emit_report(run_benchmark(bc), {ReportFormat::Json}, dir / "b");
    const std::string a = slurp(dir / "a" / "report.json"), b = slurp(dir / "b" / "report.json");
    std::filesystem::remove_all(dir);
    return {!a.empty() && a == b,
            fmt("two bench runs (default workers, then 1 worker): report.json %zu vs %zu bytes, %s; %.0f s", a.size(),
                b.size(), a == b ? "byte-identical" : "DIFFERENT", seconds_since(t0))};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> want;
    for (int i = 1; i < argc; ++i) want.insert(std::atoi(argv[i]));
    if (want.empty()) want = {1, 2, 3, 4, 5, 6, 7, 8, 9};

    const char* names[] = {"",
                           "estimator oracle equivalence",
                           "gradient suite",
                           "permutation calibration",
                           "Gaussianization",
                           "Case 1 prediction band",
                           "Case 2 prediction ordering",
                           "selection of U",
                           "selection consistency",
                           "determinism"};
    int failed = 0;
    auto report = [&](int id, const Outcome& o) {
        std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, names[id], o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    };
    auto note = [](const std::string& s) {
        if (!s.empty()) std::printf("INFO %s\n", s.c_str());
        std::fflush(stdout);
    };

    if (want.count(1)) report(1, estimator_oracles());
    if (want.count(2)) report(2, gradient_suite());
    if (want.count(3)) report(3, permutation_calibration());
    if (want.count(4)) report(4, gaussianization());
    if (want.count(5)) report(5, table1_band());
    if (want.count(6)) {
        std::string info;
        report(6, table2_ordering(info));
        note(info);
    }
    if (want.count(7) || want.count(8)) {
        const auto sr = selection_runs();
        if (want.count(7)) {
            std::string info;
            report(7, table4_selection(sr, info));
            note(info);
        }
        if (want.count(8)) report(8, consistency(sr));
    }
    if (want.count(9)) report(9, determinism());

    std::printf("%zu criteria, %d failed\n", want.size(), failed);
    return failed == 0 ? 0 : 1;
}
