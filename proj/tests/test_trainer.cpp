#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "deepsum/dcov.hpp"
#include "deepsum/downstream.hpp"
#include "deepsum/error.hpp"
#include "deepsum/rng.hpp"
#include "deepsum/synthgen.hpp"
#include "deepsum/trainer.hpp"
#include "oracles.hpp"

using namespace deepsum;

namespace {

MultimodalDataset make_data(std::size_t n, std::vector<std::size_t> dims, std::size_t q, std::uint64_t seed) {
    Rng r(seed);
    MultimodalDataset d;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        d.modalities.push_back(r.normal_matrix(n, dims[k]));
        d.names.push_back("m" + std::to_string(k));
    }
    d.response = r.normal_matrix(n, q);
    return d;
}

TrainConfig small_config(std::size_t K, std::uint64_t seed = 1) {
    auto c = TrainConfig::defaults(K);
    c.outer_iters = 3;
    c.inner_steps = 5;
    c.batch = 32;
    c.disc.steps = 20;
    c.seed = seed;
    return c;
}

std::vector<ParticleSet> particles_of(const RepresentationSet& reps) {
    std::vector<ParticleSet> out;
    for (std::size_t k = 0; k < reps.reps.size(); ++k) out.push_back({reps.reps[k], k});
    return out;
}

double mismatch(const Matrix& a, const Matrix& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a.flat()[i] - b.flat()[i]) * (a.flat()[i] - b.flat()[i]);
    return s / static_cast<double>(a.rows());
}

// Top `d` principal directions of x (columns), by cyclic Jacobi on the covariance.
Matrix pca_basis(const Matrix& x, std::size_t d) {
    Matrix a = covariance(x);
    const std::size_t p = a.rows();
    Matrix v(p, p, 0.0);
    for (std::size_t i = 0; i < p; ++i) v(i, i) = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-24) break;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j) {
                if (std::abs(a(i, j)) < 1e-300) continue;
                const double th = 0.5 * std::atan2(2 * a(i, j), a(j, j) - a(i, i));
                const double c = std::cos(th), s = std::sin(th);
                for (std::size_t k = 0; k < p; ++k) {
                    const double aki = a(k, i), akj = a(k, j);
                    a(k, i) = c * aki - s * akj;
                    a(k, j) = s * aki + c * akj;
                }
                for (std::size_t k = 0; k < p; ++k) {
                    const double aik = a(i, k), ajk = a(j, k);
                    a(i, k) = c * aik - s * ajk;
                    a(j, k) = s * aik + c * ajk;
                }
                for (std::size_t k = 0; k < p; ++k) {
                    const double vki = v(k, i), vkj = v(k, j);
                    v(k, i) = c * vki - s * vkj;
                    v(k, j) = s * vki + c * vkj;
                }
            }
    }
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto l, auto r) { return a(l, l) > a(r, r); });
    Matrix basis(p, d);
    for (std::size_t c = 0; c < d; ++c)
        for (std::size_t k = 0; k < p; ++k) basis(k, c) = v(k, order[c]);
    return basis;
}

Matrix project(const Matrix& x, const std::vector<double>& mu, const Matrix& basis) {
    Matrix out(x.rows(), basis.cols(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t c = 0; c < basis.cols(); ++c)
            for (std::size_t k = 0; k < x.cols(); ++k) out(i, c) += (x(i, k) - mu[k]) * basis(k, c);
    return out;
}

}  // namespace

TEST_CASE("encode_all with zero encoders gives zero representations") {
    auto data = make_data(20, {3, 4}, 1, 1);
    EncoderBank bank;
    bank.encoders.push_back(mlp_zeros(std::vector<std::size_t>{3, 8, 2}));
    bank.encoders.push_back(mlp_zeros(std::vector<std::size_t>{4, 5}));
    auto reps = encode_all(bank, data);
    REQUIRE(reps.reps.size() == 2);
    CHECK(reps.reps[0] == Matrix(20, 2, 0.0));
    CHECK(reps.reps[1] == Matrix(20, 5, 0.0));
}

TEST_CASE("encode_all for one modality is a forward pass, rowwise") {
    auto data = make_data(30, {6}, 1, 2);
    auto cfg = small_config(1);
    auto bank = init_encoders(data, cfg);
    auto reps = encode_all(bank, data);
    CHECK(reps.reps[0] == mlp_forward(bank.encoders[0], data.modalities[0]));
    CHECK(reps.reps[0].cols() == 5);

    std::vector<std::size_t> first(12);
    std::iota(first.begin(), first.end(), 0);
    auto sub = encode_all(bank, data.rows(first));
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t c = 0; c < 5; ++c) CHECK(sub.reps[0](i, c) == reps.reps[0](i, c));

    EncoderBank two = bank;
    two.encoders.push_back(bank.encoders[0]);
    CHECK_THROWS_AS(encode_all(two, data), ShapeError);
}

TEST_CASE("default encoder architecture") {
    auto data = make_data(10, {10, 7}, 1, 3);
    auto bank = init_encoders(data, TrainConfig::defaults(2));
    CHECK(bank.encoders[0].widths == std::vector<std::size_t>{10, 32, 16, 8, 5});
    CHECK(bank.encoders[1].widths == std::vector<std::size_t>{7, 32, 16, 8, 5});
}

TEST_CASE("objective term isolation") {
    auto data = make_data(25, {3}, 2, 4);
    auto cfg = small_config(1);
    cfg.lambda = {0.0};
    auto bank = init_encoders(data, cfg);
    auto reps = encode_all(bank, data);
    Rng r(5);
    std::vector<ParticleSet> pushed{{r.normal_matrix(25, 5), 0}};
    auto ob = empirical_objective(bank, data, pushed, cfg);
    CHECK(ob.total == -dcov_v(reps.reps[0], data.response).value);
    CHECK(ob.matching[0] == 0.0);

    cfg.lambda = {3.0};
    auto same = empirical_objective(bank, data, particles_of(reps), cfg);
    CHECK(same.matching[0] == 0.0);
    CHECK(same.total == -same.dependence[0]);
}

TEST_CASE("K=2 objective matches a term-by-term recomputation") {
    auto data = make_data(15, {3, 2}, 2, 6);
    auto cfg = small_config(2);
    cfg.lambda = {0.7, 1.9};
    cfg.xi(0, 1) = cfg.xi(1, 0) = 2.5;
    auto bank = init_encoders(data, cfg);
    Rng r(7);
    std::vector<ParticleSet> pushed{{r.normal_matrix(15, 5), 0}, {r.normal_matrix(15, 5), 1}};
    auto ob = empirical_objective(bank, data, pushed, cfg);

    Matrix g[2];
    for (std::size_t k = 0; k < 2; ++k) {
        g[k] = Matrix(15, 5);
        for (std::size_t i = 0; i < 15; ++i) {
            auto o = oracle::mlp_row(bank.encoders[k], data.modalities[k].row(i));
            for (std::size_t c = 0; c < 5; ++c) g[k](i, c) = o[c];
        }
    }
    double want = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
        const double dep = oracle::dcov_v(g[k], data.response);
        double sq = 0.0;
        for (std::size_t i = 0; i < 15; ++i)
            for (std::size_t c = 0; c < 5; ++c) {
                const double t = g[k](i, c) - pushed[k].particles(i, c);
                sq += t * t;
            }
        const double match = cfg.lambda[k] * sq / 15.0;
        CHECK(oracle::close(ob.dependence[k], dep, 1e-10, 1e-14));
        CHECK(oracle::close(ob.matching[k], match, 1e-10, 1e-14));
        want += -dep + match;
    }
    const double cross = oracle::dcov_v(g[0], g[1]);
    CHECK(oracle::close(ob.cross(0, 1), cross, 1e-10, 1e-14));
    want += 2.5 * cross;
    CHECK(oracle::close(ob.total, want, 1e-10, 1e-14));

    pushed.pop_back();
    CHECK_THROWS_AS(empirical_objective(bank, data, pushed, cfg), ShapeError);
}

TEST_CASE("zero inner steps leaves the encoder unchanged") {
    auto data = make_data(40, {4}, 1, 8);
    auto cfg = small_config(1);
    cfg.inner_steps = 0;
    auto st = init_state(data, cfg);
    auto before = st.bank;
    auto reps = encode_all(st.bank, data);
    update_modality(0, st.bank, st.opt[0], data, {reps.reps[0], 0}, reps, cfg, 9);
    CHECK(st.bank == before);
}

TEST_CASE("large lambda drives the encoder onto the targets") {
    auto data = make_data(200, {4}, 1, 10);
    data.response = Matrix(200, 1, 1.0);  // dependence term vanishes
    auto cfg = small_config(1);
    cfg.lambda = {1e6};
    cfg.inner_steps = 25;
    cfg.lr = 1e-3;
    auto st = init_state(data, cfg);
    Rng r(11);
    ParticleSet target{r.normal_matrix(200, 5), 0};
    auto reps = encode_all(st.bank, data);
    double prev = mismatch(reps.reps[0], target.particles);
    for (int round = 0; round < 8; ++round) {
        update_modality(0, st.bank, st.opt[0], data, target, reps, cfg, derive_seed(12, round));
        const double m = mismatch(mlp_forward(st.bank.encoders[0], data.modalities[0]), target.particles);
        CHECK(m < prev);
        prev = m;
    }
}

TEST_CASE("non-finite loss names the modality and step") {
    auto data = make_data(20, {3, 3}, 1, 13);
    auto cfg = small_config(2);
    auto st = init_state(data, cfg);
    auto reps = encode_all(st.bank, data);
    st.bank.encoders[1].params.back() = std::numeric_limits<double>::quiet_NaN();
    try {
        update_modality(1, st.bank, st.opt[1], data, {reps.reps[1], 1}, reps, cfg, 1);
        FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("modality 1") != std::string::npos);
        CHECK(msg.find("step 0") != std::string::npos);
    }
}

TEST_CASE("outer_iters = 0 returns the initialized bank") {
    auto data = make_data(50, {3, 2}, 1, 14);
    auto cfg = small_config(2);
    cfg.outer_iters = 0;
    auto res = train_deepsum(data, cfg);
    CHECK(res.bank == init_encoders(data, cfg));
    CHECK(res.log.empty());
    CHECK(res.reps.reps[0] == encode_all(res.bank, data).reps[0]);
}

TEST_CASE("training is deterministic given the seed") {
    auto data = make_data(120, {4, 3}, 1, 15);
    auto cfg = small_config(2, 16);
    auto a = train_deepsum(data, cfg), b = train_deepsum(data, cfg);
    CHECK(a.bank == b.bank);
    REQUIRE(a.log.size() == 3);
    CHECK(a.log.back().objective->total == b.log.back().objective->total);
    cfg.seed = 17;
    CHECK(!(train_deepsum(data, cfg).bank == a.bank));
}

TEST_CASE("resuming from a saved state matches an uninterrupted run") {
    auto data = make_data(120, {4, 3}, 1, 18);
    auto cfg = small_config(2, 19);
    cfg.outer_iters = 6;
    auto full = train_deepsum(data, cfg);
    cfg.outer_iters = 3;
    auto half = train_deepsum(data, cfg);
    CHECK(half.state.outer_done == 3);
    cfg.outer_iters = 6;
    auto rest = train_deepsum(data, cfg, half.state);
    CHECK(rest.bank == full.bank);
    CHECK(rest.log.size() == 3);
    CHECK(rest.log.front().outer == 3);

    auto bad = half.state;
    bad.opt.pop_back();
    CHECK_THROWS_AS(train_deepsum(data, cfg, bad), ConfigError);
}

TEST_CASE("frozen encoders are not updated") {
    auto data = make_data(80, {3, 3}, 1, 20);
    auto cfg = small_config(2);
    cfg.frozen = {true, false};
    auto init = init_encoders(data, cfg);
    auto res = train_deepsum(data, cfg);
    CHECK(res.bank.encoders[0] == init.encoders[0]);
    CHECK(!(res.bank.encoders[1] == init.encoders[1]));
    CHECK(std::isnan(res.log[0].disc_loss[0]));
}

TEST_CASE("callback sees every outer iteration") {
    auto data = make_data(60, {3}, 1, 21);
    auto cfg = small_config(1);
    std::vector<std::size_t> seen;
    train_deepsum(data, cfg, std::nullopt, [&](const OuterLogEntry& e) { seen.push_back(e.outer); });
    CHECK(seen == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("config validation") {
    auto ok = TrainConfig::defaults(2);
    CHECK_NOTHROW(ok.validate());
    auto c = ok;
    c.latent_dims.clear();
    c.lambda.clear();
    c.push_step.clear();
    c.xi = Matrix();
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.lambda.push_back(1.0);
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.latent_dims[1] = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.lambda[0] = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.push_step[0] = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.xi(0, 1) = 0.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.xi(0, 1) = c.xi(1, 0) = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.batch = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.lr = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ok;
    c.encoder_hidden = {8, 0};
    CHECK_THROWS_AS(c.validate(), ConfigError);

    auto data = make_data(10, {2}, 1, 22);
    CHECK_THROWS_AS(train_deepsum(data, ok), ConfigError);
}

TEST_CASE("independence penalty decorrelates copies of one modality") {
    SynthConfig sc;
    sc.case_id = 1;
    sc.scenario = 3;
    sc.n = 600;
    sc.seed = 23;
    auto ds = gen_dataset(sc);
    MultimodalDataset data;
    data.modalities = {ds.data.modalities[0], ds.data.modalities[0]};
    data.names = {"X", "X2"};
    data.response = ds.data.response;
    auto cfg = TrainConfig::defaults(2);
    cfg.outer_iters = 15;
    cfg.seed = 24;
    cfg.xi(0, 1) = cfg.xi(1, 0) = 0.0;
    auto free_run = train_deepsum(data, cfg);
    cfg.xi(0, 1) = cfg.xi(1, 0) = 1.0;
    auto penalized = train_deepsum(data, cfg);
    const double c0 = dcov_v(free_run.reps.reps[0], free_run.reps.reps[1]).value;
    const double c1 = dcov_v(penalized.reps.reps[0], penalized.reps.reps[1]).value;
    CHECK(c1 < c0);
}

TEST_CASE("learned representation beats PCA on held-out dependence") {
    SynthConfig sc;
    sc.case_id = 1;
    sc.scenario = 3;
    sc.n = 3000;
    sc.seed = 25;
    auto ds = gen_dataset(sc);
    auto split = make_split(sc.n, 0.6, 0.2, 26);
    std::vector<std::size_t> x_only{0};
    auto x = ds.data.select(x_only);
    auto cfg = TrainConfig::defaults(1);
    cfg.seed = 27;
    auto res = train_deepsum(x.rows(split.train), cfg);

    const Matrix x_tr = take_rows(x.modalities[0], split.train);
    const Matrix x_te = take_rows(x.modalities[0], split.test);
    const Matrix y_te = take_rows(x.response, split.test);
    const Matrix pca = project(x_te, column_means(x_tr), pca_basis(x_tr, 5));
    const Matrix rep = mlp_forward(res.bank.encoders[0], x_te);
    CHECK(dcor(rep, y_te) >= dcor(pca, y_te));
}

TEST_CASE("pure-noise modality stays below the permutation threshold on held-out rows") {
    int below = 0;
    for (int s = 0; s < 20; ++s) {
        SynthConfig sc;
        sc.case_id = 1;
        sc.scenario = 3;
        sc.n = 1000;
        sc.seed = derive_seed(28, s);
        auto ds = gen_dataset(sc);
        std::vector<std::size_t> w_only{3};
        auto w = ds.data.select(w_only);
        auto cfg = TrainConfig::defaults(1);
        cfg.outer_iters = 20;
        cfg.log_objective = false;
        cfg.seed = derive_seed(29, s);
        auto split = make_split(sc.n, 0.5, 0.0, derive_seed(31, s));
        auto res = train_deepsum(w.rows(split.train), cfg);
        auto held = w.rows(split.test);
        auto rep = mlp_forward(res.bank.encoders[0], held.modalities[0]);
        auto t = perm_test(rep, held.response, 99, 0.05, derive_seed(30, s));
        below += t.observed <= t.threshold;
    }
    CHECK(below >= 18);
}

TEST_CASE("Case 2 (X, U) training reduces the objective and Gaussianizes") {
    SynthConfig sc;
    sc.case_id = 2;
    sc.scenario = 2;
    sc.n = 3000;
    sc.seed = 31;
    auto ds = gen_dataset(sc);
    std::vector<std::size_t> xu{0, 1};
    auto data = ds.data.select(xu);
    auto cfg = TrainConfig::defaults(2);
    cfg.seed = 32;
    auto res = train_deepsum(data, cfg);
    REQUIRE(res.log.size() == cfg.outer_iters);
    CHECK(res.log.back().objective->total < res.log.front().objective->total);

    auto window = [&](std::size_t start) {
        double s = 0.0;
        for (std::size_t i = start; i < start + 5; ++i) s += res.log[i].objective->total;
        return s / 5.0;
    };
    CHECK(window(res.log.size() - 5) <= window(0));

    for (const auto& r : res.reps.reps) {
        const auto mu = column_means(r);
        double mn = 0.0;
        for (double v : mu) mn += v * v;
        CHECK(std::sqrt(mn) <= 0.3);
        const Matrix c = covariance(r);
        for (std::size_t a = 0; a < 5; ++a)
            for (std::size_t b = 0; b < 5; ++b) CHECK(std::abs(c(a, b) - (a == b ? 1.0 : 0.0)) <= 0.35);
    }
}
