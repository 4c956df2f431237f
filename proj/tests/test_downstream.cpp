#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "deepsum/downstream.hpp"
#include "deepsum/error.hpp"
#include "deepsum/rng.hpp"

using namespace deepsum;

namespace {

Split simple_split(std::size_t n, std::uint64_t seed = 1) { return make_split(n, 0.6, 0.2, seed); }

}  // namespace

TEST_CASE("make_split partitions the index range") {
    auto s = make_split(1000, 0.6, 0.2, 3);
    CHECK(s.train.size() == 600);
    CHECK(s.val.size() == 200);
    CHECK(s.test.size() == 200);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    all.insert(s.val.begin(), s.val.end());
    all.insert(s.test.begin(), s.test.end());
    CHECK(all.size() == 1000);
    CHECK(*all.rbegin() == 999);
    auto t = make_split(1000, 0.6, 0.2, 3);
    CHECK(t.train == s.train);
}

TEST_CASE("fuse concatenates the selected representations") {
    RepresentationSet reps;
    reps.reps.push_back(Matrix(2, 1, 1.0));
    reps.reps.push_back(Matrix(2, 2, 2.0));
    reps.reps.push_back(Matrix(2, 1, 3.0));
    std::vector<std::size_t> sel{2, 0};
    Matrix f = fuse(reps, sel);
    CHECK(f.cols() == 2);
    CHECK(f(0, 0) == 3.0);
    CHECK(f(1, 1) == 1.0);
}

TEST_CASE("constant response is fitted exactly") {
    Rng r(1);
    Matrix x = r.normal_matrix(300, 3);
    Matrix y(300, 1, 2.5);
    FitConfig cfg;
    auto split = simple_split(300);
    auto p = fit_head(x, y, split, Task::Regression, cfg);
    auto pred = predict(p, take_rows(x, split.train));
    double mse = 0.0;
    for (double v : pred.values()) mse += (v - 2.5) * (v - 2.5);
    CHECK(mse / split.train.size() <= 1e-3);
}

TEST_CASE("zero epochs returns the initial head") {
    Rng r(2);
    Matrix x = r.normal_matrix(50, 2), y = r.normal_matrix(50, 1);
    FitConfig cfg;
    cfg.max_epochs = 0;
    cfg.seed = 4;
    auto p = fit_head(x, y, simple_split(50), Task::Regression, cfg);
    std::vector<std::size_t> w{2, 16, 8, 1};
    CHECK(p.head == mlp_init(w, derive_seed(cfg.seed, 0)));
    CHECK(p.epochs_run == 0);
}

TEST_CASE("noise-free linear target is learned") {
    Rng r(3);
    Matrix x = r.normal_matrix(1500, 3), y(1500, 1);
    for (std::size_t i = 0; i < 1500; ++i) y(i, 0) = 2.0 * x(i, 0) - x(i, 1) + 0.5 * x(i, 2) + 1.0;
    FitConfig cfg;
    cfg.lr = 3e-3;
    auto split = simple_split(1500);
    auto p = fit_head(x, y, split, Task::Regression, cfg);
    const double var = covariance(take_rows(y, split.test))(0, 0);
    CHECK(evaluate(p, x, y, split).mse <= 1e-2 * var);
}

TEST_CASE("mean predictor on standardized Y scores its variance") {
    Rng r(4);
    Matrix y = r.normal_matrix(2000, 1);
    Matrix x(2000, 1, 0.0);
    auto split = simple_split(2000);
    FitConfig cfg;
    auto p = fit_head(x, y, split, Task::Regression, cfg);
    const double var = covariance(take_rows(y, split.test))(0, 0);
    CHECK(evaluate(p, x, y, split).mse == doctest::Approx(var).epsilon(0.05));
}

TEST_CASE("perfect predictions") {
    std::vector<double> a{1, 2, 3}, b{1, 2, 3};
    CHECK(mean_squared_error(a, b) == 0.0);
    std::vector<double> s{0.1, 0.4, 0.35, 0.8}, l{0, 0, 1, 1};
    CHECK(roc_auc(s, l) == doctest::Approx(0.75));
    std::vector<double> s2{0.1, 0.2, 0.7, 0.9};
    CHECK(roc_auc(s2, l) == 1.0);
    std::vector<double> tied{0.5, 0.5, 0.5, 0.5};
    CHECK(roc_auc(tied, l) == 0.5);
}

TEST_CASE("mse is invariant under joint permutation") {
    Rng r(5);
    std::vector<double> a(40), b(40);
    for (auto& v : a) v = r.normal();
    for (auto& v : b) v = r.normal();
    const double m = mean_squared_error(a, b);
    auto p = r.permutation(40);
    std::vector<double> ap(40), bp(40);
    for (std::size_t i = 0; i < 40; ++i) ap[i] = a[p[i]], bp[i] = b[p[i]];
    CHECK(mean_squared_error(ap, bp) == doctest::Approx(m).epsilon(1e-14));
}

TEST_CASE("shuffled scores give AUC near one half") {
    Rng r(6);
    std::vector<double> s(738), l(738);
    for (std::size_t i = 0; i < 738; ++i) {
        s[i] = r.uniform();
        l[i] = r.uniform() < 0.4 ? 1.0 : 0.0;
    }
    CHECK(std::abs(roc_auc(s, l) - 0.5) <= 0.1);
}

TEST_CASE("binary classification head") {
    Rng r(7);
    Matrix x = r.normal_matrix(1000, 2), y(1000, 1);
    for (std::size_t i = 0; i < 1000; ++i) y(i, 0) = x(i, 0) + 0.3 * x(i, 1) > 0 ? 1.0 : 0.0;
    auto split = simple_split(1000);
    FitConfig cfg;
    cfg.lr = 5e-3;
    auto p = fit_head(x, y, split, Task::BinaryClassification, cfg);
    auto rep = evaluate(p, x, y, split);
    CHECK(rep.task == Task::BinaryClassification);
    CHECK(rep.accuracy > 0.9);
    CHECK(rep.auc > 0.95);
    CHECK(rep.n_train + rep.n_val + rep.n_test == 1000);
    for (double v : predict(p, x).values()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    Matrix bad = y;
    bad(split.train[0], 0) = 2.0;
    CHECK_THROWS_AS(fit_head(x, bad, split, Task::BinaryClassification, cfg), DataError);
}

TEST_CASE("fit and evaluate input errors") {
    Matrix x(10, 2), y(10, 1);
    Split empty;
    CHECK_THROWS_AS(fit_head(x, y, empty, Task::Regression, FitConfig{}), DataError);
    CHECK_THROWS_AS(fit_head(x, Matrix(9, 1), simple_split(10), Task::Regression, FitConfig{}), ShapeError);
    auto p = fit_head(x, y, simple_split(10), Task::Regression, FitConfig{});
    Split no_test = simple_split(10);
    no_test.test.clear();
    CHECK_THROWS_AS(evaluate(p, x, y, no_test), DataError);
}
