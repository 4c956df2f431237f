#include "deepsum/downstream.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "deepsum/adam.hpp"
#include "deepsum/error.hpp"
#include "deepsum/rng.hpp"

namespace deepsum {

namespace {

inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double target_of(const Predictor& p, double y) {
    return p.task == Task::Regression ? (y - p.y_mean) / p.y_scale : y;
}

// Mean loss of the head on rows idx (in standardised target units).
double head_loss(const Predictor& p, const Matrix& x, const Matrix& y, std::span<const std::size_t> idx) {
    const Matrix out = mlp_forward(p.head, take_rows(x, idx));
    double s = 0.0;
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const double o = out(r, 0), t = target_of(p, y(idx[r], 0));
        s += p.task == Task::Regression ? (o - t) * (o - t) : softplus(o) - t * o;
    }
    return s / static_cast<double>(idx.size());
}

}  // namespace

Split make_split(std::size_t n, double train_frac, double val_frac, std::uint64_t seed) {
    if (!(train_frac > 0.0) || !(val_frac >= 0.0) || train_frac + val_frac > 1.0)
        throw ConfigError("invalid split fractions");
    Rng rng(seed);
    const auto perm = rng.permutation(n);
    const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
    const auto n_val = static_cast<std::size_t>(std::llround(val_frac * static_cast<double>(n)));
    Split s;
    s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(std::min(n_train, n)));
    s.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(s.train.size()),
                 perm.begin() + static_cast<std::ptrdiff_t>(std::min(n_train + n_val, n)));
    s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(s.train.size() + s.val.size()), perm.end());
    return s;
}

Matrix fuse(const RepresentationSet& reps, std::span<const std::size_t> selected) {
    std::vector<Matrix> parts;
    for (auto k : selected) parts.push_back(reps.reps.at(k));
    if (parts.empty()) throw ConfigError("fuse: no modalities selected");
    return hconcat(parts);
}

Predictor fit_head(const Matrix& features, const Matrix& y, const Split& split, Task task,
                   const FitConfig& cfg) {
    if (split.train.empty()) throw DataError("fit_head: empty training split");
    if (features.rows() != y.rows()) throw ShapeError("fit_head: features/response row counts differ");
    if (y.cols() != 1) throw ShapeError("fit_head: response must be a single column");

    Predictor p;
    p.task = task;
    std::vector<std::size_t> widths{features.cols()};
    widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
    widths.push_back(1);
    p.head = mlp_init(widths, derive_seed(cfg.seed, 0));

    if (task == Task::Regression) {
        double m = 0.0;
        for (auto i : split.train) m += y(i, 0);
        m /= static_cast<double>(split.train.size());
        double v = 0.0;
        for (auto i : split.train) v += (y(i, 0) - m) * (y(i, 0) - m);
        v /= static_cast<double>(split.train.size());
        p.y_mean = m;
        p.y_scale = v > 0.0 ? std::sqrt(v) : 1.0;
    } else {
        for (auto i : split.train)
            if (y(i, 0) != 0.0 && y(i, 0) != 1.0) throw DataError("fit_head: binary labels must be 0 or 1");
    }

    Rng rng(derive_seed(cfg.seed, 1));
    AdamState opt(p.head.params.size(), AdamConfig{.lr = cfg.lr});
    const bool early_stop = !split.val.empty();
    double best = early_stop ? head_loss(p, features, y, split.val) : 0.0;
    std::vector<double> best_params = p.head.params;
    std::size_t since_best = 0;
    MlpTape tape;
    const std::size_t ntr = split.train.size();

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const auto order = rng.permutation(ntr);
        for (std::size_t start = 0; start < ntr; start += cfg.batch) {
            const std::size_t end = std::min(ntr, start + cfg.batch);
            std::vector<std::size_t> idx;
            idx.reserve(end - start);
            for (std::size_t j = start; j < end; ++j) idx.push_back(split.train[order[j]]);
            const Matrix out = mlp_forward(p.head, take_rows(features, idx), tape);
            Matrix up(idx.size(), 1);
            const double inv = 1.0 / static_cast<double>(idx.size());
            for (std::size_t r = 0; r < idx.size(); ++r) {
                const double o = out(r, 0), t = target_of(p, y(idx[r], 0));
                up(r, 0) = (task == Task::Regression ? 2.0 * (o - t) : sigmoid(o) - t) * inv;
            }
            const auto g = mlp_backward(p.head, tape, up);
            adam_step(opt, p.head.params, g.params);
        }
        p.epochs_run = epoch + 1;
        if (!early_stop) continue;
        const double vl = head_loss(p, features, y, split.val);
        if (!std::isfinite(vl)) throw TrainingError("prediction head diverged", static_cast<long>(epoch));
        if (vl < best) {
            best = vl;
            best_params = p.head.params;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    if (early_stop) p.head.params = best_params;
    return p;
}

Matrix predict(const Predictor& pred, const Matrix& features) {
    Matrix out = mlp_forward(pred.head, features);
    for (double& v : out.flat())
        v = pred.task == Task::Regression ? v * pred.y_scale + pred.y_mean : sigmoid(v);
    return out;
}

double mean_squared_error(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size() || pred.empty()) throw ShapeError("mse: size mismatch or empty");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - target[i]) * (pred[i] - target[i]);
    return s / static_cast<double>(pred.size());
}

double roc_auc(std::span<const double> score, std::span<const double> label) {
    if (score.size() != label.size() || score.empty()) throw ShapeError("auc: size mismatch or empty");
    const std::size_t n = score.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return score[a] < score[b]; });
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && score[order[j + 1]] == score[order[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
        i = j + 1;
    }
    double pos = 0.0, rank_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (label[i] == 1.0) {
            pos += 1.0;
            rank_sum += rank[i];
        }
    const double neg = static_cast<double>(n) - pos;
    if (pos == 0.0 || neg == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

EvalReport evaluate(const Predictor& pred, const Matrix& features, const Matrix& y, const Split& split) {
    if (split.test.empty()) throw DataError("evaluate: empty test split");
    EvalReport rep;
    rep.task = pred.task;
    rep.n_train = split.train.size();
    rep.n_val = split.val.size();
    rep.n_test = split.test.size();
    const Matrix out = predict(pred, take_rows(features, split.test));
    const Matrix yt = take_rows(y, split.test);
    if (pred.task == Task::Regression) {
        rep.mse = mean_squared_error(out.flat(), yt.flat());
    } else {
        double correct = 0.0;
        for (std::size_t i = 0; i < yt.rows(); ++i)
            correct += ((out(i, 0) >= 0.5) == (yt(i, 0) == 1.0)) ? 1.0 : 0.0;
        rep.accuracy = correct / static_cast<double>(yt.rows());
        rep.auc = roc_auc(out.flat(), yt.flat());
    }
    return rep;
}

}  // namespace deepsum
