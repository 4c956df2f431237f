#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "deepsum/matrix.hpp"
#include "deepsum/mlp.hpp"
#include "deepsum/trainer.hpp"

namespace deepsum {

enum class Task { Regression, BinaryClassification };

struct Split {
    std::vector<std::size_t> train, val, test;
};

// Shuffled train/val/test partition; fractions are normalised and the test
// part takes the remainder.
Split make_split(std::size_t n, double train_frac, double val_frac, std::uint64_t seed);

struct FitConfig {
    std::vector<std::size_t> hidden{16, 8};
    double lr = 1e-3;
    std::size_t batch = 128;
    std::size_t max_epochs = 10000;
    std::size_t patience = 20;  // epochs without validation improvement
    std::uint64_t seed = 0;
};

/// Prediction head h on the early-fused (concatenated) representations.
/// Regression targets are standardised with the training-split mean/std and
/// predictions mapped back.
struct Predictor {
    Mlp head;
    Task task = Task::Regression;
    double y_mean = 0.0;
    double y_scale = 1.0;
    std::size_t epochs_run = 0;
};

Matrix fuse(const RepresentationSet& reps, std::span<const std::size_t> selected);

// Squared error (regression) or logistic loss on a single logit (binary,
// labels in {0, 1}). Early stopping on validation loss when split.val is
// non-empty; the best-validation parameters are returned.
Predictor fit_head(const Matrix& features, const Matrix& y, const Split& split, Task task,
                   const FitConfig& cfg);

// Regression: value. Binary: probability of class 1.
Matrix predict(const Predictor& pred, const Matrix& features);

struct EvalReport {
    Task task = Task::Regression;
    double mse = 0.0;
    double accuracy = 0.0;
    double auc = 0.0;
    std::size_t n_train = 0, n_val = 0, n_test = 0;
    std::uint64_t seed = 0;
};

EvalReport evaluate(const Predictor& pred, const Matrix& features, const Matrix& y, const Split& split);

double mean_squared_error(std::span<const double> pred, std::span<const double> target);
// Mann-Whitney AUC with midranks for ties.
double roc_auc(std::span<const double> score, std::span<const double> label);

}  // namespace deepsum
