#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepsum/downstream.hpp"
#include "deepsum/selection.hpp"
#include "deepsum/trainer.hpp"

namespace deepsum {

// Synthetic benchmark over (case, scenario, n) cells.
//
// Replicate r of every cell uses seed_r = derive_seed(seed, r); its data,
// split, encoders, head and selection draw from derive_seed(seed_r, 0..4).
// Regression is scored two ways on the test split: `mse` against the observed
// response and `signal_mse` against the noise-free signal.
struct BenchConfig {
    std::vector<int> cases{1, 2, 3};
    std::vector<int> scenarios{1, 2, 3};
    std::vector<std::size_t> ns{3000};
    std::size_t replicates = 10;
    std::vector<std::string> combos{"X", "XU", "XV", "XW"};
    bool run_selection = true;  // X preselected, candidates U, V, W
    bool run_prediction = true;
    std::size_t p = 10;
    std::size_t q = 10;
    double sigma = 1.0;
    double train_frac = 0.6;
    double val_frac = 0.2;
    TrainConfig train = TrainConfig::defaults(4);  // indexed X, U, V, W
    FitConfig fit{};
    ThresholdPolicy threshold{};
    double selection_holdout = 0.0;  // SelectionConfig::holdout_frac
    std::uint64_t seed = 0;
    std::size_t workers = 0;  // 0: OpenMP default

    void validate() const;
};

struct ComboStats {
    std::string combo;
    std::vector<double> mse;         // per successful replicate, index order
    std::vector<double> signal_mse;
    double mse_mean = 0.0, mse_std = 0.0;
    double signal_mse_mean = 0.0, signal_mse_std = 0.0;
};

struct SelectionStats {
    std::vector<std::string> candidates;     // U, V, W when selection ran; empty otherwise
    std::vector<std::size_t> top_counts;     // argmax-utility candidate
    std::vector<std::size_t> active_counts;  // membership in the estimated active set
    std::vector<double> top_prop, active_prop;
    std::size_t runs = 0;
};

struct BenchCell {
    int case_id = 0;
    int scenario = 0;
    std::size_t n = 0;
    std::size_t replicates = 0;
    std::vector<std::size_t> failed;  // replicate indices with any failure
    std::vector<ComboStats> combos;
    SelectionStats selection;
};

struct BenchmarkResult {
    std::vector<BenchCell> cells;
    // Wall-clock seconds per (cell, replicate); kept out of the reports so
    // they stay deterministic.
    std::vector<std::vector<double>> seconds;
    std::vector<std::string> failure_messages;
};

// Modality indices (X=0, U=1, V=2, W=3) for a combination name such as "XU".
std::vector<std::size_t> combo_indices(const std::string& combo);

BenchmarkResult run_benchmark(const BenchConfig& cfg);

// Mean and sample standard deviation (0 for fewer than two values).
std::pair<double, double> mean_std(const std::vector<double>& v);

nlohmann::json to_json(const BenchConfig& cfg);
BenchConfig bench_config_from_json(const nlohmann::json& j, BenchConfig base = {});

nlohmann::json report_json(const BenchmarkResult& r);
BenchmarkResult result_from_json(const nlohmann::json& j);
std::string report_csv(const BenchmarkResult& r);
BenchmarkResult result_from_csv(const std::string& csv);
std::string report_markdown(const BenchmarkResult& r);

enum class ReportFormat { Json, Csv, Markdown };
// Writes report.{json,csv,md} for the requested formats into `dir`.
std::vector<std::filesystem::path> emit_report(const BenchmarkResult& r, const std::vector<ReportFormat>& formats,
                                               const std::filesystem::path& dir);

}  // namespace deepsum
