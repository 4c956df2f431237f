#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "deepsum/downstream.hpp"
#include "deepsum/selection.hpp"
#include "deepsum/synthgen.hpp"
#include "deepsum/trainer.hpp"

namespace deepsum {

using nlohmann::json;

json to_json(const TrainConfig& c);
// Per-modality fields may be given as a scalar (broadcast to all K) or a
// list of length K; missing fields keep TrainConfig::defaults(K).
TrainConfig train_config_from_json(const json& j, std::size_t K);

json to_json(const SynthConfig& c);
SynthConfig synth_config_from_json(const json& j, SynthConfig base = {});

json to_json(const FitConfig& c);
FitConfig fit_config_from_json(const json& j, FitConfig base = {});

json to_json(const SelectionConfig& c);
SelectionConfig selection_config_from_json(const json& j, SelectionConfig base = {});

// {candidates:[{name, v_n, dcor, tau, active}], mode, seed, preselected, ranking}
json to_json(const SelectionReport& r);
json to_json(const EvalReport& r);
json to_json(const ObjectiveBreakdown& o);

// Checkpoint document: config, modality names, encoder parameters, Adam
// moments, warm-start discriminators and the RNG position (seed + completed outer iterations; every
// random draw in training is derived from these). Doubles are written in
// shortest round-trip form, so save/load is bit-exact.
// Row partition an encoder run was restricted to (make_split arguments).
struct SplitSpec {
    double train_frac = 0.6;
    double val_frac = 0.2;
    std::uint64_t seed = 0;
};

struct Checkpoint {
    TrainConfig config;
    std::vector<std::string> names;
    TrainState state;
    std::optional<SplitSpec> split;  // set when encoders saw only split.train
};

json to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const json& j);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace deepsum
