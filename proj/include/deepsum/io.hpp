#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "deepsum/dataset.hpp"
#include "deepsum/error.hpp"
#include "deepsum/matrix.hpp"
#include "deepsum/synthgen.hpp"

namespace deepsum {

// CSV layout: one header row of column names, then one sample per row,
// comma-separated decimal numbers. Values are written with 17 significant
// digits so a write/read cycle reproduces every double exactly.
//
// Manifest (JSON):
//   {
//     "modalities": [ {"name": "X", "path": "X.csv"}, ... ],
//     "response":   {"path": "Y.csv"},
//     "notes":      { ... }            // optional, free-form
//   }
// Relative paths resolve against the manifest's directory.

struct MissingFileError : DataError {
    explicit MissingFileError(const std::string& w) : DataError(w) {}
};
struct ParseError : DataError {
    explicit ParseError(const std::string& w) : DataError(w) {}
};
struct RowCountError : DataError {
    explicit RowCountError(const std::string& w) : DataError(w) {}
};

struct CsvTable {
    std::vector<std::string> header;
    Matrix values;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const Matrix& m, const std::vector<std::string>& header = {});

// Strict double parse of a whole field (surrounding blanks ignored); false on
// any other trailing characters, NaN or infinity.
bool parse_double(std::string_view field, double& out);
std::string format_double(double v);

MultimodalDataset load_multimodal_csv(const std::filesystem::path& manifest);

// One CSV per modality, Y.csv, and manifest.json in `dir`; extra notes are
// stored under "notes". Returns the manifest path.
std::filesystem::path export_multimodal_csv(const MultimodalDataset& data, const std::filesystem::path& dir,
                                            const std::string& notes_json = "{}");

// Synthetic export: the dataset plus the noise-free signal and latent Z, and
// a manifest whose notes record the generator configuration.
std::filesystem::path export_synthetic(const SynthDataset& ds, const SynthConfig& cfg,
                                       const std::filesystem::path& dir);

}  // namespace deepsum
