#include "deepsum/dataset.hpp"

#include "deepsum/error.hpp"

namespace deepsum {

void MultimodalDataset::validate() const {
    if (modalities.empty()) throw DataError("dataset has no modalities");
    if (names.size() != modalities.size()) throw DataError("dataset: one name per modality required");
    const std::size_t n = response.rows();
    if (n == 0 || response.cols() == 0) throw DataError("dataset: empty response");
    if (!response.all_finite()) throw DataError("dataset: non-finite response value");
    for (std::size_t k = 0; k < modalities.size(); ++k) {
        if (modalities[k].rows() != n)
            throw ShapeError("dataset: modality '" + names[k] + "' has " +
                             std::to_string(modalities[k].rows()) + " rows, response has " +
                             std::to_string(n));
        if (modalities[k].cols() == 0) throw DataError("dataset: modality '" + names[k] + "' is empty");
        if (!modalities[k].all_finite())
            throw DataError("dataset: non-finite value in modality '" + names[k] + "'");
    }
}

MultimodalDataset MultimodalDataset::rows(std::span<const std::size_t> idx) const {
    MultimodalDataset out;
    out.names = names;
    out.response = take_rows(response, idx);
    for (const auto& m : modalities) out.modalities.push_back(take_rows(m, idx));
    return out;
}

MultimodalDataset MultimodalDataset::select(std::span<const std::size_t> modality_idx) const {
    MultimodalDataset out;
    out.response = response;
    for (auto k : modality_idx) {
        if (k >= modalities.size()) throw ConfigError("modality index out of range");
        out.modalities.push_back(modalities[k]);
        out.names.push_back(names[k]);
    }
    return out;
}

std::size_t MultimodalDataset::index_of(const std::string& name) const {
    for (std::size_t k = 0; k < names.size(); ++k)
        if (names[k] == name) return k;
    throw ConfigError("unknown modality '" + name + "'");
}

}  // namespace deepsum
