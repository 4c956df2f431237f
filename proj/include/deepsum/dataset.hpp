#pragma once

#include <span>
#include <string>
#include <vector>

#include "deepsum/matrix.hpp"

namespace deepsum {

// K aligned modalities (modality k is n x p_k) plus the response (n x q_y).
struct MultimodalDataset {
    std::vector<Matrix> modalities;
    Matrix response;
    std::vector<std::string> names;

    std::size_t num_samples() const noexcept { return response.rows(); }
    std::size_t num_modalities() const noexcept { return modalities.size(); }

    // Throws DataError / ShapeError on violated invariants.
    void validate() const;

    MultimodalDataset rows(std::span<const std::size_t> idx) const;
    MultimodalDataset select(std::span<const std::size_t> modality_idx) const;
    std::size_t index_of(const std::string& name) const;
};

}  // namespace deepsum
