#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hsprobe/numcore/tensor.hpp"

namespace hsprobe {

// Generator hidden states for one finding: T tokens x d dims, stored at
// binary32 like typical activation dumps. Optional per-token predictive
// entropy rides along for the entropy baseline.
struct HiddenSeq {
    std::string finding_id;
    std::size_t dim = 0;
    std::vector<float> values;  // row-major, T * dim
    std::optional<std::vector<float>> entropy;  // length T when present

    std::size_t length() const noexcept { return dim == 0 ? 0 : values.size() / dim; }

    // Binary64 copy of the token matrix, shape T x d.
    Tensor to_tensor() const;

    // Throws on empty sequence, ragged storage, entropy length mismatch or
    // non-finite values.
    void validate() const;

    friend bool operator==(const HiddenSeq&, const HiddenSeq&) = default;
};

}  // namespace hsprobe
