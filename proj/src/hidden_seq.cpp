#include "hsprobe/hidden_seq.hpp"

#include <algorithm>
#include <cmath>

#include "hsprobe/error.hpp"

namespace hsprobe {

Tensor HiddenSeq::to_tensor() const {
    validate();
    return Tensor({length(), dim}, std::vector<double>(values.begin(), values.end()));
}

void HiddenSeq::validate() const {
    require(dim > 0, ErrorCode::kDimensionMismatch, "hidden sequence '" + finding_id + "' has d = 0");
    require(!values.empty(), ErrorCode::kInvalidArgument,
            "hidden sequence '" + finding_id + "' is empty");
    require(values.size() % dim == 0, ErrorCode::kDimensionMismatch,
            "hidden sequence '" + finding_id + "' is not a whole number of rows");
    auto finite = [](float v) { return std::isfinite(v); };
    require(std::all_of(values.begin(), values.end(), finite), ErrorCode::kNonFinite,
            "hidden sequence '" + finding_id + "' has non-finite values");
    if (entropy) {
        require(entropy->size() == length(), ErrorCode::kDimensionMismatch,
                "hidden sequence '" + finding_id + "' entropy length differs from token count");
        require(std::all_of(entropy->begin(), entropy->end(), finite), ErrorCode::kNonFinite,
                "hidden sequence '" + finding_id + "' has non-finite entropy");
    }
}

}  // namespace hsprobe
