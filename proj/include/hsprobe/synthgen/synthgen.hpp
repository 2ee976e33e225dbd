#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "hsprobe/hidden_seq.hpp"
#include "hsprobe/training/dataset.hpp"

namespace hsprobe {

enum class SynthMode {
    // Label-1 findings have every token shifted along one direction.
    kTokenShift,
    // The label is the order of two marker tokens.
    kMarkerOrder,
};

std::string_view synth_mode_name(SynthMode m) noexcept;  // "A" / "B"
SynthMode parse_synth_mode(std::string_view name);

struct SynthSpec {
    SynthMode mode = SynthMode::kTokenShift;
    std::size_t n_subjects = 300;
    std::size_t findings_per_subject = 10;
    std::size_t t_min = 4;
    std::size_t t_max = 12;
    std::size_t dim = 64;
    double signal_strength = 4.0;   // beta
    double prevalence = 0.5;        // pi
    double entropy_signal = 0.5;    // gamma
    std::size_t layer_index = 16;
    std::uint64_t seed = 0;

    std::size_t total_findings() const noexcept { return n_subjects * findings_per_subject; }

    // Throws kConfig on d < 2, prevalence outside (0,1), negative strengths,
    // an empty or inverted length range, or t_min < 2 in marker mode.
    void validate() const;
};

// Unit signal directions drawn from the SynthSpec seed. v is orthogonal to u.
struct SignalDirections {
    std::vector<double> u;
    std::vector<double> v;
};

SignalDirections signal_directions(const SynthSpec& spec);

// Findings are laid out subject by subject; each subject has one study per
// finding pair. Base tokens are standard normal in d dimensions.
//
// Token shift: label-1 findings add beta * u to every token.
// Marker order: every finding carries exactly one u-marker and one v-marker
// token (beta times the direction added at two distinct random positions).
// The label is 1 exactly when the u-marker comes first, so the multiset of
// tokens has the same distribution under both labels.
//
// Per-token entropy is gamma * label + |N(0, 1)|. Every finding is generated
// from its own derived seed.
Dataset gen_dataset(const SynthSpec& spec);

// Marker-order label read back from the tokens: 1 when the token with the
// largest projection on u precedes the token with the largest projection on v.
int recompute_marker_label(const HiddenSeq& hs, const SignalDirections& dirs);

// Area under the ROC curve of the best linear probe for the token-shift
// construction with T tokens: Phi(beta * sqrt(T) / sqrt(2)).
double token_shift_bayes_auroc(double beta, std::size_t tokens);

}  // namespace hsprobe
