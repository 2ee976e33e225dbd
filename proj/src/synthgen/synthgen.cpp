#include "hsprobe/synthgen/synthgen.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include "hsprobe/error.hpp"
#include "hsprobe/rng.hpp"

namespace hsprobe {

std::string_view synth_mode_name(SynthMode m) noexcept { return m == SynthMode::kMarkerOrder ? "B" : "A"; }

SynthMode parse_synth_mode(std::string_view name) {
    if (name == "A" || name == "a") {
        return SynthMode::kTokenShift;
    }
    if (name == "B" || name == "b") {
        return SynthMode::kMarkerOrder;
    }
    fail(ErrorCode::kConfig, "unknown synthetic mode '" + std::string(name) + "' (expected A or B)");
}

void SynthSpec::validate() const {
    require(dim >= 2, ErrorCode::kConfig, "synthetic width must be at least 2");
    require(prevalence > 0.0 && prevalence < 1.0, ErrorCode::kConfig, "prevalence must lie in (0,1)");
    require(signal_strength >= 0.0 && std::isfinite(signal_strength), ErrorCode::kConfig,
            "signal strength must be a nonnegative number");
    require(entropy_signal >= 0.0 && std::isfinite(entropy_signal), ErrorCode::kConfig,
            "entropy signal must be a nonnegative number");
    require(n_subjects >= 1 && findings_per_subject >= 1, ErrorCode::kConfig,
            "need at least one subject and one finding per subject");
    require(t_min >= 1 && t_min <= t_max, ErrorCode::kConfig, "token length range is empty");
    require(mode != SynthMode::kMarkerOrder || t_min >= 2, ErrorCode::kConfig,
            "marker mode needs at least two tokens per finding");
}

namespace {

std::vector<double> random_unit(Rng& rng, std::size_t d) {
    std::vector<double> x(d);
    double norm = 0.0;
    while (norm < 1e-6) {
        norm = 0.0;
        for (double& v : x) {
            v = rng.normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
    }
    for (double& v : x) {
        v /= norm;
    }
    return x;
}

double dot(const float* a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        s += static_cast<double>(a[i]) * b[i];
    }
    return s;
}

std::string id_number(std::size_t v, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*zu", width, v);
    return buf;
}

}  // namespace

SignalDirections signal_directions(const SynthSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, "directions"));
    SignalDirections dirs;
    dirs.u = random_unit(rng, spec.dim);
    // Gram-Schmidt so the two markers are distinguishable by projection.
    double proj = 0.0;
    std::vector<double> v;
    double norm = 0.0;
    while (norm < 1e-6) {
        v = random_unit(rng, spec.dim);
        proj = 0.0;
        for (std::size_t i = 0; i < spec.dim; ++i) {
            proj += v[i] * dirs.u[i];
        }
        norm = 0.0;
        for (std::size_t i = 0; i < spec.dim; ++i) {
            v[i] -= proj * dirs.u[i];
            norm += v[i] * v[i];
        }
        norm = std::sqrt(norm);
    }
    for (double& x : v) {
        x /= norm;
    }
    dirs.v = std::move(v);
    return dirs;
}

Dataset gen_dataset(const SynthSpec& spec) {
    spec.validate();
    const SignalDirections dirs = signal_directions(spec);
    const std::size_t d = spec.dim;
    std::vector<Sample> samples;
    samples.reserve(spec.total_findings());

    static constexpr std::array<Category, 5> kCategories = {
        Category::kLungs, Category::kPleural, Category::kCardiomediastinal, Category::kMusculoskeletal,
        Category::kDevices};

    std::size_t index = 0;
    for (std::size_t subj = 0; subj < spec.n_subjects; ++subj) {
        const std::string subject_id = "p" + id_number(subj, 5);
        for (std::size_t k = 0; k < spec.findings_per_subject; ++k, ++index) {
            Rng rng(derive_seed(spec.seed, "finding", index));
            const int label = rng.bernoulli(spec.prevalence) ? 1 : 0;
            const std::size_t length = spec.t_min + static_cast<std::size_t>(rng.below(spec.t_max - spec.t_min + 1));

            std::vector<double> tokens(length * d);
            for (double& x : tokens) {
                x = rng.normal();
            }
            if (spec.mode == SynthMode::kTokenShift) {
                if (label == 1) {
                    for (std::size_t t = 0; t < length; ++t) {
                        for (std::size_t j = 0; j < d; ++j) {
                            tokens[t * d + j] += spec.signal_strength * dirs.u[j];
                        }
                    }
                }
            } else {
                // Two distinct positions first < second; the label decides
                // which marker takes the earlier one.
                std::size_t first = static_cast<std::size_t>(rng.below(length));
                std::size_t second = static_cast<std::size_t>(rng.below(length - 1));
                if (second >= first) {
                    ++second;
                }
                if (first > second) {
                    std::swap(first, second);
                }
                const std::size_t u_pos = label == 1 ? first : second;
                const std::size_t v_pos = label == 1 ? second : first;
                for (std::size_t j = 0; j < d; ++j) {
                    tokens[u_pos * d + j] += spec.signal_strength * dirs.u[j];
                    tokens[v_pos * d + j] += spec.signal_strength * dirs.v[j];
                }
            }

            Sample s;
            s.finding.subject_id = subject_id;
            s.finding.study_id = subject_id + "-s" + id_number(k / 2, 3);
            s.finding.finding_id = s.finding.study_id + "-f" + id_number(k, 3);
            s.finding.text = "synthetic finding " + std::to_string(index);
            s.finding.token_count = length;
            s.finding.category = kCategories[rng.below(kCategories.size())];
            s.finding.severity_tier = 1 + static_cast<int>(rng.below(4));
            const Entailment e = label == 0 ? Entailment::kCompletely
                                            : (rng.bernoulli(0.5) ? Entailment::kPartially
                                                                  : Entailment::kNotEntailed);
            s.finding.label = HallucinationLabel::from(e);

            s.hidden.finding_id = s.finding.finding_id;
            s.hidden.dim = d;
            s.hidden.values.reserve(tokens.size());
            for (double x : tokens) {
                s.hidden.values.push_back(static_cast<float>(x));
            }
            std::vector<float> entropy(length);
            for (float& e_t : entropy) {
                e_t = static_cast<float>(spec.entropy_signal * label + std::abs(rng.normal()));
            }
            s.hidden.entropy = std::move(entropy);
            samples.push_back(std::move(s));
        }
    }
    return Dataset(std::move(samples));
}

int recompute_marker_label(const HiddenSeq& hs, const SignalDirections& dirs) {
    require(hs.dim == dirs.u.size() && hs.dim == dirs.v.size(), ErrorCode::kDimensionMismatch,
            "signal directions do not match the sequence width");
    const std::size_t length = hs.length();
    std::size_t best_u = 0;
    std::size_t best_v = 0;
    double max_u = -INFINITY;
    double max_v = -INFINITY;
    for (std::size_t t = 0; t < length; ++t) {
        const float* row = hs.values.data() + t * hs.dim;
        const double pu = dot(row, dirs.u);
        const double pv = dot(row, dirs.v);
        if (pu > max_u) {
            max_u = pu;
            best_u = t;
        }
        if (pv > max_v) {
            max_v = pv;
            best_v = t;
        }
    }
    return best_u < best_v ? 1 : 0;
}

double token_shift_bayes_auroc(double beta, std::size_t tokens) {
    // The token mean projected on u is N(0, 1/T) or N(beta, 1/T); the
    // difference of a positive and a negative draw is N(beta, 2/T).
    const double z = beta * std::sqrt(static_cast<double>(tokens)) / std::sqrt(2.0);
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

}  // namespace hsprobe
