#include "hsprobe/numcore/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hsprobe/error.hpp"
#include "hsprobe/rng.hpp"

namespace hsprobe {

namespace {

double evaluate(const LossFn& fn, const std::vector<Tensor>& params) {
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(params.size());
    for (const Tensor& p : params) {
        leaves.push_back(tape.param(p));
    }
    const Var loss = fn(tape, leaves);
    require(loss.value().size() == 1, ErrorCode::kInvalidArgument, "loss must be a scalar");
    return loss.value()[0];
}

}  // namespace

GradCheckResult grad_check(const LossFn& loss_fn, std::vector<Tensor> params,
                           const GradCheckOptions& options) {
    require(options.eps > 0.0, ErrorCode::kInvalidArgument, "grad_check eps must be > 0");

    std::vector<Tensor> analytic;
    double base = 0.0;
    {
        Tape tape;
        std::vector<Var> leaves;
        for (const Tensor& p : params) {
            leaves.push_back(tape.param(p));
        }
        const Var loss = loss_fn(tape, leaves);
        base = loss.value()[0];
        tape.backward(loss);
        for (Var v : leaves) {
            analytic.push_back(tape.grad(v));
        }
    }
    const double again = evaluate(loss_fn, params);
    require(again == base, ErrorCode::kInvalidArgument,
            "grad_check: loss function is not deterministic under fixed inputs");

    Rng rng(derive_seed(options.seed, "gradcheck"));
    GradCheckResult result;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        std::vector<std::size_t> coords(params[pi].size());
        std::iota(coords.begin(), coords.end(), std::size_t{0});
        if (options.coords_per_param > 0 && options.coords_per_param < coords.size()) {
            // Partial Fisher-Yates to pick a sample without replacement.
            for (std::size_t i = 0; i < options.coords_per_param; ++i) {
                const std::size_t j = i + rng.below(coords.size() - i);
                std::swap(coords[i], coords[j]);
            }
            coords.resize(options.coords_per_param);
        }
        for (std::size_t c : coords) {
            const double original = params[pi][c];
            params[pi][c] = original + options.eps;
            const double up = evaluate(loss_fn, params);
            params[pi][c] = original - options.eps;
            const double down = evaluate(loss_fn, params);
            params[pi][c] = original;

            const double numeric = (up - down) / (2.0 * options.eps);
            const double a = analytic[pi][c];
            const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
            const double err = std::abs(a - numeric) / denom;
            ++result.coords_checked;
            if (err > result.max_rel_error || result.coords_checked == 1) {
                result.max_rel_error = err;
                result.worst_param = pi;
                result.worst_coord = c;
                result.worst_analytic = a;
                result.worst_numeric = numeric;
            }
        }
    }
    return result;
}

}  // namespace hsprobe
