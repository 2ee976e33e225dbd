#include "hsprobe/numcore/autograd.hpp"

#include <algorithm>
#include <cmath>

#include "hsprobe/error.hpp"

namespace hsprobe {

const Tensor& Var::value() const {
    require(tape_ != nullptr, ErrorCode::kInvalidArgument, "use of an unbound Var");
    return tape_->value(*this);
}

Var Tape::param(const Tensor& t) {
    require(t.all_finite(), ErrorCode::kNonFinite, "parameter contains non-finite values");
    Node n;
    n.op = "param";
    n.ref = &t;
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

Var Tape::view(const Tensor& t) {
    require(t.all_finite(), ErrorCode::kNonFinite, "input contains non-finite values");
    Node n;
    n.op = "view";
    n.ref = &t;
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor t) {
    require(t.all_finite(), ErrorCode::kNonFinite, "constant contains non-finite values");
    Node n;
    n.op = "constant";
    n.owned = std::move(t);
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(const char* op, Tensor value, std::span<const Var> inputs, BackwardFn backward) {
    require(value.all_finite(), ErrorCode::kNonFinite,
            std::string("non-finite output from op '") + op + "'");
    bool needs = false;
    for (Var in : inputs) {
        require(in.tape() == this, ErrorCode::kInvalidArgument,
                std::string("op '") + op + "' mixes variables from different tapes");
        needs = needs || nodes_[in.id()].requires_grad;
    }
    Node n;
    n.op = op;
    n.owned = std::move(value);
    n.requires_grad = needs;
    if (needs) {
        n.backward = std::move(backward);
    }
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(Var v) const {
    const Node& n = nodes_[v.id()];
    return n.ref != nullptr ? *n.ref : n.owned;
}

Tensor* Tape::grad_slot(Var v) {
    Node& n = nodes_[v.id()];
    if (!n.requires_grad) {
        return nullptr;
    }
    if (!n.grad) {
        n.grad = Tensor(value(v).shape(), 0.0);
    }
    return &*n.grad;
}

Tensor Tape::grad(Var v) const {
    const Node& n = nodes_[v.id()];
    return n.grad ? *n.grad : Tensor(value(v).shape(), 0.0);
}

void Tape::backward(Var out, std::vector<std::size_t>* visited) {
    require(out.tape() == this, ErrorCode::kInvalidArgument, "backward on a foreign Var");
    require(value(out).size() == 1, ErrorCode::kInvalidArgument,
            "backward needs a scalar output, got shape " + shape_string(value(out).shape()));
    for (Node& n : nodes_) {
        n.grad.reset();
    }
    if (!nodes_[out.id()].requires_grad) {
        return;
    }
    nodes_[out.id()].grad = Tensor(value(out).shape(), 1.0);
    for (std::size_t i = out.id() + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.backward || !n.grad) {
            continue;
        }
        // Copy: the closure may grow other nodes' grads but never this one.
        const Tensor g = *n.grad;
        n.backward(*this, g, n.ref != nullptr ? *n.ref : n.owned);
        if (visited != nullptr) {
            visited->push_back(i);
        }
    }
}

std::vector<std::string> Tape::op_names() const {
    std::vector<std::string> names;
    names.reserve(nodes_.size());
    for (const Node& n : nodes_) {
        names.emplace_back(n.op);
    }
    return names;
}

namespace ad {

namespace {

void expect_rank2(const Tensor& t, const char* op) {
    require(t.rank() == 2, ErrorCode::kInvalidArgument,
            std::string(op) + " expects rank 2, got " + shape_string(t.shape()));
}

// out[m,n] = a[m,k] * b[k,n]
void gemm_nn(const Tensor& a, const Tensor& b, Tensor& out) {
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    const double* pa = a.values().data();
    const double* pb = b.values().data();
    double* po = out.values().data();
    for (std::size_t i = 0; i < m; ++i) {
        double* orow = po + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = pa[i * k + p];
            const double* brow = pb + p * n;
            for (std::size_t j = 0; j < n; ++j) {
                orow[j] += av * brow[j];
            }
        }
    }
}

// out[m,k] += g[m,n] * b[k,n]^T
void gemm_nt_acc(const Tensor& g, const Tensor& b, Tensor& out) {
    const std::size_t m = g.rows(), n = g.cols(), k = b.rows();
    const double* pg = g.values().data();
    const double* pb = b.values().data();
    double* po = out.values().data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* grow = pg + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double* brow = pb + p * n;
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                s += grow[j] * brow[j];
            }
            po[i * k + p] += s;
        }
    }
}

// out[k,n] += a[m,k]^T * g[m,n]
void gemm_tn_acc(const Tensor& a, const Tensor& g, Tensor& out) {
    const std::size_t m = a.rows(), k = a.cols(), n = g.cols();
    const double* pa = a.values().data();
    const double* pg = g.values().data();
    double* po = out.values().data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* grow = pg + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = pa[i * k + p];
            double* orow = po + p * n;
            for (std::size_t j = 0; j < n; ++j) {
                orow[j] += av * grow[j];
            }
        }
    }
}

void accumulate(Tensor* slot, const Tensor& g) {
    if (slot == nullptr) {
        return;
    }
    auto dst = slot->values();
    auto src = g.values();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] += src[i];
    }
}

}  // namespace

Var matmul(Var a, Var b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    expect_rank2(av, "matmul");
    expect_rank2(bv, "matmul");
    require(av.cols() == bv.rows(), ErrorCode::kDimensionMismatch,
            "matmul " + shape_string(av.shape()) + " x " + shape_string(bv.shape()));
    Tensor out = Tensor::matrix(av.rows(), bv.cols());
    gemm_nn(av, bv, out);
    const Var ins[] = {a, b};
    return a.tape()->record("matmul", std::move(out), ins, [a, b](Tape& t, const Tensor& g, const Tensor&) {
        if (Tensor* ga = t.grad_slot(a)) {
            gemm_nt_acc(g, t.value(b), *ga);
        }
        if (Tensor* gb = t.grad_slot(b)) {
            gemm_tn_acc(t.value(a), g, *gb);
        }
    });
}

Var add(Var a, Var b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    require(av.same_shape(bv), ErrorCode::kDimensionMismatch,
            "add " + shape_string(av.shape()) + " + " + shape_string(bv.shape()));
    Tensor out = av;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] += bv[i];
    }
    const Var ins[] = {a, b};
    return a.tape()->record("add", std::move(out), ins, [a, b](Tape& t, const Tensor& g, const Tensor&) {
        accumulate(t.grad_slot(a), g);
        accumulate(t.grad_slot(b), g);
    });
}

Var add_bias(Var a, Var bias) {
    const Tensor& av = a.value();
    const Tensor& bv = bias.value();
    expect_rank2(av, "add_bias");
    require(bv.rank() == 1 && bv.size() == av.cols(), ErrorCode::kDimensionMismatch,
            "add_bias " + shape_string(av.shape()) + " + " + shape_string(bv.shape()));
    Tensor out = av;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        for (std::size_t c = 0; c < out.cols(); ++c) {
            out(r, c) += bv[c];
        }
    }
    const Var ins[] = {a, bias};
    return a.tape()->record("add_bias", std::move(out), ins, [a, bias](Tape& t, const Tensor& g, const Tensor&) {
        accumulate(t.grad_slot(a), g);
        if (Tensor* gb = t.grad_slot(bias)) {
            for (std::size_t r = 0; r < g.rows(); ++r) {
                for (std::size_t c = 0; c < g.cols(); ++c) {
                    (*gb)[c] += g(r, c);
                }
            }
        }
    });
}

Var scale(Var a, double s) {
    Tensor out = a.value();
    for (double& v : out.values()) {
        v *= s;
    }
    const Var ins[] = {a};
    return a.tape()->record("scale", std::move(out), ins, [a, s](Tape& t, const Tensor& g, const Tensor&) {
        if (Tensor* ga = t.grad_slot(a)) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                (*ga)[i] += s * g[i];
            }
        }
    });
}

Var transpose(Var a) {
    const Tensor& av = a.value();
    expect_rank2(av, "transpose");
    Tensor out = Tensor::matrix(av.cols(), av.rows());
    for (std::size_t r = 0; r < av.rows(); ++r) {
        for (std::size_t c = 0; c < av.cols(); ++c) {
            out(c, r) = av(r, c);
        }
    }
    const Var ins[] = {a};
    return a.tape()->record("transpose", std::move(out), ins, [a](Tape& t, const Tensor& g, const Tensor&) {
        if (Tensor* ga = t.grad_slot(a)) {
            for (std::size_t r = 0; r < g.rows(); ++r) {
                for (std::size_t c = 0; c < g.cols(); ++c) {
                    (*ga)(c, r) += g(r, c);
                }
            }
        }
    });
}

Var slice_cols(Var a, std::size_t begin, std::size_t width) {
    const Tensor& av = a.value();
    expect_rank2(av, "slice_cols");
    require(width > 0 && begin + width <= av.cols(), ErrorCode::kDimensionMismatch,
            "slice_cols out of range");
    Tensor out = Tensor::matrix(av.rows(), width);
    for (std::size_t r = 0; r < av.rows(); ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            out(r, c) = av(r, begin + c);
        }
    }
    const Var ins[] = {a};
    return a.tape()->record("slice_cols", std::move(out), ins,
                            [a, begin](Tape& t, const Tensor& g, const Tensor&) {
                                if (Tensor* ga = t.grad_slot(a)) {
                                    for (std::size_t r = 0; r < g.rows(); ++r) {
                                        for (std::size_t c = 0; c < g.cols(); ++c) {
                                            (*ga)(r, begin + c) += g(r, c);
                                        }
                                    }
                                }
                            });
}

Var concat_cols(std::span<const Var> parts) {
    require(!parts.empty(), ErrorCode::kInvalidArgument, "concat_cols of nothing");
    const std::size_t rows = parts.front().value().rows();
    std::size_t total = 0;
    for (Var p : parts) {
        expect_rank2(p.value(), "concat_cols");
        require(p.value().rows() == rows, ErrorCode::kDimensionMismatch, "concat_cols row mismatch");
        total += p.value().cols();
    }
    Tensor out = Tensor::matrix(rows, total);
    std::size_t offset = 0;
    for (Var p : parts) {
        const Tensor& pv = p.value();
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < pv.cols(); ++c) {
                out(r, offset + c) = pv(r, c);
            }
        }
        offset += pv.cols();
    }
    std::vector<Var> ins(parts.begin(), parts.end());
    return parts.front().tape()->record(
        "concat_cols", std::move(out), ins, [ins](Tape& t, const Tensor& g, const Tensor&) {
            std::size_t off = 0;
            for (Var p : ins) {
                const std::size_t w = t.value(p).cols();
                if (Tensor* gp = t.grad_slot(p)) {
                    for (std::size_t r = 0; r < g.rows(); ++r) {
                        for (std::size_t c = 0; c < w; ++c) {
                            (*gp)(r, c) += g(r, off + c);
                        }
                    }
                }
                off += w;
            }
        });
}

Var softmax_rows(Var a) {
    Tensor out = hsprobe::softmax_rows(a.value());
    const Var ins[] = {a};
    return a.tape()->record("softmax_rows", std::move(out), ins,
                            [a](Tape& t, const Tensor& g, const Tensor& y) {
                                Tensor* ga = t.grad_slot(a);
                                if (ga == nullptr) {
                                    return;
                                }
                                for (std::size_t r = 0; r < y.rows(); ++r) {
                                    double dot = 0.0;
                                    for (std::size_t c = 0; c < y.cols(); ++c) {
                                        dot += g(r, c) * y(r, c);
                                    }
                                    for (std::size_t c = 0; c < y.cols(); ++c) {
                                        (*ga)(r, c) += y(r, c) * (g(r, c) - dot);
                                    }
                                }
                            });
}

Var mul_const(Var a, const Tensor& mask) {
    const Tensor& av = a.value();
    require(av.same_shape(mask), ErrorCode::kDimensionMismatch, "mul_const shape mismatch");
    Tensor out = av;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] *= mask[i];
    }
    const Var ins[] = {a};
    return a.tape()->record("mul_const", std::move(out), ins, [a, mask](Tape& t, const Tensor& g, const Tensor&) {
        if (Tensor* ga = t.grad_slot(a)) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                (*ga)[i] += g[i] * mask[i];
            }
        }
    });
}

Var mean_rows(Var a) {
    const Tensor& av = a.value();
    expect_rank2(av, "mean_rows");
    const double inv = 1.0 / static_cast<double>(av.rows());
    Tensor out = Tensor::matrix(1, av.cols());
    for (std::size_t r = 0; r < av.rows(); ++r) {
        for (std::size_t c = 0; c < av.cols(); ++c) {
            out(0, c) += av(r, c);
        }
    }
    for (double& v : out.values()) {
        v *= inv;
    }
    const Var ins[] = {a};
    return a.tape()->record("mean_rows", std::move(out), ins, [a, inv](Tape& t, const Tensor& g, const Tensor&) {
        if (Tensor* ga = t.grad_slot(a)) {
            for (std::size_t r = 0; r < ga->rows(); ++r) {
                for (std::size_t c = 0; c < ga->cols(); ++c) {
                    (*ga)(r, c) += g(0, c) * inv;
                }
            }
        }
    });
}

Var sigmoid(Var a) {
    Tensor out = a.value();
    for (double& v : out.values()) {
        v = hsprobe::sigmoid(v);
    }
    const Var ins[] = {a};
    return a.tape()->record("sigmoid", std::move(out), ins, [a](Tape& t, const Tensor& g, const Tensor& y) {
        if (Tensor* ga = t.grad_slot(a)) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                (*ga)[i] += g[i] * y[i] * (1.0 - y[i]);
            }
        }
    });
}

Var bce(Var p, double label) {
    const Tensor& pv = p.value();
    require(pv.size() == 1, ErrorCode::kInvalidArgument, "bce expects a scalar probability");
    const double prob = pv[0];
    Tensor out = Tensor::scalar(hsprobe::bce(prob, label));
    const Var ins[] = {p};
    return p.tape()->record("bce", std::move(out), ins, [p, prob, label](Tape& t, const Tensor& g, const Tensor&) {
        Tensor* gp = t.grad_slot(p);
        if (gp == nullptr || prob < kBceEpsilon || prob > 1.0 - kBceEpsilon) {
            return;  // clamped region: flat
        }
        (*gp)[0] += g[0] * (-(label / prob) + (1.0 - label) / (1.0 - prob));
    });
}

Var mean_all(std::span<const Var> scalars) {
    require(!scalars.empty(), ErrorCode::kInvalidArgument, "mean_all of nothing");
    double sum = 0.0;
    for (Var s : scalars) {
        require(s.value().size() == 1, ErrorCode::kInvalidArgument, "mean_all expects scalars");
        sum += s.value()[0];
    }
    const double inv = 1.0 / static_cast<double>(scalars.size());
    std::vector<Var> ins(scalars.begin(), scalars.end());
    return scalars.front().tape()->record(
        "mean_all", Tensor::scalar(sum * inv), ins, [ins, inv](Tape& t, const Tensor& g, const Tensor&) {
            for (Var s : ins) {
                if (Tensor* gs = t.grad_slot(s)) {
                    (*gs)[0] += g[0] * inv;
                }
            }
        });
}

Var dot_const(Var a, const Tensor& weights) {
    const Tensor& av = a.value();
    require(av.size() == weights.size(), ErrorCode::kDimensionMismatch, "dot_const size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) {
        s += av[i] * weights[i];
    }
    const Var ins[] = {a};
    return a.tape()->record("dot_const", Tensor::scalar(s), ins,
                            [a, weights](Tape& t, const Tensor& g, const Tensor&) {
                                if (Tensor* ga = t.grad_slot(a)) {
                                    for (std::size_t i = 0; i < ga->size(); ++i) {
                                        (*ga)[i] += g[0] * weights[i];
                                    }
                                }
                            });
}

}  // namespace ad

}  // namespace hsprobe
