#include "fc/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fc {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

double int_pow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

/// out += a * b   (a: n x k, b: k x m)
void matmul_acc(const Mat& a, const Mat& b, Mat& out) {
    for (int i = 0; i < a.rows; ++i) {
        double* orow = &out.a[static_cast<std::size_t>(i) * out.cols];
        const double* arow = &a.a[static_cast<std::size_t>(i) * a.cols];
        for (int t = 0; t < a.cols; ++t) {
            const double av = arow[t];
            if (av == 0.0) continue;
            const double* brow = &b.a[static_cast<std::size_t>(t) * b.cols];
            for (int j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
        }
    }
}

/// out += a^T * b   (a: k x n, b: k x m, out: n x m)
void matmul_tn_acc(const Mat& a, const Mat& b, Mat& out) {
    for (int t = 0; t < a.rows; ++t) {
        const double* arow = &a.a[static_cast<std::size_t>(t) * a.cols];
        const double* brow = &b.a[static_cast<std::size_t>(t) * b.cols];
        for (int i = 0; i < a.cols; ++i) {
            const double av = arow[i];
            if (av == 0.0) continue;
            double* orow = &out.a[static_cast<std::size_t>(i) * out.cols];
            for (int j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
        }
    }
}

/// out += a * b^T   (a: n x k, b: m x k, out: n x m)
void matmul_nt_acc(const Mat& a, const Mat& b, Mat& out) {
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = &a.a[static_cast<std::size_t>(i) * a.cols];
        double* orow = &out.a[static_cast<std::size_t>(i) * out.cols];
        for (int j = 0; j < b.rows; ++j) {
            const double* brow = &b.a[static_cast<std::size_t>(j) * b.cols];
            double acc = 0.0;
            for (int t = 0; t < a.cols; ++t) acc += arow[t] * brow[t];
            orow[j] += acc;
        }
    }
}

}  // namespace

Tape::Node& Tape::node(Ref r) {
    if (r.id < 0 || r.id >= static_cast<int>(nodes_.size()))
        throw std::out_of_range("Tape: dangling node handle");
    return nodes_[static_cast<std::size_t>(r.id)];
}

const Tape::Node& Tape::node(Ref r) const {
    if (r.id < 0 || r.id >= static_cast<int>(nodes_.size()))
        throw std::out_of_range("Tape: dangling node handle");
    return nodes_[static_cast<std::size_t>(r.id)];
}

Ref Tape::push(Node n) {
    for (const int arg : n.args)
        if (nodes_[static_cast<std::size_t>(arg)].needs_grad) n.needs_grad = true;
    nodes_.push_back(std::move(n));
    return Ref{static_cast<int>(nodes_.size()) - 1};
}

void Tape::ensure_grad(Node& n) {
    if (n.grad.size() == 0) n.grad = Mat(n.value.rows, n.value.cols, 0.0);
}

Ref Tape::leaf(Mat value, bool needs_grad) {
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    nodes_.push_back(std::move(n));
    return Ref{static_cast<int>(nodes_.size()) - 1};
}

Ref Tape::add(Ref x, Ref y) {
    require(node(x).value.same_shape(node(y).value), "add: shape mismatch");
    Node n;
    n.op = Op::Add;
    n.args = {x.id, y.id};
    n.value = node(x).value;
    const Mat& yv = node(y).value;
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value.a[i] += yv.a[i];
    return push(std::move(n));
}

Ref Tape::sub(Ref x, Ref y) {
    require(node(x).value.same_shape(node(y).value), "sub: shape mismatch");
    Node n;
    n.op = Op::Sub;
    n.args = {x.id, y.id};
    n.value = node(x).value;
    const Mat& yv = node(y).value;
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value.a[i] -= yv.a[i];
    return push(std::move(n));
}

Ref Tape::mul(Ref x, Ref y) {
    require(node(x).value.same_shape(node(y).value), "mul: shape mismatch");
    Node n;
    n.op = Op::Mul;
    n.args = {x.id, y.id};
    n.value = node(x).value;
    const Mat& yv = node(y).value;
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value.a[i] *= yv.a[i];
    return push(std::move(n));
}

Ref Tape::matmul(Ref x, Ref y) {
    const Mat& xv = node(x).value;
    const Mat& yv = node(y).value;
    require(xv.cols == yv.rows, "matmul: inner dimensions disagree");
    Node n;
    n.op = Op::MatMul;
    n.args = {x.id, y.id};
    n.value = Mat(xv.rows, yv.cols, 0.0);
    matmul_acc(xv, yv, n.value);
    return push(std::move(n));
}

Ref Tape::transpose(Ref x) {
    const Mat& xv = node(x).value;
    Node n;
    n.op = Op::Transpose;
    n.args = {x.id};
    n.value = Mat(xv.cols, xv.rows);
    for (int i = 0; i < xv.rows; ++i)
        for (int j = 0; j < xv.cols; ++j) n.value.at(j, i) = xv.at(i, j);
    return push(std::move(n));
}

Ref Tape::integer_power(Ref x, int exponent) {
    require(exponent >= 0, "integer_power: exponent must be >= 0");
    Node n;
    n.op = Op::IntPower;
    n.args = {x.id};
    n.iaux = exponent;
    const Mat& xv = node(x).value;
    n.value = Mat(xv.rows, xv.cols);
    for (std::size_t i = 0; i < xv.size(); ++i) n.value.a[i] = int_pow(xv.a[i], exponent);
    return push(std::move(n));
}

Ref Tape::sum(Ref x) {
    Node n;
    n.op = Op::Sum;
    n.args = {x.id};
    double acc = 0.0;
    for (const double v : node(x).value.a) acc += v;
    n.value = Mat::scalar(acc);
    return push(std::move(n));
}

Ref Tape::mean(Ref x) {
    require(node(x).value.size() > 0, "mean: empty tensor");
    Node n;
    n.op = Op::Mean;
    n.args = {x.id};
    double acc = 0.0;
    for (const double v : node(x).value.a) acc += v;
    n.value = Mat::scalar(acc / static_cast<double>(node(x).value.size()));
    return push(std::move(n));
}

Ref Tape::gather_rows(Ref x, std::vector<int> rows) {
    const Mat& xv = node(x).value;
    for (const int r : rows)
        require(r >= 0 && r < xv.rows, "gather_rows: row index out of range");
    Node n;
    n.op = Op::GatherRows;
    n.args = {x.id};
    n.value = Mat(static_cast<int>(rows.size()), xv.cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < xv.cols; ++j)
            n.value.at(static_cast<int>(i), j) = xv.at(rows[i], j);
    n.idx = std::move(rows);
    return push(std::move(n));
}

Ref Tape::softmax_rows(Ref x) {
    const Mat& xv = node(x).value;
    require(xv.cols >= 1, "softmax_rows: empty rows");
    Node n;
    n.op = Op::SoftmaxRows;
    n.args = {x.id};
    n.value = Mat(xv.rows, xv.cols);
    for (int i = 0; i < xv.rows; ++i) {
        double mx = xv.at(i, 0);
        for (int j = 1; j < xv.cols; ++j) mx = std::max(mx, xv.at(i, j));
        double z = 0.0;
        for (int j = 0; j < xv.cols; ++j) {
            const double e = std::exp(xv.at(i, j) - mx);
            n.value.at(i, j) = e;
            z += e;
        }
        for (int j = 0; j < xv.cols; ++j) n.value.at(i, j) /= z;
    }
    return push(std::move(n));
}

Ref Tape::log(Ref x) {
    Node n;
    n.op = Op::Log;
    n.args = {x.id};
    const Mat& xv = node(x).value;
    n.value = Mat(xv.rows, xv.cols);
    for (std::size_t i = 0; i < xv.size(); ++i) n.value.a[i] = std::log(xv.a[i]);
    return push(std::move(n));
}

Ref Tape::scale(Ref x, double c) {
    Node n;
    n.op = Op::Scale;
    n.args = {x.id};
    n.daux = c;
    n.value = node(x).value;
    for (double& v : n.value.a) v *= c;
    return push(std::move(n));
}

Ref Tape::concat_cols(std::span<const Ref> xs) {
    require(!xs.empty(), "concat_cols: nothing to concatenate");
    const int rows = node(xs[0]).value.rows;
    int cols = 0;
    for (const Ref r : xs) {
        require(node(r).value.rows == rows, "concat_cols: row count mismatch");
        cols += node(r).value.cols;
    }
    Node n;
    n.op = Op::ConcatCols;
    for (const Ref r : xs) n.args.push_back(r.id);
    n.value = Mat(rows, cols);
    int off = 0;
    for (const Ref r : xs) {
        const Mat& xv = node(r).value;
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < xv.cols; ++j) n.value.at(i, off + j) = xv.at(i, j);
        off += xv.cols;
    }
    return push(std::move(n));
}

Ref Tape::cross_entropy(Ref logits, std::vector<int> labels) {
    const Mat& lv = node(logits).value;
    require(static_cast<int>(labels.size()) == lv.rows, "cross_entropy: one label per row");
    for (const int y : labels)
        require(y >= 0 && y < lv.cols, "cross_entropy: label out of range");

    Node n;
    n.op = Op::CrossEntropy;
    n.args = {logits.id};
    n.cache = Mat(lv.rows, lv.cols);  // softmax probabilities for the backward pass
    double nll = 0.0;
    for (int i = 0; i < lv.rows; ++i) {
        double mx = lv.at(i, 0);
        for (int j = 1; j < lv.cols; ++j) mx = std::max(mx, lv.at(i, j));
        double z = 0.0;
        for (int j = 0; j < lv.cols; ++j) z += std::exp(lv.at(i, j) - mx);
        const double logz = mx + std::log(z);
        nll -= lv.at(i, labels[static_cast<std::size_t>(i)]) - logz;
        for (int j = 0; j < lv.cols; ++j) n.cache.at(i, j) = std::exp(lv.at(i, j) - logz);
    }
    n.value = Mat::scalar(nll / lv.rows);
    n.idx = std::move(labels);
    return push(std::move(n));
}

Ref Tape::block_scores(Ref q, Ref k, int rows_per_block) {
    const Mat& qv = node(q).value;
    const Mat& kv = node(k).value;
    require(qv.same_shape(kv), "block_scores: Q and K must match");
    require(rows_per_block > 0 && qv.rows % rows_per_block == 0,
            "block_scores: rows must tile into blocks");
    Node n;
    n.op = Op::BlockScores;
    n.args = {q.id, k.id};
    n.iaux = rows_per_block;
    n.value = Mat(qv.rows, rows_per_block, 0.0);
    const int blocks = qv.rows / rows_per_block;
    for (int b = 0; b < blocks; ++b)
        for (int i = 0; i < rows_per_block; ++i) {
            const int qi = b * rows_per_block + i;
            for (int j = 0; j < rows_per_block; ++j) {
                const int kj = b * rows_per_block + j;
                double acc = 0.0;
                for (int t = 0; t < qv.cols; ++t) acc += qv.at(qi, t) * kv.at(kj, t);
                n.value.at(qi, j) = acc;
            }
        }
    return push(std::move(n));
}

Ref Tape::block_apply(Ref p, Ref v, int rows_per_block) {
    const Mat& pv = node(p).value;
    const Mat& vv = node(v).value;
    require(rows_per_block > 0 && pv.rows % rows_per_block == 0 && pv.cols == rows_per_block,
            "block_apply: P must be (B*r x r)");
    require(vv.rows == pv.rows, "block_apply: V row count mismatch");
    Node n;
    n.op = Op::BlockApply;
    n.args = {p.id, v.id};
    n.iaux = rows_per_block;
    n.value = Mat(vv.rows, vv.cols, 0.0);
    const int blocks = pv.rows / rows_per_block;
    for (int b = 0; b < blocks; ++b)
        for (int i = 0; i < rows_per_block; ++i) {
            const int pi = b * rows_per_block + i;
            for (int j = 0; j < rows_per_block; ++j) {
                const double pij = pv.at(pi, j);
                if (pij == 0.0) continue;
                const int vj = b * rows_per_block + j;
                for (int t = 0; t < vv.cols; ++t) n.value.at(pi, t) += pij * vv.at(vj, t);
            }
        }
    return push(std::move(n));
}

Ref Tape::group_norm_mlp(std::span<const Ref> us, Ref w, int q) {
    require(q >= 2, "group_norm_mlp: power must be >= 2");
    require(!us.empty(), "group_norm_mlp: need at least one embedding matrix");
    const Mat& wv = node(w).value;
    const int m = wv.rows;
    for (const Ref u : us)
        require(node(u).value.cols == m, "group_norm_mlp: unit count mismatch");

    Node n;
    n.op = Op::GroupNormMlp;
    for (const Ref u : us) n.args.push_back(u.id);
    n.args.push_back(w.id);
    n.iaux = q;

    // Cache the per-unit lengths for the backward pass (row 0 of cache).
    n.cache = Mat(1, m, 0.0);
    for (const Ref u : us) {
        const Mat& uv = node(u).value;
        for (int i = 0; i < uv.rows; ++i)
            for (int j = 0; j < m; ++j) n.cache.at(0, j) += uv.at(i, j) * uv.at(i, j);
    }
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < wv.cols; ++j) n.cache.at(0, i) += wv.at(i, j) * wv.at(i, j);
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        n.cache.at(0, i) = std::sqrt(n.cache.at(0, i));
        acc += int_pow(n.cache.at(0, i), q);
    }
    n.value = Mat::scalar(std::pow(acc, 1.0 / q));
    return push(std::move(n));
}

Ref Tape::global_l2(std::span<const Ref> xs) {
    require(!xs.empty(), "global_l2: empty parameter list");
    Node n;
    n.op = Op::GlobalL2;
    double acc = 0.0;
    for (const Ref r : xs) {
        n.args.push_back(r.id);
        for (const double v : node(r).value.a) acc += v * v;
    }
    n.value = Mat::scalar(std::sqrt(acc));
    return push(std::move(n));
}

const Mat& Tape::value(Ref r) const { return node(r).value; }

double Tape::scalar_value(Ref r) const {
    const Mat& v = node(r).value;
    require(v.size() == 1, "scalar_value: node is not scalar");
    return v.a[0];
}

const Mat& Tape::grad(Ref r) {
    Node& n = node(r);
    ensure_grad(n);
    return n.grad;
}

void Tape::backward(Ref target) {
    Node& t = node(target);
    require(t.value.size() == 1, "backward: target must be scalar");
    for (Node& n : nodes_)
        if (n.grad.size() != 0)
            for (double& g : n.grad.a) g = 0.0;
    ensure_grad(t);
    t.grad.a[0] = 1.0;
    for (int id = target.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.needs_grad || n.grad.size() == 0 || n.op == Op::Leaf) continue;
        backprop(id);
    }
}

void Tape::backprop(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    const Mat& g = n.grad;

    auto arg = [&](int i) -> Node& { return nodes_[static_cast<std::size_t>(n.args[static_cast<std::size_t>(i)])]; };
    auto touch = [&](int i) -> bool {
        Node& a = arg(i);
        if (!a.needs_grad) return false;
        ensure_grad(a);
        return true;
    };

    switch (n.op) {
        case Op::Leaf:
            break;
        case Op::Add: {
            for (int s = 0; s < 2; ++s)
                if (touch(s))
                    for (std::size_t i = 0; i < g.size(); ++i) arg(s).grad.a[i] += g.a[i];
            break;
        }
        case Op::Sub: {
            if (touch(0))
                for (std::size_t i = 0; i < g.size(); ++i) arg(0).grad.a[i] += g.a[i];
            if (touch(1))
                for (std::size_t i = 0; i < g.size(); ++i) arg(1).grad.a[i] -= g.a[i];
            break;
        }
        case Op::Mul: {
            const Mat& xv = arg(0).value;
            const Mat& yv = arg(1).value;
            if (touch(0))
                for (std::size_t i = 0; i < g.size(); ++i) arg(0).grad.a[i] += g.a[i] * yv.a[i];
            if (touch(1))
                for (std::size_t i = 0; i < g.size(); ++i) arg(1).grad.a[i] += g.a[i] * xv.a[i];
            break;
        }
        case Op::MatMul: {
            if (touch(0)) matmul_nt_acc(g, arg(1).value, arg(0).grad);
            if (touch(1)) matmul_tn_acc(arg(0).value, g, arg(1).grad);
            break;
        }
        case Op::Transpose: {
            if (touch(0)) {
                Mat& xg = arg(0).grad;
                for (int i = 0; i < g.rows; ++i)
                    for (int j = 0; j < g.cols; ++j) xg.at(j, i) += g.at(i, j);
            }
            break;
        }
        case Op::IntPower: {
            if (touch(0)) {
                const Mat& xv = arg(0).value;
                Mat& xg = arg(0).grad;
                const int e = n.iaux;
                if (e > 0)
                    for (std::size_t i = 0; i < g.size(); ++i)
                        xg.a[i] += g.a[i] * e * int_pow(xv.a[i], e - 1);
            }
            break;
        }
        case Op::Sum: {
            if (touch(0)) {
                const double gv = g.a[0];
                for (double& x : arg(0).grad.a) x += gv;
            }
            break;
        }
        case Op::Mean: {
            if (touch(0)) {
                const double gv = g.a[0] / static_cast<double>(arg(0).value.size());
                for (double& x : arg(0).grad.a) x += gv;
            }
            break;
        }
        case Op::GatherRows: {
            if (touch(0)) {
                Mat& xg = arg(0).grad;
                for (std::size_t i = 0; i < n.idx.size(); ++i)
                    for (int j = 0; j < g.cols; ++j)
                        xg.at(n.idx[i], j) += g.at(static_cast<int>(i), j);
            }
            break;
        }
        case Op::SoftmaxRows: {
            if (touch(0)) {
                const Mat& s = n.value;
                Mat& xg = arg(0).grad;
                for (int i = 0; i < s.rows; ++i) {
                    double dot = 0.0;
                    for (int j = 0; j < s.cols; ++j) dot += g.at(i, j) * s.at(i, j);
                    for (int j = 0; j < s.cols; ++j)
                        xg.at(i, j) += s.at(i, j) * (g.at(i, j) - dot);
                }
            }
            break;
        }
        case Op::Log: {
            if (touch(0)) {
                const Mat& xv = arg(0).value;
                Mat& xg = arg(0).grad;
                for (std::size_t i = 0; i < g.size(); ++i) xg.a[i] += g.a[i] / xv.a[i];
            }
            break;
        }
        case Op::Scale: {
            if (touch(0))
                for (std::size_t i = 0; i < g.size(); ++i) arg(0).grad.a[i] += g.a[i] * n.daux;
            break;
        }
        case Op::ConcatCols: {
            int off = 0;
            for (std::size_t s = 0; s < n.args.size(); ++s) {
                const int c = arg(static_cast<int>(s)).value.cols;
                if (touch(static_cast<int>(s))) {
                    Mat& xg = arg(static_cast<int>(s)).grad;
                    for (int i = 0; i < g.rows; ++i)
                        for (int j = 0; j < c; ++j) xg.at(i, j) += g.at(i, off + j);
                }
                off += c;
            }
            break;
        }
        case Op::CrossEntropy: {
            if (touch(0)) {
                Mat& xg = arg(0).grad;
                const Mat& probs = n.cache;
                const double gv = g.a[0] / probs.rows;
                for (int i = 0; i < probs.rows; ++i) {
                    for (int j = 0; j < probs.cols; ++j) xg.at(i, j) += gv * probs.at(i, j);
                    xg.at(i, n.idx[static_cast<std::size_t>(i)]) -= gv;
                }
            }
            break;
        }
        case Op::BlockScores: {
            const int r = n.iaux;
            const Mat& qv = arg(0).value;
            const Mat& kv = arg(1).value;
            const int blocks = qv.rows / r;
            if (touch(0)) {
                Mat& qg = arg(0).grad;
                for (int b = 0; b < blocks; ++b)
                    for (int i = 0; i < r; ++i) {
                        const int qi = b * r + i;
                        for (int j = 0; j < r; ++j) {
                            const double gij = g.at(qi, j);
                            if (gij == 0.0) continue;
                            const int kj = b * r + j;
                            for (int t = 0; t < qv.cols; ++t) qg.at(qi, t) += gij * kv.at(kj, t);
                        }
                    }
            }
            if (touch(1)) {
                Mat& kg = arg(1).grad;
                for (int b = 0; b < blocks; ++b)
                    for (int i = 0; i < r; ++i) {
                        const int qi = b * r + i;
                        for (int j = 0; j < r; ++j) {
                            const double gij = g.at(qi, j);
                            if (gij == 0.0) continue;
                            const int kj = b * r + j;
                            for (int t = 0; t < qv.cols; ++t) kg.at(kj, t) += gij * qv.at(qi, t);
                        }
                    }
            }
            break;
        }
        case Op::BlockApply: {
            const int r = n.iaux;
            const Mat& pv = arg(0).value;
            const Mat& vv = arg(1).value;
            const int blocks = pv.rows / r;
            if (touch(0)) {
                Mat& pg = arg(0).grad;
                for (int b = 0; b < blocks; ++b)
                    for (int i = 0; i < r; ++i) {
                        const int pi = b * r + i;
                        for (int j = 0; j < r; ++j) {
                            const int vj = b * r + j;
                            double acc = 0.0;
                            for (int t = 0; t < vv.cols; ++t) acc += g.at(pi, t) * vv.at(vj, t);
                            pg.at(pi, j) += acc;
                        }
                    }
            }
            if (touch(1)) {
                Mat& vg = arg(1).grad;
                for (int b = 0; b < blocks; ++b)
                    for (int i = 0; i < r; ++i) {
                        const int pi = b * r + i;
                        for (int j = 0; j < r; ++j) {
                            const double pij = pv.at(pi, j);
                            if (pij == 0.0) continue;
                            const int vj = b * r + j;
                            for (int t = 0; t < vv.cols; ++t) vg.at(vj, t) += pij * g.at(pi, t);
                        }
                    }
            }
            break;
        }
        case Op::GroupNormMlp: {
            const int q = n.iaux;
            const double N = n.value.a[0];
            if (N <= 0.0) break;  // subgradient 0 at the origin
            const double gv = g.a[0];
            const double nscale = std::pow(N, 1.0 - q);
            const int m = n.cache.cols;
            std::vector<double> unit_scale(static_cast<std::size_t>(m), 0.0);
            for (int i = 0; i < m; ++i) {
                const double s = n.cache.at(0, i);
                // d|theta|/dx = N^{1-q} s_i^{q-2} x; zero units get zero.
                unit_scale[static_cast<std::size_t>(i)] =
                    s > 0.0 ? gv * nscale * int_pow(s, q - 2) : 0.0;
            }
            const int nu = static_cast<int>(n.args.size()) - 1;
            for (int s = 0; s < nu; ++s) {
                if (!touch(s)) continue;
                const Mat& uv = arg(s).value;
                Mat& ug = arg(s).grad;
                for (int i = 0; i < uv.rows; ++i)
                    for (int j = 0; j < m; ++j)
                        ug.at(i, j) += unit_scale[static_cast<std::size_t>(j)] * uv.at(i, j);
            }
            if (touch(nu)) {
                const Mat& wv = arg(nu).value;
                Mat& wg = arg(nu).grad;
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < wv.cols; ++j)
                        wg.at(i, j) += unit_scale[static_cast<std::size_t>(i)] * wv.at(i, j);
            }
            break;
        }
        case Op::GlobalL2: {
            const double N = n.value.a[0];
            if (N <= 0.0) break;
            const double gv = g.a[0] / N;
            for (std::size_t s = 0; s < n.args.size(); ++s) {
                if (!touch(static_cast<int>(s))) continue;
                const Mat& xv = arg(static_cast<int>(s)).value;
                Mat& xg = arg(static_cast<int>(s)).grad;
                for (std::size_t i = 0; i < xv.size(); ++i) xg.a[i] += gv * xv.a[i];
            }
            break;
        }
    }
}

void Tape::clear() { nodes_.clear(); }

GradCheckReport grad_check(
    const std::function<double(std::span<const double>, std::span<double>)>& f,
    std::span<const double> x0, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be positive");
    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> analytic(x.size(), 0.0);
    f(x, analytic);

    GradCheckReport report;
    std::vector<double> none;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + eps;
        const double fp = f(x, none);
        x[i] = saved - eps;
        const double fm = f(x, none);
        x[i] = saved;
        const double numeric = (fp - fm) / (2.0 * eps);
        const double abs_err = std::abs(analytic[i] - numeric);
        const double rel_err = abs_err / (std::abs(analytic[i]) + std::abs(numeric) + 1e-12);
        if (abs_err > report.max_abs_err) report.max_abs_err = abs_err;
        if (rel_err > report.max_rel_err) {
            report.max_rel_err = rel_err;
            report.worst_index = static_cast<int>(i);
        }
    }
    return report;
}

}  // namespace fc
