#pragma once

#include <functional>
#include <span>
#include <vector>

namespace fc {

/// Dense row-major matrix of doubles. Scalars travel as 1x1.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0)
        : rows(r), cols(c), a(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

    static Mat scalar(double v) {
        Mat m(1, 1);
        m.a[0] = v;
        return m;
    }

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
    std::size_t size() const { return a.size(); }
    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

/// Handle to a node on a Tape.
struct Ref {
    int id = -1;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so creation
/// order is already topological; backward() walks the tape once in reverse,
/// accumulating vector-Jacobian products into each argument's gradient.
class Tape {
public:
    /// Register an input. Only graphs reaching a needs_grad leaf propagate.
    Ref leaf(Mat value, bool needs_grad);

    Ref add(Ref x, Ref y);
    Ref sub(Ref x, Ref y);
    Ref mul(Ref x, Ref y);  ///< elementwise
    Ref matmul(Ref x, Ref y);
    Ref transpose(Ref x);
    Ref integer_power(Ref x, int exponent);  ///< elementwise, exponent >= 0
    Ref sum(Ref x);                          ///< all entries -> scalar
    Ref mean(Ref x);
    Ref gather_rows(Ref x, std::vector<int> rows);  ///< duplicates allowed
    Ref softmax_rows(Ref x);
    Ref log(Ref x);
    Ref scale(Ref x, double c);
    Ref concat_cols(std::span<const Ref> xs);

    /// Mean negative log-likelihood of the labels under row-softmax of the
    /// logits; the gradient is the classic (softmax - onehot) / batch.
    Ref cross_entropy(Ref logits, std::vector<int> labels);

    /// Per-block attention scores: with Q and K both (B*r x d), block b of the
    /// (B*r x r) output is Q_b K_b^T. Keeps a whole batch of independent
    /// attention patterns in one node.
    Ref block_scores(Ref q, Ref k, int rows_per_block);

    /// Per-block application: with P (B*r x r) and V (B*r x d), block b of the
    /// output is P_b V_b.
    Ref block_apply(Ref p, Ref v, int rows_per_block);

    /// The L_{2,q} norm over hidden units of the polynomial network: unit i
    /// owns column i of every u_j (p x m) and row i of w (m x p);
    /// N = (sum_i |unit_i|_2^q)^{1/q}. The gradient of a zero unit is defined
    /// as 0 (subgradient choice), so regularization never resurrects a dead
    /// unit on its own.
    Ref group_norm_mlp(std::span<const Ref> us, Ref w, int q);

    /// sqrt of the summed squares of every listed tensor (L2 over the whole
    /// parameter list); gradient x / N, and 0 at N == 0.
    Ref global_l2(std::span<const Ref> xs);

    const Mat& value(Ref r) const;
    double scalar_value(Ref r) const;

    /// Gradient of the last backward() target w.r.t. node r (zeros if the
    /// node was never reached).
    const Mat& grad(Ref r);

    /// Seed d(target)/d(target) = 1 and sweep the tape once in reverse.
    /// `target` must be scalar-shaped.
    void backward(Ref target);

    void clear();
    std::size_t node_count() const { return nodes_.size(); }

private:
    enum class Op {
        Leaf,
        Add,
        Sub,
        Mul,
        MatMul,
        Transpose,
        IntPower,
        Sum,
        Mean,
        GatherRows,
        SoftmaxRows,
        Log,
        Scale,
        ConcatCols,
        CrossEntropy,
        BlockScores,
        BlockApply,
        GroupNormMlp,
        GlobalL2,
    };

    struct Node {
        Op op = Op::Leaf;
        Mat value;
        Mat grad;  ///< lazily sized; empty means untouched (all zeros)
        std::vector<int> args;
        int iaux = 0;      ///< exponent / rows_per_block / norm power
        double daux = 0;   ///< scale constant
        std::vector<int> idx;  ///< gather indices or labels
        Mat cache;         ///< cross-entropy keeps its softmax here
        bool needs_grad = false;
    };

    Node& node(Ref r);
    const Node& node(Ref r) const;
    Ref push(Node n);
    void ensure_grad(Node& n);
    void backprop(int id);

    std::vector<Node> nodes_;
};

struct GradCheckReport {
    double max_abs_err = 0;
    double max_rel_err = 0;
    int worst_index = -1;
};

/// Central-difference check of a tape gradient. `f(x, grad_out)` evaluates a
/// scalar objective at x and, when grad_out is non-empty, fills it with the
/// tape gradient. Relative error uses |analytic| + |numeric| + 1e-12 in the
/// denominator.
GradCheckReport grad_check(
    const std::function<double(std::span<const double>, std::span<double>)>& f,
    std::span<const double> x0, double eps);

}  // namespace fc
