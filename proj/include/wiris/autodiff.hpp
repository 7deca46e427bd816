#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace wiris::ad {

using Mat = Eigen::MatrixXd;
using MaskMat = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

/// Reverse-mode tape over dense double matrices. Ops append nodes; backward
/// walks the tape in reverse creation order, so every consumer has already
/// contributed before a node propagates to its parents.
class Tape {
public:
    /// New differentiable leaf (parameter or input).
    int leaf(Mat value);

    const Mat& value(int id) const { return nodes_[id].value; }

    /// Gradient of id after backward(); zero matrix if the node was unused.
    const Mat& grad(int id);

    int add(int a, int b);
    /// Adds a constant matrix (e.g. positional encoding).
    int add_const(int a, Mat c);
    /// Broadcasts a 1 x d bias over every row.
    int add_rowvec(int a, int bias);
    /// Scales column j of a by gain(0, j).
    int mul_rowvec(int a, int gain);
    int matmul(int a, int b);
    /// A * B^T without materializing the transpose node.
    int matmul_nt(int a, int b);
    int scale(int a, double s);
    /// Elementwise product with a constant matrix (dropout masks).
    int cmul(int a, Mat m);
    int relu(int a);
    /// Row softmax. With an allow mask (1 = attend), disallowed entries are
    /// exactly zero in the output and receive exactly zero gradient.
    int softmax_rows(int a, const MaskMat* allow = nullptr);
    /// Per-row zero-mean unit-variance normalization, epsilon inside sqrt.
    int layernorm_rows(int a, double eps = 1e-5);
    int slice_cols(int a, int start, int n);
    int hstack(const std::vector<int>& parts);
    /// Embedding lookup: out.row(i) = table.row(ids[i]).
    int gather_rows(int table, std::vector<int> ids);
    /// Sum over rows with target != ignore_id of -log softmax(row)[target].
    /// Returns a 1x1 node; valid_count receives the number of scored rows.
    int cross_entropy_sum(int logits, const std::vector<int>& targets, int ignore_id,
                          int* valid_count = nullptr);

    void backward(int loss_id);

    size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Mat value;
        Mat grad;
        bool grad_init = false;
        std::function<void(Tape&)> back;
    };

    Mat& grad_ref(int id);
    int push(Mat value, std::function<void(Tape&)> back);

    std::vector<Node> nodes_;
};

}  // namespace wiris::ad
