#include "wiris/autodiff.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wiris::ad {

int Tape::push(Mat value, std::function<void(Tape&)> back) {
    nodes_.push_back(Node{std::move(value), {}, false, std::move(back)});
    return static_cast<int>(nodes_.size()) - 1;
}

int Tape::leaf(Mat value) { return push(std::move(value), nullptr); }

Mat& Tape::grad_ref(int id) {
    Node& n = nodes_[id];
    if (!n.grad_init) {
        n.grad = Mat::Zero(n.value.rows(), n.value.cols());
        n.grad_init = true;
    }
    return n.grad;
}

const Mat& Tape::grad(int id) { return grad_ref(id); }

int Tape::add(int a, int b) {
    if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols())
        throw std::invalid_argument("add: shape mismatch");
    int out = push(value(a) + value(b), nullptr);
    nodes_[out].back = [a, b, out](Tape& t) {
        t.grad_ref(a) += t.grad_ref(out);
        t.grad_ref(b) += t.grad_ref(out);
    };
    return out;
}

int Tape::add_const(int a, Mat c) {
    if (value(a).rows() != c.rows() || value(a).cols() != c.cols())
        throw std::invalid_argument("add_const: shape mismatch");
    int out = push(value(a) + c, nullptr);
    nodes_[out].back = [a, out](Tape& t) { t.grad_ref(a) += t.grad_ref(out); };
    return out;
}

int Tape::add_rowvec(int a, int bias) {
    if (value(bias).rows() != 1 || value(bias).cols() != value(a).cols())
        throw std::invalid_argument("add_rowvec: bias must be 1 x cols(a)");
    Mat v = value(a);
    v.rowwise() += value(bias).row(0);
    int out = push(std::move(v), nullptr);
    nodes_[out].back = [a, bias, out](Tape& t) {
        t.grad_ref(a) += t.grad_ref(out);
        t.grad_ref(bias) += t.grad_ref(out).colwise().sum();
    };
    return out;
}

int Tape::mul_rowvec(int a, int gain) {
    if (value(gain).rows() != 1 || value(gain).cols() != value(a).cols())
        throw std::invalid_argument("mul_rowvec: gain must be 1 x cols(a)");
    Mat v = value(a);
    v.array().rowwise() *= value(gain).row(0).array();
    int out = push(std::move(v), nullptr);
    nodes_[out].back = [a, gain, out](Tape& t) {
        const Mat& g = t.grad_ref(out);
        t.grad_ref(a).array() += g.array().rowwise() * t.value(gain).row(0).array();
        t.grad_ref(gain) += (g.array() * t.value(a).array()).colwise().sum().matrix();
    };
    return out;
}

int Tape::matmul(int a, int b) {
    if (value(a).cols() != value(b).rows()) throw std::invalid_argument("matmul: shape mismatch");
    int out = push(value(a) * value(b), nullptr);
    nodes_[out].back = [a, b, out](Tape& t) {
        const Mat& g = t.grad_ref(out);
        t.grad_ref(a).noalias() += g * t.value(b).transpose();
        t.grad_ref(b).noalias() += t.value(a).transpose() * g;
    };
    return out;
}

int Tape::matmul_nt(int a, int b) {
    if (value(a).cols() != value(b).cols())
        throw std::invalid_argument("matmul_nt: shape mismatch");
    int out = push(value(a) * value(b).transpose(), nullptr);
    nodes_[out].back = [a, b, out](Tape& t) {
        const Mat& g = t.grad_ref(out);
        t.grad_ref(a).noalias() += g * t.value(b);
        t.grad_ref(b).noalias() += g.transpose() * t.value(a);
    };
    return out;
}

int Tape::scale(int a, double s) {
    int out = push(value(a) * s, nullptr);
    nodes_[out].back = [a, s, out](Tape& t) { t.grad_ref(a) += t.grad_ref(out) * s; };
    return out;
}

int Tape::cmul(int a, Mat m) {
    if (value(a).rows() != m.rows() || value(a).cols() != m.cols())
        throw std::invalid_argument("cmul: shape mismatch");
    int out = push(value(a).cwiseProduct(m), nullptr);
    nodes_[out].back = [a, out, m = std::move(m)](Tape& t) {
        t.grad_ref(a) += t.grad_ref(out).cwiseProduct(m);
    };
    return out;
}

int Tape::relu(int a) {
    int out = push(value(a).cwiseMax(0.0), nullptr);
    nodes_[out].back = [a, out](Tape& t) {
        t.grad_ref(a).array() +=
            t.grad_ref(out).array() * (t.value(a).array() > 0.0).cast<double>();
    };
    return out;
}

int Tape::softmax_rows(int a, const MaskMat* allow) {
    const Mat& x = value(a);
    if (allow && (allow->rows() != x.rows() || allow->cols() != x.cols()))
        throw std::invalid_argument("softmax_rows: mask shape mismatch");
    Mat y = Mat::Zero(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (!allow || (*allow)(i, j)) mx = std::max(mx, x(i, j));
        }
        if (!std::isfinite(mx)) continue;  // fully masked row stays zero
        double denom = 0.0;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (!allow || (*allow)(i, j)) denom += std::exp(x(i, j) - mx);
        }
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (!allow || (*allow)(i, j)) y(i, j) = std::exp(x(i, j) - mx) / denom;
        }
    }
    int out = push(std::move(y), nullptr);
    nodes_[out].back = [a, out](Tape& t) {
        const Mat& y2 = t.value(out);
        const Mat& g = t.grad_ref(out);
        Mat gy = g.cwiseProduct(y2);
        Eigen::VectorXd rowsums = gy.rowwise().sum();
        t.grad_ref(a) += gy - y2.cwiseProduct(rowsums.replicate(1, y2.cols()));
    };
    return out;
}

int Tape::layernorm_rows(int a, double eps) {
    const Mat& x = value(a);
    Eigen::Index d = x.cols();
    Eigen::VectorXd mean = x.rowwise().mean();
    Mat centered = x - mean.replicate(1, d);
    Eigen::VectorXd inv_std =
        ((centered.array().square().rowwise().sum() / static_cast<double>(d)) + eps)
            .sqrt()
            .inverse();
    Mat y = (centered.array().colwise() * inv_std.array()).matrix();
    int out = push(std::move(y), nullptr);
    nodes_[out].back = [a, out, inv_std = std::move(inv_std)](Tape& t) {
        const Mat& y2 = t.value(out);
        const Mat& g = t.grad_ref(out);
        Eigen::Index dd = y2.cols();
        Eigen::VectorXd g_mean = g.rowwise().mean();
        Eigen::VectorXd gy_mean = g.cwiseProduct(y2).rowwise().mean();
        Mat dx = g - g_mean.replicate(1, dd) - y2.cwiseProduct(gy_mean.replicate(1, dd));
        t.grad_ref(a) += (dx.array().colwise() * inv_std.array()).matrix();
    };
    return out;
}

int Tape::slice_cols(int a, int start, int n) {
    if (start < 0 || n < 1 || start + n > value(a).cols())
        throw std::invalid_argument("slice_cols: range out of bounds");
    int out = push(value(a).middleCols(start, n), nullptr);
    nodes_[out].back = [a, out, start, n](Tape& t) {
        t.grad_ref(a).middleCols(start, n) += t.grad_ref(out);
    };
    return out;
}

int Tape::hstack(const std::vector<int>& parts) {
    if (parts.empty()) throw std::invalid_argument("hstack: no parts");
    Eigen::Index rows = value(parts[0]).rows();
    Eigen::Index cols = 0;
    for (int p : parts) {
        if (value(p).rows() != rows) throw std::invalid_argument("hstack: row mismatch");
        cols += value(p).cols();
    }
    Mat v(rows, cols);
    Eigen::Index off = 0;
    for (int p : parts) {
        v.middleCols(off, value(p).cols()) = value(p);
        off += value(p).cols();
    }
    int out = push(std::move(v), nullptr);
    nodes_[out].back = [parts, out](Tape& t) {
        Eigen::Index off2 = 0;
        for (int p : parts) {
            Eigen::Index w = t.value(p).cols();
            t.grad_ref(p) += t.grad_ref(out).middleCols(off2, w);
            off2 += w;
        }
    };
    return out;
}

int Tape::gather_rows(int table, std::vector<int> ids) {
    const Mat& tab = value(table);
    Mat v(static_cast<Eigen::Index>(ids.size()), tab.cols());
    for (size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= tab.rows())
            throw std::invalid_argument("gather_rows: id out of range");
        v.row(static_cast<Eigen::Index>(i)) = tab.row(ids[i]);
    }
    int out = push(std::move(v), nullptr);
    nodes_[out].back = [table, out, ids = std::move(ids)](Tape& t) {
        const Mat& g = t.grad_ref(out);
        Mat& gt = t.grad_ref(table);
        for (size_t i = 0; i < ids.size(); ++i)
            gt.row(ids[i]) += g.row(static_cast<Eigen::Index>(i));
    };
    return out;
}

int Tape::cross_entropy_sum(int logits, const std::vector<int>& targets, int ignore_id,
                            int* valid_count) {
    const Mat& x = value(logits);
    if (static_cast<Eigen::Index>(targets.size()) != x.rows())
        throw std::invalid_argument("cross_entropy_sum: one target per row required");
    Mat probs = Mat::Zero(x.rows(), x.cols());
    double loss = 0.0;
    int valid = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        if (targets[i] == ignore_id) continue;
        if (targets[i] < 0 || targets[i] >= x.cols())
            throw std::invalid_argument("cross_entropy_sum: target out of range");
        double mx = x.row(i).maxCoeff();
        double denom = (x.row(i).array() - mx).exp().sum();
        probs.row(i) = ((x.row(i).array() - mx).exp() / denom).matrix();
        loss += mx + std::log(denom) - x(i, targets[i]);
        valid += 1;
    }
    if (valid_count) *valid_count = valid;
    Mat v(1, 1);
    v(0, 0) = loss;
    int out = push(std::move(v), nullptr);
    nodes_[out].back = [logits, out, targets, ignore_id, probs = std::move(probs)](Tape& t) {
        double g = t.grad_ref(out)(0, 0);
        Mat d = probs;
        for (Eigen::Index i = 0; i < d.rows(); ++i) {
            if (targets[i] == ignore_id) continue;
            d(i, targets[i]) -= 1.0;
        }
        t.grad_ref(logits) += g * d;
    };
    return out;
}

void Tape::backward(int loss_id) {
    const Mat& lv = value(loss_id);
    if (lv.rows() != 1 || lv.cols() != 1)
        throw std::invalid_argument("backward: loss must be 1x1");
    grad_ref(loss_id)(0, 0) = 1.0;
    for (int id = loss_id; id >= 0; --id) {
        Node& n = nodes_[id];
        if (n.grad_init && n.back) n.back(*this);
    }
}

}  // namespace wiris::ad
