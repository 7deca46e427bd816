#include "wiris/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wiris/parallel.hpp"
#include "wiris/rng.hpp"

namespace wiris {

using ad::Mat;
using ad::MaskMat;
using ad::Tape;
using nlohmann::json;

void ModelConfig::validate() const {
    if (d_model < 1 || head_count < 1 || d_model % head_count != 0)
        throw std::invalid_argument("d_model must be a positive multiple of head_count");
    if (encoder_layers < 1 || decoder_layers < 1)
        throw std::invalid_argument("need at least one encoder and decoder layer");
    if (ffn_dim < 1) throw std::invalid_argument("ffn_dim must be >= 1");
    if (input_len < 1) throw std::invalid_argument("input_len must be >= 1");
    if (max_decode_len < 4) throw std::invalid_argument("max_decode_len must be >= 4");
    if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("dropout must be in [0,1)");
}

ModelConfig ModelConfig::desk(int input_len, int max_people, uint64_t seed) {
    ModelConfig c;
    c.d_model = 64;
    c.head_count = 4;
    c.encoder_layers = 2;
    c.decoder_layers = 2;
    c.ffn_dim = 256;
    c.input_len = input_len;
    c.max_decode_len = 2 * max_people + 2;
    c.seed = seed;
    return c;
}

ModelConfig ModelConfig::paper(int input_len, int max_people, uint64_t seed) {
    ModelConfig c;
    c.d_model = 512;
    c.head_count = 8;
    c.encoder_layers = 4;
    c.decoder_layers = 4;
    c.ffn_dim = 2048;
    c.input_len = input_len;
    c.max_decode_len = 2 * max_people + 2;
    c.seed = seed;
    return c;
}

int ParamSet::add(const std::string& name, Mat m) {
    names.push_back(name);
    values.push_back(std::move(m));
    return static_cast<int>(values.size()) - 1;
}

size_t ParamSet::scalar_count() const {
    size_t n = 0;
    for (const Mat& m : values) n += static_cast<size_t>(m.size());
    return n;
}

Mat positional_encoding(int len, int d_model) {
    Mat pe(len, d_model);
    for (int t = 0; t < len; ++t) {
        for (int j = 0; j < d_model; ++j) {
            double exponent = static_cast<double>(j - (j % 2)) / d_model;
            double angle = t / std::pow(10000.0, exponent);
            pe(t, j) = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    }
    return pe;
}

MaskMat causal_mask(int len) {
    MaskMat m(len, len);
    for (int i = 0; i < len; ++i) {
        for (int j = 0; j < len; ++j) m(i, j) = j <= i ? 1 : 0;
    }
    return m;
}

namespace {

/// Shared multi-head attention graph; arguments are tape node ids.
int attention_block(Tape& t, int xq, int xk, int xv, int wq, int bq, int wk, int bk, int wv,
                    int bv, int wo, int bo, int heads, const MaskMat* mask) {
    int q = t.add_rowvec(t.matmul(xq, wq), bq);
    int k = t.add_rowvec(t.matmul(xk, wk), bk);
    int v = t.add_rowvec(t.matmul(xv, wv), bv);
    int d = static_cast<int>(t.value(q).cols());
    if (d % heads != 0) throw std::invalid_argument("attention: width not divisible by heads");
    int hd = d / heads;
    std::vector<int> head_outs;
    head_outs.reserve(heads);
    for (int h = 0; h < heads; ++h) {
        int qi = t.slice_cols(q, h * hd, hd);
        int ki = t.slice_cols(k, h * hd, hd);
        int vi = t.slice_cols(v, h * hd, hd);
        int scores = t.scale(t.matmul_nt(qi, ki), 1.0 / std::sqrt(static_cast<double>(hd)));
        int attn = t.softmax_rows(scores, mask);
        head_outs.push_back(t.matmul(attn, vi));
    }
    int concat = heads == 1 ? head_outs[0] : t.hstack(head_outs);
    return t.add_rowvec(t.matmul(concat, wo), bo);
}

int add_norm_block(Tape& t, int x, int sub, int gain, int bias) {
    return t.add_rowvec(t.mul_rowvec(t.layernorm_rows(t.add(x, sub)), gain), bias);
}

/// Inverted dropout; identity when rate is zero or no rng is active.
int maybe_dropout(Tape& t, int x, double rate, Rng* rng) {
    if (rate <= 0.0 || rng == nullptr) return x;
    const Mat& v = t.value(x);
    Mat mask(v.rows(), v.cols());
    double keep = 1.0 - rate;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        for (Eigen::Index j = 0; j < v.cols(); ++j)
            mask(i, j) = rng->uniform() < rate ? 0.0 : 1.0 / keep;
    }
    return t.cmul(x, std::move(mask));
}

}  // namespace

Mat scaled_dot_attention(const Mat& q, const Mat& k, const Mat& v, const MaskMat* mask) {
    if (q.cols() != k.cols()) throw std::invalid_argument("attention: q/k width mismatch");
    if (k.rows() != v.rows()) throw std::invalid_argument("attention: k/v length mismatch");
    Tape t;
    int lq = t.leaf(q), lk = t.leaf(k), lv = t.leaf(v);
    int scores = t.scale(t.matmul_nt(lq, lk), 1.0 / std::sqrt(static_cast<double>(q.cols())));
    int attn = t.softmax_rows(scores, mask);
    return t.value(t.matmul(attn, lv));
}

Mat multi_head(const Mat& x_q, const Mat& x_k, const Mat& x_v, const AttentionWeights& w,
               int heads, const MaskMat* mask) {
    if (x_k.rows() != x_v.rows()) throw std::invalid_argument("multi_head: k/v length mismatch");
    Tape t;
    int out = attention_block(t, t.leaf(x_q), t.leaf(x_k), t.leaf(x_v), t.leaf(w.wq),
                              t.leaf(w.bq), t.leaf(w.wk), t.leaf(w.bk), t.leaf(w.wv),
                              t.leaf(w.bv), t.leaf(w.wo), t.leaf(w.bo), heads, mask);
    return t.value(out);
}

Mat add_norm(const Mat& x, const Mat& sub_out, const Mat& gain, const Mat& bias, double eps) {
    if (x.rows() != sub_out.rows() || x.cols() != sub_out.cols())
        throw std::invalid_argument("add_norm: shape mismatch");
    Tape t;
    int out = t.add_rowvec(
        t.mul_rowvec(t.layernorm_rows(t.add(t.leaf(x), t.leaf(sub_out)), eps), t.leaf(gain)),
        t.leaf(bias));
    return t.value(out);
}

Transformer::Transformer(ModelConfig config, TokenVocab vocab)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
    config_.validate();
    int d = config_.d_model;
    int f = config_.ffn_dim;
    int v = vocab_.size();
    Rng rng(hash_seed({config_.seed, 0x6d6f64656cULL}));

    auto dense = [&](int rows, int cols, double span) {
        Mat m(rows, cols);
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.gaussian() * span;
        }
        return m;
    };
    auto linear = [&](int rows, int cols) { return dense(rows, cols, 1.0 / std::sqrt(rows)); };

    idx_value_w_ = params_.add("embed.value_w", dense(1, d, 1.0));
    idx_value_b_ = params_.add("embed.value_b", Mat::Zero(1, d));
    idx_tok_ = params_.add("embed.tokens", dense(v, d, 0.02));

    auto add_attn = [&](const std::string& prefix) {
        AttnIdx a;
        a.wq = params_.add(prefix + ".wq", linear(d, d));
        a.bq = params_.add(prefix + ".bq", Mat::Zero(1, d));
        a.wk = params_.add(prefix + ".wk", linear(d, d));
        a.bk = params_.add(prefix + ".bk", Mat::Zero(1, d));
        a.wv = params_.add(prefix + ".wv", linear(d, d));
        a.bv = params_.add(prefix + ".bv", Mat::Zero(1, d));
        a.wo = params_.add(prefix + ".wo", linear(d, d));
        a.bo = params_.add(prefix + ".bo", Mat::Zero(1, d));
        return a;
    };
    auto add_ln = [&](const std::string& name, int& g, int& b) {
        g = params_.add(name + ".gain", Mat::Ones(1, d));
        b = params_.add(name + ".bias", Mat::Zero(1, d));
    };

    for (int l = 0; l < config_.encoder_layers; ++l) {
        std::string p = "enc" + std::to_string(l);
        EncIdx e;
        e.self = add_attn(p + ".self");
        add_ln(p + ".ln1", e.ln1_g, e.ln1_b);
        e.w1 = params_.add(p + ".ffn.w1", linear(d, f));
        e.b1 = params_.add(p + ".ffn.b1", Mat::Zero(1, f));
        e.w2 = params_.add(p + ".ffn.w2", linear(f, d));
        e.b2 = params_.add(p + ".ffn.b2", Mat::Zero(1, d));
        add_ln(p + ".ln2", e.ln2_g, e.ln2_b);
        enc_idx_.push_back(e);
    }
    for (int l = 0; l < config_.decoder_layers; ++l) {
        std::string p = "dec" + std::to_string(l);
        DecIdx dd;
        dd.self = add_attn(p + ".self");
        add_ln(p + ".ln1", dd.ln1_g, dd.ln1_b);
        dd.cross = add_attn(p + ".cross");
        add_ln(p + ".ln2", dd.ln2_g, dd.ln2_b);
        dd.w1 = params_.add(p + ".ffn.w1", linear(d, f));
        dd.b1 = params_.add(p + ".ffn.b1", Mat::Zero(1, f));
        dd.w2 = params_.add(p + ".ffn.w2", linear(f, d));
        dd.b2 = params_.add(p + ".ffn.b2", Mat::Zero(1, d));
        add_ln(p + ".ln3", dd.ln3_g, dd.ln3_b);
        dec_idx_.push_back(dd);
    }
    idx_out_w_ = params_.add("out.w", linear(d, v));
    idx_out_b_ = params_.add("out.b", Mat::Zero(1, v));

    pe_enc_ = positional_encoding(config_.input_len, d);
    pe_dec_ = positional_encoding(config_.max_decode_len, d);
}

void Transformer::lower_params(Tape& tape) const {
    if (tape.node_count() != 0)
        throw std::logic_error("lower_params requires a fresh tape");
    for (const Mat& m : params_.values) tape.leaf(m);
}

int Transformer::feed_forward(Tape& t, int x, int w1, int b1, int w2, int b2) const {
    int h = t.relu(t.add_rowvec(t.matmul(x, w1), b1));
    return t.add_rowvec(t.matmul(h, w2), b2);
}

int Transformer::encode_on_tape(Tape& t, const std::vector<double>& features, Rng* drop) const {
    if (static_cast<int>(features.size()) != config_.input_len)
        throw std::invalid_argument("embed_input: feature length does not match input_len");
    Mat col(config_.input_len, 1);
    for (int i = 0; i < config_.input_len; ++i) col(i, 0) = features[i];
    int x = t.add_const(t.add_rowvec(t.matmul(t.leaf(std::move(col)), idx_value_w_), idx_value_b_),
                        pe_enc_);
    x = maybe_dropout(t, x, config_.dropout, drop);
    for (const EncIdx& e : enc_idx_) {
        int a = attention_block(t, x, x, x, e.self.wq, e.self.bq, e.self.wk, e.self.bk, e.self.wv,
                                e.self.bv, e.self.wo, e.self.bo, config_.head_count, nullptr);
        x = add_norm_block(t, x, maybe_dropout(t, a, config_.dropout, drop), e.ln1_g, e.ln1_b);
        int f = feed_forward(t, x, e.w1, e.b1, e.w2, e.b2);
        x = add_norm_block(t, x, maybe_dropout(t, f, config_.dropout, drop), e.ln2_g, e.ln2_b);
    }
    return x;
}

int Transformer::decode_on_tape(Tape& t, int memory, const std::vector<int>& prefix,
                                Rng* drop) const {
    if (prefix.empty() || prefix.front() != TokenVocab::kSos)
        throw std::invalid_argument("decode: prefix must start with SOS");
    int len = static_cast<int>(prefix.size());
    if (len >= config_.max_decode_len)
        throw std::invalid_argument("decode: prefix exceeds max_decode_len");
    int y = t.add_const(t.gather_rows(idx_tok_, prefix), pe_dec_.topRows(len));
    y = maybe_dropout(t, y, config_.dropout, drop);
    MaskMat mask = causal_mask(len);
    for (const DecIdx& d : dec_idx_) {
        int a = attention_block(t, y, y, y, d.self.wq, d.self.bq, d.self.wk, d.self.bk, d.self.wv,
                                d.self.bv, d.self.wo, d.self.bo, config_.head_count, &mask);
        y = add_norm_block(t, y, maybe_dropout(t, a, config_.dropout, drop), d.ln1_g, d.ln1_b);
        int c = attention_block(t, y, memory, memory, d.cross.wq, d.cross.bq, d.cross.wk,
                                d.cross.bk, d.cross.wv, d.cross.bv, d.cross.wo, d.cross.bo,
                                config_.head_count, nullptr);
        y = add_norm_block(t, y, maybe_dropout(t, c, config_.dropout, drop), d.ln2_g, d.ln2_b);
        int f = feed_forward(t, y, d.w1, d.b1, d.w2, d.b2);
        y = add_norm_block(t, y, maybe_dropout(t, f, config_.dropout, drop), d.ln3_g, d.ln3_b);
    }
    return t.add_rowvec(t.matmul(y, idx_out_w_), idx_out_b_);
}

int Transformer::forward_loss(Tape& t, const TrainExample& ex, int* valid, Rng* drop) const {
    if (ex.target.size() < 2 || ex.target.front() != TokenVocab::kSos)
        throw std::invalid_argument("train target must start with SOS");
    if (static_cast<int>(ex.target.size()) > config_.max_decode_len)
        throw std::invalid_argument("train target exceeds max_decode_len");
    int memory = encode_on_tape(t, ex.features, drop);
    std::vector<int> dec_in(ex.target.begin(), ex.target.end() - 1);
    std::vector<int> dec_out(ex.target.begin() + 1, ex.target.end());
    int logits = decode_on_tape(t, memory, dec_in, drop);
    return t.cross_entropy_sum(logits, dec_out, TokenVocab::kPad, valid);
}

Mat Transformer::embed_input(const std::vector<double>& features) const {
    if (static_cast<int>(features.size()) != config_.input_len)
        throw std::invalid_argument("embed_input: feature length does not match input_len");
    Mat col(config_.input_len, 1);
    for (int i = 0; i < config_.input_len; ++i) col(i, 0) = features[i];
    Mat e = col * params_.values[idx_value_w_];
    e.rowwise() += params_.values[idx_value_b_].row(0);
    return e + pe_enc_;
}

Mat Transformer::encode(const std::vector<double>& features) const {
    Tape t;
    lower_params(t);
    return t.value(encode_on_tape(t, features));
}

Mat Transformer::decode_all_logits(const Mat& memory, const std::vector<int>& prefix) const {
    Tape t;
    lower_params(t);
    int mem = t.leaf(memory);
    return t.value(decode_on_tape(t, mem, prefix));
}

std::vector<double> Transformer::decode_step(const Mat& memory,
                                             const std::vector<int>& prefix) const {
    Mat logits = decode_all_logits(memory, prefix);
    Eigen::Index last = logits.rows() - 1;
    std::vector<double> out(logits.cols());
    for (Eigen::Index j = 0; j < logits.cols(); ++j) out[j] = logits(last, j);
    return out;
}

TokenSequence Transformer::predict(const std::vector<double>& features) const {
    Mat memory = encode(features);
    TokenSequence seq;
    seq.ids.push_back(TokenVocab::kSos);
    int body_cap = config_.max_decode_len - 2;
    int n_x = static_cast<int>(vocab_.x_values().size());
    int n_y = static_cast<int>(vocab_.y_values().size());
    int body = 0;
    while (static_cast<int>(seq.ids.size()) < config_.max_decode_len) {
        std::vector<double> logits = decode_step(memory, seq.ids);
        // Grammar-restricted greedy pick: x slots alternate with y slots and
        // EOS is only legal on a pair boundary, so output stays well-formed.
        std::vector<int> allowed;
        if (body % 2 == 0) {
            allowed.push_back(TokenVocab::kEos);
            if (body < body_cap) {
                for (int i = 0; i < n_x; ++i) allowed.push_back(3 + i);
            }
        } else {
            for (int i = 0; i < n_y; ++i) allowed.push_back(3 + n_x + i);
        }
        int best = allowed[0];
        for (int id : allowed) {
            if (logits[id] > logits[best]) best = id;
        }
        seq.ids.push_back(best);
        if (best == TokenVocab::kEos) return seq;
        body += 1;
    }
    seq.ids.push_back(TokenVocab::kEos);
    return seq;
}

std::pair<double, std::vector<Mat>> Transformer::batch_loss_and_grads(
    const std::vector<const TrainExample*>& batch, double loss_scale,
    uint64_t dropout_salt) const {
    size_t n_params = params_.values.size();
    std::vector<std::vector<Mat>> sample_grads(batch.size());
    std::vector<double> sample_loss(batch.size(), 0.0);
    std::vector<int> sample_valid(batch.size(), 0);

    parallel_for(batch.size(), [&](size_t i) {
        Tape t;
        lower_params(t);
        Rng drop_rng(hash_seed({config_.seed, dropout_salt, static_cast<uint64_t>(i)}));
        Rng* drop = (config_.dropout > 0.0 && dropout_salt != 0) ? &drop_rng : nullptr;
        int valid = 0;
        int loss = forward_loss(t, *batch[i], &valid, drop);
        int scaled = loss_scale == 1.0 ? loss : t.scale(loss, loss_scale);
        t.backward(scaled);
        sample_loss[i] = t.value(loss)(0, 0);
        sample_valid[i] = valid;
        sample_grads[i].reserve(n_params);
        for (size_t p = 0; p < n_params; ++p)
            sample_grads[i].push_back(t.grad(static_cast<int>(p)));
    });

    int total_valid = std::accumulate(sample_valid.begin(), sample_valid.end(), 0);
    double denom = std::max(total_valid, 1);
    std::vector<Mat> grads;
    grads.reserve(n_params);
    for (size_t p = 0; p < n_params; ++p)
        grads.push_back(Mat::Zero(params_.values[p].rows(), params_.values[p].cols()));
    for (size_t i = 0; i < batch.size(); ++i) {
        for (size_t p = 0; p < n_params; ++p) grads[p] += sample_grads[i][p];
    }
    for (Mat& g : grads) g /= denom;
    double loss = loss_scale * std::accumulate(sample_loss.begin(), sample_loss.end(), 0.0) / denom;
    return {loss, std::move(grads)};
}

double Transformer::batch_loss(const std::vector<const TrainExample*>& batch) const {
    std::vector<double> losses(batch.size(), 0.0);
    std::vector<int> valids(batch.size(), 0);
    parallel_for(batch.size(), [&](size_t i) {
        Tape t;
        lower_params(t);
        int valid = 0;
        int loss = forward_loss(t, *batch[i], &valid);
        losses[i] = t.value(loss)(0, 0);
        valids[i] = valid;
    });
    double denom = std::max(std::accumulate(valids.begin(), valids.end(), 0), 1);
    return std::accumulate(losses.begin(), losses.end(), 0.0) / denom;
}

double Transformer::sequence_accuracy(const std::vector<const TrainExample*>& examples) const {
    if (examples.empty()) return 0.0;
    std::vector<int> hits(examples.size(), 0);
    parallel_for(examples.size(), [&](size_t i) {
        TokenSequence got = predict(examples[i]->features);
        hits[i] = got.ids == examples[i]->target ? 1 : 0;
    });
    return std::accumulate(hits.begin(), hits.end(), 0.0) / examples.size();
}

std::string TrainLog::to_csv() const {
    std::ostringstream out;
    out << "step,train_loss,val_loss,val_count_acc\n";
    for (const TrainLogRow& r : rows)
        out << r.step << "," << r.train_loss << "," << r.val_loss << "," << r.val_count_acc
            << "\n";
    return out.str();
}

TrainLog Transformer::train(const TrainData& data, const TrainOptions& opts) {
    if (data.train.empty()) throw std::invalid_argument("train: empty training split");

    size_t n_params = params_.values.size();
    std::vector<Mat> m(n_params), v(n_params);
    for (size_t p = 0; p < n_params; ++p) {
        m[p] = Mat::Zero(params_.values[p].rows(), params_.values[p].cols());
        v[p] = Mat::Zero(params_.values[p].rows(), params_.values[p].cols());
    }
    constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    Rng shuffle_rng(hash_seed({opts.shuffle_seed, 0x747261696eULL}));
    std::vector<size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), 0);
    auto reshuffle = [&] {
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    };
    reshuffle();
    size_t cursor = 0;

    // Fixed evaluation subsets keep eval cost bounded and deterministic.
    auto subset = [&](const std::vector<TrainExample>& pool, uint64_t salt) {
        std::vector<const TrainExample*> out;
        std::vector<size_t> idx(pool.size());
        std::iota(idx.begin(), idx.end(), 0);
        Rng r(hash_seed({opts.shuffle_seed, salt}));
        for (size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[r.below(i)]);
        size_t cap = std::min<size_t>(pool.size(), static_cast<size_t>(opts.val_eval_cap));
        for (size_t i = 0; i < cap; ++i) out.push_back(&pool[idx[i]]);
        return out;
    };
    std::vector<const TrainExample*> val_subset = subset(data.val, 0x76616cULL);
    std::vector<const TrainExample*> train_subset = subset(data.train, 0x7472ULL);

    TrainLog log;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<Mat> best_params;
    int best_step = 0;
    int stale_evals = 0;

    for (int step = 1; step <= opts.max_steps; ++step) {
        std::vector<const TrainExample*> batch;
        for (int b = 0; b < opts.batch_size; ++b) {
            if (cursor >= order.size()) {
                reshuffle();
                cursor = 0;
            }
            batch.push_back(&data.train[order[cursor++]]);
        }

        auto [loss, grads] = batch_loss_and_grads(batch, 1.0, static_cast<uint64_t>(step));
        if (!std::isfinite(loss))
            throw TrainingError("training diverged: loss " + std::to_string(loss) + " at step " +
                                std::to_string(step) + " (lr " +
                                std::to_string(opts.learning_rate) + ")");

        double norm_sq = 0.0;
        for (const Mat& g : grads) norm_sq += g.squaredNorm();
        double gnorm = std::sqrt(norm_sq);
        if (opts.clip_norm > 0.0 && gnorm > opts.clip_norm) {
            double s = opts.clip_norm / gnorm;
            for (Mat& g : grads) g *= s;
        }

        double bc1 = 1.0 - std::pow(beta1, step);
        double bc2 = 1.0 - std::pow(beta2, step);
        for (size_t p = 0; p < n_params; ++p) {
            m[p] = beta1 * m[p] + (1.0 - beta1) * grads[p];
            v[p] = beta2 * v[p] + (1.0 - beta2) * grads[p].cwiseProduct(grads[p]);
            Mat mhat = m[p] / bc1;
            Mat vhat = v[p] / bc2;
            params_.values[p].array() -=
                opts.learning_rate * mhat.array() / (vhat.array().sqrt() + adam_eps);
        }
        log.steps_run = step;

        bool last = step == opts.max_steps;
        if (step % opts.eval_every == 0 || last) {
            TrainLogRow row;
            row.step = step;
            row.train_loss = loss;
            row.val_loss = std::numeric_limits<double>::quiet_NaN();
            row.val_count_acc = std::numeric_limits<double>::quiet_NaN();
            if (!val_subset.empty()) {
                row.val_loss = batch_loss(val_subset);
                std::vector<int> hits(val_subset.size(), 0);
                parallel_for(val_subset.size(), [&](size_t i) {
                    TokenSequence got = predict(val_subset[i]->features);
                    int want = static_cast<int>(val_subset[i]->target.size() - 2) / 2;
                    hits[i] = person_count(got, vocab_) == want ? 1 : 0;
                });
                row.val_count_acc =
                    std::accumulate(hits.begin(), hits.end(), 0.0) / val_subset.size();
            }
            log.rows.push_back(row);

            if (!val_subset.empty()) {
                if (row.val_loss < best_val - 1e-12) {
                    best_val = row.val_loss;
                    best_params = params_.values;
                    best_step = step;
                    stale_evals = 0;
                } else if (++stale_evals > opts.patience) {
                    break;
                }
            }
            if (opts.stop_train_seq_acc && !train_subset.empty() &&
                sequence_accuracy(train_subset) >= *opts.stop_train_seq_acc)
                break;
        }
    }

    if (!best_params.empty()) {
        params_.values = best_params;
        log.best_step = best_step;
        log.best_val_loss = best_val;
    } else {
        log.best_step = log.steps_run;
        log.best_val_loss = std::numeric_limits<double>::quiet_NaN();
    }
    return log;
}

double Transformer::gradient_check(const std::vector<const TrainExample*>& batch, int probes,
                                   uint64_t seed) const {
    auto [loss, analytic] = batch_loss_and_grads(batch);
    (void)loss;
    Transformer probe_model(*this);
    Rng rng(seed);
    size_t total = params_.scalar_count();
    constexpr double h = 1e-5;
    double worst = 0.0;
    for (int i = 0; i < probes; ++i) {
        size_t flat = rng.below(total);
        size_t p = 0;
        while (flat >= static_cast<size_t>(params_.values[p].size())) {
            flat -= params_.values[p].size();
            ++p;
        }
        double* slot = probe_model.params_.values[p].data() + flat;
        double original = *slot;
        *slot = original + h;
        double up = probe_model.batch_loss(batch);
        *slot = original - h;
        double down = probe_model.batch_loss(batch);
        *slot = original;
        double fd = (up - down) / (2.0 * h);
        double a = analytic[p].data()[flat];
        double rel = std::abs(a - fd) / std::max(1e-6, std::abs(a) + std::abs(fd));
        worst = std::max(worst, rel);
    }
    return worst;
}

std::string Transformer::to_checkpoint_json(const std::string& features_hash) const {
    json j;
    j["schema"] = "wiris.checkpoint/1";
    j["features_hash"] = features_hash;
    j["config"] = {{"d_model", config_.d_model},
                   {"head_count", config_.head_count},
                   {"encoder_layers", config_.encoder_layers},
                   {"decoder_layers", config_.decoder_layers},
                   {"ffn_dim", config_.ffn_dim},
                   {"input_len", config_.input_len},
                   {"max_decode_len", config_.max_decode_len},
                   {"dropout", config_.dropout},
                   {"seed", config_.seed}};
    j["vocab"] = {{"x_values", vocab_.x_values()}, {"y_values", vocab_.y_values()}};
    json params = json::array();
    for (size_t p = 0; p < params_.values.size(); ++p) {
        const Mat& mref = params_.values[p];
        std::vector<double> data(mref.data(), mref.data() + mref.size());
        params.push_back({{"name", params_.names[p]},
                          {"rows", mref.rows()},
                          {"cols", mref.cols()},
                          {"data", std::move(data)}});
    }
    j["params"] = std::move(params);
    return j.dump();
}

Transformer Transformer::from_checkpoint_json(const std::string& text) {
    json j = json::parse(text);
    if (j.at("schema").get<std::string>() != "wiris.checkpoint/1")
        throw std::runtime_error("unsupported checkpoint schema");
    const json& cj = j.at("config");
    ModelConfig cfg;
    cfg.d_model = cj.at("d_model").get<int>();
    cfg.head_count = cj.at("head_count").get<int>();
    cfg.encoder_layers = cj.at("encoder_layers").get<int>();
    cfg.decoder_layers = cj.at("decoder_layers").get<int>();
    cfg.ffn_dim = cj.at("ffn_dim").get<int>();
    cfg.input_len = cj.at("input_len").get<int>();
    cfg.max_decode_len = cj.at("max_decode_len").get<int>();
    cfg.dropout = cj.at("dropout").get<double>();
    cfg.seed = cj.at("seed").get<uint64_t>();
    TokenVocab vocab = TokenVocab::from_values(
        j.at("vocab").at("x_values").get<std::vector<double>>(),
        j.at("vocab").at("y_values").get<std::vector<double>>());
    Transformer model(cfg, vocab);
    const json& params = j.at("params");
    if (params.size() != model.params_.values.size())
        throw std::runtime_error("checkpoint parameter count mismatch");
    for (size_t p = 0; p < params.size(); ++p) {
        const json& pj = params[p];
        if (pj.at("name").get<std::string>() != model.params_.names[p])
            throw std::runtime_error("checkpoint parameter order mismatch at " +
                                     model.params_.names[p]);
        Mat& mref = model.params_.values[p];
        if (pj.at("rows").get<Eigen::Index>() != mref.rows() ||
            pj.at("cols").get<Eigen::Index>() != mref.cols())
            throw std::runtime_error("checkpoint parameter shape mismatch at " +
                                     model.params_.names[p]);
        std::vector<double> data = pj.at("data").get<std::vector<double>>();
        std::copy(data.begin(), data.end(), mref.data());
    }
    return model;
}

std::string Transformer::checkpoint_features_hash(const std::string& text) {
    return json::parse(text).at("features_hash").get<std::string>();
}

}  // namespace wiris
