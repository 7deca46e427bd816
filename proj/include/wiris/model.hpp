#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wiris/autodiff.hpp"
#include "wiris/rng.hpp"
#include "wiris/vocab.hpp"

namespace wiris {

struct ModelConfig {
    int d_model = 64;
    int head_count = 4;
    int encoder_layers = 2;
    int decoder_layers = 2;
    int ffn_dim = 256;
    int input_len = 0;       // L = K * P * R
    int max_decode_len = 8;  // 2 * I + 2
    double dropout = 0.0;
    uint64_t seed = 0;

    int head_dim() const { return d_model / head_count; }
    void validate() const;

    /// CPU-sized profile used by the desk-scale reproduction.
    static ModelConfig desk(int input_len, int max_people, uint64_t seed);
    /// Full-size profile: d_model 512, 8 heads, 4+4 layers.
    static ModelConfig paper(int input_len, int max_people, uint64_t seed);
};

/// Named flat parameter store; order is fixed so optimizer state, gradient
/// buffers, and checkpoints align by index.
struct ParamSet {
    std::vector<std::string> names;
    std::vector<ad::Mat> values;

    int add(const std::string& name, ad::Mat m);
    size_t scalar_count() const;
};

struct TrainExample {
    std::vector<double> features;
    std::vector<int> target;  // SOS ... EOS
};

struct TrainData {
    std::vector<TrainExample> train;
    std::vector<TrainExample> val;
};

struct TrainOptions {
    int max_steps = 2000;
    int batch_size = 16;
    double learning_rate = 1e-4;
    double clip_norm = 1.0;
    int eval_every = 50;
    int patience = 10;  // evaluations without val-loss improvement
    int val_eval_cap = 128;
    uint64_t shuffle_seed = 0;
    /// Stop once greedy rollouts on the train subset reach this accuracy.
    std::optional<double> stop_train_seq_acc;
};

struct TrainLogRow {
    int step = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_count_acc = 0.0;
};

struct TrainLog {
    std::vector<TrainLogRow> rows;
    int steps_run = 0;
    int best_step = 0;
    double best_val_loss = 0.0;

    std::string to_csv() const;
};

/// Raised when training diverges (NaN/inf loss).
struct TrainingError : std::runtime_error {
    explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

/// softmax(Q K^T / sqrt(d_head)) V with an optional allow-mask; masked
/// positions carry exactly zero attention weight.
ad::Mat scaled_dot_attention(const ad::Mat& q, const ad::Mat& k, const ad::Mat& v,
                             const ad::MaskMat* mask = nullptr);

struct AttentionWeights {
    ad::Mat wq, bq, wk, bk, wv, bv, wo, bo;
};

/// Concat(head_1..head_h) W^O, each head attending in its d_model/h slice.
ad::Mat multi_head(const ad::Mat& x_q, const ad::Mat& x_k, const ad::Mat& x_v,
                   const AttentionWeights& w, int heads, const ad::MaskMat* mask = nullptr);

/// LayerNorm(x + sub_out) per row with gain/bias (epsilon inside the sqrt).
ad::Mat add_norm(const ad::Mat& x, const ad::Mat& sub_out, const ad::Mat& gain,
                 const ad::Mat& bias, double eps = 1e-5);

/// Sinusoidal positional encoding table, len x d_model.
ad::Mat positional_encoding(int len, int d_model);

/// Causal lower-triangular allow-mask.
ad::MaskMat causal_mask(int len);

/// Encoder-decoder Transformer over CSI feature sequences; every subcarrier
/// position is one input token, the decoder emits coordinate tokens.
class Transformer {
public:
    Transformer(ModelConfig config, TokenVocab vocab);

    const ModelConfig& config() const { return config_; }
    const TokenVocab& vocab() const { return vocab_; }
    ParamSet& params() { return params_; }
    const ParamSet& params() const { return params_; }

    /// Per-position affine embedding of the scalar features plus positional
    /// encoding; shape input_len x d_model.
    ad::Mat embed_input(const std::vector<double>& features) const;

    /// Encoder memory for one feature vector.
    ad::Mat encode(const std::vector<double>& features) const;

    /// Decoder logits for every prefix position (rows) given the memory.
    ad::Mat decode_all_logits(const ad::Mat& memory, const std::vector<int>& prefix) const;

    /// Logits for the next token after the prefix (prefix starts with SOS).
    std::vector<double> decode_step(const ad::Mat& memory, const std::vector<int>& prefix) const;

    /// Greedy decode from SOS until EOS or the length cap. The search is
    /// restricted to the x/y token grammar, so the result is always
    /// well-formed and EOS-terminated.
    TokenSequence predict(const std::vector<double>& features) const;

    /// Mean cross-entropy over non-PAD targets and matching parameter
    /// gradients; loss_scale multiplies both. A nonzero dropout_salt enables
    /// dropout masks (training steps pass their step number).
    std::pair<double, std::vector<ad::Mat>> batch_loss_and_grads(
        const std::vector<const TrainExample*>& batch, double loss_scale = 1.0,
        uint64_t dropout_salt = 0) const;

    double batch_loss(const std::vector<const TrainExample*>& batch) const;

    /// Adam with global-norm clipping, teacher forcing, early stop on
    /// validation loss. Deterministic for a fixed seed and thread count.
    TrainLog train(const TrainData& data, const TrainOptions& opts);

    /// Max relative error between analytic and central-difference gradients
    /// over `probes` randomly chosen parameter entries.
    double gradient_check(const std::vector<const TrainExample*>& batch, int probes,
                          uint64_t seed) const;

    /// Greedy-rollout exact-sequence accuracy.
    double sequence_accuracy(const std::vector<const TrainExample*>& examples) const;

    std::string to_checkpoint_json(const std::string& features_hash) const;
    static Transformer from_checkpoint_json(const std::string& text);
    static std::string checkpoint_features_hash(const std::string& text);

private:
    struct AttnIdx {
        int wq, bq, wk, bk, wv, bv, wo, bo;
    };
    struct EncIdx {
        AttnIdx self;
        int ln1_g, ln1_b, w1, b1, w2, b2, ln2_g, ln2_b;
    };
    struct DecIdx {
        AttnIdx self;
        int ln1_g, ln1_b;
        AttnIdx cross;
        int ln2_g, ln2_b, w1, b1, w2, b2, ln3_g, ln3_b;
    };

    /// Pushes every parameter as a tape leaf; leaf ids equal param indices,
    /// so the Idx structs double as tape ids on a fresh tape.
    void lower_params(ad::Tape& tape) const;
    int feed_forward(ad::Tape& t, int x, int w1, int b1, int w2, int b2) const;
    int encode_on_tape(ad::Tape& tape, const std::vector<double>& features,
                       Rng* drop = nullptr) const;
    int decode_on_tape(ad::Tape& tape, int memory, const std::vector<int>& prefix,
                       Rng* drop = nullptr) const;
    int forward_loss(ad::Tape& tape, const TrainExample& ex, int* valid,
                     Rng* drop = nullptr) const;

    ModelConfig config_;
    TokenVocab vocab_;
    ParamSet params_;
    int idx_value_w_, idx_value_b_, idx_tok_, idx_out_w_, idx_out_b_;
    std::vector<EncIdx> enc_idx_;
    std::vector<DecIdx> dec_idx_;
    ad::Mat pe_enc_;
    ad::Mat pe_dec_;
};

}  // namespace wiris
