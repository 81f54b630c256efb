#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "adanorm/optim.hpp"
#include "adanorm/telemetry.hpp"
#include "adanorm/tensor.hpp"

namespace adanorm {

// Two-layer perceptron: relu(X*W1 + b1)*W2 + b2, softmax cross-entropy head.
struct MlpModel {
    Tensor W1;  // [d_in, hidden]
    Tensor b1;  // [hidden]
    Tensor W2;  // [hidden, classes]
    Tensor b2;  // [classes]

    // Zero-initialized weights: every logit is 0, softmax is uniform.
    MlpModel(int d_in, int hidden, int classes);

    // He-scaled normal weights, zero biases.
    static MlpModel random(int d_in, int hidden, int classes, std::uint64_t seed);

    int d_in() const { return static_cast<int>(W1.shape()[0]); }
    int hidden() const { return static_cast<int>(W1.shape()[1]); }
    int classes() const { return static_cast<int>(W2.shape()[1]); }

    // Order matches mlp_tensor_ids and the gradient vector.
    std::vector<Shape> param_shapes() const;
};

inline const std::array<const char*, 4>& mlp_tensor_ids() {
    static const std::array<const char*, 4> ids = {"W1", "b1", "W2", "b2"};
    return ids;
}

// Synthetic classification data. Features are standardized to zero mean and
// unit variance over the whole set; train/test splits are stratified and
// each class appears in both.
struct Dataset {
    Tensor X;                    // [n, d_in]
    std::vector<int> y;          // labels in [0, classes)
    std::vector<int> train_idx;  // sorted, disjoint from test_idx
    std::vector<int> test_idx;
    int classes = 0;

    std::int64_t n() const { return static_cast<std::int64_t>(y.size()); }
    int dim() const { return static_cast<int>(X.shape()[1]); }
};

// Gaussian clusters, one center per class, labels assigned round-robin in
// sample order. Deterministic per seed. Requires n >= 2*classes so that the
// 80/20 split can place every class in both halves.
Dataset make_blobs(int n, int d_in, int classes, double spread, std::uint64_t seed);

// The benchmark task the trainer and the comparison harness default to.
// Cluster spread is deliberately large enough that gradients stay busy for
// the full run; a tighter task converges so fast the norm telemetry flatlines.
inline constexpr int kDefaultDin = 20;
inline constexpr int kDefaultHidden = 32;
inline constexpr int kDefaultClasses = 5;
inline constexpr int kDefaultBlobN = 2000;
inline constexpr double kDefaultBlobSpread = 2.0;

Dataset default_blobs(std::uint64_t seed);

struct TrainConfig {
    int epochs = 30;
    int batch_size = 64;
    std::uint64_t shuffle_seed = 0;
    // 0 disables; otherwise alpha is divided by 10 from this epoch (1-based)
    // onward.
    int lr_drop_epoch = 0;

    void validate() const;
};

struct BackwardResult {
    double loss = 0.0;
    std::vector<Tensor> grads;  // gW1, gb1, gW2, gb2
};

// Mean softmax cross-entropy over the batch and analytic gradients for all
// four parameter tensors. Throws NonFiniteError when activations overflow.
BackwardResult forward_backward(const MlpModel& model, const Tensor& X,
                                const std::vector<int>& y);

// Softmax outputs, one row per sample; each row sums to 1.
Tensor forward_probs(const MlpModel& model, const Tensor& X);

// Fraction of the selected rows whose argmax logit equals the label.
double accuracy(const MlpModel& model, const Dataset& data,
                const std::vector<int>& idx);

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;     // sample-weighted mean over the epoch
    double test_accuracy = 0.0;
    double effective_alpha = 0.0;
};

struct RunLog {
    std::vector<EpochStats> epochs;
    std::int64_t steps = 0;
};

using MetricCallback = std::function<void(const MetricRow&)>;

// Minibatch loop: per epoch, shuffle the train split with a seed derived
// from (shuffle_seed, epoch), walk it in batch_size chunks, and take one
// optimizer step per batch. Emits one MetricRow per tensor per step when
// on_metric is set. The stepper must be fresh and shaped for the model.
// Deterministic given the model, dataset, and seeds.
RunLog train(MlpModel& model, const Dataset& data, Optimizer& opt,
             const TrainConfig& cfg, const std::string& run_id,
             const MetricCallback& on_metric = {});

}  // namespace adanorm
