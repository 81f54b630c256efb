#include "adanorm/nn.hpp"

#include <algorithm>
#include <cmath>

#include "adanorm/errors.hpp"
#include "adanorm/rng.hpp"

namespace adanorm {

namespace {

void require_positive_dims(int d_in, int hidden, int classes) {
    if (d_in < 1 || hidden < 1 || classes < 1)
        throw ConfigError("model dimensions must be positive");
}

Eigen::Map<const Eigen::RowVectorXd> row_vec(const Tensor& b) {
    return {b.array().data(), b.size()};
}

// out = X*W, then the bias added to every row.
void affine(const Tensor& X, const Tensor& W, const Tensor& b, Tensor& out) {
    out.matrix().noalias() = X.matrix() * W.matrix();
    out.matrix().rowwise() += row_vec(b);
}

void check_batch(const Tensor& X, const std::vector<int>& y, int d_in, int classes) {
    if (X.rank() != 2)
        throw ShapeError("batch must be rank 2, got shape " + shape_str(X.shape()));
    if (y.empty()) throw ConfigError("batch must not be empty");
    if (X.cols() != d_in)
        throw ShapeError("batch has " + std::to_string(X.cols()) +
                         " features, model expects " + std::to_string(d_in));
    if (X.rows() != static_cast<std::int64_t>(y.size()))
        throw ShapeError("batch has " + std::to_string(X.rows()) + " rows but " +
                         std::to_string(y.size()) + " labels");
    for (int label : y)
        if (label < 0 || label >= classes)
            throw ConfigError("label " + std::to_string(label) + " outside [0, " +
                              std::to_string(classes) + ")");
}

struct Forward {
    Tensor pre;  // hidden pre-activation
    Tensor H;    // relu(pre)
    Tensor P;    // softmax probabilities
    double loss = 0.0;
};

Forward forward_core(const Tensor& W1, const Tensor& b1, const Tensor& W2,
                     const Tensor& b2, const Tensor& X, const std::vector<int>& y) {
    const std::int64_t n = X.rows();
    const std::int64_t h = W1.cols();
    const std::int64_t c = W2.cols();

    Forward f;
    f.pre = Tensor(Shape{n, h});
    affine(X, W1, b1, f.pre);
    if (!f.pre.is_finite()) throw NonFiniteError("non-finite hidden activations");

    f.H = f.pre;
    f.H.array() = f.H.array().max(0.0);

    Tensor Z(Shape{n, c});
    affine(f.H, W2, b2, Z);
    if (!Z.is_finite()) throw NonFiniteError("non-finite logits");

    // Row-stabilized softmax; with the max subtracted the exponentials are
    // in (0, 1] and the log-sum is safe.
    f.P = Tensor(Shape{n, c});
    double loss = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        double mx = Z.at(i, 0);
        for (std::int64_t j = 1; j < c; ++j) mx = std::max(mx, Z.at(i, j));
        double se = 0.0;
        for (std::int64_t j = 0; j < c; ++j) {
            const double e = std::exp(Z.at(i, j) - mx);
            f.P.at(i, j) = e;
            se += e;
        }
        for (std::int64_t j = 0; j < c; ++j) f.P.at(i, j) /= se;
        loss += std::log(se) - (Z.at(i, y[static_cast<std::size_t>(i)]) - mx);
    }
    f.loss = loss / static_cast<double>(n);
    return f;
}

BackwardResult backward_core(const Tensor& W1, const Tensor& b1, const Tensor& W2,
                             const Tensor& b2, const Tensor& X,
                             const std::vector<int>& y) {
    check_batch(X, y, static_cast<int>(W1.rows()), static_cast<int>(W2.cols()));
    Forward f = forward_core(W1, b1, W2, b2, X, y);

    const std::int64_t n = X.rows();
    const std::int64_t d = X.cols();
    const std::int64_t h = W1.cols();
    const std::int64_t c = W2.cols();

    Tensor dZ = f.P;
    for (std::int64_t i = 0; i < n; ++i) dZ.at(i, y[static_cast<std::size_t>(i)]) -= 1.0;
    dZ.array() /= static_cast<double>(n);

    BackwardResult out;
    out.loss = f.loss;
    out.grads.reserve(4);

    Tensor gW2(Shape{h, c});
    gW2.matrix().noalias() = f.H.matrix().transpose() * dZ.matrix();
    Tensor gb2(Shape{c});
    Eigen::Map<Eigen::RowVectorXd>(gb2.array().data(), c) = dZ.matrix().colwise().sum();

    Tensor dH(Shape{n, h});
    dH.matrix().noalias() = dZ.matrix() * W2.matrix().transpose();
    // Subgradient 0 at the relu kink.
    dH.array() *= (f.pre.array() > 0.0).cast<double>();

    Tensor gW1(Shape{d, h});
    gW1.matrix().noalias() = X.matrix().transpose() * dH.matrix();
    Tensor gb1(Shape{h});
    Eigen::Map<Eigen::RowVectorXd>(gb1.array().data(), h) = dH.matrix().colwise().sum();

    out.grads.push_back(std::move(gW1));
    out.grads.push_back(std::move(gb1));
    out.grads.push_back(std::move(gW2));
    out.grads.push_back(std::move(gb2));
    return out;
}

double accuracy_core(const Tensor& W1, const Tensor& b1, const Tensor& W2,
                     const Tensor& b2, const Tensor& X, const std::vector<int>& y,
                     const std::vector<int>& idx) {
    if (idx.empty()) throw ConfigError("accuracy needs a non-empty index set");
    const std::int64_t d = X.cols();
    Tensor Xs(Shape{static_cast<std::int64_t>(idx.size()), d});
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::int64_t j = 0; j < d; ++j)
            Xs.at(static_cast<std::int64_t>(r), j) = X.at(idx[r], j);

    Tensor pre(Shape{Xs.rows(), W1.cols()});
    affine(Xs, W1, b1, pre);
    pre.array() = pre.array().max(0.0);
    Tensor Z(Shape{Xs.rows(), W2.cols()});
    affine(pre, W2, b2, Z);

    std::int64_t correct = 0;
    for (std::size_t r = 0; r < idx.size(); ++r) {
        Eigen::Index best = 0;
        Z.matrix().row(static_cast<Eigen::Index>(r)).maxCoeff(&best);
        if (static_cast<int>(best) == y[static_cast<std::size_t>(idx[r])]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(idx.size());
}

}  // namespace

MlpModel::MlpModel(int d_in, int hidden, int classes)
    : W1(Shape{d_in, hidden}), b1(Shape{hidden}), W2(Shape{hidden, classes}), b2(Shape{classes}) {
    require_positive_dims(d_in, hidden, classes);
}

MlpModel MlpModel::random(int d_in, int hidden, int classes, std::uint64_t seed) {
    MlpModel m(d_in, hidden, classes);
    Rng rng(seed);
    const double s1 = std::sqrt(2.0 / static_cast<double>(d_in));
    for (std::int64_t i = 0; i < m.W1.size(); ++i) m.W1[i] = s1 * rng.normal();
    const double s2 = std::sqrt(2.0 / static_cast<double>(hidden));
    for (std::int64_t i = 0; i < m.W2.size(); ++i) m.W2[i] = s2 * rng.normal();
    return m;
}

std::vector<Shape> MlpModel::param_shapes() const {
    return {W1.shape(), b1.shape(), W2.shape(), b2.shape()};
}

Dataset make_blobs(int n, int d_in, int classes, double spread, std::uint64_t seed) {
    if (classes < 1) throw ConfigError("need at least one class");
    if (d_in < 1) throw ConfigError("need at least one feature");
    if (n < 2 * classes)
        throw ConfigError("need at least two samples per class to fill both splits, got n=" +
                          std::to_string(n) + " for " + std::to_string(classes) + " classes");
    if (!(spread > 0.0)) throw ConfigError("spread must be positive");

    Rng rng(seed);

    // One cluster center per class, then samples in label order.
    std::vector<double> centers(static_cast<std::size_t>(classes) *
                                static_cast<std::size_t>(d_in));
    for (auto& v : centers) v = rng.uniform(-3.0, 3.0);

    Dataset ds;
    ds.classes = classes;
    ds.X = Tensor(Shape{n, d_in});
    ds.y.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int label = i % classes;
        ds.y[static_cast<std::size_t>(i)] = label;
        const std::size_t base = static_cast<std::size_t>(label) * static_cast<std::size_t>(d_in);
        for (int j = 0; j < d_in; ++j)
            ds.X.at(i, j) = centers[base + static_cast<std::size_t>(j)] + spread * rng.normal();
    }

    // Standardize each feature over the full set.
    for (int j = 0; j < d_in; ++j) {
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += ds.X.at(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = ds.X.at(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        const double sd = var > 1e-24 ? std::sqrt(var) : 1.0;
        for (int i = 0; i < n; ++i) ds.X.at(i, j) = (ds.X.at(i, j) - mean) / sd;
    }

    // Stratified split: per class, shuffle and send ~20% (at least one
    // sample) to the test half.
    for (int c = 0; c < classes; ++c) {
        std::vector<int> members;
        for (int i = c; i < n; i += classes) members.push_back(i);
        rng.shuffle(members);
        const std::size_t ntest = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(members.size()))));
        for (std::size_t k = 0; k < members.size(); ++k)
            (k < ntest ? ds.test_idx : ds.train_idx).push_back(members[k]);
    }
    std::sort(ds.train_idx.begin(), ds.train_idx.end());
    std::sort(ds.test_idx.begin(), ds.test_idx.end());
    return ds;
}

Dataset default_blobs(std::uint64_t seed) {
    return make_blobs(kDefaultBlobN, kDefaultDin, kDefaultClasses, kDefaultBlobSpread,
                      seed);
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (lr_drop_epoch < 0 || lr_drop_epoch > epochs)
        throw ConfigError("lr_drop_epoch must lie in [0, epochs]");
}

BackwardResult forward_backward(const MlpModel& model, const Tensor& X,
                                const std::vector<int>& y) {
    return backward_core(model.W1, model.b1, model.W2, model.b2, X, y);
}

Tensor forward_probs(const MlpModel& model, const Tensor& X) {
    std::vector<int> dummy(static_cast<std::size_t>(X.rows()), 0);
    check_batch(X, dummy, model.d_in(), model.classes());
    return forward_core(model.W1, model.b1, model.W2, model.b2, X, dummy).P;
}

double accuracy(const MlpModel& model, const Dataset& data, const std::vector<int>& idx) {
    return accuracy_core(model.W1, model.b1, model.W2, model.b2, data.X, data.y, idx);
}

RunLog train(MlpModel& model, const Dataset& data, Optimizer& opt,
             const TrainConfig& cfg, const std::string& run_id,
             const MetricCallback& on_metric) {
    cfg.validate();
    if (data.train_idx.empty() || data.test_idx.empty())
        throw ConfigError("dataset has an empty split");
    if (data.classes != model.classes())
        throw ConfigError("dataset has " + std::to_string(data.classes) +
                          " classes, model expects " + std::to_string(model.classes()));
    if (data.dim() != model.d_in())
        throw ConfigError("dataset feature width " + std::to_string(data.dim()) +
                          " does not match the model");

    const auto shapes = model.param_shapes();
    if (opt.num_tensors() != shapes.size())
        throw ConfigError("stepper tracks " + std::to_string(opt.num_tensors()) +
                          " tensors, model has 4");
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        if (opt.state(i).m.shape() != shapes[i])
            throw ConfigError("stepper shape mismatch on " +
                              std::string(mlp_tensor_ids()[i]));
        if (opt.state(i).t != 0)
            throw ConfigError("stepper has already taken steps; training needs a fresh one");
    }

    std::vector<Tensor> params;
    params.reserve(4);
    params.push_back(std::move(model.W1));
    params.push_back(std::move(model.b1));
    params.push_back(std::move(model.W2));
    params.push_back(std::move(model.b2));
    // Weights live in params for the duration; hand them back on any exit.
    struct Restore {
        MlpModel& m;
        std::vector<Tensor>& p;
        ~Restore() {
            m.W1 = std::move(p[0]);
            m.b1 = std::move(p[1]);
            m.W2 = std::move(p[2]);
            m.b2 = std::move(p[3]);
        }
    } restore{model, params};

    const double base_alpha = opt.hyper().alpha;
    const std::int64_t d = data.X.cols();
    const auto& ids = mlp_tensor_ids();

    RunLog log;
    std::int64_t step = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const double eff =
            (cfg.lr_drop_epoch > 0 && epoch >= cfg.lr_drop_epoch) ? base_alpha / 10.0
                                                                  : base_alpha;
        opt.set_alpha(eff);

        std::vector<int> order = data.train_idx;
        Rng shuffler(derive_seed(cfg.shuffle_seed, static_cast<std::uint64_t>(epoch)));
        shuffler.shuffle(order);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t bn =
                std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                                      order.size() - start);
            Tensor Xb(Shape{static_cast<std::int64_t>(bn), d});
            std::vector<int> yb(bn);
            for (std::size_t r = 0; r < bn; ++r) {
                const int src = order[start + r];
                for (std::int64_t j = 0; j < d; ++j)
                    Xb.at(static_cast<std::int64_t>(r), j) = data.X.at(src, j);
                yb[r] = data.y[static_cast<std::size_t>(src)];
            }

            BackwardResult fb;
            try {
                fb = backward_core(params[0], params[1], params[2], params[3], Xb, yb);
            } catch (const NonFiniteError& e) {
                throw NonFiniteError("step " + std::to_string(step + 1) + ": " + e.what());
            }

            auto reports = opt.step(params, fb.grads);
            ++step;
            if (on_metric) {
                for (std::size_t t = 0; t < 4; ++t) {
                    MetricRow row;
                    row.run_id = run_id;
                    row.step = step;
                    row.epoch = epoch;
                    row.tensor_id = ids[t];
                    row.loss = fb.loss;
                    row.g_norm = reports[t].g_norm;
                    row.e_t = reports[t].e_after;
                    row.correction_applied = reports[t].correction_applied;
                    row.effective_alpha = eff;
                    on_metric(row);
                }
            }
            loss_sum += fb.loss * static_cast<double>(bn);
        }

        EpochStats es;
        es.epoch = epoch;
        es.train_loss = loss_sum / static_cast<double>(order.size());
        es.test_accuracy = accuracy_core(params[0], params[1], params[2], params[3],
                                         data.X, data.y, data.test_idx);
        es.effective_alpha = eff;
        log.epochs.push_back(es);
    }
    log.steps = step;
    opt.set_alpha(base_alpha);
    return log;
}

}  // namespace adanorm
