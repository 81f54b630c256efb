#include "adanorm/optim.hpp"

#include <cmath>
#include <utility>

#include "adanorm/errors.hpp"

namespace adanorm {

namespace {

struct KindName {
    OptimizerKind kind;
    const char* name;
};

constexpr KindName kKindNames[] = {
    {OptimizerKind::Adam, "adam"},
    {OptimizerKind::AdamNorm, "adamnorm"},
    {OptimizerKind::DiffGrad, "diffgrad"},
    {OptimizerKind::DiffGradNorm, "diffgradnorm"},
    {OptimizerKind::Radam, "radam"},
    {OptimizerKind::RadamNorm, "radamnorm"},
    {OptimizerKind::AdaBelief, "adabelief"},
    {OptimizerKind::AdaBeliefNorm, "adabeliefnorm"},
};

}  // namespace

OptimizerKind parse_optimizer_kind(const std::string& name) {
    for (const auto& kn : kKindNames)
        if (name == kn.name) return kn.kind;
    throw ConfigError("unknown optimizer '" + name +
                      "' (expected one of adam, adamnorm, diffgrad, diffgradnorm, "
                      "radam, radamnorm, adabelief, adabeliefnorm)");
}

std::string to_string(OptimizerKind kind) {
    for (const auto& kn : kKindNames)
        if (kind == kn.kind) return kn.name;
    return "unknown";
}

NormTarget parse_norm_target(const std::string& name) {
    if (name == "first") return NormTarget::FirstMoment;
    if (name == "second") return NormTarget::SecondMoment;
    if (name == "both") return NormTarget::BothMoments;
    throw ConfigError("unknown norm target '" + name + "' (expected first, second, both)");
}

std::string to_string(NormTarget target) {
    switch (target) {
        case NormTarget::FirstMoment: return "first";
        case NormTarget::SecondMoment: return "second";
        case NormTarget::BothMoments: return "both";
    }
    return "unknown";
}

NormScope parse_norm_scope(const std::string& name) {
    if (name == "per-tensor") return NormScope::PerTensor;
    if (name == "global") return NormScope::Global;
    throw ConfigError("unknown norm scope '" + name + "' (expected per-tensor, global)");
}

std::string to_string(NormScope scope) {
    return scope == NormScope::PerTensor ? "per-tensor" : "global";
}

bool is_norm_corrected(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::AdamNorm:
        case OptimizerKind::DiffGradNorm:
        case OptimizerKind::RadamNorm:
        case OptimizerKind::AdaBeliefNorm:
            return true;
        default:
            return false;
    }
}

OptimizerKind base_kind(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::AdamNorm: return OptimizerKind::Adam;
        case OptimizerKind::DiffGradNorm: return OptimizerKind::DiffGrad;
        case OptimizerKind::RadamNorm: return OptimizerKind::Radam;
        case OptimizerKind::AdaBeliefNorm: return OptimizerKind::AdaBelief;
        default: return kind;
    }
}

const std::vector<OptimizerKind>& all_optimizer_kinds() {
    static const std::vector<OptimizerKind> kinds = {
        OptimizerKind::Adam,      OptimizerKind::AdamNorm,
        OptimizerKind::DiffGrad,  OptimizerKind::DiffGradNorm,
        OptimizerKind::Radam,     OptimizerKind::RadamNorm,
        OptimizerKind::AdaBelief, OptimizerKind::AdaBeliefNorm,
    };
    return kinds;
}

void HyperParams::validate() const {
    // alpha == 0 is a degenerate but well-defined no-op step; negatives are not.
    if (!(alpha >= 0.0)) throw ConfigError("alpha must be nonnegative");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
    if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be nonnegative");
    if (beta1_decay_lambda) {
        const double l = *beta1_decay_lambda;
        if (!(l > 0.0 && l <= 1.0))
            throw ConfigError("beta1_decay_lambda must lie in (0, 1]");
    }
    // Convergence precondition of the moment updates.
    const double eta = beta1 == 0.0 ? 0.0 : beta1 * beta1 / std::sqrt(beta2);
    if (!(eta < 1.0))
        throw ConfigError("beta1^2 / sqrt(beta2) must be < 1, got beta1=" +
                          std::to_string(beta1) + " beta2=" + std::to_string(beta2));
}

NormCorrection adanorm_correct(const Tensor& g, double e_prev, double gamma,
                               std::optional<double> g_norm_override) {
    if (!g.is_finite()) throw NonFiniteError("adanorm_correct: non-finite gradient");
    if (!(e_prev >= 0.0)) throw ConfigError("adanorm_correct: negative norm history");

    NormCorrection out;
    out.g_norm = g_norm_override ? *g_norm_override : l2_norm(g);
    out.e_new = norm_ema(gamma, e_prev, out.g_norm);
    // The comparison uses the freshly updated EMA. Strict inequality means a
    // gamma of zero (e_new == g_norm) never triggers a correction.
    if (out.g_norm > 0.0 && out.e_new > out.g_norm) {
        out.s = (out.e_new / out.g_norm) * g;
        out.applied = true;
    } else {
        out.s = g;
        out.applied = false;
    }
    return out;
}

namespace {

double beta1_at(const HyperParams& hp, std::int64_t t) {
    if (hp.beta1_decay_lambda)
        return hp.beta1 * std::pow(*hp.beta1_decay_lambda, static_cast<double>(t - 1));
    return hp.beta1;
}

// Shared body of all eight steppers. The norm-corrected variants differ from
// their base optimizer only in what feeds the moment estimates, so with a
// gamma of zero (correction never fires, s == g) the arithmetic here is
// identical to the base path.
StepReport step_core(OptState& state, Tensor& params, const Tensor& g,
                     const HyperParams& hp, std::optional<double> g_norm_override,
                     OptimizerKind kind) {
    hp.validate();
    if (!params.same_shape(g))
        throw ShapeError("step: params shape " + shape_str(params.shape()) +
                         " does not match gradient shape " + shape_str(g.shape()));
    if (!state.m.same_shape(g))
        throw ShapeError("step: state shape " + shape_str(state.m.shape()) +
                         " does not match gradient shape " + shape_str(g.shape()));
    if (!g.is_finite())
        throw NonFiniteError("step: non-finite gradient at step " +
                             std::to_string(state.t + 1));

    state.t += 1;
    const std::int64_t t = state.t;
    const double b1t = beta1_at(hp, t);
    const double b1pow = std::pow(hp.beta1, static_cast<double>(t));
    const double b2pow = std::pow(hp.beta2, static_cast<double>(t));

    StepReport rep;
    const bool corrected = is_norm_corrected(kind);
    Tensor s;
    if (corrected) {
        NormCorrection c = adanorm_correct(g, state.e, hp.gamma, g_norm_override);
        state.e = c.e_new;
        rep.g_norm = c.g_norm;
        rep.e_after = c.e_new;
        rep.correction_applied = c.applied;
        s = std::move(c.s);
    } else {
        rep.g_norm = g_norm_override ? *g_norm_override : l2_norm(g);
        rep.e_after = state.e;
        rep.correction_applied = false;
    }

    const Tensor& first_in =
        (corrected && hp.norm_target != NormTarget::SecondMoment) ? s : g;
    const Tensor& second_in =
        (corrected && hp.norm_target != NormTarget::FirstMoment) ? s : g;

    state.m = b1t * state.m + (1.0 - b1t) * first_in;

    Tensor delta;
    switch (base_kind(kind)) {
        case OptimizerKind::Adam: {
            state.v = hp.beta2 * state.v + (1.0 - hp.beta2) * (second_in * second_in);
            const Tensor mhat = (1.0 / (1.0 - b1pow)) * state.m;
            const Tensor vhat = (1.0 / (1.0 - b2pow)) * state.v;
            delta = (-hp.alpha) * (mhat / (sqrt(vhat) + hp.epsilon));
            break;
        }
        case OptimizerKind::DiffGrad: {
            state.v = hp.beta2 * state.v + (1.0 - hp.beta2) * (second_in * second_in);
            // Friction from the raw gradient difference, also in the
            // norm-corrected variant.
            const Tensor xi = sigmoid(abs(g - state.prev_grad));
            const Tensor mhat = (1.0 / (1.0 - b1pow)) * state.m;
            const Tensor vhat = (1.0 / (1.0 - b2pow)) * state.v;
            delta = (-hp.alpha) * (xi * mhat / (sqrt(vhat) + hp.epsilon));
            state.prev_grad = g;
            break;
        }
        case OptimizerKind::Radam: {
            state.v = hp.beta2 * state.v + (1.0 - hp.beta2) * (second_in * second_in);
            const double rho_inf = 2.0 / (1.0 - hp.beta2) - 1.0;
            const double rho_t =
                rho_inf - 2.0 * static_cast<double>(t) * b2pow / (1.0 - b2pow);
            // No hat variables here: the step size carries the corrections.
            if (rho_t >= 5.0) {
                const double rho_u = (rho_t - 4.0) * (rho_t - 2.0) * rho_inf;
                const double rho_d = (rho_inf - 4.0) * (rho_inf - 2.0) * rho_t;
                const double rho = std::sqrt((1.0 - hp.beta2) * rho_u / rho_d);
                const double a1 = rho * hp.alpha / (1.0 - b1pow);
                delta = (-a1) * (state.m / (sqrt(state.v) + hp.epsilon));
            } else {
                const double a2 = hp.alpha / (1.0 - b1pow);
                delta = (-a2) * state.m;
            }
            break;
        }
        case OptimizerKind::AdaBelief: {
            // Belief residual against the just-updated first moment.
            const Tensor res = second_in - state.m;
            state.v = hp.beta2 * state.v + (1.0 - hp.beta2) * (res * res);
            const Tensor mhat = (1.0 / (1.0 - b1pow)) * state.m;
            const Tensor vhat = (1.0 / (1.0 - b2pow)) * state.v;
            delta = (-hp.alpha) * (mhat / (sqrt(vhat) + hp.epsilon));
            break;
        }
        default:
            throw ConfigError("step: unhandled optimizer kind");
    }

    params += delta;
    rep.effective_update = std::move(delta);
    return rep;
}

}  // namespace

StepReport step_adam(OptState& state, Tensor& params, const Tensor& g,
                     const HyperParams& hp, std::optional<double> g_norm_override) {
    return step_core(state, params, g, hp, g_norm_override, OptimizerKind::Adam);
}
StepReport step_adamnorm(OptState& state, Tensor& params, const Tensor& g,
                         const HyperParams& hp, std::optional<double> g_norm_override) {
    return step_core(state, params, g, hp, g_norm_override, OptimizerKind::AdamNorm);
}
StepReport step_diffgrad(OptState& state, Tensor& params, const Tensor& g,
                         const HyperParams& hp, std::optional<double> g_norm_override) {
    return step_core(state, params, g, hp, g_norm_override, OptimizerKind::DiffGrad);
}
StepReport step_diffgradnorm(OptState& state, Tensor& params, const Tensor& g,
                             const HyperParams& hp, std::optional<double> g_norm_override) {
    return step_core(state, params, g, hp, g_norm_override, OptimizerKind::DiffGradNorm);
}
StepReport step_radam(OptState& state, Tensor& params, const Tensor& g,
                      const HyperParams& hp, std::optional<double> g_norm_override) {
    return step_core(state, params, g, hp, g_norm_override, OptimizerKind::Radam);
}
StepReport step_radamnorm(OptState& state, Tensor& params, const Tensor& g,
                          const HyperParams& hp, std::optional<double> g_norm_override) {
    return step_core(state, params, g, hp, g_norm_override, OptimizerKind::RadamNorm);
}
StepReport step_adabelief(OptState& state, Tensor& params, const Tensor& g,
                          const HyperParams& hp, std::optional<double> g_norm_override) {
    return step_core(state, params, g, hp, g_norm_override, OptimizerKind::AdaBelief);
}
StepReport step_adabeliefnorm(OptState& state, Tensor& params, const Tensor& g,
                              const HyperParams& hp, std::optional<double> g_norm_override) {
    return step_core(state, params, g, hp, g_norm_override, OptimizerKind::AdaBeliefNorm);
}

Optimizer::Optimizer(OptimizerKind kind, HyperParams hp, std::vector<Shape> param_shapes)
    : kind_(kind), hp_(std::move(hp)), shapes_(std::move(param_shapes)) {
    hp_.validate();
    if (shapes_.empty())
        throw ConfigError("make_optimizer: at least one parameter tensor is required");
    states_.reserve(shapes_.size());
    for (const auto& s : shapes_) states_.emplace_back(s);
}

std::vector<StepReport> Optimizer::step(std::vector<Tensor>& params,
                                        const std::vector<Tensor>& grads) {
    if (params.size() != states_.size() || grads.size() != states_.size())
        throw ShapeError("Optimizer::step: expected " + std::to_string(states_.size()) +
                         " tensors, got " + std::to_string(params.size()) + " params and " +
                         std::to_string(grads.size()) + " gradients");

    std::optional<double> shared_norm;
    if (hp_.norm_scope == NormScope::Global) {
        double ss = 0.0;
        for (const auto& g : grads) {
            if (!g.is_finite())
                throw NonFiniteError("Optimizer::step: non-finite gradient at step " +
                                     std::to_string(states_.front().t + 1));
            ss += g.array().square().sum();
        }
        shared_norm = std::sqrt(ss);
    }

    std::vector<StepReport> reports;
    reports.reserve(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) {
        StepReport rep;
        switch (kind_) {
            case OptimizerKind::Adam:
                rep = step_adam(states_[i], params[i], grads[i], hp_, shared_norm);
                break;
            case OptimizerKind::AdamNorm:
                rep = step_adamnorm(states_[i], params[i], grads[i], hp_, shared_norm);
                break;
            case OptimizerKind::DiffGrad:
                rep = step_diffgrad(states_[i], params[i], grads[i], hp_, shared_norm);
                break;
            case OptimizerKind::DiffGradNorm:
                rep = step_diffgradnorm(states_[i], params[i], grads[i], hp_, shared_norm);
                break;
            case OptimizerKind::Radam:
                rep = step_radam(states_[i], params[i], grads[i], hp_, shared_norm);
                break;
            case OptimizerKind::RadamNorm:
                rep = step_radamnorm(states_[i], params[i], grads[i], hp_, shared_norm);
                break;
            case OptimizerKind::AdaBelief:
                rep = step_adabelief(states_[i], params[i], grads[i], hp_, shared_norm);
                break;
            case OptimizerKind::AdaBeliefNorm:
                rep = step_adabeliefnorm(states_[i], params[i], grads[i], hp_, shared_norm);
                break;
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

Optimizer make_optimizer(OptimizerKind kind, HyperParams hp,
                         const std::vector<Shape>& param_shapes) {
    return Optimizer(kind, std::move(hp), param_shapes);
}

}  // namespace adanorm
