#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adanorm/tensor.hpp"

namespace adanorm {

// Which moment estimate consumes the norm-corrected gradient in the *Norm
// optimizers. FirstMoment is the standard scheme; the others exist for
// ablation sweeps.
enum class NormTarget { FirstMoment, SecondMoment, BothMoments };

// PerTensor keeps an independent norm history e per parameter tensor.
// Global maintains one history over the concatenation of all gradients.
enum class NormScope { PerTensor, Global };

enum class OptimizerKind {
    Adam,
    AdamNorm,
    DiffGrad,
    DiffGradNorm,
    Radam,
    RadamNorm,
    AdaBelief,
    AdaBeliefNorm,
};

OptimizerKind parse_optimizer_kind(const std::string& name);
std::string to_string(OptimizerKind kind);
NormTarget parse_norm_target(const std::string& name);
std::string to_string(NormTarget target);
NormScope parse_norm_scope(const std::string& name);
std::string to_string(NormScope scope);

// True for the gradient-norm-corrected variants.
bool is_norm_corrected(OptimizerKind kind);
// AdamNorm -> Adam and so on; identity for the base optimizers.
OptimizerKind base_kind(OptimizerKind kind);

const std::vector<OptimizerKind>& all_optimizer_kinds();

struct HyperParams {
    double alpha = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double gamma = 0.95;    // decay of the gradient-norm EMA
    double epsilon = 1e-8;  // added outside the square root
    // Optional multiplicative decay of beta1 over steps: beta1_t =
    // beta1 * lambda^(t-1). Only the regret harness sets this.
    std::optional<double> beta1_decay_lambda;
    NormTarget norm_target = NormTarget::FirstMoment;
    NormScope norm_scope = NormScope::PerTensor;

    // Throws ConfigError on out-of-range values or when
    // beta1^2 / sqrt(beta2) >= 1. Called by every stepper constructor.
    void validate() const;

    bool operator==(const HyperParams&) const = default;
};

// Per-tensor optimizer state. t counts completed steps.
struct OptState {
    Tensor m;
    Tensor v;          // elementwise >= 0 throughout
    Tensor prev_grad;  // diffGrad family only, zero at t=0
    double e = 0.0;    // gradient-norm EMA, 0 at t=0
    std::int64_t t = 0;

    OptState() = default;
    explicit OptState(const Shape& shape)
        : m(shape), v(shape), prev_grad(shape) {}
};

// Telemetry emitted by one step on one tensor. Invariant:
// correction_applied == (e_after > g_norm) whenever g_norm > 0.
struct StepReport {
    double g_norm = 0.0;
    double e_after = 0.0;
    bool correction_applied = false;
    Tensor effective_update;  // params_after - params_before
};

struct NormCorrection {
    Tensor s;
    double e_new = 0.0;
    double g_norm = 0.0;
    bool applied = false;
};

// The one spot where the norm EMA advances. Telemetry replay depends on this
// exact expression, so both sites share it.
inline double norm_ema(double gamma, double e_prev, double g_norm) {
    return gamma * e_prev + (1.0 - gamma) * g_norm;
}

// Gradient-norm correction. Advances the norm EMA e and, when the updated
// EMA exceeds the current gradient norm, scales the gradient up so its norm
// equals the EMA: s = (e_new / g_norm) * g. Otherwise s is g unchanged, so
// l2_norm(s) == max(e_new, g_norm). A zero gradient short-circuits: no
// division, s = g, applied = false, while e still decays by gamma.
// g_norm_override replaces l2_norm(g) when the caller tracks a shared norm
// over several tensors (NormScope::Global).
NormCorrection adanorm_correct(const Tensor& g, double e_prev, double gamma,
                               std::optional<double> g_norm_override = std::nullopt);

// One optimizer step on one tensor. params is updated in place; the report
// describes what happened. g_norm_override is for NormScope::Global, where
// the caller supplies the norm of the concatenated gradient.
StepReport step_adam(OptState& state, Tensor& params, const Tensor& g,
                     const HyperParams& hp,
                     std::optional<double> g_norm_override = std::nullopt);
StepReport step_adamnorm(OptState& state, Tensor& params, const Tensor& g,
                         const HyperParams& hp,
                         std::optional<double> g_norm_override = std::nullopt);
StepReport step_diffgrad(OptState& state, Tensor& params, const Tensor& g,
                         const HyperParams& hp,
                         std::optional<double> g_norm_override = std::nullopt);
StepReport step_diffgradnorm(OptState& state, Tensor& params, const Tensor& g,
                             const HyperParams& hp,
                             std::optional<double> g_norm_override = std::nullopt);
StepReport step_radam(OptState& state, Tensor& params, const Tensor& g,
                      const HyperParams& hp,
                      std::optional<double> g_norm_override = std::nullopt);
StepReport step_radamnorm(OptState& state, Tensor& params, const Tensor& g,
                          const HyperParams& hp,
                          std::optional<double> g_norm_override = std::nullopt);
StepReport step_adabelief(OptState& state, Tensor& params, const Tensor& g,
                          const HyperParams& hp,
                          std::optional<double> g_norm_override = std::nullopt);
StepReport step_adabeliefnorm(OptState& state, Tensor& params, const Tensor& g,
                              const HyperParams& hp,
                              std::optional<double> g_norm_override = std::nullopt);

// Multi-tensor stepper. Owns one OptState per parameter tensor and
// dispatches to the per-tensor step functions. With NormScope::Global it
// computes the concatenated gradient norm once per step and feeds it to
// every tensor, so all norm histories advance identically.
class Optimizer {
public:
    Optimizer(OptimizerKind kind, HyperParams hp, std::vector<Shape> param_shapes);

    std::vector<StepReport> step(std::vector<Tensor>& params,
                                 const std::vector<Tensor>& grads);

    OptimizerKind kind() const { return kind_; }
    const HyperParams& hyper() const { return hp_; }
    void set_alpha(double alpha) { hp_.alpha = alpha; }
    std::size_t num_tensors() const { return states_.size(); }
    const OptState& state(std::size_t i) const { return states_.at(i); }

private:
    OptimizerKind kind_;
    HyperParams hp_;
    std::vector<Shape> shapes_;
    std::vector<OptState> states_;
};

Optimizer make_optimizer(OptimizerKind kind, HyperParams hp,
                         const std::vector<Shape>& param_shapes);

}  // namespace adanorm
