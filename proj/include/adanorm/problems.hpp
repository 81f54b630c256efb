#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adanorm/optim.hpp"
#include "adanorm/tensor.hpp"

namespace adanorm {

struct Optimum {
    Tensor point;
    double value = 0.0;
};

// Analytic test function: eval fills the gradient and returns the loss.
struct Problem {
    std::string name;
    std::int64_t dim = 0;
    std::function<double(const Tensor& x, Tensor& grad)> eval;
    std::optional<Optimum> optimum;
};

// f(x) = 0.5 * x' D x with D diagonal, entries spaced linearly over
// [1, condition]. dim >= 1, condition >= 1.
Problem quadratic_bowl(std::int64_t dim, double condition);

// Classic banana function, dim >= 2. Minimum at the all-ones point.
Problem rosenbrock(std::int64_t dim);

// One-dimensional curvature profiles exercising distinct gradient regimes.
// All are piecewise smooth with C1 joins and have their minimum at zero.
enum class Scenario {
    FlatPlateau,   // |gradient| <= 1e-3 across the central interval
    SteepRamp,     // near-constant slope of magnitude 10 away from the center
    NarrowValley,  // steep parabola of half-width 0.05
};
Problem scenario_curvature(Scenario which);
Scenario parse_scenario(const std::string& name);
std::string to_string(Scenario which);

// A finite sequence of one-dimensional convex losses f_1..f_T, each centered
// at centers[t-1]. theta_star is the fixed point minimizing the summed loss.
enum class SequenceKind { DriftingQuadratics, AbsoluteLosses };
SequenceKind parse_sequence_kind(const std::string& name);
std::string to_string(SequenceKind kind);

struct LossSequence {
    SequenceKind kind = SequenceKind::DriftingQuadratics;
    std::int64_t horizon = 0;  // T
    double curvature = 1.0;    // quadratics only
    std::vector<double> centers;
    double theta_star = 0.0;

    // t is 1-based. Subgradient of the absolute loss at its kink is 0.
    double loss_at(std::int64_t t, double theta) const;
    double grad_at(std::int64_t t, double theta) const;
};

LossSequence quadratic_sequence_from_centers(std::vector<double> centers,
                                             double curvature = 1.0);
LossSequence absolute_sequence_from_centers(std::vector<double> centers);

// Centers drawn i.i.d. uniform from [-amplitude, amplitude]; the minimizer
// of the per-step loss drifts with them. The default amplitude keeps the
// default stepper in its tracking regime, where averaged regret decays on
// the expected sqrt(T) curve instead of diffusing.
LossSequence convex_sequence(SequenceKind kind, std::int64_t horizon,
                             std::uint64_t seed, double amplitude = 0.05,
                             double curvature = 1.0);

struct RegretPoint {
    std::int64_t t = 0;
    double regret = 0.0;      // cumulative, against theta_star
    double avg_regret = 0.0;  // regret / t
};

struct RegretOptions {
    // Starting parameter; defaults to theta_star so the measured regret is
    // pure tracking cost with no transient from a displaced start.
    std::optional<double> theta0;
    // Step-size schedule alpha_t = alpha / sqrt(t), the schedule under which
    // the averaged-regret decay is the expected behavior.
    bool alpha_sqrt_decay = true;
};

// Online protocol: at each round the current parameter incurs f_t, then the
// stepper consumes the (sub)gradient at that parameter. The stepper must be
// fresh (no prior steps) and own exactly one scalar tensor.
std::vector<RegretPoint> regret(const LossSequence& seq, Optimizer& opt,
                                const RegretOptions& options = {});

// Least-squares fit of r(T) ~ c * sqrt(T) through the given (T, r) points;
// returns c and the coefficient of determination.
struct SqrtFit {
    double c = 0.0;
    double r_squared = 0.0;
};
SqrtFit fit_sqrt_decay(const std::vector<std::pair<double, double>>& points);

}  // namespace adanorm
