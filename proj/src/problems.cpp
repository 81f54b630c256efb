#include "adanorm/problems.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "adanorm/errors.hpp"
#include "adanorm/rng.hpp"

namespace adanorm {

Problem quadratic_bowl(std::int64_t dim, double condition) {
    if (dim < 1) throw ConfigError("quadratic_bowl: dim must be >= 1");
    if (!(condition >= 1.0)) throw ConfigError("quadratic_bowl: condition must be >= 1");
    std::vector<double> diag(static_cast<std::size_t>(dim), 1.0);
    for (std::int64_t i = 0; i < dim; ++i)
        diag[static_cast<std::size_t>(i)] =
            dim == 1 ? 1.0
                     : 1.0 + (condition - 1.0) * static_cast<double>(i) /
                                 static_cast<double>(dim - 1);
    Problem p;
    p.name = "quadratic";
    p.dim = dim;
    p.optimum = Optimum{Tensor::zeros({dim}), 0.0};
    p.eval = [diag, dim](const Tensor& x, Tensor& grad) {
        double loss = 0.0;
        for (std::int64_t i = 0; i < dim; ++i) {
            const double d = diag[static_cast<std::size_t>(i)];
            loss += 0.5 * d * x[i] * x[i];
            grad[i] = d * x[i];
        }
        return loss;
    };
    return p;
}

Problem rosenbrock(std::int64_t dim) {
    if (dim < 2) throw ConfigError("rosenbrock: dim must be >= 2");
    Problem p;
    p.name = "rosenbrock";
    p.dim = dim;
    p.optimum = Optimum{Tensor::full({dim}, 1.0), 0.0};
    p.eval = [dim](const Tensor& x, Tensor& grad) {
        double loss = 0.0;
        for (std::int64_t i = 0; i < dim; ++i) grad[i] = 0.0;
        for (std::int64_t i = 0; i + 1 < dim; ++i) {
            const double a = x[i + 1] - x[i] * x[i];
            const double b = 1.0 - x[i];
            loss += 100.0 * a * a + b * b;
            grad[i] += -400.0 * x[i] * a - 2.0 * b;
            grad[i + 1] += 200.0 * a;
        }
        return loss;
    };
    return p;
}

namespace {

// Piecewise 1-D profile: quadratic core |x| <= join, linear-plus-quadratic
// continuation outside, matched to C1 at the join.
struct PiecewiseBowl {
    double inner_curv;  // f = 0.5 * inner_curv * x^2 inside
    double join;
    double outer_curv;  // extra quadratic term outside

    double value(double x) const {
        const double a = std::fabs(x);
        if (a <= join) return 0.5 * inner_curv * x * x;
        const double d = a - join;
        return 0.5 * inner_curv * join * join + inner_curv * join * d +
               0.5 * outer_curv * d * d;
    }
    double slope(double x) const {
        const double a = std::fabs(x);
        const double s = x < 0.0 ? -1.0 : 1.0;
        if (a <= join) return inner_curv * x;
        return s * (inner_curv * join + outer_curv * (a - join));
    }
};

}  // namespace

Problem scenario_curvature(Scenario which) {
    Problem p;
    p.dim = 1;
    p.optimum = Optimum{Tensor::zeros({1}), 0.0};
    switch (which) {
        case Scenario::FlatPlateau: {
            // Gradient magnitude at most 1e-3 anywhere in [-1, 1].
            PiecewiseBowl b{1e-3, 1.0, 2.0};
            p.name = "flat-plateau";
            p.eval = [b](const Tensor& x, Tensor& grad) {
                grad[0] = b.slope(x[0]);
                return b.value(x[0]);
            };
            break;
        }
        case Scenario::SteepRamp: {
            // Smoothed absolute value: slope saturates at +-10 within a few
            // multiples of the rounding width.
            const double g = 10.0, w = 0.01;
            p.name = "steep-ramp";
            p.eval = [g, w](const Tensor& x, Tensor& grad) {
                const double r = std::sqrt(x[0] * x[0] + w * w);
                grad[0] = g * x[0] / r;
                return g * (r - w);
            };
            break;
        }
        case Scenario::NarrowValley: {
            PiecewiseBowl b{200.0, 0.05, 0.0};
            p.name = "narrow-valley";
            p.eval = [b](const Tensor& x, Tensor& grad) {
                grad[0] = b.slope(x[0]);
                return b.value(x[0]);
            };
            break;
        }
    }
    return p;
}

Scenario parse_scenario(const std::string& name) {
    if (name == "flat-plateau") return Scenario::FlatPlateau;
    if (name == "steep-ramp") return Scenario::SteepRamp;
    if (name == "narrow-valley") return Scenario::NarrowValley;
    throw ConfigError("unknown scenario '" + name +
                      "' (expected flat-plateau, steep-ramp, narrow-valley)");
}

std::string to_string(Scenario which) {
    switch (which) {
        case Scenario::FlatPlateau: return "flat-plateau";
        case Scenario::SteepRamp: return "steep-ramp";
        case Scenario::NarrowValley: return "narrow-valley";
    }
    return "unknown";
}

SequenceKind parse_sequence_kind(const std::string& name) {
    if (name == "drifting-quadratics") return SequenceKind::DriftingQuadratics;
    if (name == "absolute-losses") return SequenceKind::AbsoluteLosses;
    throw ConfigError("unknown sequence kind '" + name +
                      "' (expected drifting-quadratics, absolute-losses)");
}

std::string to_string(SequenceKind kind) {
    return kind == SequenceKind::DriftingQuadratics ? "drifting-quadratics"
                                                    : "absolute-losses";
}

double LossSequence::loss_at(std::int64_t t, double theta) const {
    const double c = centers.at(static_cast<std::size_t>(t - 1));
    if (kind == SequenceKind::DriftingQuadratics)
        return 0.5 * curvature * (theta - c) * (theta - c);
    return std::fabs(theta - c);
}

double LossSequence::grad_at(std::int64_t t, double theta) const {
    const double c = centers.at(static_cast<std::size_t>(t - 1));
    if (kind == SequenceKind::DriftingQuadratics) return curvature * (theta - c);
    if (theta > c) return 1.0;
    if (theta < c) return -1.0;
    return 0.0;
}

namespace {

double quadratic_theta_star(const std::vector<double>& centers) {
    // Equal curvatures: the argmin of the summed quadratic is the mean.
    double s = 0.0;
    for (double c : centers) s += c;
    return s / static_cast<double>(centers.size());
}

double absolute_theta_star(std::vector<double> centers) {
    // The summed absolute loss is minimized at the median; with an even
    // count any point between the middle pair works, take their midpoint.
    std::sort(centers.begin(), centers.end());
    const std::size_t n = centers.size();
    if (n % 2 == 1) return centers[n / 2];
    return 0.5 * (centers[n / 2 - 1] + centers[n / 2]);
}

}  // namespace

LossSequence quadratic_sequence_from_centers(std::vector<double> centers,
                                             double curvature) {
    if (centers.empty())
        throw ConfigError("loss sequence needs at least one step");
    if (!(curvature > 0.0))
        throw ConfigError("loss sequence curvature must be positive");
    LossSequence seq;
    seq.kind = SequenceKind::DriftingQuadratics;
    seq.horizon = static_cast<std::int64_t>(centers.size());
    seq.curvature = curvature;
    seq.theta_star = quadratic_theta_star(centers);
    seq.centers = std::move(centers);
    return seq;
}

LossSequence absolute_sequence_from_centers(std::vector<double> centers) {
    if (centers.empty())
        throw ConfigError("loss sequence needs at least one step");
    LossSequence seq;
    seq.kind = SequenceKind::AbsoluteLosses;
    seq.horizon = static_cast<std::int64_t>(centers.size());
    seq.theta_star = absolute_theta_star(centers);
    seq.centers = std::move(centers);
    return seq;
}

LossSequence convex_sequence(SequenceKind kind, std::int64_t horizon,
                             std::uint64_t seed, double amplitude,
                             double curvature) {
    if (horizon < 1) throw ConfigError("convex_sequence: horizon must be >= 1");
    if (!(amplitude > 0.0)) throw ConfigError("convex_sequence: amplitude must be positive");
    Rng rng(seed);
    std::vector<double> centers(static_cast<std::size_t>(horizon));
    for (auto& c : centers) c = rng.uniform(-amplitude, amplitude);
    if (kind == SequenceKind::DriftingQuadratics)
        return quadratic_sequence_from_centers(std::move(centers), curvature);
    return absolute_sequence_from_centers(std::move(centers));
}

std::vector<RegretPoint> regret(const LossSequence& seq, Optimizer& opt,
                                const RegretOptions& options) {
    if (opt.num_tensors() != 1 || opt.state(0).m.size() != 1)
        throw ConfigError("regret: the stepper must own exactly one scalar tensor");
    if (opt.state(0).t != 0)
        throw ConfigError("regret: the stepper has already taken steps");

    const double base_alpha = opt.hyper().alpha;
    std::vector<Tensor> params{Tensor{options.theta0.value_or(seq.theta_star)}};
    std::vector<RegretPoint> out;
    out.reserve(static_cast<std::size_t>(seq.horizon));
    double cumulative = 0.0;
    for (std::int64_t t = 1; t <= seq.horizon; ++t) {
        const double theta = params[0][0];
        cumulative += seq.loss_at(t, theta) - seq.loss_at(t, seq.theta_star);
        out.push_back({t, cumulative, cumulative / static_cast<double>(t)});
        if (options.alpha_sqrt_decay)
            opt.set_alpha(base_alpha / std::sqrt(static_cast<double>(t)));
        const Tensor g{seq.grad_at(t, theta)};
        opt.step(params, {g});
    }
    opt.set_alpha(base_alpha);
    return out;
}

SqrtFit fit_sqrt_decay(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) throw ConfigError("fit_sqrt_decay: need at least two points");
    double sxy = 0.0, sxx = 0.0, mean = 0.0;
    for (const auto& [T, r] : points) {
        const double x = std::sqrt(T);
        sxy += x * r;
        sxx += x * x;
        mean += r;
    }
    mean /= static_cast<double>(points.size());
    SqrtFit fit;
    fit.c = sxy / sxx;
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& [T, r] : points) {
        const double pred = fit.c * std::sqrt(T);
        ss_res += (r - pred) * (r - pred);
        ss_tot += (r - mean) * (r - mean);
    }
    fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
    return fit;
}

}  // namespace adanorm
