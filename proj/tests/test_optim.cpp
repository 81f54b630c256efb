#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "adanorm/errors.hpp"
#include "adanorm/optim.hpp"
#include "adanorm/rng.hpp"
#include "adanorm/tensor.hpp"
#include "scalar_reference.hpp"

using namespace adanorm;
using refimpl::RefHp;
using refimpl::RefState;
using refimpl::Vec;

namespace {

Tensor to_tensor(const Vec& v) {
    return Tensor::from_vector({static_cast<std::int64_t>(v.size())}, v);
}

using RefStepFn = void (*)(RefState&, const Vec&, const RefHp&);
using StepFn = StepReport (*)(OptState&, Tensor&, const Tensor&, const HyperParams&,
                              std::optional<double>);

// Runs the library stepper and the scalar reference on the same gradient
// stream and compares the whole trajectory.
void check_trace(StepFn step, RefStepFn ref_step, const std::vector<Vec>& stream,
                 const HyperParams& hp, const RefHp& rhp, const Vec& theta0,
                 double tol = 1e-12) {
    OptState state(Shape{static_cast<std::int64_t>(theta0.size())});
    Tensor params = to_tensor(theta0);
    RefState ref(theta0);
    for (const Vec& g : stream) {
        step(state, params, to_tensor(g), hp, std::nullopt);
        ref_step(ref, g, rhp);
        REQUIRE(params.size() == static_cast<std::int64_t>(ref.theta.size()));
        for (std::int64_t i = 0; i < params.size(); ++i)
            CHECK(std::fabs(params[i] - ref.theta[i]) <= tol);
        CHECK(std::fabs(state.e - ref.e) <= tol);
    }
}

const std::vector<Vec> kMixedStream = {
    {3.0, 4.0}, {0.6, 0.8}, {0.06, 0.08}, {0.3, 0.4}, {0.01, 0.02},
};

std::vector<Vec> random_stream(std::uint64_t seed, int steps, std::size_t dim,
                               double scale = 1.0) {
    Rng rng(seed);
    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (int s = 0; s < steps; ++s) {
        Vec g(dim);
        for (auto& x : g) x = scale * rng.uniform(-1.0, 1.0);
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace

TEST_CASE("norm correction worked examples") {
    SUBCASE("warmup keeps raw gradient") {
        auto c = adanorm_correct(Tensor{3.0, 4.0}, 0.0, 0.95);
        CHECK(c.g_norm == doctest::Approx(5.0).epsilon(1e-15));
        CHECK(c.e_new == doctest::Approx(0.25).epsilon(1e-15));
        CHECK_FALSE(c.applied);
        CHECK(c.s[0] == 3.0);
        CHECK(c.s[1] == 4.0);
    }
    SUBCASE("shrunk gradient gets scaled up") {
        auto c = adanorm_correct(Tensor{0.6, 0.8}, 2.0, 0.95);
        CHECK(c.g_norm == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(c.e_new == doctest::Approx(1.95).epsilon(1e-15));
        CHECK(c.applied);
        CHECK(c.s[0] == doctest::Approx(1.17).epsilon(1e-12));
        CHECK(c.s[1] == doctest::Approx(1.56).epsilon(1e-12));
        CHECK(l2_norm(c.s) == doctest::Approx(1.95).epsilon(1e-12));
    }
    SUBCASE("zero gradient decays history without dividing") {
        auto c = adanorm_correct(Tensor::zeros({3}), 0.7, 0.9);
        CHECK(c.g_norm == 0.0);
        CHECK(c.e_new == doctest::Approx(0.63).epsilon(1e-15));
        CHECK_FALSE(c.applied);
        for (int i = 0; i < 3; ++i) CHECK(c.s[i] == 0.0);
    }
    SUBCASE("gamma zero tracks the current norm exactly") {
        auto c = adanorm_correct(Tensor{1.0, 2.0, 2.0}, 9.5, 0.0);
        CHECK(c.e_new == c.g_norm);
        CHECK_FALSE(c.applied);
        CHECK(c.s[0] == 1.0);
    }
    SUBCASE("override replaces the computed norm") {
        auto c = adanorm_correct(Tensor{0.6, 0.8}, 2.0, 0.95, 4.0);
        CHECK(c.g_norm == 4.0);
        CHECK(c.e_new == doctest::Approx(0.95 * 2.0 + 0.05 * 4.0).epsilon(1e-15));
        CHECK_FALSE(c.applied);
    }
}

TEST_CASE("norm correction properties") {
    Rng rng(101);
    int fired = 0;
    for (int rep = 0; rep < 2000; ++rep) {
        const auto dim = static_cast<std::int64_t>(1 + rng.below(8));
        Tensor g(Shape{dim});
        const double scale = std::pow(10.0, rng.uniform(-6.0, 3.0));
        for (std::int64_t i = 0; i < dim; ++i) g[i] = scale * rng.uniform(-1.0, 1.0);
        const double e_prev = rng.uniform() < 0.2 ? 0.0 : std::pow(10.0, rng.uniform(-6.0, 3.0));
        const double gamma = rng.uniform(0.0, 0.999);

        auto c = adanorm_correct(g, e_prev, gamma);
        const double gn = l2_norm(g);
        if (gn == 0.0) continue;

        // Norm identity: the corrected norm is the max of history and now.
        const double want = std::max(c.e_new, gn);
        CHECK(std::fabs(l2_norm(c.s) - want) <= 1e-9 * want);
        // Direction preserved: cosine of 1 within 1e-12.
        double dot = 0.0;
        for (std::int64_t i = 0; i < dim; ++i) dot += c.s[i] * g[i];
        const double cosine = dot / (l2_norm(c.s) * gn);
        CHECK(cosine == doctest::Approx(1.0).epsilon(1e-12));
        // Floor: never scales down.
        CHECK(l2_norm(c.s) >= gn * (1.0 - 1e-12));
        CHECK(c.applied == (c.e_new > gn));
        if (c.applied) ++fired;
    }
    CHECK(fired > 100);  // the sample must actually exercise both branches
}

TEST_CASE("adam single step hand value") {
    HyperParams hp;
    OptState st(Shape{1});
    Tensor params{1.0};
    auto rep = step_adam(st, params, Tensor{0.5}, hp);
    // v-hat is g^2 at t=1, so the step is alpha * g / (|g| + eps).
    const double expected = 1.0 - 0.001 * 0.5 / (0.5 + 1e-8);
    CHECK(params[0] == doctest::Approx(expected).epsilon(1e-15));
    CHECK(params[0] == doctest::Approx(0.999).epsilon(1e-9));
    CHECK(rep.g_norm == 0.5);
    CHECK_FALSE(rep.correction_applied);
    CHECK(rep.effective_update[0] == doctest::Approx(expected - 1.0).epsilon(1e-12));
}

TEST_CASE("bias correction identities at t=1") {
    const Tensor g{0.3, -0.7};
    const double b1 = 0.9, b2 = 0.999;
    HyperParams hp;

    SUBCASE("adam and diffgrad") {
        for (StepFn fn : {&step_adam, &step_diffgrad}) {
            OptState st(Shape{2});
            Tensor params = Tensor::zeros({2});
            fn(st, params, g, hp, std::nullopt);
            for (int i = 0; i < 2; ++i) {
                CHECK(st.m[i] / (1.0 - b1) == doctest::Approx(g[i]).epsilon(1e-15));
                CHECK(st.v[i] / (1.0 - b2) == doctest::Approx(g[i] * g[i]).epsilon(1e-12));
            }
        }
    }
    SUBCASE("adabelief corrects the residual variance") {
        OptState st(Shape{2});
        Tensor params = Tensor::zeros({2});
        step_adabelief(st, params, g, hp);
        for (int i = 0; i < 2; ++i) {
            const double m1 = (1.0 - b1) * g[i];
            const double res = g[i] - m1;
            CHECK(st.m[i] / (1.0 - b1) == doctest::Approx(g[i]).epsilon(1e-15));
            CHECK(st.v[i] / (1.0 - b2) == doctest::Approx(res * res).epsilon(1e-12));
        }
    }
    SUBCASE("radam folds the correction into the step size") {
        OptState st(Shape{2});
        Tensor params = Tensor::zeros({2});
        step_radam(st, params, g, hp);
        // t=1 takes the unrectified branch, so the update is -alpha * g.
        for (int i = 0; i < 2; ++i)
            CHECK(params[i] == doctest::Approx(-hp.alpha * g[i]).epsilon(1e-12));
    }
}

TEST_CASE("five step traces match the scalar reference") {
    HyperParams hp;
    RefHp rhp;
    const Vec theta0{0.5, -1.0};

    SUBCASE("adam") { check_trace(&step_adam, &refimpl::ref_adam, kMixedStream, hp, rhp, theta0); }
    SUBCASE("adamnorm") {
        check_trace(&step_adamnorm, &refimpl::ref_adamnorm, kMixedStream, hp, rhp, theta0);
    }
    SUBCASE("diffgrad") {
        check_trace(&step_diffgrad, &refimpl::ref_diffgrad, kMixedStream, hp, rhp, theta0);
    }
    SUBCASE("diffgradnorm") {
        check_trace(&step_diffgradnorm, &refimpl::ref_diffgradnorm, kMixedStream, hp, rhp, theta0);
    }
    SUBCASE("adabelief") {
        check_trace(&step_adabelief, &refimpl::ref_adabelief, kMixedStream, hp, rhp, theta0);
    }
    SUBCASE("adabeliefnorm") {
        check_trace(&step_adabeliefnorm, &refimpl::ref_adabeliefnorm, kMixedStream, hp, rhp,
                    theta0);
    }
    SUBCASE("radam across the branch switch") {
        // Twelve steps so the rectified branch activates mid-trace.
        auto stream = random_stream(55, 12, 2);
        check_trace(&step_radam, &refimpl::ref_radam, stream, hp, rhp, theta0);
        check_trace(&step_radamnorm, &refimpl::ref_radamnorm, stream, hp, rhp, theta0);
    }
    SUBCASE("radam with low beta2 never rectifies") {
        // rho_inf is 3 here, below the threshold, so every step takes the
        // unrectified branch.
        HyperParams hp2 = hp;
        RefHp rhp2 = rhp;
        hp2.beta1 = rhp2.beta1 = 0.5;
        hp2.beta2 = rhp2.beta2 = 0.5;
        auto stream = random_stream(56, 12, 2);
        check_trace(&step_radam, &refimpl::ref_radam, stream, hp2, rhp2, theta0);
    }
    SUBCASE("norm target ablations") {
        for (auto target : {NormTarget::SecondMoment, NormTarget::BothMoments}) {
            HyperParams hp2 = hp;
            hp2.norm_target = target;
            RefHp rhp2 = rhp;
            rhp2.norm_target = target == NormTarget::SecondMoment ? 1 : 2;
            check_trace(&step_adamnorm, &refimpl::ref_adamnorm, kMixedStream, hp2, rhp2, theta0);
            check_trace(&step_adabeliefnorm, &refimpl::ref_adabeliefnorm, kMixedStream, hp2,
                        rhp2, theta0);
        }
    }
    SUBCASE("beta1 decay schedule") {
        HyperParams hp2 = hp;
        hp2.beta1_decay_lambda = 0.98;
        RefHp rhp2 = rhp;
        rhp2.lambda = 0.98;
        check_trace(&step_adamnorm, &refimpl::ref_adamnorm, kMixedStream, hp2, rhp2, theta0);
    }
}

TEST_CASE("correction fires on the mixed stream in the expected pattern") {
    HyperParams hp;
    OptState st(Shape{2});
    Tensor params = Tensor::zeros({2});
    const std::vector<bool> expected = {false, false, true, false, true};
    for (std::size_t i = 0; i < kMixedStream.size(); ++i) {
        auto rep = step_adamnorm(st, params, to_tensor(kMixedStream[i]), hp);
        CHECK(rep.correction_applied == expected[i]);
        CHECK(rep.correction_applied == (rep.e_after > rep.g_norm));
    }
}

TEST_CASE("gamma zero reduces every norm variant to its base") {
    struct Pair {
        StepFn base;
        StepFn norm;
    };
    const std::vector<Pair> pairs = {
        {&step_adam, &step_adamnorm},
        {&step_diffgrad, &step_diffgradnorm},
        {&step_radam, &step_radamnorm},
        {&step_adabelief, &step_adabeliefnorm},
    };
    HyperParams hp;
    hp.gamma = 0.0;
    for (const auto& p : pairs) {
        auto stream = random_stream(77, 60, 10, 2.0);
        OptState sb(Shape{10}), sn(Shape{10});
        Tensor pb = Tensor::zeros({10}), pn = Tensor::zeros({10});
        for (const auto& g : stream) {
            p.base(sb, pb, to_tensor(g), hp, std::nullopt);
            auto rep = p.norm(sn, pn, to_tensor(g), hp, std::nullopt);
            CHECK_FALSE(rep.correction_applied);
            for (int i = 0; i < 10; ++i)
                CHECK(std::fabs(pb[i] - pn[i]) <= 1e-15);
        }
    }
}

TEST_CASE("first step equals the base optimizer for any gamma") {
    HyperParams hp;
    hp.gamma = 0.9;
    const Tensor g{1.5, -2.5, 0.5};
    OptState sb(Shape{3}), sn(Shape{3});
    Tensor pb = Tensor::full({3}, 0.25), pn = Tensor::full({3}, 0.25);
    step_adam(sb, pb, g, hp);
    auto rep = step_adamnorm(sn, pn, g, hp);
    // e after one step is (1 - gamma) * |g|, strictly below |g|.
    CHECK(rep.e_after == doctest::Approx(0.1 * l2_norm(g)).epsilon(1e-12));
    CHECK_FALSE(rep.correction_applied);
    for (int i = 0; i < 3; ++i) CHECK(pb[i] == pn[i]);
}

TEST_CASE("diffgrad friction saturates to an adam step for large swings") {
    HyperParams hp;
    const std::vector<Vec> stream = {{40.0}, {-40.0}};
    OptState sa(Shape{1}), sd(Shape{1});
    Tensor pa{0.0}, pd{0.0};
    for (const auto& g : stream) {
        step_adam(sa, pa, to_tensor(g), hp);
        step_diffgrad(sd, pd, to_tensor(g), hp);
    }
    CHECK(std::fabs(pa[0] - pd[0]) <= 1e-12);
}

TEST_CASE("diffgrad friction is one half for a repeated gradient") {
    HyperParams hp;
    OptState sa(Shape{1}), sd(Shape{1});
    Tensor pa{0.0}, pd{0.0};
    // Same gradient twice: at the second step the difference is zero, so the
    // friction halves the adam-style update.
    const Tensor g{0.8};
    step_adam(sa, pa, g, hp);
    step_diffgrad(sd, pd, g, hp);
    auto ra = step_adam(sa, pa, g, hp);
    auto rd = step_diffgrad(sd, pd, g, hp);
    CHECK(rd.effective_update[0] ==
          doctest::Approx(0.5 * ra.effective_update[0]).epsilon(1e-12));
}

TEST_CASE("radam rectification threshold") {
    const double b2 = 0.999;
    const double rho_inf = 2.0 / (1.0 - b2) - 1.0;
    CHECK(rho_inf == doctest::Approx(1999.0).epsilon(1e-12));
    auto rho_at = [&](std::int64_t t) {
        const double p = std::pow(b2, static_cast<double>(t));
        return rho_inf - 2.0 * static_cast<double>(t) * p / (1.0 - p);
    };
    CHECK(rho_at(1) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rho_at(1) < 5.0);
    // The variance estimate crosses the threshold between t=5 and t=6.
    CHECK(rho_at(5) < 5.0);
    CHECK(rho_at(6) >= 5.0);
    std::int64_t onset = 0;
    double prev = -1.0;
    for (std::int64_t t = 1; t <= 10000; ++t) {
        const double r = rho_at(t);
        CHECK(r > prev);  // monotone toward rho_inf
        prev = r;
        if (onset == 0 && r >= 5.0) onset = t;
        if (onset != 0) CHECK(r >= 5.0);  // stays rectified
    }
    CHECK(onset == 6);
    CHECK(prev < rho_inf);
}

TEST_CASE("adabelief variance tracks the belief residual") {
    SUBCASE("constant gradient first step") {
        HyperParams hp;
        OptState st(Shape{1});
        Tensor params{0.0};
        const double c = 0.7;
        step_adabelief(st, params, Tensor{c}, hp);
        const double res = c - (1.0 - hp.beta1) * c;  // g minus fresh m, 0.9c
        CHECK(st.v[0] == doctest::Approx((1.0 - hp.beta2) * res * res).epsilon(1e-12));
    }
    SUBCASE("gradient equal to the first moment keeps v at zero") {
        HyperParams hp;
        OptState st(Shape{1});
        st.m[0] = 0.5;
        st.t = 3;
        Tensor params{0.0};
        auto rep = step_adabelief(st, params, Tensor{0.5}, hp);
        CHECK(st.v[0] == 0.0);
        // Update degenerates to alpha * m-hat / epsilon.
        const double mhat = 0.5 / (1.0 - std::pow(hp.beta1, 4.0));
        CHECK(rep.effective_update[0] ==
              doctest::Approx(-hp.alpha * mhat / hp.epsilon).epsilon(1e-9));
        CHECK(params.is_finite());
    }
}

TEST_CASE("hyperparameter validation") {
    HyperParams ok;
    CHECK_NOTHROW(ok.validate());

    HyperParams bad = ok;
    bad.beta1 = 0.999;
    bad.beta2 = 0.9;  // beta1^2 / sqrt(beta2) = 1.05
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = ok;
    bad.alpha = -0.001;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.alpha = 0.0;  // zero step size is allowed: every update scales to zero
    CHECK_NOTHROW(bad.validate());
    bad = ok;
    bad.gamma = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.beta2 = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.epsilon = -1e-12;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.epsilon = 0.0;
    CHECK_NOTHROW(bad.validate());
    bad = ok;
    bad.beta1_decay_lambda = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.beta1_decay_lambda = 1.0;
    CHECK_NOTHROW(bad.validate());

    CHECK_THROWS_AS(make_optimizer(parse_optimizer_kind("sgd"), ok, {{2}}), ConfigError);
    CHECK_THROWS_AS(make_optimizer(OptimizerKind::Adam, ok, {}), ConfigError);
}

TEST_CASE("step report invariants on random streams") {
    HyperParams hp;
    for (StepFn fn : {&step_adamnorm, &step_diffgradnorm, &step_radamnorm,
                      &step_adabeliefnorm}) {
        OptState st(Shape{4});
        Tensor params = Tensor::zeros({4});
        Rng rng(404);
        std::int64_t prev_t = 0;
        for (int s = 0; s < 300; ++s) {
            Tensor g(Shape{4});
            const double scale = std::pow(10.0, rng.uniform(-4.0, 1.0));
            for (int i = 0; i < 4; ++i) g[i] = scale * rng.uniform(-1.0, 1.0);
            auto rep = fn(st, params, g, hp, std::nullopt);
            if (rep.g_norm > 0.0)
                CHECK(rep.correction_applied == (rep.e_after > rep.g_norm));
            else
                CHECK_FALSE(rep.correction_applied);
            CHECK(rep.e_after >= 0.0);
            CHECK(st.e == rep.e_after);
            CHECK(st.t == prev_t + 1);
            prev_t = st.t;
            for (int i = 0; i < 4; ++i) CHECK(st.v[i] >= 0.0);
        }
    }
}

TEST_CASE("base optimizers never report a correction") {
    HyperParams hp;
    Optimizer opt = make_optimizer(OptimizerKind::Adam, hp, {{3}});
    std::vector<Tensor> params{Tensor::zeros({3})};
    Rng rng(9);
    for (int s = 0; s < 50; ++s) {
        Tensor g(Shape{3});
        for (int i = 0; i < 3; ++i) g[i] = rng.uniform(-2.0, 2.0);
        auto reps = opt.step(params, {g});
        CHECK_FALSE(reps[0].correction_applied);
        CHECK(reps[0].e_after == 0.0);
    }
}

TEST_CASE("per-tensor scope keeps independent norm histories") {
    HyperParams hp;
    Optimizer opt = make_optimizer(OptimizerKind::AdamNorm, hp, {{2}, {2}});
    std::vector<Tensor> params{Tensor::zeros({2}), Tensor::zeros({2})};
    std::vector<Tensor> grads{Tensor{3.0, 4.0}, Tensor{1.0, 0.0}};
    auto reps = opt.step(params, grads);
    CHECK(reps[0].g_norm == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(reps[1].g_norm == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(reps[0].e_after == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(reps[1].e_after == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("global scope shares one norm history across tensors") {
    HyperParams hp;
    hp.norm_scope = NormScope::Global;
    Optimizer opt = make_optimizer(OptimizerKind::AdamNorm, hp, {{2}, {2}});
    std::vector<Tensor> params{Tensor::zeros({2}), Tensor::zeros({2})};
    std::vector<Tensor> grads{Tensor{3.0, 4.0}, Tensor{1.0, 0.0}};
    const double gn = std::sqrt(26.0);
    auto reps = opt.step(params, grads);
    for (const auto& rep : reps) {
        CHECK(rep.g_norm == doctest::Approx(gn).epsilon(1e-15));
        CHECK(rep.e_after == doctest::Approx(0.05 * gn).epsilon(1e-12));
    }
    CHECK(opt.state(0).e == opt.state(1).e);

    // Second step with shrunk gradients: the shared history fires for both.
    grads = {Tensor{0.003, 0.004}, Tensor{0.001, 0.0}};
    reps = opt.step(params, grads);
    CHECK(reps[0].correction_applied);
    CHECK(reps[1].correction_applied);
    CHECK(opt.state(0).e == opt.state(1).e);
}

TEST_CASE("zero gradient stream is inert and decays the history") {
    HyperParams hp;
    OptState st(Shape{2});
    st.e = 1.0;
    Tensor params = Tensor::full({2}, 0.5);
    for (int s = 1; s <= 3; ++s) {
        auto rep = step_adamnorm(st, params, Tensor::zeros({2}), hp);
        CHECK(rep.g_norm == 0.0);
        CHECK_FALSE(rep.correction_applied);
        CHECK(st.e == doctest::Approx(std::pow(hp.gamma, s)).epsilon(1e-12));
    }
    CHECK(params[0] == 0.5);
    CHECK(params[1] == 0.5);
    CHECK(params.is_finite());
}

TEST_CASE("non-finite gradient raises with the step index") {
    HyperParams hp;
    OptState st(Shape{1});
    Tensor params{0.0};
    step_adam(st, params, Tensor{1.0}, hp);
    try {
        step_adam(st, params, Tensor{std::numeric_limits<double>::infinity()}, hp);
        FAIL("expected NonFiniteError");
    } catch (const NonFiniteError& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
}

TEST_CASE("identical seeds give bitwise identical trajectories") {
    auto run = [](std::uint64_t seed) {
        HyperParams hp;
        Optimizer opt = make_optimizer(OptimizerKind::AdamNorm, hp, {{6}});
        std::vector<Tensor> params{Tensor::zeros({6})};
        Rng rng(seed);
        for (int s = 0; s < 100; ++s) {
            Tensor g(Shape{6});
            for (int i = 0; i < 6; ++i) g[i] = rng.normal();
            opt.step(params, {g});
        }
        return params[0];
    };
    Tensor a = run(2024), b = run(2024);
    CHECK(std::memcmp(a.array().data(), b.array().data(),
                      sizeof(double) * static_cast<std::size_t>(a.size())) == 0);
}

TEST_CASE("first moment dominance on a shrinking sign-consistent stream") {
    HyperParams hp;
    OptState sa(Shape{1}), sn(Shape{1});
    Tensor pa{0.0}, pn{0.0};
    bool fired = false;
    for (int t = 0; t < 40; ++t) {
        const Tensor g{2.0 * std::pow(0.8, t)};
        step_adam(sa, pa, g, hp);
        auto rep = step_adamnorm(sn, pn, g, hp);
        fired = fired || rep.correction_applied;
        CHECK(std::fabs(sn.m[0]) >= std::fabs(sa.m[0]));
    }
    CHECK(fired);
}

TEST_CASE("kind names round trip") {
    for (auto kind : all_optimizer_kinds()) {
        CHECK(parse_optimizer_kind(to_string(kind)) == kind);
        CHECK(is_norm_corrected(kind) == (base_kind(kind) != kind));
    }
    CHECK(parse_norm_target("second") == NormTarget::SecondMoment);
    CHECK(parse_norm_scope("global") == NormScope::Global);
    CHECK_THROWS_AS(parse_norm_target("third"), ConfigError);
    CHECK_THROWS_AS(parse_norm_scope("local"), ConfigError);
}
