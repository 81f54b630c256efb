#pragma once

// Reference steppers transcribed directly from the algorithm listings, kept
// deliberately free of the library's tensor machinery: plain double vectors,
// explicit loops, scalar math only. Test oracles compare library trajectories
// against these.

#include <cmath>
#include <cstddef>
#include <vector>

namespace refimpl {

using Vec = std::vector<double>;

inline double vec_norm(const Vec& x) {
    double ss = 0.0;
    for (double v : x) ss += v * v;
    return std::sqrt(ss);
}

struct RefHp {
    double alpha = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double gamma = 0.95;
    double eps = 1e-8;
    double lambda = 1.0;   // beta1 decay, 1 = off
    int norm_target = 0;   // 0 first moment, 1 second, 2 both
};

struct RefState {
    Vec theta, m, v, gprev;
    double e = 0.0;
    long t = 0;

    explicit RefState(Vec theta0)
        : theta(std::move(theta0)),
          m(theta.size(), 0.0),
          v(theta.size(), 0.0),
          gprev(theta.size(), 0.0) {}
};

inline double ref_beta1_at(const RefHp& hp, long t) {
    return hp.beta1 * std::pow(hp.lambda, static_cast<double>(t - 1));
}

// Norm correction: advances e, scales g up to the historical norm when the
// updated e exceeds the current norm. Fills s, returns whether it fired.
inline bool ref_correct(RefState& st, const Vec& g, const RefHp& hp, Vec& s) {
    const double gn = vec_norm(g);
    st.e = hp.gamma * st.e + (1.0 - hp.gamma) * gn;
    s = g;
    if (gn > 0.0 && st.e > gn) {
        for (std::size_t i = 0; i < g.size(); ++i) s[i] = st.e / gn * g[i];
        return true;
    }
    return false;
}

inline void ref_adam(RefState& st, const Vec& g, const RefHp& hp) {
    st.t += 1;
    const double b1t = ref_beta1_at(hp, st.t);
    const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(st.t));
    for (std::size_t i = 0; i < g.size(); ++i) {
        st.m[i] = b1t * st.m[i] + (1.0 - b1t) * g[i];
        st.v[i] = hp.beta2 * st.v[i] + (1.0 - hp.beta2) * g[i] * g[i];
        const double mh = st.m[i] / bc1;
        const double vh = st.v[i] / bc2;
        st.theta[i] -= hp.alpha * mh / (std::sqrt(vh) + hp.eps);
    }
}

inline void ref_adamnorm(RefState& st, const Vec& g, const RefHp& hp) {
    st.t += 1;
    Vec s;
    ref_correct(st, g, hp, s);
    const Vec& m_in = hp.norm_target == 1 ? g : s;
    const Vec& v_in = hp.norm_target == 0 ? g : s;
    const double b1t = ref_beta1_at(hp, st.t);
    const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(st.t));
    for (std::size_t i = 0; i < g.size(); ++i) {
        st.m[i] = b1t * st.m[i] + (1.0 - b1t) * m_in[i];
        st.v[i] = hp.beta2 * st.v[i] + (1.0 - hp.beta2) * v_in[i] * v_in[i];
        const double mh = st.m[i] / bc1;
        const double vh = st.v[i] / bc2;
        st.theta[i] -= hp.alpha * mh / (std::sqrt(vh) + hp.eps);
    }
}

inline void ref_diffgrad(RefState& st, const Vec& g, const RefHp& hp) {
    st.t += 1;
    const double b1t = ref_beta1_at(hp, st.t);
    const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(st.t));
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double xi = 1.0 / (1.0 + std::exp(-std::fabs(g[i] - st.gprev[i])));
        st.m[i] = b1t * st.m[i] + (1.0 - b1t) * g[i];
        st.v[i] = hp.beta2 * st.v[i] + (1.0 - hp.beta2) * g[i] * g[i];
        const double mh = st.m[i] / bc1;
        const double vh = st.v[i] / bc2;
        st.theta[i] -= hp.alpha * xi * mh / (std::sqrt(vh) + hp.eps);
    }
    st.gprev = g;
}

inline void ref_diffgradnorm(RefState& st, const Vec& g, const RefHp& hp) {
    st.t += 1;
    Vec s;
    ref_correct(st, g, hp, s);
    const Vec& m_in = hp.norm_target == 1 ? g : s;
    const Vec& v_in = hp.norm_target == 0 ? g : s;
    const double b1t = ref_beta1_at(hp, st.t);
    const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(st.t));
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double xi = 1.0 / (1.0 + std::exp(-std::fabs(g[i] - st.gprev[i])));
        st.m[i] = b1t * st.m[i] + (1.0 - b1t) * m_in[i];
        st.v[i] = hp.beta2 * st.v[i] + (1.0 - hp.beta2) * v_in[i] * v_in[i];
        const double mh = st.m[i] / bc1;
        const double vh = st.v[i] / bc2;
        st.theta[i] -= hp.alpha * xi * mh / (std::sqrt(vh) + hp.eps);
    }
    st.gprev = g;
}

inline void ref_radam_core(RefState& st, const Vec& m_in, const Vec& v_in,
                           const RefHp& hp) {
    const double b1t = ref_beta1_at(hp, st.t);
    const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(st.t));
    const double b2pow = std::pow(hp.beta2, static_cast<double>(st.t));
    for (std::size_t i = 0; i < m_in.size(); ++i) {
        st.m[i] = b1t * st.m[i] + (1.0 - b1t) * m_in[i];
        st.v[i] = hp.beta2 * st.v[i] + (1.0 - hp.beta2) * v_in[i] * v_in[i];
    }
    const double rho_inf = 2.0 / (1.0 - hp.beta2) - 1.0;
    const double rho_t =
        rho_inf - 2.0 * static_cast<double>(st.t) * b2pow / (1.0 - b2pow);
    if (rho_t >= 5.0) {
        const double ru = (rho_t - 4.0) * (rho_t - 2.0) * rho_inf;
        const double rd = (rho_inf - 4.0) * (rho_inf - 2.0) * rho_t;
        const double rho = std::sqrt((1.0 - hp.beta2) * ru / rd);
        const double a1 = rho * hp.alpha / bc1;
        for (std::size_t i = 0; i < m_in.size(); ++i)
            st.theta[i] -= a1 * st.m[i] / (std::sqrt(st.v[i]) + hp.eps);
    } else {
        const double a2 = hp.alpha / bc1;
        for (std::size_t i = 0; i < m_in.size(); ++i) st.theta[i] -= a2 * st.m[i];
    }
}

inline void ref_radam(RefState& st, const Vec& g, const RefHp& hp) {
    st.t += 1;
    ref_radam_core(st, g, g, hp);
}

inline void ref_radamnorm(RefState& st, const Vec& g, const RefHp& hp) {
    st.t += 1;
    Vec s;
    ref_correct(st, g, hp, s);
    const Vec& m_in = hp.norm_target == 1 ? g : s;
    const Vec& v_in = hp.norm_target == 0 ? g : s;
    ref_radam_core(st, m_in, v_in, hp);
}

inline void ref_adabelief_core(RefState& st, const Vec& m_in, const Vec& v_in,
                               const RefHp& hp) {
    const double b1t = ref_beta1_at(hp, st.t);
    const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(st.t));
    for (std::size_t i = 0; i < m_in.size(); ++i) {
        st.m[i] = b1t * st.m[i] + (1.0 - b1t) * m_in[i];
        const double res = v_in[i] - st.m[i];
        st.v[i] = hp.beta2 * st.v[i] + (1.0 - hp.beta2) * res * res;
        const double mh = st.m[i] / bc1;
        const double vh = st.v[i] / bc2;
        st.theta[i] -= hp.alpha * mh / (std::sqrt(vh) + hp.eps);
    }
}

inline void ref_adabelief(RefState& st, const Vec& g, const RefHp& hp) {
    st.t += 1;
    ref_adabelief_core(st, g, g, hp);
}

inline void ref_adabeliefnorm(RefState& st, const Vec& g, const RefHp& hp) {
    st.t += 1;
    Vec s;
    ref_correct(st, g, hp, s);
    const Vec& m_in = hp.norm_target == 1 ? g : s;
    const Vec& v_in = hp.norm_target == 0 ? g : s;
    ref_adabelief_core(st, m_in, v_in, hp);
}

}  // namespace refimpl
