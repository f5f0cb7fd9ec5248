#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "slidemil/autodiff.hpp"

namespace slidemil {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam update on each param's current gradient.
inline void adam_step(std::vector<Param*>& params, double lr, const AdamConfig& cfg = {}) {
    for (Param* p : params) {
        p->step += 1;
        const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p->step));
        const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p->step));
        for (std::size_t i = 0; i < p->value.values.size(); ++i) {
            const double g = p->grad.values[i];
            double& m = p->adam_m.values[i];
            double& v = p->adam_v.values[i];
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
            p->value.values[i] -= lr * (m / c1) / (std::sqrt(v / c2) + cfg.eps);
        }
    }
}

// lr at step t of T: lr_min + 0.5 (lr0 - lr_min)(1 + cos(pi t / T)).
inline double cosine_anneal(double lr0, double lr_min, std::size_t t, std::size_t T) {
    if (T < 1) throw ConfigError("cosine_anneal: T must be >= 1");
    if (t > T) throw ConfigError("cosine_anneal: t exceeds T");
    if (t == 0) return lr0;
    if (t == T) return lr_min;
    const double c = std::cos(std::numbers::pi * static_cast<double>(t) / static_cast<double>(T));
    return lr_min + 0.5 * (lr0 - lr_min) * (1.0 + c);
}

// Central-difference check of d(loss)/d(param) for every coordinate.
// `forward` must be a pure function of the params' current values.
template <class ForwardFn>
double grad_check(ForwardFn&& forward, std::vector<Param*>& params, double probe = 1e-5) {
    for (Param* p : params) p->zero_grad();

    double max_rel = 0.0;
    // Analytic gradients first: one recorded forward + backward.
    {
        Tape tape;
        Var loss = forward(tape);
        if (!tape.value(loss).all_finite()) throw NumericError("grad_check: non-finite loss");
        tape.backward(loss);
    }
    for (Param* p : params) {
        for (std::size_t i = 0; i < p->value.values.size(); ++i) {
            const double saved = p->value.values[i];
            p->value.values[i] = saved + probe;
            Tape tp;
            const double lp = tp.value(forward(tp)).at(0, 0);
            p->value.values[i] = saved - probe;
            Tape tm;
            const double lm = tm.value(forward(tm)).at(0, 0);
            p->value.values[i] = saved;
            if (!std::isfinite(lp) || !std::isfinite(lm))
                throw NumericError("grad_check: non-finite loss under perturbation");
            // A difference below the roundoff resolution of the loss carries
            // no signal (it happens for structurally inert coordinates, e.g.
            // a bias feeding a shift-invariant softmax); read it as zero.
            const double noise_floor =
                4.0 * std::numeric_limits<double>::epsilon() * (std::abs(lp) + std::abs(lm));
            const double numeric =
                std::abs(lp - lm) <= noise_floor ? 0.0 : (lp - lm) / (2.0 * probe);
            const double analytic = p->grad.values[i];
            const double denom = std::max(1e-8, std::abs(analytic) + std::abs(numeric));
            max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
        }
    }
    return max_rel;
}

}  // namespace slidemil
