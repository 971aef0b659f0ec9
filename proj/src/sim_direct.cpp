#include "fodesim/sim_direct.hpp"

#include <algorithm>
#include <cmath>

#include "fodesim/errors.hpp"

namespace fodesim {

std::size_t step_count(double h, double t_end) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw InvalidParameter("step size h must be positive and finite");
    }
    if (!std::isfinite(t_end) || t_end < h) {
        throw InvalidParameter("t_end must be finite and at least one step");
    }
    // Absorb representation error so that e.g. 15 / 1e-3 yields 15000.
    return static_cast<std::size_t>(std::floor(t_end / h * (1.0 + 1e-12)));
}

TimeSeries simulate_direct(const ClosedLoopModel& model, double h, double t_end,
                           const SimOptions& options) {
    model.validate();
    if (options.memory && *options.memory < 1) {
        throw InvalidParameter("GL memory length must be at least 1");
    }
    const std::size_t n = step_count(h, t_end);
    const auto& p = model.plant;
    const auto& c = model.controller;

    const auto ca = gl_coefficients(p.alpha, n).weights;
    const auto cb = gl_coefficients(p.beta, n).weights;
    const auto cd = gl_coefficients(c.delta, n).weights;
    const double ga = p.a2 * std::pow(h, -p.alpha);
    const double gb = p.a1 * std::pow(h, -p.beta);
    const double gd = c.Td * std::pow(h, -c.delta);
    const double den = ga + gb + gd + p.a0 + c.K;
    if (!std::isfinite(den) || den <= 0.0) {
        throw IllPosedDiscretization(
            "GL update denominator is not positive; reduce h or check coefficient signs");
    }

    TimeSeries out;
    out.step = h;
    out.w = model.input.sample(h, n + 1);
    out.y.assign(n + 1, 0.0);
    const auto& w = out.w;
    auto& y = out.y;

    std::size_t produced = n + 1;
    for (std::size_t k = 0; k <= n; ++k) {
        const std::size_t last = options.memory ? std::min(k, *options.memory) : k;
        double sa = 0.0;
        double sb = 0.0;
        double sd = 0.0;
        double sw = cd[0] * w[k];
        for (std::size_t j = 1; j <= last; ++j) {
            const double yj = y[k - j];
            sa += ca[j] * yj;
            sb += cb[j] * yj;
            sd += cd[j] * yj;
            sw += cd[j] * w[k - j];
        }
        const double rhs = c.K * w[k] + gd * sw - ga * sa - gb * sb - gd * sd;
        const double yk = rhs / den;
        if (!std::isfinite(yk)) {
            out.diverged = true;
            produced = k;
            break;
        }
        y[k] = yk;
        if (std::abs(yk) > options.divergence_bound) {
            out.diverged = true;
            produced = k + 1;
            break;
        }
    }

    out.y.resize(produced);
    out.w.resize(produced);
    out.t.resize(produced);
    for (std::size_t k = 0; k < produced; ++k) {
        out.t[k] = static_cast<double>(k) * h;
    }
    return out;
}

double steady_state_prediction(const ClosedLoopModel& model, double w_const) {
    const double gain = model.plant.a0 + model.controller.K;
    if (gain == 0.0) {
        throw NoEquilibrium("a0 + K == 0: the loop has no static equilibrium");
    }
    return model.controller.K * w_const / gain;
}

}  // namespace fodesim
