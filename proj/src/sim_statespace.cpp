#include "fodesim/sim_statespace.hpp"

#include <algorithm>
#include <cmath>

#include "fodesim/errors.hpp"

namespace fodesim {

std::string_view to_string(RealizationVariant v) noexcept {
    switch (v) {
        case RealizationVariant::verbatim: return "verbatim";
        case RealizationVariant::derived_consistent: return "derived";
    }
    return "?";
}

std::string_view to_string(TermSource s) noexcept {
    switch (s) {
        case TermSource::x1: return "x1";
        case TermSource::x2: return "x2";
        case TermSource::w: return "w";
    }
    return "?";
}

std::string_view to_string(TrajectoryClass c) noexcept {
    switch (c) {
        case TrajectoryClass::converging: return "converging";
        case TrajectoryClass::diverging: return "diverging";
        case TrajectoryClass::undetermined: return "undetermined";
    }
    return "?";
}

StateSpaceRealization build_realization(const ClosedLoopModel& model, RealizationVariant variant) {
    model.validate();
    const auto& p = model.plant;
    const auto& c = model.controller;
    if (p.a2 == 0.0) {
        throw InvalidParameter("state-space realization needs a2 != 0");
    }

    const bool derived = variant == RealizationVariant::derived_consistent;
    const TermSource history = derived ? TermSource::x2 : TermSource::x1;
    const double input_sign = derived ? 1.0 : -1.0;

    StateSpaceRealization r;
    r.variant = variant;
    r.system_order = model.system_order();
    r.rhs_terms[0] = {{1.0, 0.0, TermSource::x2}};
    r.rhs_terms[1] = {
        {-(p.a0 + c.K) / p.a2, 2.0 - p.alpha, TermSource::x1},
        {-c.Td / p.a2, 1.0 + c.delta - p.alpha, history},
        {-p.a1 / p.a2, 1.0 + p.beta - p.alpha, history},
        {input_sign / p.a2, 2.0 - p.alpha, TermSource::w},
    };
    r.output_terms = {
        {c.K, 0.0, TermSource::x1},
        {c.Td, c.delta - 1.0, TermSource::x2},
    };
    return r;
}

namespace {

// One GL term prepared for stepping: scaled weights and a view of its source.
struct PreparedTerm {
    double coefficient = 0.0;
    double scale = 1.0;  // h^-order
    std::vector<double> weights;
    // Weights past this index are exactly zero (nonnegative integer orders).
    std::size_t support = 0;
    const std::vector<double>* source = nullptr;
};

bool is_nonnegative_integer(double q) { return q >= 0.0 && q == std::floor(q); }

std::vector<PreparedTerm> prepare(const std::vector<RealizationTerm>& terms, double h, std::size_t n,
                                  const std::vector<double>& x1, const std::vector<double>& x2,
                                  const std::vector<double>& w) {
    std::vector<PreparedTerm> out;
    out.reserve(terms.size());
    for (const auto& t : terms) {
        PreparedTerm p;
        p.coefficient = t.coefficient;
        p.scale = std::pow(h, -t.order);
        p.support = is_nonnegative_integer(t.order) ? std::min(n, static_cast<std::size_t>(t.order)) : n;
        p.weights = gl_coefficients(t.order, p.support).weights;
        switch (t.source) {
            case TermSource::x1: p.source = &x1; break;
            case TermSource::x2: p.source = &x2; break;
            case TermSource::w: p.source = &w; break;
        }
        out.push_back(std::move(p));
    }
    return out;
}

// sum over terms of coefficient * h^-q * GL history sum at sample k. The
// per-term sums run left to right in j; terms are interleaved for throughput.
double evaluate(const std::vector<PreparedTerm>& terms, std::size_t k,
                const std::optional<std::size_t>& memory) {
    constexpr std::size_t kMaxTerms = 8;
    std::array<double, kMaxTerms> acc{};
    std::array<const double*, kMaxTerms> wts{};
    std::array<const double*, kMaxTerms> src{};
    std::array<std::size_t, kMaxTerms> last{};
    const std::size_t m = std::min(terms.size(), kMaxTerms);
    std::size_t longest = 0;
    for (std::size_t i = 0; i < m; ++i) {
        wts[i] = terms[i].weights.data();
        src[i] = terms[i].source->data();
        std::size_t l = std::min(k, terms[i].support);
        if (memory) l = std::min(l, *memory);
        last[i] = l;
        longest = std::max(longest, l);
    }
    const bool uniform = std::all_of(last.begin(), last.begin() + static_cast<std::ptrdiff_t>(m),
                                     [&](std::size_t l) { return l == longest; });
    if (uniform) {
        for (std::size_t j = 0; j <= longest; ++j) {
            for (std::size_t i = 0; i < m; ++i) {
                acc[i] += wts[i][j] * src[i][k - j];
            }
        }
    } else {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j <= last[i]; ++j) {
                acc[i] += wts[i][j] * src[i][k - j];
            }
        }
    }
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        total += terms[i].coefficient * terms[i].scale * acc[i];
    }
    // Realizations never exceed kMaxTerms terms per equation; this path is for
    // hand-built term lists.
    for (std::size_t i = m; i < terms.size(); ++i) {
        const auto& t = terms[i];
        std::size_t l = std::min(k, t.support);
        if (memory) l = std::min(l, *memory);
        double a = 0.0;
        for (std::size_t j = 0; j <= l; ++j) a += t.weights[j] * (*t.source)[k - j];
        total += t.coefficient * t.scale * a;
    }
    return total;
}

bool out_of_bounds(double v, double bound) { return !std::isfinite(v) || std::abs(v) > bound; }

}  // namespace

StateTrajectory simulate_state_space(const StateSpaceRealization& realization,
                                     const ClosedLoopModel& model, double h, double t_end,
                                     const SimOptions& options) {
    model.validate();
    if (options.memory && *options.memory < 1) {
        throw InvalidParameter("GL memory length must be at least 1");
    }
    const std::size_t n = step_count(h, t_end);

    StateTrajectory out;
    out.step = h;
    out.w = model.input.sample(h, n + 1);
    out.x1.assign(n + 1, 0.0);
    out.x2.assign(n + 1, 0.0);
    out.y.assign(n + 1, 0.0);

    const auto rhs1 = prepare(realization.rhs_terms[0], h, n, out.x1, out.x2, out.w);
    const auto rhs2 = prepare(realization.rhs_terms[1], h, n, out.x1, out.x2, out.w);
    const auto output = prepare(realization.output_terms, h, n, out.x1, out.x2, out.w);

    std::size_t produced = n + 1;
    for (std::size_t k = 0; k <= n; ++k) {
        const double yk = evaluate(output, k, options.memory);
        out.y[k] = yk;
        if (out_of_bounds(yk, options.divergence_bound)) {
            out.diverged = true;
            produced = std::isfinite(yk) ? k + 1 : k;
            break;
        }
        if (k == n) break;
        const double d1 = evaluate(rhs1, k, options.memory);
        const double d2 = evaluate(rhs2, k, options.memory);
        const double next1 = out.x1[k] + h * d1;
        const double next2 = out.x2[k] + h * d2;
        if (out_of_bounds(next1, options.divergence_bound) ||
            out_of_bounds(next2, options.divergence_bound)) {
            out.diverged = true;
            produced = k + 1;
            break;
        }
        out.x1[k + 1] = next1;
        out.x2[k + 1] = next2;
    }

    for (auto* v : {&out.x1, &out.x2, &out.y, &out.w}) v->resize(produced);
    out.t.resize(produced);
    for (std::size_t k = 0; k < produced; ++k) out.t[k] = static_cast<double>(k) * h;
    return out;
}

void CommensurateStateSpace::validate() const {
    if (!std::isfinite(order)) {
        throw InvalidParameter("commensurate order must be finite");
    }
    const auto n = A.rows();
    if (n == 0 || A.cols() != n || B.size() != n || C.size() != n) {
        throw InvalidParameter("state-space dimensions are inconsistent: A must be n x n, B n x 1, C 1 x n");
    }
}

std::vector<std::string> CommensurateStateSpace::warnings() const {
    std::vector<std::string> out;
    if (!(order > 0.0 && order <= 1.0)) {
        out.emplace_back("commensurate order outside (0, 1]");
    }
    return out;
}

CommensurateTrajectory simulate_commensurate(const CommensurateStateSpace& ss,
                                             const SampledSignal& input, double h,
                                             const SimOptions& options) {
    ss.validate();
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw InvalidParameter("step size h must be positive and finite");
    }
    if (std::abs(input.step - h) > 1e-12 * h) {
        throw InvalidParameter("input signal step does not match h");
    }
    if (input.values.empty()) {
        throw InvalidParameter("input signal is empty");
    }
    if (options.memory && *options.memory < 1) {
        throw InvalidParameter("GL memory length must be at least 1");
    }
    const auto dim = static_cast<std::size_t>(ss.A.rows());
    const std::size_t n = input.values.size() - 1;
    const auto c = gl_coefficients(ss.order, n + 1).weights;
    const double hq = std::pow(h, ss.order);

    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(n + 1));
    std::size_t produced = n + 1;
    bool diverged = false;
    for (std::size_t k = 0; k < n; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        Eigen::VectorXd next = hq * (ss.A * x.col(kk) + ss.B * input.values[k]);
        std::size_t last = k + 1;
        if (options.memory) last = std::min(last, *options.memory);
        Eigen::VectorXd hist = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
        for (std::size_t j = 1; j <= last; ++j) {
            hist += c[j] * x.col(static_cast<Eigen::Index>(k + 1 - j));
        }
        next -= hist;
        const bool bad = !next.allFinite() || next.cwiseAbs().maxCoeff() > options.divergence_bound;
        if (bad) {
            diverged = true;
            produced = k + 1;
            break;
        }
        x.col(kk + 1) = next;
    }

    CommensurateTrajectory out;
    out.step = h;
    out.diverged = diverged;
    out.t.resize(produced);
    out.y.resize(produced);
    out.u.assign(input.values.begin(), input.values.begin() + static_cast<std::ptrdiff_t>(produced));
    out.states.assign(dim, std::vector<double>(produced));
    for (std::size_t k = 0; k < produced; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        out.t[k] = static_cast<double>(k) * h;
        out.y[k] = ss.C.dot(x.col(kk));
        for (std::size_t i = 0; i < dim; ++i) out.states[i][k] = x(static_cast<Eigen::Index>(i), kk);
    }
    return out;
}

EquilibriumPoint equilibrium(const ClosedLoopModel& model, double w_const) {
    const double gain = model.plant.a0 + model.controller.K;
    if (gain == 0.0) {
        throw NoEquilibrium("a0 + K == 0: the loop has no static equilibrium");
    }
    EquilibriumPoint eq;
    eq.x1_star = w_const / gain;
    eq.x2_star = 0.0;
    // Same closed form as steady_state_prediction so the two agree exactly.
    eq.y_star = model.controller.K * w_const / gain;
    return eq;
}

TrajectoryClass classify_trajectory(const StateTrajectory& traj, const EquilibriumPoint& eq,
                                    double settle_window) {
    const std::size_t n = traj.size();
    if (n < 10 || traj.x1.size() != n || traj.x2.size() != n) {
        throw InvalidParameter("trajectory needs at least 10 consistent samples to classify");
    }
    if (!(settle_window > 0.0 && settle_window <= 0.5)) {
        throw InvalidParameter("settle window must lie in (0, 0.5]");
    }
    if (traj.diverged) return TrajectoryClass::diverging;

    const auto window = std::max<std::size_t>(1, static_cast<std::size_t>(settle_window * static_cast<double>(n)));
    const std::size_t half = n / 2;
    auto max_distance = [&](std::size_t begin, std::size_t end) {
        double m = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            m = std::max(m, std::hypot(traj.x1[k] - eq.x1_star, traj.x2[k] - eq.x2_star));
        }
        return m;
    };
    const double late = max_distance(n - window, n);
    const double mid = max_distance(half - std::min(window, half), half);

    constexpr double kAtRest = 1e-12;
    if (late < kAtRest && mid < kAtRest) return TrajectoryClass::converging;
    if (mid < kAtRest) return TrajectoryClass::diverging;
    const double ratio = late / mid;
    if (ratio < 0.5) return TrajectoryClass::converging;
    if (ratio > 2.0) return TrajectoryClass::diverging;
    return TrajectoryClass::undetermined;
}

}  // namespace fodesim
