#include "fodesim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "fodesim/errors.hpp"
#include "fodesim/parallel.hpp"

namespace fodesim {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::int64_t kMaxDenominator = 1000;
constexpr double kResidualAcceptance = 1e-8;
constexpr double kSectorTolerance = 1e-9;

bool root_order(const cplx& a, const cplx& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
}

std::vector<cplx> companion_eigenvalues(const std::vector<double>& a) {
    const auto n = static_cast<Eigen::Index>(a.size() - 1);
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) companion(i, n - 1) = -a[static_cast<std::size_t>(i)] / a.back();
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success) {
        throw RootFindingFailure("companion-matrix eigenvalue iteration failed", 0,
                                 std::numeric_limits<double>::infinity());
    }
    std::vector<cplx> out(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
    return out;
}

// p(v) and p'(v) by Horner.
std::pair<cplx, cplx> horner_with_derivative(const std::vector<double>& a, cplx v) {
    cplx p = a.back();
    cplx dp = 0.0;
    for (std::size_t i = a.size() - 1; i-- > 0;) {
        dp = dp * v + p;
        p = p * v + a[i];
    }
    return {p, dp};
}

double residual_of(const std::vector<double>& a, cplx v) {
    cplx p = 0.0;
    double scale = 0.0;
    const double r = std::abs(v);
    for (std::size_t i = a.size(); i-- > 0;) {
        p = p * v + a[i];
        scale = scale * r + std::abs(a[i]);
    }
    if (scale == 0.0) return 0.0;
    return std::abs(p) / scale;
}

}  // namespace

std::string_view to_string(StabilityVerdict v) noexcept {
    switch (v) {
        case StabilityVerdict::stable: return "stable";
        case StabilityVerdict::unstable: return "unstable";
        case StabilityVerdict::marginal: return "marginal";
    }
    return "?";
}

std::string_view to_string(TransferKind k) noexcept {
    switch (k) {
        case TransferKind::plant: return "plant";
        case TransferKind::controller: return "controller";
        case TransferKind::open_loop: return "open_loop";
        case TransferKind::closed_loop: return "closed_loop";
    }
    return "?";
}

cplx CommensuratePolynomial::evaluate(cplx v) const {
    cplx p = 0.0;
    for (std::size_t i = coefficients.size(); i-- > 0;) p = p * v + coefficients[i];
    return p;
}

double CommensuratePolynomial::relative_residual(cplx v) const { return residual_of(coefficients, v); }

double commensurate_base(std::span<const double> orders, double tol) {
    std::vector<std::int64_t> numerators;
    std::vector<std::int64_t> denominators;
    for (double x : orders) {
        if (!std::isfinite(x) || x < 0.0) {
            throw InvalidParameter("orders must be finite and nonnegative");
        }
        if (x == 0.0) continue;
        std::int64_t found = 0;
        for (std::int64_t d = 1; d <= kMaxDenominator; ++d) {
            const double scaled = x * static_cast<double>(d);
            if (std::abs(x - std::round(scaled) / static_cast<double>(d)) <= tol) {
                found = d;
                break;
            }
        }
        if (found == 0) {
            std::ostringstream msg;
            msg << "order " << x << " has no rational form with denominator <= " << kMaxDenominator;
            throw Incommensurate(msg.str());
        }
        numerators.push_back(static_cast<std::int64_t>(std::llround(x * static_cast<double>(found))));
        denominators.push_back(found);
    }
    if (numerators.empty()) {
        throw InvalidParameter("at least one order must be positive");
    }
    std::int64_t common = 1;
    for (auto d : denominators) {
        common = std::lcm(common, d);
        if (common > kMaxDenominator) {
            throw Incommensurate("orders need a common denominator above 1000");
        }
    }
    std::int64_t g = 0;
    for (std::size_t i = 0; i < numerators.size(); ++i) {
        g = std::gcd(g, numerators[i] * (common / denominators[i]));
    }
    return static_cast<double>(g) / static_cast<double>(common);
}

CommensuratePolynomial characteristic_polynomial(const ClosedLoopModel& model) {
    model.validate();
    const auto terms = characteristic_terms(model);
    if (terms.terms.empty()) {
        throw InvalidParameter("characteristic expression is identically zero");
    }
    std::vector<double> orders;
    for (const auto& t : terms.terms) orders.push_back(t.order);
    if (std::all_of(orders.begin(), orders.end(), [](double q) { return q == 0.0; })) {
        throw InvalidParameter("characteristic expression has no positive order");
    }
    const double base = commensurate_base(orders);

    CommensuratePolynomial poly;
    poly.base_order = base;
    const auto degree = static_cast<std::size_t>(std::llround(terms.terms.front().order / base));
    poly.coefficients.assign(degree + 1, 0.0);
    for (const auto& t : terms.terms) {
        const auto power = static_cast<std::size_t>(std::llround(t.order / base));
        poly.coefficients[power] += t.coefficient;
    }
    return poly;
}

std::vector<cplx> polynomial_roots(const CommensuratePolynomial& poly) {
    if (poly.coefficients.size() < 2) {
        throw InvalidParameter("root finding needs degree >= 1");
    }
    if (poly.coefficients.back() == 0.0) {
        throw InvalidParameter("leading coefficient must be nonzero");
    }
    for (double c : poly.coefficients) {
        if (!std::isfinite(c)) throw InvalidParameter("polynomial coefficients must be finite");
    }

    // Exact zero roots from vanishing low-order coefficients.
    std::size_t zeros = 0;
    while (poly.coefficients[zeros] == 0.0) ++zeros;
    std::vector<double> a(poly.coefficients.begin() + static_cast<std::ptrdiff_t>(zeros),
                          poly.coefficients.end());

    std::vector<cplx> roots(zeros, cplx{0.0, 0.0});
    if (a.size() >= 2) {
        auto z = companion_eigenvalues(a);
        const std::size_t n = z.size();

        // Separate coincident seeds so the Aberth correction stays finite.
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                if (z[i] == z[j]) z[i] += cplx{1e-8, 1e-8} * std::max(1.0, std::abs(z[i]));
            }
        }

        constexpr int kMaxIterations = 500;
        std::vector<bool> done(n, false);
        int iteration = 0;
        for (; iteration < kMaxIterations; ++iteration) {
            bool all_done = true;
            for (std::size_t i = 0; i < n; ++i) {
                if (done[i]) continue;
                const auto [p, dp] = horner_with_derivative(a, z[i]);
                if (p == cplx{0.0, 0.0}) {
                    done[i] = true;
                    continue;
                }
                const cplx ratio = p / dp;
                cplx repulsion = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (j != i) repulsion += 1.0 / (z[i] - z[j]);
                }
                const cplx step = ratio / (1.0 - ratio * repulsion);
                if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) {
                    done[i] = residual_of(a, z[i]) < kResidualAcceptance;
                    all_done = all_done && done[i];
                    continue;
                }
                z[i] -= step;
                if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(z[i])) {
                    done[i] = true;
                } else {
                    all_done = false;
                }
            }
            if (all_done) break;
        }

        double worst = 0.0;
        for (const auto& r : z) worst = std::max(worst, residual_of(a, r));
        if (!(worst < kResidualAcceptance)) {
            throw RootFindingFailure("polynomial roots did not reach the residual threshold", iteration,
                                     worst);
        }
        roots.insert(roots.end(), z.begin(), z.end());
    }
    std::sort(roots.begin(), roots.end(), root_order);
    return roots;
}

std::vector<cplx> principal_poles(std::span<const cplx> v_roots, double base_order) {
    if (!(base_order > 0.0)) {
        throw InvalidParameter("base order must be positive");
    }
    std::vector<cplx> out;
    for (const auto& v : v_roots) {
        if (v == cplx{0.0, 0.0}) continue;
        // For base_order >= 1 the sector covers the whole v-plane, including the
        // negative real axis (e.g. v = -1 is the pole s = -1 when base_order = 1).
        if (base_order >= 1.0 || std::abs(std::arg(v)) < kPi * base_order) {
            out.push_back(principal_power(v, 1.0 / base_order));
        }
    }
    std::sort(out.begin(), out.end(), root_order);
    return out;
}

double sector_margin(std::span<const cplx> v_roots, double base_order) {
    double smallest = kPi;
    for (const auto& v : v_roots) smallest = std::min(smallest, std::abs(std::arg(v)));
    return smallest - base_order * kPi / 2.0;
}

StabilityReport stability_report(const ClosedLoopModel& model) {
    const auto poly = characteristic_polynomial(model);
    StabilityReport rep;
    rep.base_order = poly.base_order;
    rep.v_roots = polynomial_roots(poly);
    rep.principal_poles = principal_poles(rep.v_roots, poly.base_order);
    rep.sector_margin = sector_margin(rep.v_roots, poly.base_order);
    if (rep.sector_margin > kSectorTolerance) {
        rep.verdict = StabilityVerdict::stable;
    } else if (rep.sector_margin < -kSectorTolerance) {
        rep.verdict = StabilityVerdict::unstable;
    } else {
        rep.verdict = StabilityVerdict::marginal;
    }

    std::ostringstream notes;
    notes.precision(12);
    if (!rep.principal_poles.empty()) {
        // Dominant pole: largest real part; near-ties go to the larger |Im|,
        // then to the upper half plane.
        const double top = rep.principal_poles.front().real();
        const double tie = 1e-9 * std::max(1.0, std::abs(top));
        cplx best = rep.principal_poles.front();
        for (const auto& s : rep.principal_poles) {
            if (top - s.real() > tie) break;
            if (std::abs(s.imag()) > std::abs(best.imag()) ||
                (std::abs(s.imag()) == std::abs(best.imag()) && s.imag() > best.imag())) {
                best = s;
            }
        }
        rep.has_dominant_pole = true;
        rep.dominant_pole = best;
        rep.dominant_real_part = best.real();
        rep.stability_measure = -best.real();
        const double re = std::abs(best.real());
        const double im = std::abs(best.imag());
        rep.damping_re_over_im = im > 0.0 ? re / im : std::numeric_limits<double>::infinity();
        rep.damping_im_over_re = re > 0.0 ? im / re : std::numeric_limits<double>::infinity();
        rep.damping_measure = rep.damping_re_over_im;
        notes << "dominant pole " << best.real() << (best.imag() < 0 ? " - " : " + ") << im
              << "i; S_t given two ways: stability_measure = -Re = " << rep.stability_measure
              << " (positive when stable) and the raw dominant real part " << best.real()
              << " (negative when stable); T_l given as damping_measure = |Re|/|Im| = " << rep.damping_re_over_im
              << ", reciprocal |Im|/|Re| = " << rep.damping_im_over_re
              << "; verdict from the sector test on all v-roots";
    } else {
        rep.stability_measure = std::numeric_limits<double>::quiet_NaN();
        rep.damping_measure = std::numeric_limits<double>::quiet_NaN();
        rep.damping_re_over_im = std::numeric_limits<double>::quiet_NaN();
        rep.damping_im_over_re = std::numeric_limits<double>::quiet_NaN();
        rep.dominant_real_part = std::numeric_limits<double>::quiet_NaN();
        notes << "no principal-sheet poles: the response is dominated by the non-oscillatory "
                 "branch-cut part; verdict from the sector test on all v-roots";
    }
    rep.convention_notes = notes.str();
    return rep;
}

std::vector<FrequencyPoint> frequency_response(const ClosedLoopModel& model, double omega_min,
                                               double omega_max, std::size_t points,
                                               TransferKind which) {
    model.validate();
    if (!(omega_min > 0.0) || !(omega_max > omega_min) || !std::isfinite(omega_max)) {
        throw InvalidParameter("frequency range must satisfy 0 < omega_min < omega_max");
    }
    if (points < 2) {
        throw InvalidParameter("frequency grid needs at least 2 points");
    }
    const double lo = std::log10(omega_min);
    const double span = std::log10(omega_max) - lo;
    std::vector<FrequencyPoint> out(points);
    std::vector<cplx> values(points);

    parallel_for(points, [&](std::size_t k) {
        double omega = std::pow(10.0, lo + span * static_cast<double>(k) / static_cast<double>(points - 1));
        if (k == 0) omega = omega_min;
        if (k == points - 1) omega = omega_max;
        out[k].omega = omega;
        const cplx s{0.0, omega};
        try {
            switch (which) {
                case TransferKind::plant: values[k] = plant_transfer(model.plant, s); break;
                case TransferKind::controller: values[k] = controller_transfer(model.controller, s); break;
                case TransferKind::open_loop: values[k] = open_loop_transfer(model, s); break;
                case TransferKind::closed_loop: values[k] = closed_loop_transfer(model, s); break;
            }
        } catch (const PoleError&) {
            out[k].at_pole = true;
        }
    });

    bool have_previous = false;
    double previous = 0.0;
    for (std::size_t k = 0; k < points; ++k) {
        auto& pt = out[k];
        if (pt.at_pole) {
            pt.magnitude_db = std::numeric_limits<double>::infinity();
            pt.phase_deg = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        if (values[k] == cplx{0.0, 0.0}) {
            pt.magnitude_db = -std::numeric_limits<double>::infinity();
            pt.phase_deg = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        pt.magnitude_db = 20.0 * std::log10(std::abs(values[k]));
        double phase = std::arg(values[k]) * 180.0 / kPi;
        if (have_previous) {
            while (phase - previous > 180.0) phase -= 360.0;
            while (phase - previous < -180.0) phase += 360.0;
        }
        pt.phase_deg = phase;
        previous = phase;
        have_previous = true;
    }
    return out;
}

}  // namespace fodesim
