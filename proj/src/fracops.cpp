#include "fodesim/fracops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fodesim/errors.hpp"

namespace fodesim {

SampledSignal::SampledSignal(double step_, std::vector<double> values_)
    : step(step_), values(std::move(values_)) {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw InvalidParameter("sampled signal step must be positive and finite");
    }
    if (values.empty()) {
        throw InvalidParameter("sampled signal must hold at least one sample");
    }
}

GLCoefficients gl_coefficients(double q, std::size_t n) {
    if (!std::isfinite(q)) {
        throw InvalidParameter("GL order must be finite");
    }
    GLCoefficients out;
    out.order = q;
    out.weights.resize(n + 1);
    out.weights[0] = 1.0;
    const double qp1 = 1.0 + q;
    for (std::size_t j = 1; j <= n; ++j) {
        out.weights[j] = out.weights[j - 1] * (1.0 - qp1 / static_cast<double>(j));
    }
    return out;
}

double gl_history_sum(std::span<const double> weights, std::span<const double> values,
                      std::size_t k, std::optional<std::size_t> memory) {
    const std::size_t last = memory ? std::min(k, *memory) : k;
    double acc = 0.0;
    for (std::size_t j = 0; j <= last; ++j) {
        acc += weights[j] * values[k - j];
    }
    return acc;
}

double gl_differintegral(const SampledSignal& signal, double q, std::size_t k,
                         std::optional<std::size_t> memory) {
    if (k >= signal.values.size()) {
        throw IndexError("sample index " + std::to_string(k) + " out of range for signal of " +
                         std::to_string(signal.values.size()) + " samples");
    }
    if (memory && *memory < 1) {
        throw InvalidParameter("GL memory length must be at least 1");
    }
    const std::size_t last = memory ? std::min(k, *memory) : k;
    const auto c = gl_coefficients(q, last);
    return std::pow(signal.step, -q) * gl_history_sum(c.weights, signal.values, k, memory);
}

SampledSignal gl_differintegral_all(const SampledSignal& signal, double q,
                                    std::optional<std::size_t> memory) {
    if (memory && *memory < 1) {
        throw InvalidParameter("GL memory length must be at least 1");
    }
    const std::size_t n = signal.values.size();
    const auto c = gl_coefficients(q, n - 1);
    const double scale = std::pow(signal.step, -q);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = scale * gl_history_sum(c.weights, signal.values, k, memory);
    }
    return SampledSignal{signal.step, std::move(out)};
}

double power_law_differintegral(double p, double q, double t) {
    if (!std::isfinite(p) || !std::isfinite(q) || !std::isfinite(t)) {
        throw InvalidParameter("power-law arguments must be finite");
    }
    if (!(p > -1.0)) {
        throw InvalidParameter("power-law exponent must exceed -1");
    }
    if (!(t > 0.0)) {
        throw InvalidParameter("power-law evaluation time must be positive");
    }
    const double denom_arg = p + 1.0 - q;
    if (denom_arg <= 0.0 && denom_arg == std::floor(denom_arg)) {
        return 0.0;
    }
    return std::tgamma(p + 1.0) / std::tgamma(denom_arg) * std::pow(t, p - q);
}

}  // namespace fodesim
