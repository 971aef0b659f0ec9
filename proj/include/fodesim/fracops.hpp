#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace fodesim {

// Grünwald–Letnikov weights c_j = (-1)^j * binomial(order, j), j = 0..n.
struct GLCoefficients {
    double order = 0.0;
    std::vector<double> weights;
};

// Uniformly sampled signal, values[k] taken at t_k = k * step.
struct SampledSignal {
    double step = 1.0;
    std::vector<double> values;

    SampledSignal() = default;
    SampledSignal(double step_, std::vector<double> values_);

    std::size_t size() const noexcept { return values.size(); }
};

/// Weights c_0..c_n of the order-q GL operator, via the recurrence
/// c_j = c_{j-1} * (1 - (1 + q) / j). Throws InvalidParameter for non-finite q.
GLCoefficients gl_coefficients(double q, std::size_t n);

/// Left-to-right sum  sum_{j=0..min(k, memory)} weights[j] * values[k - j]  (no h^-q scaling).
/// `weights` must hold at least min(k, memory) + 1 entries.
double gl_history_sum(std::span<const double> weights, std::span<const double> values,
                      std::size_t k, std::optional<std::size_t> memory = std::nullopt);

/// D^q of the sampled signal at sample k with zero pre-history:
///   h^-q * sum_{j=0..min(k, memory)} c_j * values[k - j].
/// Positive q differentiates, negative q integrates. Without `memory` the whole
/// history back to t = 0 is used.
double gl_differintegral(const SampledSignal& signal, double q, std::size_t k,
                         std::optional<std::size_t> memory = std::nullopt);

/// D^q applied at every sample; returns a signal on the same grid.
SampledSignal gl_differintegral_all(const SampledSignal& signal, double q,
                                    std::optional<std::size_t> memory = std::nullopt);

/// Closed form D^q t^p = Gamma(p+1) / Gamma(p+1-q) * t^(p-q), used as a test oracle.
/// Returns 0 where 1/Gamma(p+1-q) vanishes (p+1-q a nonpositive integer).
double power_law_differintegral(double p, double q, double t);

}  // namespace fodesim
