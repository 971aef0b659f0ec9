#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fodesim/model.hpp"

namespace fodesim {

struct SimOptions {
    // GL short-memory window in samples; nullopt keeps the full history.
    std::optional<std::size_t> memory;
    // Runs stop once |y| (or a state) exceeds this bound.
    double divergence_bound = 1e6;
};

struct TimeSeries {
    double step = 0.0;
    std::vector<double> t;
    std::vector<double> y;
    std::vector<double> w;
    // Set when the run stopped early at the divergence bound.
    bool diverged = false;

    std::size_t size() const noexcept { return t.size(); }
};

/// Number of steps N = floor(t_end / h) of a run; throws InvalidParameter
/// unless h > 0 and t_end >= h.
std::size_t step_count(double h, double t_end);

/// Closed-loop response from rest, every fractional term of
///   a2 y^(alpha) + a1 y^(beta) + Td y^(delta) + (a0 + K) y = K w + Td w^(delta)
/// replaced by its GL sum. The current sample is isolated from all three
/// output-side sums at once, so each step is explicit.
///
/// Throws IllPosedDiscretization when the update denominator is not positive.
TimeSeries simulate_direct(const ClosedLoopModel& model, double h, double t_end,
                           const SimOptions& options = {});

/// Static gain limit K w / (a0 + K). Throws NoEquilibrium when a0 + K == 0.
double steady_state_prediction(const ClosedLoopModel& model, double w_const);

}  // namespace fodesim
