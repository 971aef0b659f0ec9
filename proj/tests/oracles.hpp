#pragma once

// Test-only reference solutions, independent of the GL machinery.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace fodesim::oracle {

// Integer-order closed loop a2 y'' + a1 y' + Td y' + (a0 + K) y = K w + Td w'
// for a step w of height `level`, written through the internal state
// a2 z'' + (a1 + Td) z' + (a0 + K) z = w, y = K z + Td z'. Classical RK4 with
// `substeps` steps per output sample of spacing h; returns y at k h, k = 0..n.
inline std::vector<double> integer_pd_step_response(double a2, double a1, double a0, double K, double Td,
                                                    double level, double h, std::size_t n,
                                                    int substeps = 10) {
    const double dt = h / substeps;
    auto rhs = [&](const std::array<double, 2>& x) {
        return std::array<double, 2>{x[1], (level - (a1 + Td) * x[1] - (a0 + K) * x[0]) / a2};
    };
    std::array<double, 2> x{0.0, 0.0};
    std::vector<double> y(n + 1);
    // For t > 0 the step has been applied; y(0+) = K z(0) + Td z'(0) = 0.
    y[0] = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        for (int s = 0; s < substeps; ++s) {
            const auto k1 = rhs(x);
            const auto k2 = rhs({x[0] + 0.5 * dt * k1[0], x[1] + 0.5 * dt * k1[1]});
            const auto k3 = rhs({x[0] + 0.5 * dt * k2[0], x[1] + 0.5 * dt * k2[1]});
            const auto k4 = rhs({x[0] + dt * k3[0], x[1] + dt * k3[1]});
            x[0] += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
            x[1] += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
        }
        y[k] = K * x[0] + Td * x[1];
    }
    return y;
}

}  // namespace fodesim::oracle
