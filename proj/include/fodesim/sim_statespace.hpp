#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fodesim/fracops.hpp"
#include "fodesim/model.hpp"
#include "fodesim/sim_direct.hpp"

namespace fodesim {

// verbatim: the two-state model with x1 as the source of every history term
// and a negative input term. derived_consistent: re-derived from the internal
// state z with a2 z^(alpha) + a1 z^(beta) + Td z^(delta) + (a0+K) z = w,
// x1 = z, x2 = z'.
enum class RealizationVariant { verbatim, derived_consistent };

enum class TermSource { x1, x2, w };

std::string_view to_string(RealizationVariant v) noexcept;
std::string_view to_string(TermSource s) noexcept;

// coefficient * D^order{source}
struct RealizationTerm {
    double coefficient = 0.0;
    double order = 0.0;
    TermSource source = TermSource::x1;
};

struct StateSpaceRealization {
    RealizationVariant variant = RealizationVariant::derived_consistent;
    int state_count = 2;
    // rhs_terms[i] is the right-hand side of x_{i+1}'. rhs_terms[0] is always x2.
    std::array<std::vector<RealizationTerm>, 2> rhs_terms;
    std::vector<RealizationTerm> output_terms;
    // Highest derivative order of the equivalent closed-loop equation.
    double system_order = 0.0;
};

struct StateTrajectory {
    double step = 0.0;
    std::vector<double> t;
    std::vector<double> x1;
    std::vector<double> x2;
    std::vector<double> y;
    std::vector<double> w;
    bool diverged = false;

    std::size_t size() const noexcept { return t.size(); }
};

// x^(order) = A x + B u,  y = C x.
struct CommensurateStateSpace {
    double order = 1.0;
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;

    /// Throws InvalidParameter on inconsistent dimensions or a non-finite order.
    void validate() const;
    /// Non-fatal remarks, e.g. an order outside (0, 1].
    std::vector<std::string> warnings() const;
};

struct CommensurateTrajectory {
    double step = 0.0;
    std::vector<double> t;
    // states[i][k] is state i at sample k.
    std::vector<std::vector<double>> states;
    std::vector<double> y;
    std::vector<double> u;
    bool diverged = false;
};

struct EquilibriumPoint {
    double x1_star = 0.0;
    double x2_star = 0.0;
    double y_star = 0.0;
};

enum class TrajectoryClass { converging, diverging, undetermined };
std::string_view to_string(TrajectoryClass c) noexcept;

/// Two-state realization of the closed loop. Throws InvalidParameter when a2 == 0.
StateSpaceRealization build_realization(const ClosedLoopModel& model, RealizationVariant variant);

/// Explicit Euler on x1' and x2'. Every fractional term is a GL sum over the
/// history up to the current step k; the output is evaluated at every step.
StateTrajectory simulate_state_space(const StateSpaceRealization& realization,
                                     const ClosedLoopModel& model, double h, double t_end,
                                     const SimOptions& options = {});

/// GL stepping of the commensurate model from rest:
///   x_{k+1} = h^q (A x_k + B u_k) - sum_{j=1..k+1} c_j x_{k+1-j}.
/// The input must be sampled on the grid of step h.
CommensurateTrajectory simulate_commensurate(const CommensurateStateSpace& ss,
                                             const SampledSignal& input, double h,
                                             const SimOptions& options = {});

/// Rest point for a constant input: x1* = w/(a0+K), x2* = 0, y* = K x1*.
EquilibriumPoint equilibrium(const ClosedLoopModel& model, double w_const);

/// Compares the largest phase-plane distance from the equilibrium over the
/// final `settle_window` fraction of the run with the largest distance over an
/// equally long window ending halfway through. Ratio < 0.5 converges, > 2 diverges.
TrajectoryClass classify_trajectory(const StateTrajectory& traj, const EquilibriumPoint& eq,
                                    double settle_window = 0.25);

}  // namespace fodesim
