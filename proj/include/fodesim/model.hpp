#pragma once

#include <complex>
#include <cstddef>
#include <string_view>
#include <variant>
#include <vector>

#include "fodesim/fracops.hpp"

namespace fodesim {

using cplx = std::complex<double>;

// Plant G_s(s) = 1 / (a2 s^alpha + a1 s^beta + a0).
struct PlantParams {
    double a0 = 1.0;
    double a1 = 0.0;
    double a2 = 1.0;
    double alpha = 2.0;
    double beta = 1.0;

    // Requires finite fields and alpha > beta >= 0. A zero a2 is accepted here
    // (static plants); consumers that divide by a2 reject it themselves.
    void validate() const;
};

// PD^delta controller G_r(s) = K + Td s^delta.
struct ControllerParams {
    double K = 0.0;
    double Td = 0.0;
    double delta = 1.0;

    void validate() const;
};

struct UnitStep {};

struct ScaledStep {
    double amplitude = 1.0;
};

// Setpoint w(t). Steps are zero for t < 0 and constant for t >= 0.
struct InputSignalSpec {
    std::variant<UnitStep, ScaledStep, SampledSignal> kind = UnitStep{};

    /// Samples w(t_k) for k = 0..n-1 on a grid of step h. Sampled inputs must
    /// share the grid step and hold at least n samples.
    std::vector<double> sample(double h, std::size_t n) const;

    /// Constant level of a step input; throws InvalidParameter for sampled input.
    double step_level() const;
};

// Signal roles in the unity-feedback loop.
enum class LoopSignal { setpoint, error, control, output };
std::string_view to_string(LoopSignal s) noexcept;

struct ClosedLoopModel {
    PlantParams plant;
    ControllerParams controller;
    InputSignalSpec input;

    // Plant and controller checks plus alpha >= max(beta, delta).
    void validate() const;
    // Highest derivative order of the closed-loop equation.
    double system_order() const noexcept { return plant.alpha; }
};

struct FractionalTerm {
    double coefficient = 0.0;
    double order = 0.0;

    friend bool operator==(const FractionalTerm&, const FractionalTerm&) = default;
};

// sum coefficient * s^order, orders strictly decreasing.
struct FractionalTermList {
    std::vector<FractionalTerm> terms;

    /// Sorts by decreasing order, merges equal orders and drops zero coefficients.
    static FractionalTermList normalized(std::vector<FractionalTerm> raw);

    cplx evaluate(cplx s) const;
};

/// Principal branch s^q = exp(q (ln|s| + i Arg s)), Arg in (-pi, pi].
/// 0^q is 0 for q > 0 and 1 for q = 0; negative q at s = 0 throws PoleError.
cplx principal_power(cplx s, double q);

cplx plant_transfer(const PlantParams& plant, cplx s);
cplx controller_transfer(const ControllerParams& ctrl, cplx s);
cplx open_loop_transfer(const ClosedLoopModel& model, cplx s);
/// G_r G_s / (1 + G_r G_s), evaluated as (K + Td s^delta) / characteristic(s).
cplx closed_loop_transfer(const ClosedLoopModel& model, cplx s);

/// Left-hand operator of the closed-loop equation:
/// a2 s^alpha + Td s^delta + a1 s^beta + (a0 + K).
FractionalTermList characteristic_terms(const ClosedLoopModel& model);

}  // namespace fodesim
