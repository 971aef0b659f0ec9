#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fodesim/model.hpp"

namespace fodesim {

// Polynomial in v = s^base_order; coefficients[i] multiplies v^i.
struct CommensuratePolynomial {
    double base_order = 1.0;
    std::vector<double> coefficients;

    std::size_t degree() const noexcept { return coefficients.empty() ? 0 : coefficients.size() - 1; }
    cplx evaluate(cplx v) const;
    /// |p(v)| / sum |a_i| |v|^i, the backward-error style residual.
    double relative_residual(cplx v) const;
};

enum class StabilityVerdict { stable, unstable, marginal };
std::string_view to_string(StabilityVerdict v) noexcept;

struct StabilityReport {
    double base_order = 1.0;
    std::vector<cplx> v_roots;          // descending real part, then imaginary part
    std::vector<cplx> principal_poles;  // s-plane, same ordering
    bool has_dominant_pole = false;
    cplx dominant_pole{0.0, 0.0};
    double dominant_real_part = 0.0;
    double stability_measure = 0.0;     // -Re(dominant pole); positive means stable
    double damping_measure = 0.0;       // |Re| / |Im| of the dominant pole
    double damping_re_over_im = 0.0;
    double damping_im_over_re = 0.0;
    double sector_margin = 0.0;         // min |arg v| - base_order * pi / 2
    StabilityVerdict verdict = StabilityVerdict::marginal;
    std::string convention_notes;
};

enum class TransferKind { plant, controller, open_loop, closed_loop };
std::string_view to_string(TransferKind k) noexcept;

struct FrequencyPoint {
    double omega = 0.0;
    double magnitude_db = 0.0;
    double phase_deg = 0.0;
    bool at_pole = false;
};

/// Largest q0 such that every order is an integer multiple of q0 within `tol`,
/// with q0 a rational of denominator at most 1000. Zero orders are ignored.
/// Throws Incommensurate when no such base exists.
double commensurate_base(std::span<const double> orders, double tol = 1e-9);

/// Characteristic expression of the closed loop written as a polynomial in s^q0.
CommensuratePolynomial characteristic_polynomial(const ClosedLoopModel& model);

/// All roots with multiplicity, sorted by descending real then imaginary part.
/// Companion-matrix eigenvalues seed an Aberth–Ehrlich refinement; every root
/// is accepted only with relative residual below 1e-8.
std::vector<cplx> polynomial_roots(const CommensuratePolynomial& poly);

/// v-roots on the principal sheet (|arg v| < pi * base_order) mapped to
/// s = v^(1/base_order).
std::vector<cplx> principal_poles(std::span<const cplx> v_roots, double base_order);

/// min |arg v| - base_order * pi / 2; positive means every root lies outside
/// the instability sector.
double sector_margin(std::span<const cplx> v_roots, double base_order);

StabilityReport stability_report(const ClosedLoopModel& model);

/// Bode data at s = i omega on a logarithmic grid; phase unwrapped in degrees.
std::vector<FrequencyPoint> frequency_response(const ClosedLoopModel& model, double omega_min,
                                               double omega_max, std::size_t points,
                                               TransferKind which);

}  // namespace fodesim
