#include "fodesim/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fodesim/errors.hpp"

namespace fodesim {
namespace {

bool all_finite(std::initializer_list<double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

void require_finite(cplx s) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
        throw InvalidParameter("complex frequency must be finite");
    }
}

}  // namespace

void PlantParams::validate() const {
    if (!all_finite({a0, a1, a2, alpha, beta})) {
        throw InvalidParameter("plant parameters must be finite");
    }
    if (!(beta >= 0.0)) {
        throw InvalidParameter("plant order beta must be nonnegative");
    }
    if (!(alpha > beta)) {
        throw InvalidParameter("plant order alpha must exceed beta");
    }
}

void ControllerParams::validate() const {
    if (!all_finite({K, Td, delta})) {
        throw InvalidParameter("controller parameters must be finite");
    }
    if (!(delta >= 0.0)) {
        throw InvalidParameter("controller order delta must be nonnegative");
    }
}

std::vector<double> InputSignalSpec::sample(double h, std::size_t n) const {
    struct Visitor {
        double h;
        std::size_t n;
        std::vector<double> operator()(const UnitStep&) const { return std::vector<double>(n, 1.0); }
        std::vector<double> operator()(const ScaledStep& s) const {
            return std::vector<double>(n, s.amplitude);
        }
        std::vector<double> operator()(const SampledSignal& sig) const {
            if (std::abs(sig.step - h) > 1e-12 * h) {
                throw InvalidParameter("sampled input step does not match the simulation step");
            }
            if (sig.values.size() < n) {
                throw InvalidParameter("sampled input is shorter than the simulation horizon");
            }
            return {sig.values.begin(), sig.values.begin() + static_cast<std::ptrdiff_t>(n)};
        }
    };
    return std::visit(Visitor{h, n}, kind);
}

double InputSignalSpec::step_level() const {
    if (std::holds_alternative<UnitStep>(kind)) return 1.0;
    if (const auto* s = std::get_if<ScaledStep>(&kind)) return s->amplitude;
    throw InvalidParameter("sampled input has no constant step level");
}

std::string_view to_string(LoopSignal s) noexcept {
    switch (s) {
        case LoopSignal::setpoint: return "W";
        case LoopSignal::error: return "E";
        case LoopSignal::control: return "U";
        case LoopSignal::output: return "Y";
    }
    return "?";
}

void ClosedLoopModel::validate() const {
    plant.validate();
    controller.validate();
    if (controller.delta > plant.alpha) {
        throw InvalidParameter("plant order alpha must be the highest order in the loop");
    }
}

FractionalTermList FractionalTermList::normalized(std::vector<FractionalTerm> raw) {
    std::stable_sort(raw.begin(), raw.end(),
                     [](const FractionalTerm& a, const FractionalTerm& b) { return a.order > b.order; });
    FractionalTermList out;
    for (const auto& t : raw) {
        if (!out.terms.empty() && out.terms.back().order == t.order) {
            out.terms.back().coefficient += t.coefficient;
        } else {
            out.terms.push_back(t);
        }
    }
    std::erase_if(out.terms, [](const FractionalTerm& t) { return t.coefficient == 0.0; });
    return out;
}

cplx FractionalTermList::evaluate(cplx s) const {
    cplx acc{0.0, 0.0};
    for (const auto& t : terms) {
        acc += t.coefficient * principal_power(s, t.order);
    }
    return acc;
}

cplx principal_power(cplx s, double q) {
    if (q == 0.0) return {1.0, 0.0};
    if (s == cplx{0.0, 0.0}) {
        if (q > 0.0) return {0.0, 0.0};
        throw PoleError("negative power of zero", s);
    }
    if (q == std::round(q) && std::abs(q) <= 64.0) {
        // Integer powers by repeated multiplication keep e.g. i^2 == -1 exact.
        cplx acc{1.0, 0.0};
        for (int i = 0; i < static_cast<int>(std::abs(q)); ++i) acc *= s;
        return q > 0 ? acc : 1.0 / acc;
    }
    // std::arg returns values in [-pi, pi]; fold -pi onto the principal +pi.
    double arg = std::arg(s);
    if (arg == -std::numbers::pi) arg = std::numbers::pi;
    const double mag = std::pow(std::abs(s), q);
    return std::polar(mag, q * arg);
}

cplx plant_transfer(const PlantParams& plant, cplx s) {
    require_finite(s);
    const cplx den = plant.a2 * principal_power(s, plant.alpha) +
                     plant.a1 * principal_power(s, plant.beta) + plant.a0;
    if (den == cplx{0.0, 0.0}) {
        throw PoleError("plant transfer function has a pole here", s);
    }
    return 1.0 / den;
}

cplx controller_transfer(const ControllerParams& ctrl, cplx s) {
    require_finite(s);
    return ctrl.K + ctrl.Td * principal_power(s, ctrl.delta);
}

cplx open_loop_transfer(const ClosedLoopModel& model, cplx s) {
    return controller_transfer(model.controller, s) * plant_transfer(model.plant, s);
}

cplx closed_loop_transfer(const ClosedLoopModel& model, cplx s) {
    const cplx den = characteristic_terms(model).evaluate(s);
    if (den == cplx{0.0, 0.0}) {
        throw PoleError("closed-loop transfer function has a pole here", s);
    }
    return controller_transfer(model.controller, s) / den;
}

FractionalTermList characteristic_terms(const ClosedLoopModel& model) {
    const auto& p = model.plant;
    const auto& c = model.controller;
    return FractionalTermList::normalized({
        {p.a2, p.alpha},
        {c.Td, c.delta},
        {p.a1, p.beta},
        {p.a0 + c.K, 0.0},
    });
}

}  // namespace fodesim
