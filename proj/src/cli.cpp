#include "fodesim/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include "fodesim/errors.hpp"
#include "fodesim/parallel.hpp"
#include "fodesim/sim_direct.hpp"

namespace fodesim::cli {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_real(std::string_view key, std::string_view text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
        throw InvalidParameter("config key '" + std::string(key) + "': '" + std::string(text) +
                               "' is not a finite real number");
    }
    return v;
}

std::size_t parse_count(std::string_view key, std::string_view text) {
    std::size_t v = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw InvalidParameter("config key '" + std::string(key) + "': '" + std::string(text) +
                               "' is not a nonnegative integer");
    }
    return v;
}

RealizationVariant parse_variant(std::string_view text) {
    if (text == "derived" || text == "derived_consistent") return RealizationVariant::derived_consistent;
    if (text == "verbatim") return RealizationVariant::verbatim;
    throw InvalidParameter("variant must be 'verbatim' or 'derived', got '" + std::string(text) + "'");
}

TransferKind parse_which(std::string_view text) {
    for (auto k : {TransferKind::plant, TransferKind::controller, TransferKind::open_loop,
                   TransferKind::closed_loop}) {
        if (text == to_string(k)) return k;
    }
    throw InvalidParameter("analysis.which must be plant, controller, open_loop or closed_loop");
}

std::string exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InvalidParameter("cannot open output file '" + path + "'");
    return f;
}

}  // namespace

ClosedLoopModel RunConfig::model() const {
    ClosedLoopModel m;
    m.plant = plant;
    m.controller = controller;
    if (input.kind == "scaled_step") {
        m.input.kind = ScaledStep{input.amplitude};
    } else {
        m.input.kind = UnitStep{};
    }
    return m;
}

SimOptions RunConfig::options() const {
    SimOptions o;
    o.memory = sim.memory;
    o.divergence_bound = sim.divergence_bound;
    return o;
}

void RunConfig::validate() const {
    model().validate();
    step_count(sim.h, sim.t_end);
    if (sim.memory && *sim.memory < 1) throw InvalidParameter("sim.memory must be at least 1");
    if (!(sim.divergence_bound > 0.0)) throw InvalidParameter("sim.divergence_bound must be positive");
    if (!(sim.settle_window > 0.0 && sim.settle_window <= 0.5)) {
        throw InvalidParameter("sim.settle_window must lie in (0, 0.5]");
    }
    if (input.kind != "unit_step" && input.kind != "scaled_step") {
        throw InvalidParameter("input.kind must be unit_step or scaled_step");
    }
    if (input.kind == "unit_step" && input.amplitude != 1.0) {
        throw InvalidParameter("input.amplitude other than 1 requires input.kind = scaled_step");
    }
    if (!(analysis.omega_min > 0.0 && analysis.omega_max > analysis.omega_min)) {
        throw InvalidParameter("analysis range must satisfy 0 < omega_min < omega_max");
    }
    if (analysis.points < 2) throw InvalidParameter("analysis.points must be at least 2");
}

RunConfig parse_config(std::string_view text) {
    RunConfig c;
    std::set<std::string, std::less<>> seen;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw InvalidParameter("config line " + std::to_string(line_no) + ": expected 'section.key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (value.empty()) {
            throw InvalidParameter("config line " + std::to_string(line_no) + ": empty value for '" +
                                   std::string(key) + "'");
        }
        if (!seen.insert(std::string(key)).second) {
            throw InvalidParameter("config key '" + std::string(key) + "' given twice");
        }

        if (key == "plant.a0") c.plant.a0 = parse_real(key, value);
        else if (key == "plant.a1") c.plant.a1 = parse_real(key, value);
        else if (key == "plant.a2") c.plant.a2 = parse_real(key, value);
        else if (key == "plant.alpha") c.plant.alpha = parse_real(key, value);
        else if (key == "plant.beta") c.plant.beta = parse_real(key, value);
        else if (key == "controller.K") c.controller.K = parse_real(key, value);
        else if (key == "controller.Td") c.controller.Td = parse_real(key, value);
        else if (key == "controller.delta") c.controller.delta = parse_real(key, value);
        else if (key == "sim.h") c.sim.h = parse_real(key, value);
        else if (key == "sim.t_end") c.sim.t_end = parse_real(key, value);
        else if (key == "sim.variant") c.sim.variant = parse_variant(value);
        else if (key == "sim.memory") c.sim.memory = parse_count(key, value);
        else if (key == "sim.divergence_bound") c.sim.divergence_bound = parse_real(key, value);
        else if (key == "sim.settle_window") c.sim.settle_window = parse_real(key, value);
        else if (key == "input.kind") c.input.kind = std::string(value);
        else if (key == "input.amplitude") c.input.amplitude = parse_real(key, value);
        else if (key == "analysis.omega_min") c.analysis.omega_min = parse_real(key, value);
        else if (key == "analysis.omega_max") c.analysis.omega_max = parse_real(key, value);
        else if (key == "analysis.points") c.analysis.points = parse_count(key, value);
        else if (key == "analysis.which") c.analysis.which = parse_which(value);
        else throw InvalidParameter("unknown config key '" + std::string(key) + "'");
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InvalidParameter("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config(buf.str());
}

std::string dump_config(const RunConfig& c) {
    std::ostringstream o;
    o << "# fodesim run configuration\n";
    o << "plant.a0 = " << exact(c.plant.a0) << '\n';
    o << "plant.a1 = " << exact(c.plant.a1) << '\n';
    o << "plant.a2 = " << exact(c.plant.a2) << '\n';
    o << "plant.alpha = " << exact(c.plant.alpha) << '\n';
    o << "plant.beta = " << exact(c.plant.beta) << '\n';
    o << "controller.K = " << exact(c.controller.K) << '\n';
    o << "controller.Td = " << exact(c.controller.Td) << '\n';
    o << "controller.delta = " << exact(c.controller.delta) << '\n';
    o << "sim.h = " << exact(c.sim.h) << '\n';
    o << "sim.t_end = " << exact(c.sim.t_end) << '\n';
    o << "sim.variant = " << to_string(c.sim.variant) << '\n';
    if (c.sim.memory) o << "sim.memory = " << *c.sim.memory << '\n';
    o << "sim.divergence_bound = " << exact(c.sim.divergence_bound) << '\n';
    o << "sim.settle_window = " << exact(c.sim.settle_window) << '\n';
    o << "input.kind = " << c.input.kind << '\n';
    o << "input.amplitude = " << exact(c.input.amplitude) << '\n';
    o << "analysis.omega_min = " << exact(c.analysis.omega_min) << '\n';
    o << "analysis.omega_max = " << exact(c.analysis.omega_max) << '\n';
    o << "analysis.points = " << c.analysis.points << '\n';
    o << "analysis.which = " << to_string(c.analysis.which) << '\n';
    return o.str();
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void cmd_step(const RunConfig& config, Solver solver, std::ostream& out) {
    config.validate();
    const auto model = config.model();
    const auto opts = config.options();
    const bool want_direct = solver != Solver::statespace;
    const bool want_ss = solver != Solver::direct;

    TimeSeries direct;
    StateTrajectory ss;
    // The two solvers share nothing, so they may run side by side.
    parallel_for(2, [&](std::size_t i) {
        if (i == 0 && want_direct) direct = simulate_direct(model, config.sim.h, config.sim.t_end, opts);
        if (i == 1 && want_ss) {
            const auto realization = build_realization(model, config.sim.variant);
            ss = simulate_state_space(realization, model, config.sim.h, config.sim.t_end, opts);
        }
    });

    std::size_t rows = std::numeric_limits<std::size_t>::max();
    if (want_direct) rows = std::min(rows, direct.size());
    if (want_ss) rows = std::min(rows, ss.size());
    const bool diverged = (want_direct && direct.diverged) || (want_ss && ss.diverged);
    const auto& t = want_direct ? direct.t : ss.t;
    const auto& w = want_direct ? direct.w : ss.w;

    out << "t,w";
    if (want_direct) out << ",y_direct";
    if (want_ss) out << ",y_statespace";
    if (diverged) out << ",diverged";
    out << '\n';
    for (std::size_t k = 0; k < rows; ++k) {
        out << format_number(t[k]) << ',' << format_number(w[k]);
        if (want_direct) out << ',' << format_number(direct.y[k]);
        if (want_ss) out << ',' << format_number(ss.y[k]);
        if (diverged) out << ',' << (k + 1 == rows ? '1' : '0');
        out << '\n';
    }
}

void cmd_traj(const RunConfig& config, std::ostream& out) {
    config.validate();
    const auto model = config.model();
    const auto realization = build_realization(model, config.sim.variant);
    const auto traj = simulate_state_space(realization, model, config.sim.h, config.sim.t_end, config.options());
    const auto eq = equilibrium(model, model.input.step_level());
    const auto verdict = classify_trajectory(traj, eq, config.sim.settle_window);

    out << "t,x1,x2,y\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << format_number(traj.t[k]) << ',' << format_number(traj.x1[k]) << ','
            << format_number(traj.x2[k]) << ',' << format_number(traj.y[k]) << '\n';
    }
    out << "# classification: " << to_string(verdict) << "; equilibrium: " << format_number(eq.x1_star)
        << ',' << format_number(eq.x2_star) << '\n';
}

void cmd_poles(const RunConfig& config, std::ostream& out) {
    config.validate();
    const auto report = stability_report(config.model());
    const double base = report.base_order;

    out << "re_v,im_v,on_principal_sheet,re_s,im_s\n";
    for (const auto& v : report.v_roots) {
        out << format_number(v.real()) << ',' << format_number(v.imag()) << ',';
        if (v != cplx{0.0, 0.0} && (base >= 1.0 || std::abs(std::arg(v)) < std::numbers::pi * base)) {
            const cplx s = principal_power(v, 1.0 / base);
            out << "1," << format_number(s.real()) << ',' << format_number(s.imag()) << '\n';
        } else {
            out << "0,,\n";
        }
    }
    out << "# base_order: " << format_number(base) << '\n';
    out << "# verdict: " << to_string(report.verdict) << '\n';
    out << "# sector_margin: " << format_number(report.sector_margin) << '\n';
    if (report.has_dominant_pole) {
        out << "# dominant_re_s: " << format_number(report.dominant_pole.real()) << '\n';
        out << "# dominant_im_s: " << format_number(report.dominant_pole.imag()) << '\n';
    }
    out << "# S_t: " << format_number(report.stability_measure) << '\n';
    out << "# T_l_re_over_im: " << format_number(report.damping_re_over_im) << '\n';
    out << "# T_l_im_over_re: " << format_number(report.damping_im_over_re) << '\n';
    out << "# notes: " << report.convention_notes << '\n';
}

void cmd_bode(const RunConfig& config, std::ostream& out) {
    config.validate();
    const auto& a = config.analysis;
    const auto pts = frequency_response(config.model(), a.omega_min, a.omega_max, a.points, a.which);
    out << "omega,mag_db,phase_deg\n";
    for (const auto& p : pts) {
        out << format_number(p.omega) << ',' << format_number(p.magnitude_db) << ','
            << format_number(p.phase_deg) << '\n';
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fractional-order closed-loop simulator and stability analyzer", "fodesim"};
    // --h is the step size, so help is long-form only.
    app.set_help_flag("--help", "print this help and exit");
    std::string command;
    std::string config_path;
    std::string out_path;
    std::string solver_name = "both";
    std::string variant_name;
    std::string which_name;
    std::optional<double> h;
    std::optional<double> t_end;
    bool dump = false;

    app.add_option("command", command, "step | traj | poles | bode")
        ->required()
        ->check(CLI::IsMember({"step", "traj", "poles", "bode"}));
    app.add_option("--config", config_path, "run configuration file")->required();
    app.add_option("--out", out_path, "write output here instead of stdout");
    app.add_option("--solver", solver_name, "step solver")
        ->check(CLI::IsMember({"direct", "statespace", "both"}));
    app.add_option("--variant", variant_name, "state-space realization")
        ->check(CLI::IsMember({"verbatim", "derived"}));
    app.add_option("--which", which_name, "bode transfer function")
        ->check(CLI::IsMember({"plant", "controller", "open_loop", "closed_loop"}));
    app.add_option("--h", h, "step size override");
    app.add_option("--t-end", t_end, "horizon override");
    app.add_flag("--dump-config", dump, "print the effective configuration and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        auto config = load_config(config_path);
        if (h) config.sim.h = *h;
        if (t_end) config.sim.t_end = *t_end;
        if (!variant_name.empty()) config.sim.variant = parse_variant(variant_name);
        if (!which_name.empty()) config.analysis.which = parse_which(which_name);
        config.validate();

        std::ostringstream buffer;
        if (dump) {
            buffer << dump_config(config);
        } else if (command == "step") {
            const Solver solver = solver_name == "direct"       ? Solver::direct
                                  : solver_name == "statespace" ? Solver::statespace
                                                                : Solver::both;
            cmd_step(config, solver, buffer);
        } else if (command == "traj") {
            cmd_traj(config, buffer);
        } else if (command == "poles") {
            cmd_poles(config, buffer);
        } else {
            cmd_bode(config, buffer);
        }

        if (out_path.empty()) {
            out << buffer.str();
        } else {
            auto file = open_output(out_path);
            file << buffer.str();
        }
        return 0;
    } catch (const InvalidParameter& e) {
        err << "fodesim: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "fodesim: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace fodesim::cli
