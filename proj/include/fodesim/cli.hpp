#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "fodesim/analysis.hpp"
#include "fodesim/model.hpp"
#include "fodesim/sim_statespace.hpp"

namespace fodesim::cli {

// Run configuration. Defaults reproduce the stable reference loop
// (a2=0.8, a1=0.5, a0=1, alpha=2.2, beta=0.9, K=20.5, Td=3.7343, delta=1.15).
struct RunConfig {
    PlantParams plant{1.0, 0.5, 0.8, 2.2, 0.9};
    ControllerParams controller{20.5, 3.7343, 1.15};

    struct Sim {
        double h = 1e-3;
        double t_end = 30.0;
        RealizationVariant variant = RealizationVariant::derived_consistent;
        std::optional<std::size_t> memory;
        double divergence_bound = 1e6;
        double settle_window = 0.25;
    } sim;

    struct Input {
        std::string kind = "unit_step";  // unit_step | scaled_step
        double amplitude = 1.0;
    } input;

    struct Analysis {
        double omega_min = 1e-2;
        double omega_max = 1e2;
        std::size_t points = 200;
        TransferKind which = TransferKind::open_loop;
    } analysis;

    ClosedLoopModel model() const;
    SimOptions options() const;
    /// Throws InvalidParameter for any value the library would reject.
    void validate() const;
};

/// Parses `section.key = value` lines; `#` starts a comment. Unknown or
/// repeated keys and malformed values throw InvalidParameter.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Canonical text form; parse_config(dump_config(c)) reproduces c exactly.
std::string dump_config(const RunConfig& config);

enum class Solver { direct, statespace, both };

/// Numbers in CSV output: 12 significant digits, `.` decimal separator.
std::string format_number(double v);

void cmd_step(const RunConfig& config, Solver solver, std::ostream& out);
void cmd_traj(const RunConfig& config, std::ostream& out);
void cmd_poles(const RunConfig& config, std::ostream& out);
void cmd_bode(const RunConfig& config, std::ostream& out);

/// Full command-line entry point. Returns the process exit code:
/// 0 success, 1 numerical failure, 2 usage or configuration error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fodesim::cli
