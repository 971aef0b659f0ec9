#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fodesim/cli.hpp"
#include "fodesim/errors.hpp"

using namespace fodesim;
using namespace fodesim::cli;

namespace {

const std::string kConfigs = FODESIM_CONFIG_DIR;

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "fodesim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
    const auto path = std::filesystem::temp_directory_path() / ("fodesim_test_" + name);
    std::ofstream(path, std::ios::binary) << contents;
    return path;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto c = parse_config(
        "# comment\n"
        "plant.a2 = 0.8   # trailing comment\n"
        "\n"
        "controller.Td=0.7343\n"
        "sim.memory = 500\n"
        "sim.variant = verbatim\n"
        "input.kind = scaled_step\n"
        "input.amplitude = 2\n"
        "analysis.which = closed_loop\n");
    CHECK(c.plant.a2 == 0.8);
    CHECK(c.controller.Td == 0.7343);
    CHECK(c.controller.K == 20.5);
    CHECK(c.sim.memory == 500u);
    CHECK(c.sim.variant == RealizationVariant::verbatim);
    CHECK(c.input.amplitude == 2.0);
    CHECK(c.analysis.which == TransferKind::closed_loop);

    CHECK_THROWS_AS(parse_config("plant.a3 = 1\n"), InvalidParameter);
    CHECK_THROWS_AS(parse_config("plant.a2 = 1\nplant.a2 = 2\n"), InvalidParameter);
    CHECK_THROWS_AS(parse_config("plant.a2 1\n"), InvalidParameter);
    CHECK_THROWS_AS(parse_config("plant.a2 = one\n"), InvalidParameter);
    CHECK_THROWS_AS(parse_config("plant.a2 = 1.0x\n"), InvalidParameter);
    CHECK_THROWS_AS(parse_config("plant.a2 =\n"), InvalidParameter);
    CHECK_THROWS_AS(parse_config("sim.memory = -3\n"), InvalidParameter);
    CHECK_THROWS_AS(parse_config("sim.variant = other\n"), InvalidParameter);
    CHECK_THROWS_AS(parse_config("input.kind = ramp\n").validate(), InvalidParameter);
    CHECK_THROWS_AS(parse_config("input.amplitude = 3\n").validate(), InvalidParameter);
}

TEST_CASE("config dump round-trips exactly") {
    RunConfig c;
    c.plant.alpha = 2.0 + 1.0 / 3.0;
    c.controller.Td = 0.1 + 0.2;
    c.sim.memory = 1234;
    c.sim.variant = RealizationVariant::verbatim;
    c.input.kind = "scaled_step";
    c.input.amplitude = -0.7;
    c.analysis.which = TransferKind::plant;
    const auto text = dump_config(c);
    const auto back = parse_config(text);
    CHECK(dump_config(back) == text);
    CHECK(back.plant.alpha == c.plant.alpha);
    CHECK(back.controller.Td == c.controller.Td);
    CHECK(back.sim.memory == c.sim.memory);
}

TEST_CASE("number formatting uses 12 significant digits") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(20.5 / 21.5) == "0.953488372093");
    CHECK(format_number(1e-7) == "1e-07");
    CHECK(format_number(12345678901234.0) == "1.23456789012e+13");
}

TEST_CASE("step command columns") {
    const auto both = invoke({"step", "--config", kConfigs + "/reference.cfg", "--t-end", "0.01"});
    REQUIRE(both.code == 0);
    const auto rows = lines(both.out);
    REQUIRE(rows.size() == 12);
    CHECK(rows[0] == "t,w,y_direct,y_statespace");
    CHECK(rows[1].rfind("0,1,", 0) == 0);

    const auto direct = invoke({"step", "--config", kConfigs + "/reference.cfg", "--t-end", "0.01", "--solver", "direct"});
    CHECK(lines(direct.out)[0] == "t,w,y_direct");
    const auto ss = invoke({"step", "--config", kConfigs + "/reference.cfg", "--t-end", "0.01", "--solver", "statespace"});
    CHECK(lines(ss.out)[0] == "t,w,y_statespace");
    CHECK(both.out.find('\r') == std::string::npos);
}

TEST_CASE("step command with a diverging run marks the last row") {
    const auto cfg = temp_file("diverge.cfg",
                               "controller.Td = 0.7343\nsim.h = 0.005\nsim.t_end = 100\nsim.divergence_bound = 1.5\n");
    const auto r = invoke({"step", "--config", cfg.string()});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    CHECK(rows[0] == "t,w,y_direct,y_statespace,diverged");
    CHECK(rows.back().back() == '1');
    CHECK(rows[rows.size() - 2].back() == '0');
    CHECK(rows.size() < 20002);
}

TEST_CASE("traj command footer") {
    const auto r = invoke({"traj", "--config", kConfigs + "/reference.cfg", "--h", "0.002"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    CHECK(rows[0] == "t,x1,x2,y");
    CHECK(rows.back() == "# classification: converging; equilibrium: 0.046511627907,0");

    const auto u = invoke({"traj", "--config", kConfigs + "/reference_unstable.cfg", "--h", "0.002"});
    REQUIRE(u.code == 0);
    CHECK(lines(u.out).back().rfind("# classification: diverging;", 0) == 0);

    const auto cfg = temp_file("zero.cfg", "input.kind = scaled_step\ninput.amplitude = 0\nsim.h = 0.01\nsim.t_end = 1\n");
    const auto z = invoke({"traj", "--config", cfg.string()});
    REQUIRE(z.code == 0);
    const auto zr = lines(z.out);
    CHECK(zr.back() == "# classification: converging; equilibrium: 0,0");
    for (std::size_t i = 1; i + 1 < zr.size(); ++i) {
        const auto comma = zr[i].find(',');
        REQUIRE(zr[i].substr(comma) == ",0,0,0");
    }
}

TEST_CASE("poles command") {
    const auto r = invoke({"poles", "--config", kConfigs + "/reference.cfg"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    CHECK(rows[0] == "re_v,im_v,on_principal_sheet,re_s,im_s");
    CHECK(r.out.find("# verdict: stable") != std::string::npos);
    CHECK(r.out.find("# base_order: 0.05") != std::string::npos);
    int on_sheet = 0;
    for (std::size_t i = 1; i <= 44; ++i) on_sheet += rows[i].find(",1,") != std::string::npos;
    CHECK(on_sheet == 2);
    CHECK(r.out.find("# dominant_re_s: -1.51") != std::string::npos);

    CHECK(invoke({"poles", "--config", kConfigs + "/reference_unstable.cfg"}).out.find("# verdict: unstable") !=
          std::string::npos);
    CHECK(invoke({"poles", "--config", kConfigs + "/integer_oscillator.cfg"}).out.find("# verdict: marginal") !=
          std::string::npos);
}

TEST_CASE("bode command") {
    const auto r = invoke({"bode", "--config", kConfigs + "/half_differentiator.cfg"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 62);
    CHECK(rows[0] == "omega,mag_db,phase_deg");
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].substr(rows[i].rfind(',')) == ",45");

    const auto cl = invoke({"bode", "--config", kConfigs + "/reference.cfg", "--which", "closed_loop"});
    REQUIRE(cl.code == 0);
    const auto first = lines(cl.out)[1];
    const double mag = std::stod(first.substr(first.find(',') + 1));
    CHECK(mag == doctest::Approx(-0.41).epsilon(0.05));
}

TEST_CASE("exit codes") {
    CHECK(invoke({"step", "--config", kConfigs + "/reference.cfg", "--h", "0.1", "--t-end", "0.05"}).code == 2);
    CHECK(invoke({"step"}).code == 2);
    CHECK(invoke({"launch", "--config", kConfigs + "/reference.cfg"}).code == 2);
    CHECK(invoke({"step", "--config", "/nonexistent/file.cfg"}).code == 2);
    CHECK(invoke({"step", "--config", kConfigs + "/reference.cfg", "--solver", "magic"}).code == 2);
    const auto unknown = temp_file("unknown.cfg", "plant.gain = 3\n");
    const auto u = invoke({"poles", "--config", unknown.string()});
    CHECK(u.code == 2);
    CHECK(u.err.find("plant.gain") != std::string::npos);

    const auto illposed = temp_file("illposed.cfg", "plant.a2 = -0.8\nsim.t_end = 1\n");
    CHECK(invoke({"step", "--config", illposed.string(), "--solver", "direct"}).code == 1);
    CHECK(invoke({"step", "--help"}).code == 0);
}

TEST_CASE("dump-config reproduces the run") {
    const auto dumped = invoke({"bode", "--config", kConfigs + "/reference.cfg", "--which", "plant", "--h", "0.004",
                                "--dump-config"});
    REQUIRE(dumped.code == 0);
    CHECK(dumped.out.find("analysis.which = plant") != std::string::npos);
    CHECK(dumped.out.find("sim.h = 0.0040000000000000001") != std::string::npos);
    const auto cfg = temp_file("dumped.cfg", dumped.out);
    const auto again = invoke({"bode", "--config", cfg.string(), "--dump-config"});
    CHECK(again.out == dumped.out);

    const auto original = invoke({"bode", "--config", kConfigs + "/reference.cfg", "--which", "plant"});
    const auto replay = invoke({"bode", "--config", cfg.string()});
    CHECK(original.out == replay.out);
}

TEST_CASE("--out writes the file") {
    const auto path = std::filesystem::temp_directory_path() / "fodesim_test_out.csv";
    std::filesystem::remove(path);
    const auto r = invoke({"bode", "--config", kConfigs + "/half_differentiator.cfg", "--out", path.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream f(path, std::ios::binary);
    std::stringstream buf;
    buf << f.rdbuf();
    CHECK(buf.str() == invoke({"bode", "--config", kConfigs + "/half_differentiator.cfg"}).out);
}

TEST_CASE("binary output does not depend on the worker count") {
    const std::string bin = FODESIM_BINARY;
    const auto dir = std::filesystem::temp_directory_path();
    auto run_with = [&](const std::string& threads, const std::string& cmd, const std::string& name) {
        const auto out = dir / name;
        const std::string line = "FODESIM_THREADS=" + threads + " '" + bin + "' " + cmd + " --config '" + kConfigs +
                                 "/reference.cfg' --t-end 2 --out '" + out.string() + "'";
        REQUIRE(std::system(line.c_str()) == 0);
        std::ifstream f(out, std::ios::binary);
        std::stringstream buf;
        buf << f.rdbuf();
        return buf.str();
    };
    for (const std::string cmd : {"step", "traj", "poles", "bode"}) {
        const auto one = run_with("1", cmd, "fodesim_det_1.csv");
        const auto four = run_with("4", cmd, "fodesim_det_4.csv");
        CHECK(one == four);
        CHECK(!one.empty());
    }
}

TEST_CASE("step command solver columns agree") {
    const auto r = invoke({"step", "--config", kConfigs + "/reference.cfg", "--h", "0.00025", "--t-end", "3"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 12002);
    double worst = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        std::istringstream in(rows[i]);
        std::string t, w, yd, ys;
        std::getline(in, t, ',');
        std::getline(in, w, ',');
        std::getline(in, yd, ',');
        std::getline(in, ys, ',');
        worst = std::max(worst, std::abs(std::stod(yd) - std::stod(ys)));
    }
    CHECK(worst < 0.05);
}
