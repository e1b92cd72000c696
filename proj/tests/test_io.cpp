// SPDX-License-Identifier: Apache-2.0
//
// emcm - electromagnetically consistent communication models
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "catch_amalgamated.hpp"

#include "emcm/io.hpp"

#include <random>
#include <sstream>

using namespace emcm;
using namespace emcm::io;

namespace {

const std::string kFull = R"({
  "name": "io-test",
  "units": {"length": "m", "impedance": "ohm"},
  "wavelength": 0.1,
  "z0": 50,
  "seed": 7,
  "tx": [{"center": [0, 0.5, 0], "length": 0.05, "wire_radius": 0.0002}],
  "rx": [{"center": [0.25, 0.43, 0], "axis": [0, 0, 2], "length": 0.05, "wire_radius": 0.0002}],
  "ris": {"rows": 1, "cols": 4, "spacing": 0.025,
          "element": {"length": 0.05, "wire_radius": 0.0002}},
  "environment": [{"center": [0.3, -0.2, 0.1], "length": 0.008, "wire_radius": 0.0001, "permittivity": [4.0, -0.1]}],
  "direct_link_blocked": true,
  "channel": {"ris_loads": [[0, -40], 12.5, [0, 10], [1, 1]]},
  "optimize": {"objective": "siso", "budget": 100, "model": "uncoupled"},
  "modes": {"tx": {"center": [0, 0, 0], "Lx": 0.4, "Ly": 0.4},
            "rx": {"center": [0, 0, 0.4], "Lx": 0.4, "Ly": 0.4}, "epsilon": 0.3},
  "pws": {"nx": 16, "ny": 8, "dx": 0.05, "dy": 0.05, "z_obs": 0.01,
          "waves": [{"amplitude": [1, 0], "kx": 0.3, "ky": 0}]},
  "sweep": {"aperture": 0.2, "spacings": [0.05, 0.025]}
})";

ConfigError error_of(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("no ConfigError for:\n" << text);
    return ConfigError("", "", 0);
}

}  // namespace

TEST_CASE("parse_scenario - full scenario with resolved defaults")
{
    const Scenario sc = parse_scenario(kFull);
    CHECK(sc.name == "io-test");
    CHECK(sc.wavelength == 0.1);
    CHECK(sc.seed == 7);
    REQUIRE(sc.network);
    CHECK(sc.network->tx.size() == 1);
    CHECK(sc.network->rx[0].axis == Vec3::UnitZ());
    CHECK(sc.network->ris.count() == 4);
    CHECK(sc.network->direct_link_blocked);
    REQUIRE(sc.network->environment.size() == 1);
    const auto& env = sc.network->environment[0];
    CHECK(std::abs(*env.load - metasurface::material_load(cplx(4.0, -0.1), env, 0.1)) <= 1e-12 * std::abs(*env.load));
    REQUIRE(sc.channel);
    CHECK(sc.channel->loads == std::vector<cplx>{cplx(0, -40), 12.5, cplx(0, 10), cplx(1, 1)});
    CHECK(sc.optimize->model == ris_optim::CouplingModel::uncoupled);
    CHECK(sc.optimize->x_max == 1000.0);
    CHECK(sc.modes->epsilon == 0.3);
    CHECK(sc.modes->grid_per_lambda == 4.0);
    CHECK(sc.pws->eta == wavefield::kDefaultEta);
    CHECK(sc.sweep->budget == 50000);

    const json resolved = to_json(sc);
    CHECK(resolved["optimize"]["neumann_order"] == 0);
    CHECK(resolved["modes"]["psi"] == 1.0);
    CHECK(resolved["ris"]["row_spacing"] == 0.025);
    // Environment loads resolve to explicit values; re-parsing is a fixed point.
    const json again = to_json(parse_scenario(resolved.dump(2)));
    CHECK(again.dump() == resolved.dump());
}

TEST_CASE("parse_scenario - diagnostics name line and field")
{
    const ConfigError syntax = error_of("{\n  \"units\": {\"length\": \"m\"},\n  \"wavelength\": 0.1,\n  \"tx\": [1, 2,,]\n}");
    CHECK(syntax.line() == 4);
    CHECK(std::string(syntax.what()).find("malformed JSON") != std::string::npos);

    const ConfigError missing = error_of("{\n  \"units\": {\"length\": \"m\"}\n}");
    CHECK(missing.field() == "wavelength");

    const ConfigError nested = error_of(R"({
  "units": {"length": "m"},
  "wavelength": 0.1,
  "tx": [{"center": [0, 0, 0], "length": 0.05, "wire_radius": 0.0002}],
  "rx": [{"center": [1, 0, 0],
          "length": -0.05, "wire_radius": 0.0002}]
})");
    CHECK(nested.field() == "rx[0].length");
    CHECK(nested.line() == 6);

    const ConfigError unknown = error_of("{\n  \"units\": {\"length\": \"m\"},\n  \"wavelenght\": 0.1\n}");
    CHECK(unknown.field() == "wavelenght");
    CHECK(unknown.line() == 3);

    CHECK(error_of(R"({"units": {"length": "mm"}, "wavelength": 100})").field() == "units.length");
    CHECK(error_of(R"({"wavelength": 0.1})").field() == "units");
    CHECK(error_of(R"({"units": {"length": "m"}, "wavelength": 0.1,
        "modes": {"tx": {"center": [0,0,0], "Lx": 1, "Ly": 1}, "rx": {"center": [0,0,1], "Lx": 1, "Ly": 1},
                  "grid_per_lambda": 2}})").field() == "modes.grid_per_lambda");
    CHECK(error_of(R"({"units": {"length": "m"}, "wavelength": 0.1,
        "tx": [], "rx": [], "environment": [{"center": [0,0,0], "length": 0.01, "wire_radius": 0.0001}]})")
              .field() == "environment[0]");
    CHECK(error_of(R"({"units": {"length": "m"}, "wavelength": 0.1,
        "tx": [], "rx": [], "environment": [{"center": [0,0,0], "length": 0.05, "wire_radius": 0.0001,
        "permittivity": 4}]})").field() == "environment[0].permittivity");
    CHECK(error_of(R"({"units": {"length": "m"}, "wavelength": 0.1, "optimize": {"x_min": 5, "x_max": 1}})")
              .field() == "optimize");
}

TEST_CASE("matrix CSV - exact round trip at 17 significant digits")
{
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1e3);
    ComplexMat m(3, 5);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = cplx(g(rng), g(rng) * 1e-9);
    std::stringstream ss;
    csv_preamble(ss, envelope("channel", json{{"k", 1}}));
    write_matrix_csv(ss, m);
    const ComplexMat back = read_matrix_csv(ss);
    CHECK(back == m);
}

TEST_CASE("spectrum and field CSV layout")
{
    std::stringstream s;
    write_spectrum_csv(s, RealVec{{4.0, 2.0, 1.0}});
    CHECK(s.str() == "m,mu,mu_over_mu1\n1,4,1\n2,2,0.5\n3,1,0.25\n");

    wavefield::FieldGrid f = wavefield::FieldGrid::centered(3, 2, 0.5, 0.25, 1.0);
    f.ex(1, 2) = cplx(1.5, -2);
    std::stringstream c;
    write_field_csv(c, f);
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(c, line)) lines.push_back(line);
    REQUIRE(lines.size() == 7);
    CHECK(lines[0] == "x,y,re_ex,im_ex,re_ey,im_ey");
    CHECK(lines[1] == "-0.5,-0.25,0,0,0,0");
    CHECK(lines[6] == "0.5,0,1.5,-2,0,0");
    CHECK(fmt(0.1) == "0.10000000000000001");
}

TEST_CASE("envelope carries version and configuration")
{
    const json e = envelope("modes", to_json(parse_scenario(kFull)));
    CHECK(e["version"] == kVersion);
    CHECK(e["command"] == "modes");
    CHECK(e["config"]["name"] == "io-test");
    CHECK(report_json(holo::NeDoFReport{}).contains("crossing_0.9"));
    const json mj = matrix_json(ComplexMat::Constant(1, 2, cplx(1, -1)));
    CHECK(mj["im"][0][1] == -1.0);
}
