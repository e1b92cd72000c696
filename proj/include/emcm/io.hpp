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

// Scenario files and result tables.
//
// Scenarios are JSON with a mandatory `units` header (SI only). Parsing
// resolves every default into plain structs; `to_json` writes them back, so
// the resolved configuration embedded in outputs is complete.

#pragma once

#include "emcm/core.hpp"
#include "emcm/holo_modes.hpp"
#include "emcm/metasurface.hpp"
#include "emcm/ris_optim.hpp"
#include "emcm/wavefield.hpp"

#include "json.hpp"

#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace emcm::io {

using json = nlohmann::ordered_json;

/// Invalid or malformed configuration. `field` is a JSON path such as
/// `ris.element.length`; `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, std::string field, int line)
        : std::runtime_error(describe(message, field, line)), field_(std::move(field)), line_(line) {}

    const std::string& field() const noexcept { return field_; }
    int line() const noexcept { return line_; }

private:
    static std::string describe(const std::string& message, const std::string& field, int line) {
        std::string s;
        if (line > 0) s += "line " + std::to_string(line) + ": ";
        if (!field.empty()) s += "field '" + field + "': ";
        return s + message;
    }
    std::string field_;
    int line_;
};

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------- sections

struct ChannelSection {
    enum class Loads { matched, open, explicit_values };
    Loads kind = Loads::matched;
    std::vector<cplx> loads;  // explicit_values only
};

struct OptimizeSection {
    ris_optim::Objective objective = ris_optim::Objective::siso;
    double x_min = -1000.0;
    double x_max = 1000.0;
    long budget = 200000;
    ris_optim::CouplingModel model = ris_optim::CouplingModel::coupled;
    int neumann_order = 0;
    int random_starts = 0;
};

struct SurfaceSpec {
    Vec3 center = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();
    Vec3 x_axis = Vec3::UnitX();
    double Lx = 0.0;
    double Ly = 0.0;
};

struct ModesSection {
    SurfaceSpec tx;
    SurfaceSpec rx;
    double grid_per_lambda = 4.0;
    double epsilon = holo::kDefaultEpsilon;
    double psi = 1.0;
    int separability_modes = 10;
};

struct PlaneWaveTerm {
    cplx amplitude = 1.0;
    double kx = 0.0;  // in units of kappa
    double ky = 0.0;
};

struct PwsSection {
    int nx = 64;
    int ny = 64;
    double dx = 0.0;
    double dy = 0.0;
    std::vector<PlaneWaveTerm> waves;
    double z_obs = 0.0;
    double eta = wavefield::kDefaultEta;
};

struct SweepSection {
    double aperture = 0.0;
    std::vector<double> spacings;
    long budget = 50000;
};

struct Scenario {
    std::string name;
    double wavelength = 0.0;
    std::uint64_t seed = 0;
    std::optional<metasurface::NetworkScenario> network;
    std::optional<ChannelSection> channel;
    std::optional<OptimizeSection> optimize;
    std::optional<ModesSection> modes;
    std::optional<PwsSection> pws;
    std::optional<SweepSection> sweep;
};

// ---------------------------------------------------------------- parsing

namespace detail {

/// Best-effort source line of a JSON path: each key is searched after the
/// position of its parent.
inline int locate(const std::string& text, const std::vector<std::string>& keys) {
    std::size_t pos = 0;
    bool found = false;
    for (const auto& k : keys) {
        if (k.empty() || k.front() == '[') continue;
        const std::size_t p = text.find("\"" + k + "\"", pos);
        if (p == std::string::npos) break;
        pos = p;
        found = true;
    }
    if (!found) return 0;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class Reader {
public:
    Reader(const json& node, std::vector<std::string> path, const std::string& text)
        : node_(node), path_(std::move(path)), text_(text) {}

    std::string path() const {
        std::string s;
        for (const auto& p : path_) {
            if (!s.empty() && p.front() != '[') s += '.';
            s += p;
        }
        return s;
    }

    [[noreturn]] void fail(const std::string& message) const { throw ConfigError(message, path(), locate(text_, path_)); }

    const json& node() const { return node_; }
    bool has(const std::string& key) const { return node_.is_object() && node_.contains(key); }

    Reader at(const std::string& key) const {
        if (!node_.is_object()) fail("expected an object");
        auto p = path_;
        p.push_back(key);
        if (!node_.contains(key)) throw ConfigError("missing required field", Reader(node_, p, text_).path(), locate(text_, path_));
        return Reader(node_.at(key), p, text_);
    }

    Reader item(std::size_t i) const {
        auto p = path_;
        p.push_back("[" + std::to_string(i) + "]");
        return Reader(node_.at(i), p, text_);
    }

    std::size_t size() const {
        if (!node_.is_array()) fail("expected an array");
        return node_.size();
    }

    double number() const {
        if (!node_.is_number()) fail("expected a number");
        const double v = node_.get<double>();
        if (!std::isfinite(v)) fail("non-finite number");
        return v;
    }

    double positive() const {
        const double v = number();
        if (!(v > 0.0)) fail("must be positive");
        return v;
    }

    long integer(long lo, long hi) const {
        if (!node_.is_number_integer()) fail("expected an integer");
        const long v = node_.get<long>();
        if (v < lo || v > hi) fail("must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return v;
    }

    bool boolean() const {
        if (!node_.is_boolean()) fail("expected true or false");
        return node_.get<bool>();
    }

    std::string string() const {
        if (!node_.is_string()) fail("expected a string");
        return node_.get<std::string>();
    }

    Vec3 vec3() const {
        if (!node_.is_array() || node_.size() != 3) fail("expected [x, y, z]");
        Vec3 v;
        for (int i = 0; i < 3; ++i) v(i) = item(i).number();
        return v;
    }

    Vec3 unit() const {
        const Vec3 v = vec3();
        if (v.norm() < 1e-12) fail("direction must be non-zero");
        return v.normalized();
    }

    /// A real number or [re, im].
    cplx complex() const {
        if (node_.is_number()) return number();
        if (!node_.is_array() || node_.size() != 2) fail("expected a number or [re, im]");
        return {item(0).number(), item(1).number()};
    }

    /// Rejects keys outside `allowed`, so typos are not silently ignored.
    void only(std::initializer_list<const char*> allowed) const {
        if (!node_.is_object()) fail("expected an object");
        for (const auto& [key, value] : node_.items()) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
                auto p = path_;
                p.push_back(key);
                throw ConfigError("unknown field", Reader(value, p, text_).path(), locate(text_, p));
            }
        }
    }

    template <class F>
    auto optional(const std::string& key, F&& read, decltype(read(std::declval<Reader>())) fallback) const {
        return has(key) ? read(at(key)) : fallback;
    }

private:
    const json& node_;
    std::vector<std::string> path_;
    const std::string& text_;
};

inline metasurface::DipoleElement dipole(const Reader& r, bool needs_center) {
    if (needs_center) r.only({"center", "axis", "length", "wire_radius", "load", "permittivity"});
    else r.only({"axis", "length", "wire_radius"});
    metasurface::DipoleElement e;
    if (needs_center) e.center = r.at("center").vec3();
    e.axis = r.optional("axis", [](const Reader& x) { return x.unit(); }, Vec3::UnitZ());
    e.length = r.at("length").positive();
    e.wire_radius = r.at("wire_radius").positive();
    if (e.wire_radius > e.length / 50.0) r.at("wire_radius").fail("exceeds length/50 (thin-wire limit)");
    return e;
}

inline Mat3 frame(const Reader& r, const Vec3& normal, const Vec3& x_axis) {
    const Vec3 n = normal.normalized();
    Vec3 u = x_axis - x_axis.dot(n) * n;
    if (u.norm() < 1e-9) r.fail("x_axis is parallel to the normal");
    return holo::frame_from(n, u);
}

inline SurfaceSpec surface(const Reader& r) {
    r.only({"center", "normal", "x_axis", "Lx", "Ly"});
    SurfaceSpec s;
    s.center = r.at("center").vec3();
    s.normal = r.optional("normal", [](const Reader& x) { return x.unit(); }, Vec3::UnitZ());
    s.x_axis = r.optional("x_axis", [](const Reader& x) { return x.unit(); }, Vec3::UnitX());
    frame(r, s.normal, s.x_axis);
    s.Lx = r.at("Lx").positive();
    s.Ly = r.at("Ly").positive();
    return s;
}

}  // namespace detail

inline holo::PlanarSurface planar_surface(const SurfaceSpec& s, double wavelength, double per_lambda) {
    return holo::PlanarSurface::with_resolution(s.center, holo::frame_from(s.normal, s.x_axis - s.x_axis.dot(s.normal) * s.normal),
                                                s.Lx, s.Ly, wavelength, per_lambda);
}

inline Scenario parse_scenario(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
        const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte > 0 ? byte - 1 : 0), '\n'));
        std::string what = e.what();
        const auto p = what.find("parse error");
        throw ConfigError("malformed JSON: " + (p == std::string::npos ? what : what.substr(p)), "", line);
    }
    using detail::Reader;
    const Reader r(root, {}, text);
    if (!root.is_object()) r.fail("scenario must be a JSON object");
    r.only({"name", "units", "wavelength", "z0", "seed", "tx", "rx", "ris", "environment", "direct_link_blocked",
            "channel", "optimize", "modes", "pws", "sweep"});

    const Reader units = r.at("units");
    units.only({"length", "impedance", "angle"});
    if (units.at("length").string() != "m") units.at("length").fail("only SI metres (\"m\") are accepted");
    if (units.has("impedance") && units.at("impedance").string() != "ohm") {
        units.at("impedance").fail("only \"ohm\" is accepted");
    }

    Scenario sc;
    sc.name = r.optional("name", [](const Reader& x) { return x.string(); }, std::string());
    sc.wavelength = r.at("wavelength").positive();
    sc.seed = static_cast<std::uint64_t>(r.optional("seed", [](const Reader& x) { return x.integer(0, std::numeric_limits<long>::max()); }, 0L));

    if (r.has("tx") || r.has("rx") || r.has("ris")) {
        metasurface::NetworkScenario net;
        net.wavelength = sc.wavelength;
        net.z0 = r.optional("z0", [](const Reader& x) { return x.positive(); }, 50.0);
        for (const char* group : {"tx", "rx"}) {
            const Reader g = r.at(group);
            auto& out = std::string(group) == "tx" ? net.tx : net.rx;
            for (std::size_t i = 0; i < g.size(); ++i) out.push_back(detail::dipole(g.item(i), true));
        }
        if (r.has("ris")) {
            const Reader s = r.at("ris");
            s.only({"rows", "cols", "spacing", "row_spacing", "center", "normal", "x_axis", "element"});
            net.ris.rows = static_cast<int>(s.at("rows").integer(1, 4096));
            net.ris.cols = static_cast<int>(s.at("cols").integer(1, 4096));
            net.ris.spacing = s.at("spacing").positive();
            if (s.has("row_spacing")) net.ris.row_spacing = s.at("row_spacing").positive();
            net.ris.center = s.optional("center", [](const Reader& x) { return x.vec3(); }, Vec3(Vec3::Zero()));
            const Vec3 n = s.optional("normal", [](const Reader& x) { return x.unit(); }, Vec3(Vec3::UnitZ()));
            const Vec3 u = s.optional("x_axis", [](const Reader& x) { return x.unit(); }, Vec3(Vec3::UnitX()));
            net.ris.orientation = detail::frame(s, n, u);
            net.ris.element = detail::dipole(s.at("element"), false);
        }
        if (r.has("environment")) {
            const Reader env = r.at("environment");
            for (std::size_t i = 0; i < env.size(); ++i) {
                const Reader o = env.item(i);
                metasurface::DipoleElement e = detail::dipole(o, true);
                if (o.has("load") == o.has("permittivity")) o.fail("give exactly one of load or permittivity");
                if (o.has("load")) {
                    e.load = o.at("load").complex();
                } else {
                    try {
                        e.load = metasurface::material_load(o.at("permittivity").complex(), e, sc.wavelength);
                    } catch (const PreconditionError& err) {
                        o.at("permittivity").fail(err.what());
                    }
                }
                net.environment.push_back(e);
            }
        }
        net.direct_link_blocked = r.optional("direct_link_blocked", [](const Reader& x) { return x.boolean(); }, false);
        sc.network = net;
    }

    if (r.has("channel")) {
        const Reader c = r.at("channel");
        c.only({"ris_loads"});
        ChannelSection ch;
        const Reader loads = c.at("ris_loads");
        if (loads.node().is_string()) {
            const std::string k = loads.string();
            if (k == "matched") ch.kind = ChannelSection::Loads::matched;
            else if (k == "open") ch.kind = ChannelSection::Loads::open;
            else loads.fail("expected \"matched\", \"open\" or a list of loads");
        } else {
            ch.kind = ChannelSection::Loads::explicit_values;
            for (std::size_t i = 0; i < loads.size(); ++i) ch.loads.push_back(loads.item(i).complex());
        }
        sc.channel = ch;
    }

    if (r.has("optimize")) {
        const Reader o = r.at("optimize");
        o.only({"objective", "x_min", "x_max", "budget", "model", "neumann_order", "random_starts"});
        OptimizeSection op;
        const std::string obj = o.optional("objective", [](const Reader& x) { return x.string(); }, std::string("siso"));
        if (obj == "siso") op.objective = ris_optim::Objective::siso;
        else if (obj == "sum_gain") op.objective = ris_optim::Objective::sum_gain;
        else o.at("objective").fail("expected \"siso\" or \"sum_gain\"");
        op.x_min = o.optional("x_min", [](const Reader& x) { return x.number(); }, op.x_min);
        op.x_max = o.optional("x_max", [](const Reader& x) { return x.number(); }, op.x_max);
        if (!(op.x_min < op.x_max)) o.fail("need x_min < x_max");
        op.budget = o.optional("budget", [](const Reader& x) { return x.integer(1, 1000000000); }, op.budget);
        const std::string model = o.optional("model", [](const Reader& x) { return x.string(); }, std::string("coupled"));
        if (model == "coupled") op.model = ris_optim::CouplingModel::coupled;
        else if (model == "uncoupled") op.model = ris_optim::CouplingModel::uncoupled;
        else o.at("model").fail("expected \"coupled\" or \"uncoupled\"");
        op.neumann_order = static_cast<int>(o.optional("neumann_order", [](const Reader& x) { return x.integer(0, 64); }, 0L));
        op.random_starts = static_cast<int>(o.optional("random_starts", [](const Reader& x) { return x.integer(0, 1000); }, 0L));
        sc.optimize = op;
    }

    if (r.has("modes")) {
        const Reader m = r.at("modes");
        m.only({"tx", "rx", "grid_per_lambda", "epsilon", "psi", "separability_modes"});
        ModesSection ms;
        ms.tx = detail::surface(m.at("tx"));
        ms.rx = detail::surface(m.at("rx"));
        ms.grid_per_lambda = m.optional("grid_per_lambda", [](const Reader& x) { return x.positive(); }, ms.grid_per_lambda);
        if (ms.grid_per_lambda < 1.0 / holo::kResolutionFloor) m.at("grid_per_lambda").fail("must be >= 4 (lambda/4 floor)");
        ms.epsilon = m.optional("epsilon", [](const Reader& x) { return x.positive(); }, ms.epsilon);
        if (ms.epsilon > 1.0) m.at("epsilon").fail("must lie in (0, 1]");
        ms.psi = m.optional("psi", [](const Reader& x) { return x.positive(); }, ms.psi);
        ms.separability_modes = static_cast<int>(m.optional("separability_modes", [](const Reader& x) { return x.integer(0, 1000); }, 10L));
        sc.modes = ms;
    }

    if (r.has("pws")) {
        const Reader p = r.at("pws");
        p.only({"nx", "ny", "dx", "dy", "waves", "z_obs", "eta"});
        PwsSection ps;
        ps.nx = static_cast<int>(p.at("nx").integer(2, 8192));
        ps.ny = static_cast<int>(p.at("ny").integer(2, 8192));
        ps.dx = p.at("dx").positive();
        ps.dy = p.at("dy").positive();
        const Reader w = p.at("waves");
        for (std::size_t i = 0; i < w.size(); ++i) {
            const Reader t = w.item(i);
            t.only({"amplitude", "kx", "ky"});
            ps.waves.push_back({t.at("amplitude").complex(), t.at("kx").number(), t.at("ky").number()});
        }
        ps.z_obs = p.at("z_obs").positive();
        ps.eta = p.optional("eta", [](const Reader& x) { return x.positive(); }, ps.eta);
        if (ps.eta >= 1.0) p.at("eta").fail("must lie in (0, 1)");
        sc.pws = ps;
    }

    if (r.has("sweep")) {
        const Reader s = r.at("sweep");
        s.only({"aperture", "spacings", "budget"});
        SweepSection sw;
        sw.aperture = s.at("aperture").positive();
        const Reader d = s.at("spacings");
        for (std::size_t i = 0; i < d.size(); ++i) sw.spacings.push_back(d.item(i).positive());
        if (sw.spacings.empty()) d.fail("need at least one spacing");
        sw.budget = s.optional("budget", [](const Reader& x) { return x.integer(1, 1000000000); }, sw.budget);
        sc.sweep = sw;
    }
    return sc;
}

// ---------------------------------------------------------------- resolved config

namespace detail {

inline json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
inline json cx(cplx z) { return json::array({z.real(), z.imag()}); }

inline json dipole_json(const metasurface::DipoleElement& e, bool with_center) {
    json j;
    if (with_center) j["center"] = vec(e.center);
    j["axis"] = vec(e.axis);
    j["length"] = e.length;
    j["wire_radius"] = e.wire_radius;
    if (e.load) j["load"] = cx(*e.load);
    return j;
}

inline json surface_json(const SurfaceSpec& s) {
    return json{{"center", vec(s.center)}, {"normal", vec(s.normal)}, {"x_axis", vec(s.x_axis)}, {"Lx", s.Lx}, {"Ly", s.Ly}};
}

}  // namespace detail

inline json to_json(const Scenario& sc) {
    using detail::cx;
    using detail::vec;
    json j;
    j["name"] = sc.name;
    j["units"] = {{"length", "m"}, {"impedance", "ohm"}};
    j["wavelength"] = sc.wavelength;
    j["seed"] = sc.seed;
    if (sc.network) {
        const auto& n = *sc.network;
        j["z0"] = n.z0;
        j["tx"] = json::array();
        for (const auto& e : n.tx) j["tx"].push_back(detail::dipole_json(e, true));
        j["rx"] = json::array();
        for (const auto& e : n.rx) j["rx"].push_back(detail::dipole_json(e, true));
        if (n.ris.count() > 0) {
            json r;
            r["rows"] = n.ris.rows;
            r["cols"] = n.ris.cols;
            r["spacing"] = n.ris.spacing;
            r["row_spacing"] = n.ris.row_spacing.value_or(n.ris.spacing);
            r["center"] = vec(n.ris.center);
            r["normal"] = vec(n.ris.orientation.col(2));
            r["x_axis"] = vec(n.ris.orientation.col(0));
            r["element"] = detail::dipole_json(n.ris.element, false);
            j["ris"] = r;
        }
        j["environment"] = json::array();
        for (const auto& e : n.environment) j["environment"].push_back(detail::dipole_json(e, true));
        j["direct_link_blocked"] = n.direct_link_blocked;
    }
    if (sc.channel) {
        switch (sc.channel->kind) {
            case ChannelSection::Loads::matched: j["channel"]["ris_loads"] = "matched"; break;
            case ChannelSection::Loads::open: j["channel"]["ris_loads"] = "open"; break;
            case ChannelSection::Loads::explicit_values:
                j["channel"]["ris_loads"] = json::array();
                for (cplx z : sc.channel->loads) j["channel"]["ris_loads"].push_back(cx(z));
                break;
        }
    }
    if (sc.optimize) {
        const auto& o = *sc.optimize;
        j["optimize"] = {{"objective", o.objective == ris_optim::Objective::siso ? "siso" : "sum_gain"},
                         {"x_min", o.x_min},
                         {"x_max", o.x_max},
                         {"budget", o.budget},
                         {"model", o.model == ris_optim::CouplingModel::coupled ? "coupled" : "uncoupled"},
                         {"neumann_order", o.neumann_order},
                         {"random_starts", o.random_starts}};
    }
    if (sc.modes) {
        const auto& m = *sc.modes;
        j["modes"] = {{"tx", detail::surface_json(m.tx)}, {"rx", detail::surface_json(m.rx)},
                      {"grid_per_lambda", m.grid_per_lambda}, {"epsilon", m.epsilon},
                      {"psi", m.psi}, {"separability_modes", m.separability_modes}};
    }
    if (sc.pws) {
        const auto& p = *sc.pws;
        json w = json::array();
        for (const auto& t : p.waves) w.push_back({{"amplitude", cx(t.amplitude)}, {"kx", t.kx}, {"ky", t.ky}});
        j["pws"] = {{"nx", p.nx}, {"ny", p.ny}, {"dx", p.dx}, {"dy", p.dy}, {"waves", w}, {"z_obs", p.z_obs}, {"eta", p.eta}};
    }
    if (sc.sweep) {
        j["sweep"] = {{"aperture", sc.sweep->aperture}, {"spacings", sc.sweep->spacings}, {"budget", sc.sweep->budget}};
    }
    return j;
}

// ---------------------------------------------------------------- results

inline json matrix_json(const ComplexMat& m) {
    json re = json::array(), im = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json a = json::array(), b = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            a.push_back(m(r, c).real());
            b.push_back(m(r, c).imag());
        }
        re.push_back(a);
        im.push_back(b);
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

inline json report_json(const holo::NeDoFReport& r) {
    return {{"count", r.count},
            {"epsilon", r.epsilon},
            {"estimate", r.estimate},
            {"spatial_bandwidth", r.spatial_bandwidth},
            {"crossing_0.9", r.crossing_09},
            {"crossing_0.1", r.crossing_01},
            {"landau_regime", r.landau_regime}};
}

/// Output envelope: tool, version, command and the resolved configuration.
inline json envelope(const std::string& command, const json& config) {
    return {{"tool", "emcm"}, {"version", kVersion}, {"command", command}, {"config", config}};
}

/// First line of every CSV: the envelope, compact, behind a comment marker.
inline void csv_preamble(std::ostream& os, const json& env) { os << "# " << env.dump() << "\n"; }

inline void write_matrix_csv(std::ostream& os, const ComplexMat& m) {
    os << "row,col,re,im\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            os << r << ',' << c << ',' << fmt(m(r, c).real()) << ',' << fmt(m(r, c).imag()) << '\n';
}

/// Columns m (1-based), mu_m, mu_m / mu_1.
inline void write_spectrum_csv(std::ostream& os, const RealVec& mu) {
    os << "m,mu,mu_over_mu1\n";
    for (Eigen::Index i = 0; i < mu.size(); ++i)
        os << i + 1 << ',' << fmt(mu(i)) << ',' << fmt(mu(0) > 0.0 ? mu(i) / mu(0) : 0.0) << '\n';
}

inline void write_field_csv(std::ostream& os, const wavefield::FieldGrid& g) {
    os << "x,y,re_ex,im_ex,re_ey,im_ey\n";
    for (int l = 0; l < g.ny; ++l)
        for (int i = 0; i < g.nx; ++i)
            os << fmt(g.x(i)) << ',' << fmt(g.y(l)) << ',' << fmt(g.ex(l, i).real()) << ',' << fmt(g.ex(l, i).imag())
               << ',' << fmt(g.ey(l, i).real()) << ',' << fmt(g.ey(l, i).imag()) << '\n';
}

/// Reads back a matrix CSV (comment lines skipped).
inline ComplexMat read_matrix_csv(std::istream& is) {
    std::string line;
    std::vector<std::tuple<long, long, double, double>> rows;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        long r = 0, c = 0;
        double re = 0.0, im = 0.0;
        if (std::sscanf(line.c_str(), "%ld,%ld,%lf,%lf", &r, &c, &re, &im) != 4) {
            throw ConfigError("malformed matrix row '" + line + "'", "", 0);
        }
        rows.emplace_back(r, c, re, im);
    }
    long nr = 0, nc = 0;
    for (const auto& [r, c, re, im] : rows) {
        nr = std::max(nr, r + 1);
        nc = std::max(nc, c + 1);
    }
    ComplexMat m = ComplexMat::Zero(nr, nc);
    for (const auto& [r, c, re, im] : rows) m(r, c) = cplx(re, im);
    return m;
}

}  // namespace emcm::io
