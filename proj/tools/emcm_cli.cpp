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

// Batch front end. Every output file carries the resolved configuration and
// the library version; nothing time- or host-dependent is written, so equal
// inputs give byte-identical outputs.

#include "emcm/holo_modes.hpp"
#include "emcm/io.hpp"
#include "emcm/metasurface.hpp"
#include "emcm/multiport.hpp"
#include "emcm/ris_optim.hpp"
#include "emcm/wavefield.hpp"

#include "CLI11.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace fs = std::filesystem;
using namespace emcm;
using io::json;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3, kPrecondition = 4 };

struct Options {
    std::string scenario;
    std::string out = ".";
    std::optional<double> epsilon, eta;
    std::optional<int> neumann_order;
    std::optional<double> grid_per_lambda;
    std::optional<std::uint64_t> seed;
};

struct Context {
    std::string command;
    io::Scenario sc;
    fs::path out;

    json envelope() const { return io::envelope(command, io::to_json(sc)); }

    void write(const std::string& name, const std::string& body) const {
        std::ofstream f(out / name, std::ios::binary);
        if (!f) throw io::ConfigError("cannot write " + (out / name).string(), "--out", 0);
        f << body;
    }

    void write_json(const std::string& name, const json& results) const {
        json e = envelope();
        e["results"] = results;
        write(name, e.dump(2) + "\n");
    }

    template <class F>
    void write_csv(const std::string& name, F&& rows) const {
        std::ostringstream os;
        io::csv_preamble(os, envelope());
        rows(os);
        write(name, os.str());
    }
};

int workers() {
    if (const char* w = std::getenv("EMCM_WORKERS")) {
        char* end = nullptr;
        const long n = std::strtol(w, &end, 10);
        if (end != w && *end == '\0' && n >= 1 && n <= 256) return static_cast<int>(n);
        throw io::ConfigError("EMCM_WORKERS must be an integer in [1, 256]", "EMCM_WORKERS", 0);
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Runs f(i) for i in [0, n) on a bounded pool; results are placed by index.
template <class F>
void parallel_for(int n, F&& f) {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex m;
    auto run = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(m);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < std::min(workers(), n); ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

template <class T>
const T& need(const std::optional<T>& section, const char* name, const std::string& command) {
    if (!section) throw io::ConfigError("section required by '" + command + "'", name, 0);
    return *section;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io::ConfigError("cannot open scenario file '" + path + "'", "--scenario", 0);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

void apply_overrides(io::Scenario& sc, const Options& o) {
    if (o.seed) sc.seed = *o.seed;
    if (sc.modes) {
        if (o.epsilon) sc.modes->epsilon = *o.epsilon;
        if (o.grid_per_lambda) sc.modes->grid_per_lambda = *o.grid_per_lambda;
    }
    if (sc.pws && o.eta) sc.pws->eta = *o.eta;
    if (sc.optimize && o.neumann_order) sc.optimize->neumann_order = *o.neumann_order;
}

// ---------------------------------------------------------------- commands

void run_pws(const Context& cx) {
    const io::PwsSection& p = need(cx.sc.pws, "pws", cx.command);
    const double kappa = wavenumber(cx.sc.wavelength);
    wavefield::FieldGrid src = wavefield::FieldGrid::centered(p.nx, p.ny, p.dx, p.dy, cx.sc.wavelength);
    for (int l = 0; l < p.ny; ++l)
        for (int i = 0; i < p.nx; ++i)
            for (const auto& w : p.waves)
                src.ex(l, i) += w.amplitude * std::exp(-j * (kappa * (w.kx * src.x(i) + w.ky * src.y(l))));

    const wavefield::SpectrumGrid spec = wavefield::spectrum_of(src);
    const wavefield::SpectralPower power = wavefield::spectral_power(spec);
    const wavefield::FieldGrid obs = wavefield::propagate(spec, p.z_obs);
    const wavefield::SamplingSpacing s = wavefield::sampling_spacing(p.z_obs, p.eta, kappa);

    cx.write_csv("field_source.csv", [&](std::ostream& os) { io::write_field_csv(os, src); });
    cx.write_csv("field_observed.csv", [&](std::ostream& os) { io::write_field_csv(os, obs); });
    cx.write_json("pws.json", {{"kappa", kappa},
                               {"power_propagating", power.propagating},
                               {"power_evanescent", power.evanescent},
                               {"flagged_grazing_samples", spec.flagged.count()},
                               {"sampling_dx", s.dx},
                               {"sampling_dy", s.dy},
                               {"kappa_max", s.kappa_max},
                               {"far_zone_spacing", cx.sc.wavelength / 2}});
}

metasurface::ImpedanceBlocks blocks_of(const io::Scenario& sc, const std::string& command) {
    return metasurface::build_blocks(need(sc.network, "tx", command));
}

void run_channel(const Context& cx) {
    const auto& net = need(cx.sc.network, "tx", cx.command);
    const io::ChannelSection& ch = need(cx.sc.channel, "channel", cx.command);
    const metasurface::ImpedanceBlocks b = blocks_of(cx.sc, cx.command);
    const auto s = b.n_ris();
    const multiport::EnvironmentReduction red = multiport::reduce_environment(b);
    metasurface::ImpedanceBlocks eff = red.effective;
    eff.Z_SS = b.Z_SS + red.Z_SOS;

    ComplexMat gamma = ComplexMat::Zero(s, s);
    std::optional<ComplexMat> z_s;
    switch (ch.kind) {
        case io::ChannelSection::Loads::matched:
            gamma.setZero();
            z_s = net.z0 * ComplexMat::Identity(s, s);
            break;
        case io::ChannelSection::Loads::open:
            gamma.setIdentity();
            break;
        case io::ChannelSection::Loads::explicit_values:
            if (static_cast<Eigen::Index>(ch.loads.size()) != s) {
                throw io::ConfigError("need one load per RIS element (" + std::to_string(s) + ")", "channel.ris_loads", 0);
            }
            z_s = metasurface::diagonal_loads(ch.loads);
            gamma = metasurface::gamma_from_loads(*z_s, net.z0);
            break;
    }

    const multiport::ScatteringBlocks sb = multiport::z_to_s(eff, net.z0);
    const multiport::ChannelModel hs = multiport::channel_scattering(sb, gamma);
    const ComplexMat direct = eff.Z_RT / (2.0 * net.z0);
    const ComplexMat structural = multiport::structural_scattering(eff, net.z0);
    const bool matched = gamma.cwiseAbs().maxCoeff() == 0.0;
    const bool blocked = direct.cwiseAbs().maxCoeff() == 0.0;

    json r;
    r["formulation"] = multiport::to_string(hs.formulation);
    r["provenance"] = hs.provenance;
    r["H"] = io::matrix_json(hs.H);
    r["H_norm"] = hs.H.norm();
    if (z_s) {
        const multiport::ChannelModel hz = multiport::channel_impedance(eff, *z_s, net.z0);
        r["H_Z_max_relative_difference"] = max_relative_difference(hs.H, hz.H);
    }
    r["direct_term"] = io::matrix_json(direct);
    r["S_StSc"] = io::matrix_json(structural);
    r["gamma_s"] = io::matrix_json(gamma);
    r["environment_ports"] = b.n_env();
    std::vector<std::string> flags;
    if (matched && blocked && hs.H.norm() > 0.0) flags.push_back("structural scattering");
    r["flags"] = flags;

    cx.write_csv("channel.csv", [&](std::ostream& os) { io::write_matrix_csv(os, hs.H); });
    cx.write_csv("structural_scattering.csv", [&](std::ostream& os) { io::write_matrix_csv(os, structural); });
    cx.write_json("channel.json", r);
    for (const auto& f : flags) std::cout << "flag: " << f << "\n";
}

ris_optim::OptimizationProblem problem_of(const io::Scenario& sc, const metasurface::ImpedanceBlocks& b,
                                          const io::OptimizeSection& o) {
    // Environment ports are folded into the link before optimizing.
    const multiport::EnvironmentReduction red = multiport::reduce_environment(b);
    ris_optim::OptimizationProblem p;
    p.blocks = red.effective;
    p.blocks.Z_SS = b.Z_SS + red.Z_SOS;
    p.z0 = sc.network->z0;
    p.objective = o.objective;
    p.x_min = o.x_min;
    p.x_max = o.x_max;
    p.model = o.model;
    p.neumann_order = o.neumann_order;
    p.random_starts = o.random_starts;
    p.seed = sc.seed;
    return p;
}

json result_json(const ris_optim::OptimizationResult& r) {
    return {{"reactances", r.reactances}, {"objective", r.objective}, {"initial_objective", r.initial_objective},
            {"evaluations", r.evaluations}, {"start_index", r.start_index}, {"sweeps", r.sweeps}};
}

void run_optimize(const Context& cx) {
    const io::OptimizeSection& o = need(cx.sc.optimize, "optimize", cx.command);
    const metasurface::ImpedanceBlocks b = blocks_of(cx.sc, cx.command);
    const ris_optim::OptimizationProblem p = problem_of(cx.sc, b, o);
    const ris_optim::OptimizationResult r = ris_optim::optimize_loads(p, o.budget);

    json out = result_json(r);
    out["objective_on_coupled_model"] = ris_optim::evaluate_loads(p.blocks, p.z0, r.reactances);
    out["trace_monotone"] = std::is_sorted(r.trace.begin(), r.trace.end());
    cx.write_json("optimize.json", out);
    cx.write_csv("loads.csv", [&](std::ostream& os) {
        os << "element,reactance\n";
        for (std::size_t i = 0; i < r.reactances.size(); ++i) os << i << ',' << io::fmt(r.reactances[i]) << '\n';
    });
    cx.write_csv("trace.csv", [&](std::ostream& os) {
        os << "step,objective\n";
        for (std::size_t i = 0; i < r.trace.size(); ++i) os << i << ',' << io::fmt(r.trace[i]) << '\n';
    });
}

struct ModesRun {
    holo::PlanarSurface tx, rx;
    holo::ModeSet modes;
    holo::NeDoFReport report;
};

ModesRun solve_modes(const io::Scenario& sc, const std::string& command) {
    const io::ModesSection& m = need(sc.modes, "modes", command);
    ModesRun run;
    run.tx = io::planar_surface(m.tx, sc.wavelength, m.grid_per_lambda);
    run.rx = io::planar_surface(m.rx, sc.wavelength, m.grid_per_lambda);
    run.modes = holo::eigenmodes(holo::coupling_operator(run.tx, run.rx, sc.wavelength));
    run.report = holo::report(run.modes, run.tx, run.rx, sc.wavelength, m.epsilon, m.psi);
    return run;
}

void run_modes(const Context& cx) {
    const ModesRun run = solve_modes(cx.sc, cx.command);
    json r = io::report_json(run.report);
    r["fraunhofer_distance"] = holo::fraunhofer_distance(std::max({run.tx.Lx, run.tx.Ly, run.rx.Lx, run.rx.Ly}), cx.sc.wavelength);
    r["transition_width"] = holo::transition_width(run.modes.mu);
    r["samples_tx"] = run.tx.size();
    r["samples_rx"] = run.rx.size();
    try {
        json sep = json::array();
        for (const auto& s : holo::paraxial_factorization_check(run.modes, run.tx, run.rx, cx.sc.modes->separability_modes)) {
            sep.push_back({{"mode", s.mode + 1}, {"cluster_size", s.cluster_size}, {"residual", s.residual}});
        }
        r["separability"] = sep;
    } catch (const PreconditionError&) {
        r["separability"] = "not applicable: surfaces are not parallel, coaxial and axis-aligned";
    }
    cx.write_csv("spectrum.csv", [&](std::ostream& os) { io::write_spectrum_csv(os, run.modes.mu); });
    cx.write_csv("mode_1_tx.csv", [&](std::ostream& os) {
        // Leading transmit eigenfunction in local surface coordinates.
        wavefield::FieldGrid g;
        g.nx = run.tx.nx;
        g.ny = run.tx.ny;
        g.dx = run.tx.Lx / run.tx.nx;
        g.dy = run.tx.Ly / run.tx.ny;
        g.x0 = run.tx.local_x(0);
        g.y0 = run.tx.local_y(0);
        g.wavelength = cx.sc.wavelength;
        g.ex = ComplexMat(g.ny, g.nx);
        g.ey = ComplexMat::Zero(g.ny, g.nx);
        for (int l = 0; l < g.ny; ++l)
            for (int i = 0; i < g.nx; ++i) g.ex(l, i) = run.modes.phi(l * g.nx + i, 0);
        io::write_field_csv(os, g);
    });
    cx.write_json("modes.json", r);
    std::cout << "N(" << run.report.epsilon << ") = " << run.report.count << ", N2 = " << run.report.estimate << "\n";
}

void run_report(const Context& cx) {
    const io::SweepSection& sw = need(cx.sc.sweep, "sweep", cx.command);
    const io::OptimizeSection& o = need(cx.sc.optimize, "optimize", cx.command);
    const auto& net = need(cx.sc.network, "tx", cx.command);

    const ModesRun run = solve_modes(cx.sc, cx.command);
    const double n2 = run.report.estimate;
    cx.write_csv("eigenvalues.csv", [&](std::ostream& os) {
        os << "m,mu_over_mu1,n2,within_n2\n";
        for (Eigen::Index i = 0; i < run.modes.mu.size(); ++i)
            os << i + 1 << ',' << io::fmt(run.modes.mu(i) / run.modes.mu(0)) << ',' << io::fmt(n2) << ','
               << (static_cast<double>(i + 1) <= n2 ? 1 : 0) << '\n';
    });

    // Fixed RIS aperture; element count per swept axis follows the spacing.
    struct Row {
        double spacing = 0.0;
        int elements = 0;
        double aware = 0.0, unaware = 0.0;
    };
    std::vector<Row> rows(sw.spacings.size());
    parallel_for(static_cast<int>(rows.size()), [&](int k) {
        io::Scenario sc = cx.sc;
        auto& ris = sc.network->ris;
        const double delta = sw.spacings[k];
        const int count = std::max(1, static_cast<int>(std::lround(sw.aperture / delta)));
        ris.cols = count;
        if (net.ris.rows > 1) {
            ris.rows = count;
            ris.row_spacing = delta;
        }
        ris.spacing = delta;
        const metasurface::ImpedanceBlocks b = metasurface::build_blocks(*sc.network);
        io::OptimizeSection aware_cfg = o, blind_cfg = o;
        aware_cfg.model = ris_optim::CouplingModel::coupled;
        blind_cfg.model = ris_optim::CouplingModel::uncoupled;
        const auto pa = problem_of(sc, b, aware_cfg), pb = problem_of(sc, b, blind_cfg);
        const auto ra = ris_optim::optimize_loads(pa, sw.budget);
        const auto rb = ris_optim::optimize_loads(pb, sw.budget);
        rows[k] = {delta, ris.count(), ra.objective, ris_optim::evaluate_loads(pa.blocks, pa.z0, rb.reactances)};
    });
    cx.write_csv("gain_vs_spacing.csv", [&](std::ostream& os) {
        os << "spacing,spacing_over_lambda,elements,gain_coupling_aware,gain_coupling_unaware,ratio\n";
        for (const Row& r : rows)
            os << io::fmt(r.spacing) << ',' << io::fmt(r.spacing / cx.sc.wavelength) << ',' << r.elements << ','
               << io::fmt(r.aware) << ',' << io::fmt(r.unaware) << ',' << io::fmt(r.aware / r.unaware) << '\n';
    });
    json r = io::report_json(run.report);
    r["sweep_points"] = rows.size();
    cx.write_json("report.json", r);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"emcm: electromagnetically consistent channel, optimization and eigenmode analysis.\n"
                 "Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 precondition violation.\n"
                 "Environment: EMCM_WORKERS bounds the worker pool used by sweeps (default: hardware threads)."};
    app.set_version_flag("--version", std::string(kVersion));
    Options opt;
    app.add_option("--scenario", opt.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    app.add_option("--out", opt.out, "Output directory (created if missing)")->capture_default_str();
    app.add_option("--epsilon", opt.epsilon, "NeDoF threshold mu_m/mu_1 (modes, report)")->check(CLI::Range(1e-12, 1.0));
    app.add_option("--eta", opt.eta, "Evanescent amplitude cut-off (pws)")->check(CLI::Range(1e-300, 0.999999));
    app.add_option("--neumann-order", opt.neumann_order, "Neumann series order, 0 = exact (optimize, report)")
        ->check(CLI::Range(0, 64));
    app.add_option("--grid-per-lambda", opt.grid_per_lambda, "Surface samples per wavelength, >= 4 (modes, report)")
        ->check(CLI::Range(4.0, 64.0));
    app.add_option("--seed", opt.seed, "Seed for random optimizer starts");

    const std::vector<std::pair<const char*, const char*>> commands = {
        {"pws", "Plane-wave spectrum, propagation and sampling spacing of the `pws` source"},
        {"channel", "Channel matrix with structural-scattering diagnostics"},
        {"optimize", "Reactive load optimization of the RIS"},
        {"modes", "Eigenmodes and effective degrees of freedom between two surfaces"},
        {"report", "Eigenvalue table and gain-versus-spacing sweep"}};
    for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();
    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    Context cx;
    cx.command = app.get_subcommands().front()->get_name();
    try {
        cx.sc = io::parse_scenario(read_file(opt.scenario));
        apply_overrides(cx.sc, opt);
        if (cx.sc.network && !cx.sc.channel && cx.command == "channel") cx.sc.channel = io::ChannelSection{};
        cx.out = opt.out;
        std::error_code ec;
        fs::create_directories(cx.out, ec);
        if (ec) throw io::ConfigError("cannot create output directory: " + ec.message(), "--out", 0);

        if (cx.command == "pws") run_pws(cx);
        else if (cx.command == "channel") run_channel(cx);
        else if (cx.command == "optimize") run_optimize(cx);
        else if (cx.command == "modes") run_modes(cx);
        else run_report(cx);
    } catch (const io::ConfigError& e) {
        std::cerr << "emcm: configuration error: " << e.what() << "\n";
        return kConfig;
    } catch (const NumericalError& e) {
        std::cerr << "emcm: numerical failure in subsystem '" << e.subsystem() << "': " << e.what() << "\n";
        return kNumerical;
    } catch (const PreconditionError& e) {
        std::cerr << "emcm: precondition violated: " << e.what() << "\n";
        return kPrecondition;
    }
    return kOk;
}
