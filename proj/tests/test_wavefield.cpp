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

#include "emcm/wavefield.hpp"
#include "oracles/planewave_oracle.hpp"

#include <random>

using namespace emcm;
using namespace emcm::wavefield;
using Catch::Approx;

namespace {

constexpr double kLambda = 1.0;
const double kKappa = 2.0 * pi / kLambda;

FieldGrid sampled(const std::vector<oracle::PlaneWave>& waves, int n, double d, double z) {
    FieldGrid g = FieldGrid::centered(n, n, d, d, kLambda);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i) g.ex(l, i) = oracle::plane_wave_sum(waves, kKappa, g.x(i), g.y(l), z);
    return g;
}

FieldGrid random_field(int nx, int ny, double d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    FieldGrid f = FieldGrid::centered(nx, ny, d, d, kLambda);
    for (int l = 0; l < ny; ++l)
        for (int i = 0; i < nx; ++i) {
            f.ex(l, i) = cplx(g(rng), g(rng));
            f.ey(l, i) = cplx(g(rng), g(rng));
        }
    return f;
}

double max_abs(const ComplexMat& m) { return m.cwiseAbs().maxCoeff(); }

double interior_error(const FieldGrid& g, const std::vector<oracle::PlaneWave>& waves, double z) {
    std::mt19937_64 rng(11);
    const double w = (g.nx - 1) * g.dx;
    std::uniform_real_distribution<double> u(g.x0 + 0.3 * w, g.x0 + 0.7 * w);
    std::vector<QueryPoint> q;
    for (int n = 0; n < 60; ++n) q.push_back({u(rng), u(rng)});
    const auto got = reconstruct(g, q);
    double err = 0.0, ref = 0.0;
    for (std::size_t n = 0; n < q.size(); ++n) {
        const cplx exact = oracle::plane_wave_sum(waves, kKappa, q[n].x, q[n].y, z);
        err = std::max(err, std::abs(got[n] - exact));
        ref = std::max(ref, std::abs(exact));
    }
    return err / ref;
}

}  // namespace

TEST_CASE("kz - visible range, boundary and evanescent branch")
{
    CHECK(kz(0, 0, kKappa) == cplx(kKappa, 0));
    CHECK(std::abs(kz(kKappa * 0.6, kKappa * 0.8, kKappa)) < 1e-7 * kKappa);
    const cplx e = kz(2 * kKappa, 0, kKappa);
    CHECK(e.real() == 0.0);
    CHECK(e.imag() == Approx(-std::sqrt(3.0) * kKappa).epsilon(1e-15));
}

TEST_CASE("spectrum_of - pure tone lands in a single bin")
{
    const int n = 32;
    const double d = kLambda / 4;
    const double kx0 = 5 * 2 * pi / (n * d);
    const FieldGrid g = sampled({{1.0, kx0, 0.0}}, n, d, 0.0);
    const SpectrumGrid s = spectrum_of(g);
    Eigen::Index r, c;
    const double peak = s.e_hat_x.cwiseAbs2().maxCoeff(&r, &c);
    CHECK(s.kx(c) == Approx(kx0).epsilon(1e-12));
    CHECK(s.ky(r) == Approx(0.0).margin(1e-12));
    CHECK(peak / s.e_hat_x.cwiseAbs2().sum() >= 0.99);
}

TEST_CASE("spectrum_of - Gaussian profile against the continuous transform")
{
    const double sigma = 0.7;
    const int n = 96;
    const double d = sigma / 4;
    FieldGrid g = FieldGrid::centered(n, n, d, d, kLambda);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            g.ex(l, i) = std::exp(-(g.x(i) * g.x(i) + g.y(l) * g.y(l)) / (2 * sigma * sigma));
    const SpectrumGrid s = spectrum_of(g);
    double worst = 0.0;
    const double scale = oracle::gaussian_spectrum(sigma, 0, 0);
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            worst = std::max(worst, std::abs(s.e_hat_x(l, i) - oracle::gaussian_spectrum(sigma, s.kx(i), s.ky(l))));
    CHECK(worst / scale <= 1e-6);
    CHECK(s.dkx() == Approx(2 * pi / (n * d)).epsilon(1e-15));
}

TEST_CASE("spectrum_of - divergence-free completion and flagged bins")
{
    // dx = lambda/4, n = 8: bin (kx, ky) = (kappa, 0) sits on the visible-range circle.
    const FieldGrid f = random_field(8, 8, kLambda / 4, 1);
    const SpectrumGrid s = spectrum_of(f);
    int flagged = 0;
    for (int l = 0; l < 8; ++l)
        for (int i = 0; i < 8; ++i) {
            if (s.flagged(l, i)) {
                ++flagged;
                CHECK(s.e_hat_z(l, i) == cplx(0.0));
                continue;
            }
            const cplx div = s.kx(i) * s.e_hat_x(l, i) + s.ky(l) * s.e_hat_y(l, i) +
                             kz(s.kx(i), s.ky(l), s.kappa) * s.e_hat_z(l, i);
            const double scale = std::abs(s.kx(i) * s.e_hat_x(l, i)) + std::abs(s.ky(l) * s.e_hat_y(l, i));
            CHECK(std::abs(div) <= 1e-10 * std::max(scale, 1e-300));
        }
    CHECK(flagged >= 1);

    FieldGrid bad = f;
    bad.ex(2, 3) = cplx(std::nan(""), 0.0);
    CHECK_THROWS_AS(spectrum_of(bad), PreconditionError);
}

TEST_CASE("propagate - identity, evanescent decay and propagating phase")
{
    const FieldGrid f = random_field(16, 12, kLambda / 3, 2);
    const FieldGrid back = propagate(spectrum_of(f), 0.0);
    CHECK(max_abs(back.ex - f.ex) <= 1e-12 * max_abs(f.ex));
    CHECK(max_abs(back.ey - f.ey) <= 1e-12 * max_abs(f.ey));

    // dx = lambda/8, n = 16: bins are multiples of kappa/2.
    const FieldGrid ev = sampled({{1.0, 2 * kKappa, 0.0}}, 16, kLambda / 8, 0.0);
    const FieldGrid ev_out = propagate(spectrum_of(ev), kLambda);
    const double factor = std::exp(-std::sqrt(3.0) * 2 * pi);
    CHECK(factor == Approx(1.89e-5).epsilon(0.01));
    CHECK(max_abs(ev_out.ex - factor * ev.ex) <= 1e-12);

    const FieldGrid pr = sampled({{1.0, 0.5 * kKappa, 0.0}}, 16, kLambda / 8, 0.0);
    const double dz = 0.37 * kLambda;
    const FieldGrid pr_out = propagate(spectrum_of(pr), dz);
    const cplx rot = std::exp(-j * (std::sqrt(0.75) * kKappa * dz));
    CHECK(max_abs(pr_out.ex - rot * pr.ex) <= 1e-12);
    CHECK(pr_out.plane_z == Approx(dz));

    CHECK_THROWS_AS(propagate(spectrum_of(pr), -0.1), PreconditionError);
}

TEST_CASE("propagate - Parseval split, unitarity and semigroup")
{
    const FieldGrid f = random_field(24, 20, kLambda / 5, 3);
    const SpectrumGrid s = spectrum_of(f);
    const SpectralPower p = spectral_power(s);
    CHECK(p.propagating >= 0.0);
    CHECK(p.evanescent >= 0.0);
    const double spatial = (f.ex.squaredNorm() + f.ey.squaredNorm()) * f.dx * f.dy;
    CHECK(p.total() == Approx(spatial).epsilon(1e-12));

    for (double dz : {0.1, 0.5, 2.0}) {
        const SpectralPower q = spectral_power(spectrum_of(propagate(s, dz)));
        CHECK(std::abs(q.propagating - p.propagating) <= 1e-10 * p.propagating);
        CHECK(q.evanescent <= p.evanescent);
    }

    const double a = 0.13, b = 0.29;
    const FieldGrid direct = propagate(s, a + b);
    const FieldGrid stepped = propagate(spectrum_of(propagate(s, a)), b);
    CHECK(max_abs(direct.ex - stepped.ex) <= 1e-10 * max_abs(direct.ex));
    CHECK(max_abs(direct.ey - stepped.ey) <= 1e-10 * max_abs(direct.ey));
}

TEST_CASE("sampling_spacing - far zone, closed forms and scan cross-check")
{
    CHECK(sampling_spacing(100 * kLambda, 0.5, kKappa).dx == Approx(kLambda / 2).epsilon(1e-4));

    const double eta = 0.2;
    const double z2 = std::log(1 / eta) / (std::sqrt(3.0) * kKappa);
    CHECK(sampling_spacing(z2, eta, kKappa).dx == Approx(kLambda / 4).epsilon(1e-14));

    const SamplingSpacing s = sampling_spacing(kLambda, std::exp(-2 * pi), kKappa);
    CHECK(s.kappa_max == Approx(std::sqrt(2.0) * kKappa).epsilon(1e-14));
    CHECK(s.dx == Approx(kLambda / (2 * std::sqrt(2.0))).epsilon(1e-14));
    // Largest kx whose decay at z = lambda still exceeds eta, by scanning.
    double last = 0.0;
    for (double kx = 0.0; kx < 3 * kKappa; kx += 1e-5 * kKappa) {
        if (std::exp(-std::abs(kz(kx, 0, kKappa).imag()) * kLambda) >= std::exp(-2 * pi)) last = kx;
    }
    CHECK(last == Approx(s.kappa_max).epsilon(1e-4));

    double prev = 0.0;
    for (double z = 0.01; z < 1000; z *= 1.7) {
        const double dx = sampling_spacing(z, kDefaultEta, kKappa).dx;
        CHECK(dx >= prev);
        CHECK(dx <= kLambda / 2);
        prev = dx;
    }
    CHECK_THROWS_AS(sampling_spacing(0.0, 0.5, kKappa), PreconditionError);
    CHECK_THROWS_AS(sampling_spacing(1.0, 1.0, kKappa), PreconditionError);
}

TEST_CASE("reconstruct - exact at nodes, guard band enforced")
{
    const FieldGrid f = random_field(20, 20, 0.5, 4);
    const std::vector<QueryPoint> nodes{{f.x(5), f.y(7)}, {f.x(12), f.y(3)}};
    const auto v = reconstruct(f, nodes);
    CHECK(v[0] == f.ex(7, 5));
    CHECK(v[1] == f.ex(3, 12));
    CHECK(reconstruct(f, {{f.x(9), f.y(9)}}, Component::y)[0] == f.ey(9, 9));
    CHECK_THROWS_AS(reconstruct(f, {{f.x(0), f.y(9)}}), PreconditionError);
    CHECK_THROWS_AS(reconstruct(f, {{f.x(19) + 1.0, f.y(9)}}), PreconditionError);
}

TEST_CASE("reconstruct - band-limited far-zone field from half-wavelength samples")
{
    const std::vector<oracle::PlaneWave> waves{{cplx(1.0, 0.2), 0.31 * kKappa, -0.42 * kKappa},
                                               {cplx(-0.5, 0.7), -0.66 * kKappa, 0.12 * kKappa},
                                               {cplx(0.8, -0.3), 0.05 * kKappa, 0.71 * kKappa},
                                               {cplx(0.3, 0.3), -0.25 * kKappa, -0.55 * kKappa},
                                               {cplx(0.6, -0.9), 0.52 * kKappa, 0.33 * kKappa}};
    const double z = 50 * kLambda;
    const FieldGrid g = sampled(waves, 128, kLambda / 2, z);
    CHECK(interior_error(g, waves, z) <= 1e-2);
}

TEST_CASE("reconstruct - evanescent content needs sub half-wavelength spacing")
{
    const std::vector<oracle::PlaneWave> waves{{cplx(1.0, 0.2), 0.31 * kKappa, -0.42 * kKappa},
                                               {cplx(-0.5, 0.7), -0.66 * kKappa, 0.12 * kKappa},
                                               {cplx(0.8, -0.3), 0.05 * kKappa, 0.71 * kKappa},
                                               {cplx(0.3, 0.3), -0.25 * kKappa, -0.55 * kKappa},
                                               {cplx(0.6, -0.9), 0.52 * kKappa, 0.33 * kKappa},
                                               {cplx(1.0, 0.0), 1.5 * kKappa, 0.0}};
    const double z = kLambda / 10;
    const double extent = 24 * kLambda;
    const FieldGrid coarse = sampled(waves, static_cast<int>(extent / (kLambda / 2)), kLambda / 2, z);
    const double fine_d = sampling_spacing(z, kDefaultEta, kKappa).dx;
    const FieldGrid fine = sampled(waves, static_cast<int>(extent / fine_d), fine_d, z);
    const double e_coarse = interior_error(coarse, waves, z);
    const double e_fine = interior_error(fine, waves, z);
    CHECK(e_coarse >= 10 * e_fine);
}

TEST_CASE("periodic_design - stated periods and achievable angles")
{
    const double deg = pi / 180;
    const PeriodicDesign d70 = periodic_design(0.0, 70 * deg, kLambda / 10, kLambda);
    CHECK(kLambda / std::sin(70 * deg) == Approx(1.064 * kLambda).epsilon(1e-3));
    CHECK(d70.period == d70.cells_per_period * d70.element_spacing);

    const PeriodicDesign d30 = periodic_design(0.0, 30 * deg, kLambda / 4, kLambda);
    CHECK(d30.exact);
    CHECK(d30.cells_per_period == 8);
    CHECK(d30.period == Approx(2 * kLambda).epsilon(1e-12));

    const auto all = achievable_designs(0.0, kLambda / 2, kLambda, 2, 8);
    REQUIRE(all.size() == 7);
    const double expect[] = {90.0, 41.81, 30.0, 23.58};
    for (int i = 0; i < 4; ++i) CHECK(all[i].theta_r / deg == Approx(expect[i]).margin(0.01));
    for (const auto& d : all) CHECK(std::sin(d.theta_r) == Approx(2.0 / d.cells_per_period).epsilon(1e-14));

    // Non-integer request reports the nearest achievable pair.
    const PeriodicDesign near = periodic_design(0.0, 35 * deg, kLambda / 4, kLambda);
    CHECK_FALSE(near.exact);
    CHECK(near.cells_per_period == 7);
    CHECK(std::sin(near.theta_r) == Approx(kLambda / (7 * kLambda / 4)).epsilon(1e-14));

    CHECK_THROWS_AS(periodic_design(0.2, 0.2, kLambda / 4, kLambda), PreconditionError);
}
