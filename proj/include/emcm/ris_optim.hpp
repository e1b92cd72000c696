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

// Reactive load optimization for RIS channels with mutual coupling.
//
// Loads are Z_S = diag(j X_n), X_n in [X_min, X_max]. The optimizer is a
// projected cyclic coordinate ascent: each coordinate is scanned on a grid
// uniform in atan(X / Z0) and refined by golden-section search. Moves are
// accepted only when the exact objective does not decrease.

#pragma once

#include "emcm/core.hpp"
#include "emcm/metasurface.hpp"
#include "emcm/multiport.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstdint>
#include <future>
#include <limits>
#include <random>
#include <vector>

namespace emcm::ris_optim {

using metasurface::ImpedanceBlocks;

struct NeumannInverse {
    ComplexMat inverse;
    double spectral_radius = 0.0;  // of A^{-1} Delta
    bool diverges = false;         // spectral_radius >= 1: the truncation is not trustworthy
};

/// Order-k truncation of (A + Delta)^{-1} = sum_i (-A^{-1} Delta)^i A^{-1}.
inline NeumannInverse neumann_inverse(const ComplexMat& a, const ComplexMat& delta, int order,
                                      bool compute_radius = true) {
    require(order >= 0, "neumann_inverse: order must be >= 0");
    require(a.rows() == a.cols() && delta.rows() == a.rows() && delta.cols() == a.cols(),
            "neumann_inverse: shapes must match");
    NeumannInverse out;
    const ComplexMat a_inv = inverse_checked(a, "Neumann base matrix A");
    const ComplexMat step = -a_inv * delta;
    if (compute_radius && a.rows() > 0) {
        out.spectral_radius = Eigen::ComplexEigenSolver<ComplexMat>(step, false).eigenvalues().cwiseAbs().maxCoeff();
        out.diverges = out.spectral_radius >= 1.0;
    }
    ComplexMat term = a_inv;
    out.inverse = a_inv;
    for (int i = 1; i <= order; ++i) {
        term = step * term;
        out.inverse += term;
    }
    return out;
}

/// Squared Frobenius norm of the channel.
inline double gain(const ComplexMat& h) { return h.squaredNorm(); }

enum class Objective { sum_gain, siso };
enum class CouplingModel { coupled, uncoupled };

struct OptimizationProblem {
    ImpedanceBlocks blocks;  // environment, if any, is folded in before optimizing
    double z0 = 50.0;
    Objective objective = Objective::sum_gain;
    double x_min = -20.0 * 50.0;
    double x_max = 20.0 * 50.0;
    CouplingModel model = CouplingModel::coupled;
    int neumann_order = 0;  // 0: exact inner evaluations
    int random_starts = 0;
    std::uint64_t seed = 0;
    int scan_points = 32;
    int golden_iterations = 48;
    int max_sweeps = 200;
};

struct OptimizationResult {
    std::vector<double> reactances;
    double objective = 0.0;
    double initial_objective = 0.0;
    std::vector<double> trace;  // objective after every accepted move, starting with the initial value
    long evaluations = 0;
    int start_index = 0;
    int sweeps = 0;
};

inline void validate(const OptimizationProblem& p) {
    require(std::isfinite(p.x_min) && std::isfinite(p.x_max) && p.x_min < p.x_max,
            "OptimizationProblem: need finite X_min < X_max");
    require(p.z0 > 0.0, "OptimizationProblem: Z0 must be positive");
    require(p.neumann_order >= 0, "OptimizationProblem: Neumann order must be >= 0");
    require(p.scan_points >= 3 && p.golden_iterations >= 1, "OptimizationProblem: search resolution too small");
    require(p.max_sweeps >= 1, "OptimizationProblem: need at least one sweep");
    if (p.objective == Objective::siso) {
        require(p.blocks.n_tx() == 1 && p.blocks.n_rx() == 1, "OptimizationProblem: SISO objective needs 1 Tx, 1 Rx");
    }
}

/// Objective evaluator over reactance vectors for one fixed coupling model.
class LoadEvaluator {
public:
    LoadEvaluator(const ImpedanceBlocks& blocks, double z0, CouplingModel model, int neumann_order = 0)
        : z0_(z0), neumann_order_(neumann_order) {
        const multiport::EnvironmentReduction red = multiport::reduce_environment(blocks);
        z_rt_ = red.effective.Z_RT;
        z_rs_ = red.effective.Z_RS;
        z_st_ = red.effective.Z_ST;
        z_emc_ = blocks.Z_SS + red.Z_SOS;
        if (model == CouplingModel::uncoupled) z_emc_ = ComplexMat(z_emc_.diagonal().asDiagonal());
        off_diagonal_ = z_emc_;
        off_diagonal_.diagonal().setZero();
    }

    Eigen::Index size() const { return z_emc_.rows(); }
    const ComplexMat& z_emc() const { return z_emc_; }

    ComplexMat channel(const std::vector<double>& x) const {
        ComplexMat lhs = z_emc_;
        for (Eigen::Index n = 0; n < size(); ++n) lhs(n, n) += j * x[n];
        return (z_rt_ - z_rs_ * solve_checked(lhs, z_st_, "Z_emc + Z_S")) / (2.0 * z0_);
    }

    double exact(const std::vector<double>& x) const {
        try {
            return gain(channel(x));
        } catch (const NumericalError&) {
            return -std::numeric_limits<double>::infinity();
        }
    }

    /// Objective with the coupled inverse replaced by its Neumann expansion
    /// around the diagonal part; falls back to exact when the series diverges.
    double approximate(const std::vector<double>& x) const {
        if (neumann_order_ <= 0) return exact(x);
        try {
            ComplexMat diag = ComplexMat::Zero(size(), size());
            for (Eigen::Index n = 0; n < size(); ++n) diag(n, n) = z_emc_(n, n) + j * x[n];
            const NeumannInverse inv = neumann_inverse(diag, off_diagonal_, neumann_order_);
            if (inv.diverges) return exact(x);
            return gain((z_rt_ - z_rs_ * inv.inverse * z_st_) / (2.0 * z0_));
        } catch (const NumericalError&) {
            return -std::numeric_limits<double>::infinity();
        }
    }

private:
    ComplexMat z_rt_, z_rs_, z_st_, z_emc_, off_diagonal_;
    double z0_;
    int neumann_order_;
};

namespace detail {

struct Search {
    const LoadEvaluator& eval;
    const OptimizationProblem& problem;
    long budget;
    long evaluations = 0;

    bool exhausted() const { return evaluations >= budget; }

    double probe(const std::vector<double>& x) {
        ++evaluations;
        return eval.approximate(x);
    }

    double confirm(const std::vector<double>& x) {
        ++evaluations;
        return eval.exact(x);
    }
};

// Strictly better, or equal with smaller |X|.
inline bool prefer(double f_new, double x_new, double f_old, double x_old) {
    const double tol = 1e-14 * std::max(std::abs(f_old), 1e-300);
    if (f_new > f_old + tol) return true;
    return std::abs(f_new - f_old) <= tol && std::abs(x_new) < std::abs(x_old);
}

inline OptimizationResult coordinate_ascent(Search& search, std::vector<double> x, int start_index) {
    const OptimizationProblem& p = search.problem;
    const double t_lo = std::atan(p.x_min / p.z0);
    const double t_hi = std::atan(p.x_max / p.z0);
    auto to_x = [&](double t) { return std::clamp(p.z0 * std::tan(t), p.x_min, p.x_max); };

    OptimizationResult r;
    r.start_index = start_index;
    for (double& v : x) v = std::clamp(v, p.x_min, p.x_max);
    double current = search.confirm(x);
    r.initial_objective = current;
    r.trace.push_back(current);

    for (int sweep = 0; sweep < p.max_sweeps && !search.exhausted(); ++sweep) {
        const double before = current;
        for (std::size_t n = 0; n < x.size() && !search.exhausted(); ++n) {
            std::vector<double> trial = x;
            auto f_at = [&](double t) {
                trial[n] = to_x(t);
                return search.probe(trial);
            };
            // Coarse scan, then golden section around the best grid point.
            const int m = p.scan_points;
            const double h = (t_hi - t_lo) / (m - 1);
            int best_i = 0;
            double best_f = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i) {
                const double f = f_at(t_lo + i * h);
                if (f > best_f) {
                    best_f = f;
                    best_i = i;
                }
            }
            double a = t_lo + std::max(0, best_i - 1) * h;
            double b = t_lo + std::min(m - 1, best_i + 1) * h;
            constexpr double g = 0.6180339887498949;
            double c = b - g * (b - a), d = a + g * (b - a);
            double fc = f_at(c), fd = f_at(d);
            for (int it = 0; it < p.golden_iterations; ++it) {
                if (fc >= fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - g * (b - a);
                    fc = f_at(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + g * (b - a);
                    fd = f_at(d);
                }
            }
            double t_best = fc >= fd ? c : d;
            if (std::max(fc, fd) < best_f) t_best = t_lo + best_i * h;

            trial[n] = to_x(t_best);
            const double f_new = search.confirm(trial);
            if (prefer(f_new, trial[n], current, x[n])) {
                x[n] = trial[n];
                current = f_new;
                r.trace.push_back(current);
            }
        }
        r.sweeps = sweep + 1;
        if (current - before <= 1e-12 * std::max(std::abs(current), 1e-300)) break;
    }
    r.reactances = std::move(x);
    r.objective = current;
    r.evaluations = search.evaluations;
    return r;
}

}  // namespace detail

/// Self-resonant start: every load cancels its element's own reactance.
inline std::vector<double> resonant_start(const LoadEvaluator& eval, const OptimizationProblem& p) {
    std::vector<double> x(eval.size());
    for (Eigen::Index n = 0; n < eval.size(); ++n) x[n] = std::clamp(-eval.z_emc()(n, n).imag(), p.x_min, p.x_max);
    return x;
}

/// Multi-start coordinate ascent. Starts: self-resonant, open limit (X_max),
/// the optimum of the coupling-unaware model (coupled problems only), then
/// `random_starts` uniform draws seeded by `seed`. Each start gets the full
/// evaluation budget; the best objective wins, lowest start index on ties.
inline OptimizationResult optimize_loads(const OptimizationProblem& problem, long budget) {
    validate(problem);
    require(budget >= 1, "optimize_loads: budget must be >= 1");
    const LoadEvaluator eval(problem.blocks, problem.z0, problem.model, problem.neumann_order);

    std::vector<std::vector<double>> starts;
    starts.push_back(resonant_start(eval, problem));
    starts.emplace_back(eval.size(), problem.x_max);
    if (problem.model == CouplingModel::coupled) {
        OptimizationProblem unaware = problem;
        unaware.model = CouplingModel::uncoupled;
        unaware.random_starts = 0;
        const LoadEvaluator blind(problem.blocks, problem.z0, CouplingModel::uncoupled, problem.neumann_order);
        detail::Search s{blind, unaware, budget};
        starts.push_back(detail::coordinate_ascent(s, resonant_start(blind, unaware), 0).reactances);
    }
    std::mt19937_64 rng(problem.seed);
    std::uniform_real_distribution<double> uni(problem.x_min, problem.x_max);
    for (int k = 0; k < problem.random_starts; ++k) {
        std::vector<double> x(eval.size());
        for (double& v : x) v = uni(rng);
        starts.push_back(std::move(x));
    }

    std::vector<std::future<OptimizationResult>> jobs;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        jobs.push_back(std::async(std::launch::async, [&, i] {
            detail::Search s{eval, problem, budget};
            return detail::coordinate_ascent(s, starts[i], static_cast<int>(i));
        }));
    }
    OptimizationResult best;
    bool have = false;
    long total_evals = 0;
    for (auto& job : jobs) {
        OptimizationResult r = job.get();
        total_evals += r.evaluations;
        if (!have || r.objective > best.objective) {
            best = std::move(r);
            have = true;
        }
    }
    best.evaluations = total_evals;
    return best;
}

/// Objective of reactances X evaluated on the given coupling model.
inline double evaluate_loads(const ImpedanceBlocks& blocks, double z0, const std::vector<double>& x,
                             CouplingModel model = CouplingModel::coupled) {
    return LoadEvaluator(blocks, z0, model).exact(x);
}

}  // namespace emcm::ris_optim
