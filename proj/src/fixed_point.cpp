#include "contagion/fixed_point.hpp"

#include "contagion/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace contagion {

namespace {

constexpr std::size_t kFloorSteps = 4;

double l2_distance(const std::vector<double>& a, const std::vector<double>& b, double dt) {
    std::vector<double> d(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        d[k] = a[k] - b[k];
    }
    return l2_norm(d, dt);
}

struct Iteration {
    bool converged = false;
    std::string failure;
    std::vector<double> lam;      // accepted iterate
    std::vector<double> end_column;
    std::size_t iterations = 0;
    double contraction = 0.0;
    double residual = 0.0;
};

Iteration iterate(std::vector<double> lam, double start, const ModelParams& params,
                  const std::vector<double>& entry, const SpaceGrid& space, const TimeGrid& window, double M,
                  double tol, std::size_t max_iter) {
    Iteration it;
    double prev = -1.0;
    std::size_t growing = 0;
    for (std::size_t n = 1; n <= max_iter; ++n) {
        it.iterations = n;
        PicardOutput out;
        try {
            out = picard_map(LossRate::from_values(window, lam), start, params, entry, space, M);
        } catch (const NumericalError& e) {
            it.failure = e.what();
            return it;
        }
        const double diff = l2_distance(lam, out.lam.values, window.dt);
        if (!std::isfinite(diff)) {
            it.failure = "non-finite iterate";
            return it;
        }
        if (prev > 0.0) {
            const double ratio = diff / prev;
            it.contraction = std::max(it.contraction, ratio);
            growing = ratio > 1.0 ? growing + 1 : 0;
        }
        if (diff < tol) {
            // The input iterate is accepted: its own PDE solution is in hand
            // and its residual is exactly `diff`.
            it.converged = true;
            it.residual = diff;
            it.lam = std::move(lam);
            it.end_column = out.density.final_values();
            return it;
        }
        if (growing >= 2) {
            std::ostringstream msg;
            msg << "no contraction: iterate change grew twice in a row (last " << diff << ")";
            it.failure = msg.str();
            return it;
        }
        prev = diff;
        lam = std::move(out.lam.values);
    }
    std::ostringstream msg;
    msg << "no convergence within " << max_iter << " iterations";
    it.failure = msg.str();
    return it;
}

}  // namespace

PicardOutput picard_map(const LossRate& lam_in, double window_start, const ModelParams& params,
                        const std::vector<double>& entry, const SpaceGrid& space, double M) {
    require(M > 0.0, "truncation level must be > 0");
    const TimeGrid& window = lam_in.time;
    const double norm = l2_norm(lam_in.values, window.dt);
    std::vector<double> truncated = lam_in.values;
    if (norm > M) {
        const double scale = M / norm;
        for (double& v : truncated) {
            v *= scale;
        }
    }
    PdeOptions opt;
    opt.start_time = window_start;
    opt.snapshot_stride = std::max<std::size_t>(1, window.n_steps);
    opt.rannacher_steps = window_start == 0.0 ? 2 : 0;

    PicardOutput out;
    out.density = solve_cdp_from(params, entry, LossRate::from_values(window, std::move(truncated)), space, window,
                                 opt);
    const double d = 0.5 * params.sigma * params.sigma;
    std::vector<double> lam(window.n_steps + 1, 0.0);
    if (params.exposure_c > 0.0) {
        for (std::size_t k = 0; k <= window.n_steps; ++k) {
            lam[k] = std::min(0.0, -params.exposure_c * d * out.density.boundary_slope[k] / out.density.mass[k]);
        }
    }
    out.lam = LossRate::from_values(window, std::move(lam));
    return out;
}

FixedPointResult solve_lambda(const ModelParams& params, const InitialDistribution& f_nu,
                              const FixedPointOptions& options) {
    params.validate();
    require(params.horizon > 0.0, "fixed point needs horizon > 0");
    require(options.window_length > 0.0, "window_length must be > 0");
    require(options.tol > 0.0, "tol must be > 0");
    require(options.max_iter >= 1, "max_iter must be >= 1");
    require(f_nu.hypothesis() == Hypothesis::pde_admissible,
            "fixed point needs a continuous initial density vanishing at 0");
    options.space.validate();
    options.space.validate_tail(f_nu, params.sigma, params.horizon);

    const TimeGrid grid = TimeGrid::covering(params.horizon, options.dt);
    const std::size_t n = grid.n_steps;
    const std::size_t full_len =
        std::max(kFloorSteps, static_cast<std::size_t>(std::llround(options.window_length / options.dt)));
    double M = options.M0 > 0.0 ? options.M0 : 10.0 * params.sigma / std::sqrt(options.window_length);

    FixedPointResult res;
    FixedPointReport& rep = res.report;
    std::vector<double> values(n + 1, 0.0);
    std::vector<double> p = discretize(f_nu, options.space);
    std::size_t k0 = 0;
    std::size_t len_target = full_len;
    double l2_sq = 0.0;
    bool exploded = false;
    std::optional<double> t_reg;

    while (k0 < n) {
        const std::size_t len = std::min(len_target, n - k0);
        const TimeGrid window{options.dt, len};
        const double start = grid.time(k0);
        const std::vector<double> init(len + 1, values[k0]);

        Iteration it = iterate(init, start, params, p, options.space, window, M, options.tol, options.max_iter);
        if (!it.converged) {
            std::ostringstream msg;
            msg << "window [" << start << ", " << grid.time(k0 + len) << "]: " << it.failure;
            rep.notes.push_back(msg.str());
            if (len / 2 < kFloorSteps) {
                exploded = true;
                t_reg = start;
                rep.notes.push_back("window floor reached; declaring explosion");
                break;
            }
            len_target = len / 2;
            ++rep.window_halvings;
            continue;
        }
        const double norm = l2_norm(it.lam, options.dt);
        if (norm > M) {
            M *= 2.0;
            ++rep.truncation_doublings;
            std::ostringstream msg;
            msg << "window [" << start << ", " << grid.time(k0 + len) << "]: truncation active, M -> " << M;
            rep.notes.push_back(msg.str());
            continue;
        }

        WindowReport w;
        w.start = start;
        w.end = grid.time(k0 + len);
        w.iterations = it.iterations;
        w.contraction = it.contraction;
        w.residual = it.residual;
        w.M = M;
        w.l2_window = norm;
        if (options.uniqueness_probe) {
            // Second starting point: 0, or a constant -sigma when the
            // continuation start is already 0.
            const bool init_zero = std::all_of(init.begin(), init.end(), [](double v) { return v == 0.0; });
            const std::vector<double> other(len + 1, init_zero ? -params.sigma : 0.0);
            const Iteration probe =
                iterate(other, start, params, p, options.space, window, M, options.tol, options.max_iter);
            w.probe_iterations = probe.iterations;
            w.probe_gap = probe.converged ? l2_distance(probe.lam, it.lam, options.dt)
                                          : std::numeric_limits<double>::infinity();
        }
        rep.windows.push_back(w);
        rep.final_residual = std::max(rep.final_residual, it.residual);

        for (std::size_t k = 1; k <= len; ++k) {
            values[k0 + k] = it.lam[k];
        }
        if (k0 == 0) {
            values[0] = it.lam[0];
        }
        l2_sq += norm * norm;
        p = std::move(it.end_column);
        k0 += len;
        len_target = std::min(full_len, 2 * len_target);
        if (std::sqrt(l2_sq) > options.explosion_threshold) {
            exploded = true;
            t_reg = grid.time(k0);
            rep.notes.push_back("L2 norm of lambda exceeded the explosion threshold");
            break;
        }
    }

    values.resize(k0 + 1);
    res.lam = LossRate::from_values(TimeGrid{options.dt, k0}, std::move(values));
    res.lam.exploded = exploded;
    res.lam.t_reg_estimate = t_reg;
    return res;
}

}  // namespace contagion
