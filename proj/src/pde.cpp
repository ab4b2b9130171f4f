#include "contagion/pde.hpp"

#include "contagion/errors.hpp"
#include "contagion/normal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace contagion {

namespace {

constexpr double kMinMass = 1e-12;

// Interior operator L p_j = c_lo p_{j-1} + c_mid p_j + c_hi p_{j+1} for
// drift v and diffusion d = sigma^2 / 2.
struct Stencil {
    double lo, mid, hi;
};

Stencil stencil(double v, double d, double h, double sigma) {
    const double diff = d / (h * h);
    if (std::abs(v) * h / (sigma * sigma) <= 2.0) {
        const double conv = v / (2.0 * h);
        return {diff + conv, -2.0 * diff, diff - conv};
    }
    if (v > 0.0) {
        return {diff + v / h, -2.0 * diff - v / h, diff};
    }
    return {diff, -2.0 * diff + v / h, diff - v / h};
}

// Solves (I - a L) x = rhs on interior nodes 1..J-1 with x_0 = x_J = 0.
void thomas(const Stencil& s, double a, std::vector<double>& rhs, std::vector<double>& work) {
    const std::size_t n = rhs.size();
    const double lo = -a * s.lo;
    const double mid = 1.0 - a * s.mid;
    const double hi = -a * s.hi;
    work.resize(n);
    // Forward sweep, interior indices 1..n-2 (0 and n-1 are Dirichlet).
    double denom = mid;
    work[1] = hi / denom;
    rhs[1] /= denom;
    for (std::size_t j = 2; j + 1 < n; ++j) {
        denom = mid - lo * work[j - 1];
        work[j] = hi / denom;
        rhs[j] = (rhs[j] - lo * rhs[j - 1]) / denom;
    }
    for (std::size_t j = n - 2; j > 1; --j) {
        rhs[j - 1] -= work[j - 1] * rhs[j];
    }
    rhs[0] = 0.0;
    rhs[n - 1] = 0.0;
}

// out = p + b L p on interior nodes.
void explicit_part(const Stencil& s, double b, const std::vector<double>& p, std::vector<double>& out) {
    const std::size_t n = p.size();
    out.assign(n, 0.0);
    for (std::size_t j = 1; j + 1 < n; ++j) {
        out[j] = p[j] + b * (s.lo * p[j - 1] + s.mid * p[j] + s.hi * p[j + 1]);
    }
}

double grid_mass(const std::vector<double>& p, double h) {
    double m = 0.0;
    for (double v : p) {
        m += v;
    }
    return h * m;
}

double grid_slope(const std::vector<double>& p, double h) {
    return (4.0 * p[1] - p[2]) / (2.0 * h);
}

}  // namespace

const std::vector<double>& DensityGrid::column(std::size_t k) const {
    const auto it = std::lower_bound(snapshot_steps.begin(), snapshot_steps.end(), k);
    if (it == snapshot_steps.end() || *it != k) {
        throw ValidationError("density column " + std::to_string(k) + " was not stored");
    }
    return snapshots[static_cast<std::size_t>(it - snapshot_steps.begin())];
}

std::vector<double> discretize(const InitialDistribution& f_nu, const SpaceGrid& space) {
    space.validate();
    require(!f_nu.is_point_mass(), "PDE needs an initial density, not a point mass");
    const std::size_t J = space.intervals();
    std::vector<double> p(J + 1, 0.0);
    for (std::size_t j = 1; j < J; ++j) {
        p[j] = density_at(f_nu, space.node(j));
    }
    return p;
}

DensityGrid solve_cdp(const ModelParams& params, const InitialDistribution& f_nu, const LossRate& lam,
                      const SpaceGrid& space, const TimeGrid& time, const PdeOptions& options) {
    require(f_nu.hypothesis() == Hypothesis::pde_admissible,
            "PDE needs a continuous initial density vanishing at 0 (triangular, tabulated or mollified)");
    space.validate_tail(f_nu, params.sigma, params.horizon);
    return solve_cdp_from(params, discretize(f_nu, space), lam, space, time, options);
}

DensityGrid solve_cdp_from(const ModelParams& params, std::vector<double> p0, const LossRate& lam,
                           const SpaceGrid& space, const TimeGrid& time, const PdeOptions& options) {
    params.validate();
    require(params.horizon > 0.0, "PDE runs need horizon > 0");
    space.validate();
    time.validate();
    const std::size_t J = space.intervals();
    require(p0.size() == J + 1, "initial column does not match the space grid");
    require(lam.values.size() == time.n_steps + 1 && std::abs(lam.time.dt - time.dt) <= 1e-15 * time.dt,
            "loss rate must be defined on the PDE time grid");
    p0.front() = 0.0;
    p0.back() = 0.0;

    DensityGrid g;
    g.space = space;
    g.time = time;
    g.start_time = options.start_time;
    const std::size_t n = time.n_steps;
    const std::size_t stride =
        options.snapshot_stride > 0 ? options.snapshot_stride : std::max<std::size_t>(1, (n + 199) / 200);
    g.mass.reserve(n + 1);
    g.boundary_slope.reserve(n + 1);

    const double h = space.h;
    const double d = 0.5 * params.sigma * params.sigma;
    const double dt = time.dt;
    std::vector<double> p = std::move(p0);
    std::vector<double> rhs;
    std::vector<double> work;
    double worst_cfl = 0.0;

    auto record = [&](std::size_t k) {
        const double m = grid_mass(p, h);
        g.mass.push_back(m);
        g.boundary_slope.push_back(grid_slope(p, h));
        if (k % stride == 0 || k == n) {
            g.snapshot_steps.push_back(k);
            g.snapshots.push_back(p);
        }
        // A zero initial column stays zero; only absorption of real mass fails.
        if (!(m >= kMinMass) && g.mass.front() >= kMinMass) {
            std::ostringstream msg;
            msg << "total absorption: mass " << m << " at t = " << g.time_at(k);
            throw NumericalError(msg.str());
        }
    };
    record(0);

    const bool smooth_start = options.rannacher_steps > 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double v = params.alpha + lam.step_value(k);
        worst_cfl = std::max(worst_cfl, std::abs(v) * dt / h);
        const Stencil s = stencil(v, d, h, params.sigma);
        if (smooth_start && k < options.rannacher_steps) {
            for (int half = 0; half < 2; ++half) {
                rhs = p;
                thomas(s, 0.5 * dt, rhs, work);
                p.swap(rhs);
            }
        } else {
            explicit_part(s, 0.5 * dt, p, rhs);
            thomas(s, 0.5 * dt, rhs, work);
            p.swap(rhs);
        }
        record(k + 1);
    }

    if (worst_cfl > 1.0) {
        g.cfl_warning = true;
        std::ostringstream msg;
        msg << "accuracy warning: |alpha + lambda| dt / h reached " << worst_cfl;
        g.warnings.push_back(msg.str());
    }
    return g;
}

std::vector<double> conservation_residual(const DensityGrid& grid, double sigma) {
    const double d = 0.5 * sigma * sigma;
    const double dt = grid.time.dt;
    std::vector<double> r(grid.mass.size(), 0.0);
    double flux = 0.0;
    for (std::size_t k = 1; k < grid.mass.size(); ++k) {
        flux += 0.5 * dt * (grid.boundary_slope[k - 1] + grid.boundary_slope[k]);
        r[k] = grid.mass[k] - grid.mass[0] + d * flux;
    }
    return r;
}

SurvivalBoundsReport check_survival_bounds(const DensityGrid& grid, const ModelParams& params,
                                           const LossRate& lam, const InitialDistribution& f_nu,
                                           double slack) {
    require(lam.values.size() == grid.mass.size(), "loss rate must match the solved grid");
    const std::vector<double> f = discretize(f_nu, grid.space);
    const double h = grid.space.h;
    const double dt = grid.time.dt;

    SurvivalBoundsReport rep;
    rep.slack = slack;
    double exponent = 0.0;  // int_0^t ((alpha + lambda) / sigma)^2 ds
    for (std::size_t k = 0; k < grid.mass.size(); ++k) {
        if (k > 0) {
            const double v = (params.alpha + lam.step_value(k - 1)) / params.sigma;
            exponent += v * v * dt;
        }
        const double t = grid.time.time(k);
        double lo = 0.0;
        double hi = 0.0;
        for (std::size_t j = 1; j + 1 < f.size(); ++j) {
            if (f[j] == 0.0) {
                continue;
            }
            const double hit = t > 0.0 ? 2.0 * norm_cdf(grid.space.node(j) / (params.sigma * std::sqrt(t))) - 1.0
                                       : 1.0;
            lo += hit * hit * f[j];
            hi += std::sqrt(hit) * f[j];
        }
        const double lower = std::exp(-exponent) * h * lo;
        const double upper = std::exp(0.5 * exponent) * h * hi;
        rep.times.push_back(grid.time_at(k));
        rep.lower.push_back(lower);
        rep.mass.push_back(grid.mass[k]);
        rep.upper.push_back(upper);
        if (grid.mass[k] < lower - slack || grid.mass[k] > upper + slack) {
            ++rep.violations;
        }
    }
    return rep;
}

}  // namespace contagion
