#pragma once

#include "contagion/model.hpp"
#include "contagion/particle_system.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace contagion {

/// Piecewise-linear density of the surviving population on (0, inf).
/// Abscissae are non-decreasing; a repeated abscissa encodes a jump.
struct Profile {
    std::vector<double> y;
    std::vector<double> p;

    static Profile from_nodes(std::vector<double> y, std::vector<double> p);
    /// Column of a density grid with node spacing h.
    static Profile from_column(const std::vector<double>& column, double h);

    [[nodiscard]] double total_mass() const;
    /// Mass on (0, x].
    [[nodiscard]] double mass_below(double x) const;
    /// Right limit p(x+).
    [[nodiscard]] double value_right(double x) const;
};

struct BoundaryDensityEstimate {
    double time = 0.0;
    double eta = 0.0;
    double normalized_inf = 0.0;
    double normalized_sup = 0.0;
    std::size_t n_samples = 0;  // samples in (0, eta); 0 for grid input
    bool from_grid = false;
    bool reliable = true;  // false when fewer than 50 samples fell in (0, eta)
};

/// Histogram of `values` on (0, eta) with 8 bins; heights are
/// count / (population * width) divided by survivors_mass. population
/// defaults to values.size().
BoundaryDensityEstimate estimate_boundary_density(std::span<const double> values, double survivors_mass,
                                                  double eta, std::size_t population = 0);

/// Min / max of grid values on (0, eta) divided by survivors_mass.
BoundaryDensityEstimate estimate_boundary_density_grid(const std::vector<double>& column, double h,
                                                       double survivors_mass, double eta);

/// Estimates at eta, eta/2, eta/4.
std::vector<BoundaryDensityEstimate> boundary_density_ladder(std::span<const double> values,
                                                             double survivors_mass, double eta,
                                                             std::size_t population = 0);

struct JumpSolution {
    double d_bar = 0.0;
    double f_at_dbar = 0.0;
    double defaulting_mass_fraction = 0.0;
    bool collapse = false;  // no finite root: the whole population defaults
};

/// Smallest y > 0 with y + C ln(1 - m(y)/m(inf)) > 0.
JumpSolution jump_size(const Profile& profile, double exposure_c);

struct CStar {
    double c_star = 0.0;
    double m_star = 0.0;
    double margin_terminal = 0.0;  // c(1+1e-6) - (M+1)/(Phi(3/s) - Phi(2/s))
    double margin_minimum = 0.0;   // c(1+1e-6) - 1/(2 Phi(M/s) - 1)
};

CStar c_star(double sigma);

struct PostEventLoss {
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> iterates;
};

/// Fixed point of L = C [ln int p(y) h_eps(y + L) dy - ln m] from L = 0,
/// h_eps the running-minimum survival over [0, eps].
PostEventLoss post_event_loss(const Profile& profile, double survivors_mass, const ModelParams& params,
                              double epsilon, double tol = 1e-12, std::size_t max_iter = 10000);

struct JumpCertificate {
    bool certified = false;
    double q_sup = 0.0;
    std::size_t iterations = 0;
};

/// q_n = ln m - ln int p(y) P(y - C q_{n-1} + alpha eps + sigma B_eps > 0) dy.
JumpCertificate certify_jump(const Profile& profile, double survivors_mass, const ModelParams& params,
                             double epsilon, double eta, std::size_t max_iter = 10000);

/// LS slope of ln max_i |L_{i+l} - L_i| against ln(l dt) over dyadic lags l.
/// Restricted to grid times in [t0, t1]. Empty when the series is constant.
std::optional<double> holder_exponent(std::span<const double> series, double dt, double t0 = 0.0,
                                      double t1 = std::numeric_limits<double>::infinity());

struct JumpCheck {
    std::size_t event_index = 0;
    double time = 0.0;
    double defaulted_fraction = 0.0;
    double d_bar = 0.0;
    double f_at_dbar = 0.0;
    double loss = 0.0;    // -loss_increment
    double margin = 0.0;  // f_at_dbar - loss
    bool passed = false;
};

struct PhysicalJumpReport {
    std::vector<JumpCheck> checks;
    std::vector<std::size_t> skipped;  // macro events without snapshots
    double slack = 0.0;

    [[nodiscard]] bool all_passed() const;
};

/// Checks -loss_increment <= F(D) + slack on every cascade defaulting at
/// least `min_fraction` of the survivors, from the stored snapshots.
PhysicalJumpReport verify_physical_jump_condition(const SimulationResult& sim, double exposure_c,
                                                  double slack = 0.05, double min_fraction = 0.01);

/// F and the empirical root for one sorted pre-cascade sample.
JumpCheck empirical_jump(std::span<const double> sorted_values, double exposure_c);

}  // namespace contagion
