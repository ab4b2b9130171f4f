#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace contagion {

/// Global dynamics constants. Log-asset values drift at `alpha` with
/// volatility `sigma`; defaults happen at the barrier 0 and every default
/// costs survivors `exposure_c * log(1 - k/S)` on the log scale.
struct ModelParams {
    double alpha = 0.0;
    double sigma = 1.0;
    double exposure_c = 0.0;
    double horizon = 1.0;

    /// Throws ValidationError. `horizon == 0` is accepted (initial-state-only
    /// particle runs); PDE-facing code additionally requires horizon > 0.
    void validate() const;
};

/// Which regularity assumptions an initial law satisfies.
enum class Hypothesis {
    none,                 // point mass: no density at all
    bounded_density_gap,  // bounded density vanishing on [0, gap]
    pde_admissible,       // additionally continuous with f(0) = 0
};

std::string_view to_string(Hypothesis h);

/// Law of the initial log-asset values. Immutable after construction.
class InitialDistribution {
public:
    enum class Kind { uniform, triangular, tabulated };

    /// uniform(a, a) is accepted as a point mass (sampling only).
    static InitialDistribution uniform(double a, double b, double gap);
    static InitialDistribution triangular(double a, double mode, double b, double gap);
    /// Piecewise-linear density through (grid[i], values[i]); zero outside.
    static InitialDistribution tabulated(std::vector<double> grid, std::vector<double> values, double gap);
    /// As `tabulated`, after rescaling the values to unit mass.
    static InitialDistribution tabulated_normalized(std::vector<double> grid, std::vector<double> values,
                                                    double gap);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double gap() const noexcept { return gap_; }
    [[nodiscard]] bool is_point_mass() const noexcept;
    [[nodiscard]] Hypothesis hypothesis() const noexcept;
    [[nodiscard]] double support_lo() const noexcept;
    [[nodiscard]] double support_hi() const noexcept;
    /// Points where the density is not smooth, in increasing order.
    [[nodiscard]] std::vector<double> breakpoints() const;

    [[nodiscard]] double density(double y) const;
    [[nodiscard]] double cdf(double y) const;
    [[nodiscard]] double quantile(double u) const;

    // Parameters, for serialization.
    [[nodiscard]] const std::vector<double>& params() const noexcept { return params_; }
    [[nodiscard]] const std::vector<double>& grid() const noexcept { return grid_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

private:
    InitialDistribution() = default;
    void validate() const;

    Kind kind_ = Kind::uniform;
    double gap_ = 0.0;
    std::vector<double> params_;  // uniform: a,b   triangular: a,mode,b
    std::vector<double> grid_;
    std::vector<double> values_;
    std::vector<double> cumulative_;  // tabulated: mass up to grid_[i]
};

/// Uniform(a, b) convolved with a Gaussian of standard deviation `width`,
/// tabulated on ramps of +-6 widths and renormalized. Continuous with
/// compact support [a - 6 width, b + 6 width], so it is PDE-admissible.
InitialDistribution mollified_uniform(double a, double b, double width);

/// f_nu(y); 0 outside the support and for y < 0. Throws for point masses.
double density_at(const InitialDistribution& dist, double y);

/// n i.i.d. draws, a pure function of (dist, n, seed).
std::vector<double> sample_initial(const InitialDistribution& dist, std::size_t n, std::uint64_t seed);

/// Integral of g(y) f_nu(y) dy with 5-point Gauss-Legendre on `panels`
/// panels between consecutive breakpoints.
double integrate_against(const InitialDistribution& dist, const std::function<double(double)>& g,
                         int panels = 8);

/// Uniform time grid {0, dt, ..., n_steps dt}.
struct TimeGrid {
    double dt = 1e-3;
    std::size_t n_steps = 0;

    /// Smallest grid whose end covers `horizon` (to within 1e-9 of a step).
    static TimeGrid covering(double horizon, double dt);

    [[nodiscard]] double time(std::size_t k) const noexcept { return static_cast<double>(k) * dt; }
    [[nodiscard]] double end() const noexcept { return time(n_steps); }
    void validate() const;
};

/// Uniform spatial grid {0, h, ..., y_max} truncating the half-line.
struct SpaceGrid {
    double h = 1e-3;
    double y_max = 8.0;

    [[nodiscard]] std::size_t intervals() const noexcept;
    [[nodiscard]] double node(std::size_t j) const noexcept { return static_cast<double>(j) * h; }
    void validate() const;
    /// Requires the nu-mass beyond y_max - 4 sigma sqrt(T) to be below 1e-10.
    void validate_tail(const InitialDistribution& dist, double sigma, double horizon) const;
};

}  // namespace contagion
