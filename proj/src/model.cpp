#include "contagion/model.hpp"

#include "contagion/errors.hpp"
#include "contagion/normal.hpp"
#include "contagion/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace contagion {

namespace {

constexpr double kMassTolerance = 1e-12;

// 5-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 5> kGlNodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                            0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGlWeights = {0.2369268850561891, 0.4786286704993665,
                                              0.5688888888888889, 0.4786286704993665,
                                              0.2369268850561891};

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void ModelParams::validate() const {
    require(finite(alpha), "alpha must be finite");
    require(finite(sigma) && sigma > 0.0, "sigma must be > 0");
    require(finite(exposure_c) && exposure_c >= 0.0 && exposure_c < 1.0, "exposure_c must lie in [0, 1)");
    require(finite(horizon) && horizon >= 0.0, "horizon must be >= 0");
}

std::string_view to_string(Hypothesis h) {
    switch (h) {
        case Hypothesis::none: return "none";
        case Hypothesis::bounded_density_gap: return "bounded_density_gap";
        case Hypothesis::pde_admissible: return "pde_admissible";
    }
    return "unknown";
}

InitialDistribution InitialDistribution::uniform(double a, double b, double gap) {
    InitialDistribution d;
    d.kind_ = Kind::uniform;
    d.gap_ = gap;
    d.params_ = {a, b};
    d.validate();
    return d;
}

InitialDistribution InitialDistribution::triangular(double a, double mode, double b, double gap) {
    InitialDistribution d;
    d.kind_ = Kind::triangular;
    d.gap_ = gap;
    d.params_ = {a, mode, b};
    d.validate();
    return d;
}

InitialDistribution InitialDistribution::tabulated(std::vector<double> grid, std::vector<double> values,
                                                   double gap) {
    InitialDistribution d;
    d.kind_ = Kind::tabulated;
    d.gap_ = gap;
    d.grid_ = std::move(grid);
    d.values_ = std::move(values);
    require(d.grid_.size() >= 2 && d.grid_.size() == d.values_.size(),
            "tabulated density needs >= 2 nodes and matching value count");
    d.cumulative_.assign(d.grid_.size(), 0.0);
    for (std::size_t i = 1; i < d.grid_.size(); ++i) {
        d.cumulative_[i] =
            d.cumulative_[i - 1] + 0.5 * (d.values_[i - 1] + d.values_[i]) * (d.grid_[i] - d.grid_[i - 1]);
    }
    d.validate();
    return d;
}

InitialDistribution InitialDistribution::tabulated_normalized(std::vector<double> grid,
                                                              std::vector<double> values, double gap) {
    require(grid.size() >= 2 && grid.size() == values.size(),
            "tabulated density needs >= 2 nodes and matching value count");
    double mass = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        mass += 0.5 * (values[i - 1] + values[i]) * (grid[i] - grid[i - 1]);
    }
    require(finite(mass) && mass > 0.0, "tabulated density has no mass");
    for (double& v : values) {
        v /= mass;
    }
    return tabulated(std::move(grid), std::move(values), gap);
}

void InitialDistribution::validate() const {
    require(finite(gap_) && gap_ > 0.0, "gap must be > 0");
    switch (kind_) {
        case Kind::uniform: {
            const double a = params_[0];
            const double b = params_[1];
            require(finite(a) && finite(b) && a <= b, "uniform requires a <= b");
            require(a >= gap_, "uniform support must start at or after the gap");
            break;
        }
        case Kind::triangular: {
            const double a = params_[0];
            const double m = params_[1];
            const double b = params_[2];
            require(finite(a) && finite(m) && finite(b) && a <= m && m <= b && a < b,
                    "triangular requires a <= mode <= b and a < b");
            require(a >= gap_, "triangular support must start at or after the gap");
            break;
        }
        case Kind::tabulated: {
            for (std::size_t i = 0; i < grid_.size(); ++i) {
                require(finite(grid_[i]) && finite(values_[i]), "tabulated entries must be finite");
                require(values_[i] >= 0.0, "tabulated density must be non-negative");
                if (i > 0) {
                    require(grid_[i] > grid_[i - 1], "tabulated grid must be strictly increasing");
                }
                if (grid_[i] <= gap_) {
                    require(values_[i] == 0.0, "tabulated density must vanish on [0, gap]");
                }
            }
            require(grid_.front() >= 0.0, "tabulated support must lie in [0, inf)");
            require(density(gap_) == 0.0, "tabulated density must vanish on [0, gap]");
            const double mass = cumulative_.back();
            if (std::abs(mass - 1.0) > kMassTolerance) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "tabulated density must have unit mass (got " << mass << ")";
                throw ValidationError(msg.str());
            }
            break;
        }
    }
}

bool InitialDistribution::is_point_mass() const noexcept {
    return kind_ == Kind::uniform && params_[0] == params_[1];
}

Hypothesis InitialDistribution::hypothesis() const noexcept {
    switch (kind_) {
        case Kind::uniform: return is_point_mass() ? Hypothesis::none : Hypothesis::bounded_density_gap;
        case Kind::triangular: return Hypothesis::pde_admissible;
        case Kind::tabulated:
            return (values_.front() == 0.0 && values_.back() == 0.0) ? Hypothesis::pde_admissible
                                                                      : Hypothesis::bounded_density_gap;
    }
    return Hypothesis::none;
}

double InitialDistribution::support_lo() const noexcept {
    return kind_ == Kind::tabulated ? grid_.front() : params_.front();
}

double InitialDistribution::support_hi() const noexcept {
    return kind_ == Kind::tabulated ? grid_.back() : params_.back();
}

std::vector<double> InitialDistribution::breakpoints() const {
    if (kind_ == Kind::tabulated) {
        return grid_;
    }
    std::vector<double> pts = params_;
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

double InitialDistribution::density(double y) const {
    switch (kind_) {
        case Kind::uniform: {
            const double a = params_[0];
            const double b = params_[1];
            if (a == b) {
                throw ValidationError("point mass has no density");
            }
            return (y >= a && y <= b) ? 1.0 / (b - a) : 0.0;
        }
        case Kind::triangular: {
            const double a = params_[0];
            const double m = params_[1];
            const double b = params_[2];
            if (y <= a || y >= b) {
                return 0.0;
            }
            const double peak = 2.0 / (b - a);
            return y < m ? peak * (y - a) / (m - a) : peak * (b - y) / (b - m);
        }
        case Kind::tabulated: {
            if (y < grid_.front() || y > grid_.back()) {
                return 0.0;
            }
            const auto it = std::upper_bound(grid_.begin(), grid_.end(), y);
            if (it == grid_.end()) {
                return values_.back();
            }
            const auto i = static_cast<std::size_t>(it - grid_.begin()) - 1;
            const double w = (y - grid_[i]) / (grid_[i + 1] - grid_[i]);
            return values_[i] + w * (values_[i + 1] - values_[i]);
        }
    }
    return 0.0;
}

double InitialDistribution::cdf(double y) const {
    switch (kind_) {
        case Kind::uniform: {
            const double a = params_[0];
            const double b = params_[1];
            if (y < a) return 0.0;
            if (y >= b) return 1.0;
            return (y - a) / (b - a);
        }
        case Kind::triangular: {
            const double a = params_[0];
            const double m = params_[1];
            const double b = params_[2];
            if (y <= a) return 0.0;
            if (y >= b) return 1.0;
            if (y <= m) return (y - a) * (y - a) / ((b - a) * (m - a));
            return 1.0 - (b - y) * (b - y) / ((b - a) * (b - m));
        }
        case Kind::tabulated: {
            if (y <= grid_.front()) return 0.0;
            if (y >= grid_.back()) return cumulative_.back();
            const auto it = std::upper_bound(grid_.begin(), grid_.end(), y);
            const auto i = static_cast<std::size_t>(it - grid_.begin()) - 1;
            const double s = y - grid_[i];
            const double slope = (values_[i + 1] - values_[i]) / (grid_[i + 1] - grid_[i]);
            return cumulative_[i] + values_[i] * s + 0.5 * slope * s * s;
        }
    }
    return 0.0;
}

double InitialDistribution::quantile(double u) const {
    require(u >= 0.0 && u <= 1.0, "quantile level must lie in [0, 1]");
    switch (kind_) {
        case Kind::uniform: return params_[0] + u * (params_[1] - params_[0]);
        case Kind::triangular: {
            const double a = params_[0];
            const double m = params_[1];
            const double b = params_[2];
            const double split = (m - a) / (b - a);
            if (u <= split) return a + std::sqrt(u * (b - a) * (m - a));
            return b - std::sqrt((1.0 - u) * (b - a) * (b - m));
        }
        case Kind::tabulated: {
            const double target = u * cumulative_.back();
            auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
            if (it == cumulative_.end()) return grid_.back();
            auto i = static_cast<std::size_t>(it - cumulative_.begin());
            i = i == 0 ? 0 : i - 1;
            const double need = target - cumulative_[i];
            const double width = grid_[i + 1] - grid_[i];
            const double f0 = values_[i];
            const double slope = (values_[i + 1] - f0) / width;
            // Solve f0 s + slope s^2 / 2 = need in the cancellation-free form.
            const double disc = std::max(f0 * f0 + 2.0 * slope * need, 0.0);
            const double denom = f0 + std::sqrt(disc);
            const double s = denom > 0.0 ? 2.0 * need / denom : 0.0;
            return grid_[i] + std::clamp(s, 0.0, width);
        }
    }
    return 0.0;
}

InitialDistribution mollified_uniform(double a, double b, double width) {
    require(width > 0.0 && a < b, "mollified_uniform requires a < b and width > 0");
    const double lo = a - 6.0 * width;
    const double hi = b + 6.0 * width;
    require(lo > 0.0, "mollified_uniform support must stay inside (0, inf)");
    const double spacing = width / 10.0;
    auto smooth = [&](double y) {
        return (norm_cdf((y - a) / width) - norm_cdf((y - b) / width)) / (b - a);
    };
    std::vector<double> grid;
    auto append_range = [&](double from, double to) {
        const auto n = static_cast<std::size_t>(std::ceil((to - from) / spacing - 1e-9));
        for (std::size_t k = 0; k <= n; ++k) {
            const double y = from + (to - from) * static_cast<double>(k) / static_cast<double>(n);
            if (grid.empty() || y > grid.back()) {
                grid.push_back(y);
            }
        }
    };
    if (b - a <= 12.0 * width) {
        append_range(lo, hi);
    } else {
        append_range(lo, a + 6.0 * width);
        append_range(b - 6.0 * width, hi);
    }
    std::vector<double> values(grid.size());
    std::transform(grid.begin(), grid.end(), values.begin(), smooth);
    values.front() = 0.0;
    values.back() = 0.0;
    return InitialDistribution::tabulated_normalized(std::move(grid), std::move(values), lo);
}

double density_at(const InitialDistribution& dist, double y) {
    if (y < 0.0) {
        return 0.0;
    }
    return dist.density(y);
}

std::vector<double> sample_initial(const InitialDistribution& dist, std::size_t n, std::uint64_t seed) {
    require(n >= 1, "sample size must be >= 1");
    const CounterStream stream(seed);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = dist.quantile(stream.uniform(i, 0, StreamTag::initial_values));
    }
    return out;
}

double integrate_against(const InitialDistribution& dist, const std::function<double(double)>& g, int panels) {
    require(panels >= 1, "panels must be >= 1");
    if (dist.is_point_mass()) {
        return g(dist.support_lo());
    }
    const std::vector<double> pts = dist.breakpoints();
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double width = (pts[i + 1] - pts[i]) / panels;
        for (int p = 0; p < panels; ++p) {
            const double mid = pts[i] + (p + 0.5) * width;
            for (std::size_t q = 0; q < kGlNodes.size(); ++q) {
                const double y = mid + 0.5 * width * kGlNodes[q];
                total += 0.5 * width * kGlWeights[q] * g(y) * dist.density(y);
            }
        }
    }
    return total;
}

TimeGrid TimeGrid::covering(double horizon, double dt) {
    require(dt > 0.0 && finite(dt), "dt must be > 0");
    require(horizon >= 0.0 && finite(horizon), "horizon must be >= 0");
    const double ratio = horizon / dt;
    const auto steps = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
    return TimeGrid{dt, steps};
}

void TimeGrid::validate() const {
    require(dt > 0.0 && finite(dt), "dt must be > 0");
}

std::size_t SpaceGrid::intervals() const noexcept {
    return static_cast<std::size_t>(std::llround(y_max / h));
}

void SpaceGrid::validate() const {
    require(h > 0.0 && finite(h) && y_max > 0.0 && finite(y_max), "space grid needs h > 0 and y_max > 0");
    const double ratio = y_max / h;
    require(std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio, "y_max / h must be an integer");
    require(std::round(ratio) >= 16.0, "y_max / h must be >= 16");
}

void SpaceGrid::validate_tail(const InitialDistribution& dist, double sigma, double horizon) const {
    const double cut = y_max - 4.0 * sigma * std::sqrt(horizon);
    const double tail = 1.0 - dist.cdf(cut);
    if (tail >= 1e-10) {
        std::ostringstream msg;
        msg << "y_max too small: initial mass " << tail << " beyond y_max - 4 sigma sqrt(T) = " << cut;
        throw ValidationError(msg.str());
    }
}

}  // namespace contagion
