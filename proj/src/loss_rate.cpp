#include "contagion/loss_rate.hpp"

#include "contagion/errors.hpp"

#include <cmath>

namespace contagion {

LossRate LossRate::zero(const TimeGrid& grid) {
    return from_values(grid, std::vector<double>(grid.n_steps + 1, 0.0));
}

LossRate LossRate::from_values(const TimeGrid& grid, std::vector<double> values) {
    grid.validate();
    require(values.size() == grid.n_steps + 1, "loss rate needs one value per grid node");
    LossRate lam;
    lam.time = grid;
    lam.values = std::move(values);
    lam.l2_running.assign(lam.values.size(), 0.0);
    double sq = 0.0;
    for (std::size_t k = 1; k < lam.values.size(); ++k) {
        const double a = lam.values[k - 1];
        const double b = lam.values[k];
        sq += 0.5 * grid.dt * (a * a + b * b);
        lam.l2_running[k] = std::sqrt(sq);
    }
    lam.validate();
    return lam;
}

void LossRate::validate() const {
    time.validate();
    require(values.size() == time.n_steps + 1 && l2_running.size() == values.size(),
            "loss rate series do not match its grid");
    for (double v : values) {
        require(std::isfinite(v) && v <= 0.0, "loss rate must be finite and <= 0");
    }
}

double l2_norm(const std::vector<double>& values, double dt) {
    double sq = 0.0;
    for (std::size_t k = 1; k < values.size(); ++k) {
        sq += 0.5 * dt * (values[k - 1] * values[k - 1] + values[k] * values[k]);
    }
    return std::sqrt(sq);
}

std::vector<double> loss_from_rate(const LossRate& lam) {
    std::vector<double> out(lam.values.size(), 0.0);
    for (std::size_t k = 1; k < out.size(); ++k) {
        out[k] = out[k - 1] + 0.5 * lam.time.dt * (lam.values[k - 1] + lam.values[k]);
    }
    return out;
}

}  // namespace contagion
