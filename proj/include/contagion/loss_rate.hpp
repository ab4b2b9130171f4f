#pragma once

#include "contagion/model.hpp"

#include <optional>
#include <vector>

namespace contagion {

/// Loss rate lambda sampled at the nodes of a time grid. Between nodes the
/// PDE uses the step midpoint (lambda_k + lambda_{k+1}) / 2.
struct LossRate {
    TimeGrid time;
    std::vector<double> values;      // n_steps + 1 node values, all <= 0
    std::vector<double> l2_running;  // ||lambda||_{L2[0, t_k]}, trapezoidal
    bool exploded = false;
    std::optional<double> t_reg_estimate;

    static LossRate zero(const TimeGrid& grid);
    static LossRate from_values(const TimeGrid& grid, std::vector<double> values);

    [[nodiscard]] double step_value(std::size_t k) const { return 0.5 * (values[k] + values[k + 1]); }
    [[nodiscard]] double l2_norm() const { return l2_running.empty() ? 0.0 : l2_running.back(); }
    void validate() const;
};

/// L2 norm on a uniform grid, trapezoidal in lambda^2.
double l2_norm(const std::vector<double>& values, double dt);

/// Lambda_t = int_0^t lambda_s ds, trapezoidal.
std::vector<double> loss_from_rate(const LossRate& lam);

}  // namespace contagion
