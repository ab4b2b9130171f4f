#include "contagion/analysis.hpp"

#include "contagion/errors.hpp"
#include "contagion/normal.hpp"
#include "contagion/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>

namespace contagion {

namespace {

constexpr std::size_t kBins = 8;
constexpr std::size_t kMinSamples = 50;

constexpr std::array<double, 5> kGlNodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                            0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGlWeights = {0.2369268850561891, 0.4786286704993665,
                                              0.5688888888888889, 0.4786286704993665,
                                              0.2369268850561891};

// int p(y) g(y) dy over the profile, where g is smooth except for a
// transition of width `scale` around `center` (a kink at most).
double integrate_profile(const Profile& prof, const std::function<double(double)>& g, double center,
                         double scale) {
    const double zone_lo = center - 12.0 * scale;
    const double zone_hi = center + 12.0 * scale;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < prof.y.size(); ++i) {
        const double a = prof.y[i];
        const double b = prof.y[i + 1];
        if (b <= a) {
            continue;
        }
        const double pa = prof.p[i];
        const double slope = (prof.p[i + 1] - pa) / (b - a);
        std::array<double, 5> cuts = {a, std::clamp(zone_lo, a, b), std::clamp(center, a, b),
                                      std::clamp(zone_hi, a, b), b};
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            const double lo = cuts[c];
            const double hi = cuts[c + 1];
            if (hi <= lo) {
                continue;
            }
            const bool in_zone = c == 1 || c == 2;
            const std::size_t panels =
                in_zone ? std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil((hi - lo) / (scale / 4.0))), 4,
                                                  100000)
                        : 4;
            const double w = (hi - lo) / static_cast<double>(panels);
            for (std::size_t k = 0; k < panels; ++k) {
                const double mid = lo + (static_cast<double>(k) + 0.5) * w;
                for (std::size_t q = 0; q < kGlNodes.size(); ++q) {
                    const double y = mid + 0.5 * w * kGlNodes[q];
                    total += 0.5 * w * kGlWeights[q] * (pa + slope * (y - a)) * g(y);
                }
            }
        }
    }
    return total;
}

}  // namespace

Profile Profile::from_nodes(std::vector<double> y, std::vector<double> p) {
    require(y.size() >= 2 && y.size() == p.size(), "profile needs >= 2 nodes and matching values");
    for (std::size_t i = 0; i < y.size(); ++i) {
        require(std::isfinite(y[i]) && std::isfinite(p[i]) && p[i] >= 0.0, "profile values must be finite, >= 0");
        require(y[i] >= 0.0, "profile lives on [0, inf)");
        if (i > 0) {
            require(y[i] >= y[i - 1], "profile abscissae must be non-decreasing");
        }
    }
    return Profile{std::move(y), std::move(p)};
}

Profile Profile::from_column(const std::vector<double>& column, double h) {
    std::vector<double> y(column.size());
    for (std::size_t j = 0; j < y.size(); ++j) {
        y[j] = static_cast<double>(j) * h;
    }
    std::vector<double> p(column.size());
    std::transform(column.begin(), column.end(), p.begin(), [](double v) { return std::max(v, 0.0); });
    return from_nodes(std::move(y), std::move(p));
}

double Profile::total_mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
        m += 0.5 * (p[i] + p[i + 1]) * (y[i + 1] - y[i]);
    }
    return m;
}

double Profile::mass_below(double x) const {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
        const double a = y[i];
        const double b = y[i + 1];
        if (x <= a) {
            break;
        }
        if (x >= b) {
            m += 0.5 * (p[i] + p[i + 1]) * (b - a);
            continue;
        }
        const double s = x - a;
        const double slope = (p[i + 1] - p[i]) / (b - a);
        m += p[i] * s + 0.5 * slope * s * s;
    }
    return m;
}

double Profile::value_right(double x) const {
    const auto it = std::upper_bound(y.begin(), y.end(), x);
    if (it == y.begin() || it == y.end()) {
        return 0.0;
    }
    const auto i = static_cast<std::size_t>(it - y.begin()) - 1;
    const double w = (x - y[i]) / (y[i + 1] - y[i]);
    return p[i] + w * (p[i + 1] - p[i]);
}

BoundaryDensityEstimate estimate_boundary_density(std::span<const double> values, double survivors_mass,
                                                  double eta, std::size_t population) {
    require(eta > 0.0, "eta must be > 0");
    require(survivors_mass > 0.0, "survivors_mass must be > 0");
    const double pop = static_cast<double>(population > 0 ? population : values.size());
    const double width = eta / static_cast<double>(kBins);
    std::array<std::size_t, kBins> counts{};
    std::size_t inside = 0;
    for (double v : values) {
        if (v > 0.0 && v < eta) {
            const auto b = std::min(kBins - 1, static_cast<std::size_t>(v / width));
            ++counts[b];
            ++inside;
        }
    }
    BoundaryDensityEstimate est;
    est.eta = eta;
    est.n_samples = inside;
    est.reliable = inside >= kMinSamples;
    if (inside == 0 || pop == 0.0) {
        return est;
    }
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    const double scale = 1.0 / (pop * width * survivors_mass);
    est.normalized_inf = static_cast<double>(*lo) * scale;
    est.normalized_sup = static_cast<double>(*hi) * scale;
    return est;
}

BoundaryDensityEstimate estimate_boundary_density_grid(const std::vector<double>& column, double h,
                                                       double survivors_mass, double eta) {
    require(eta > 0.0 && h > 0.0, "eta and h must be > 0");
    require(survivors_mass > 0.0, "survivors_mass must be > 0");
    BoundaryDensityEstimate est;
    est.eta = eta;
    est.from_grid = true;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t j = 1; j < column.size() && static_cast<double>(j) * h < eta; ++j) {
        const double v = std::max(column[j], 0.0);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (std::isinf(lo)) {
        // eta below one grid step: no interior node in (0, eta)
        est.reliable = false;
        return est;
    }
    est.normalized_inf = lo / survivors_mass;
    est.normalized_sup = hi / survivors_mass;
    return est;
}

std::vector<BoundaryDensityEstimate> boundary_density_ladder(std::span<const double> values,
                                                             double survivors_mass, double eta,
                                                             std::size_t population) {
    std::vector<BoundaryDensityEstimate> out;
    for (double e : {eta, eta / 2.0, eta / 4.0}) {
        out.push_back(estimate_boundary_density(values, survivors_mass, e, population));
    }
    return out;
}

JumpSolution jump_size(const Profile& profile, double exposure_c) {
    require(exposure_c >= 0.0 && exposure_c < 1.0, "exposure_c must lie in [0, 1)");
    const double total = profile.total_mass();
    require(total > 0.0, "profile has no mass");
    JumpSolution sol;
    if (exposure_c == 0.0) {
        return sol;
    }
    auto G = [&](double y) {
        const double frac = profile.mass_below(y) / total;
        if (frac >= 1.0) {
            return -std::numeric_limits<double>::infinity();
        }
        return y + exposure_c * std::log1p(-frac);
    };
    if (1.0 - exposure_c * profile.value_right(0.0) / total > 1e-12) {
        return sol;  // G grows from 0 immediately
    }

    std::vector<double> pts;
    constexpr int kRefine = 64;
    for (std::size_t i = 0; i + 1 < profile.y.size(); ++i) {
        const double a = profile.y[i];
        const double b = profile.y[i + 1];
        for (int r = 0; r < kRefine; ++r) {
            pts.push_back(a + (b - a) * (r + 1) / kRefine);
        }
    }
    std::sort(pts.begin(), pts.end());
    double lo = 0.0;
    double hi = -1.0;
    for (double y : pts) {
        if (y <= 0.0) {
            continue;
        }
        if (G(y) > 0.0) {
            hi = y;
            break;
        }
        lo = y;
    }
    if (hi < 0.0) {
        sol.collapse = true;
        sol.d_bar = std::numeric_limits<double>::infinity();
        sol.f_at_dbar = std::numeric_limits<double>::infinity();
        sol.defaulting_mass_fraction = 1.0;
        return sol;
    }
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (G(mid) > 0.0 ? hi : lo) = mid;
    }
    const double frac = profile.mass_below(lo) / total;
    sol.d_bar = lo;
    sol.f_at_dbar = -exposure_c * std::log1p(-frac);
    sol.defaulting_mass_fraction = frac;
    return sol;
}

CStar c_star(double sigma) {
    require(sigma > 0.0, "sigma must be > 0");
    const double band = norm_cdf(3.0 / sigma) - norm_cdf(2.0 / sigma);
    auto terminal = [&](double M) { return (M + 1.0) / band; };
    auto minimum = [&](double M) { return 1.0 / (2.0 * norm_cdf(M / sigma) - 1.0); };
    auto objective = [&](double M) { return std::max(terminal(M), minimum(M)); };

    // max(increasing, decreasing) is unimodal in M.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 1e-12;
    double b = 10.0 * sigma + 10.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = objective(x1);
    double f2 = objective(x2);
    while (b - a > 1e-8 * std::max(1.0, a)) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2);
        }
    }
    CStar out;
    out.m_star = 0.5 * (a + b);
    out.c_star = objective(out.m_star);
    const double c = out.c_star * (1.0 + 1e-6);
    out.margin_terminal = c - terminal(out.m_star);
    out.margin_minimum = c - minimum(out.m_star);
    return out;
}

PostEventLoss post_event_loss(const Profile& profile, double survivors_mass, const ModelParams& params,
                              double epsilon, double tol, std::size_t max_iter) {
    require(epsilon > 0.0, "epsilon must be > 0");
    require(survivors_mass > 0.0, "survivors_mass must be > 0");
    require(tol > 0.0 && max_iter >= 1, "tol must be > 0 and max_iter >= 1");
    const double scale = params.sigma * std::sqrt(epsilon);
    const double log_m = std::log(survivors_mass);
    PostEventLoss out;
    double L = 0.0;
    for (std::size_t n = 1; n <= max_iter; ++n) {
        const double shift = L;
        const double integral = integrate_profile(
            profile, [&](double y) { return fp_survival(y + shift, epsilon, params.alpha, params.sigma); }, -shift,
            scale);
        const double next =
            params.exposure_c == 0.0
                ? 0.0
                : (integral > 0.0 ? params.exposure_c * (std::log(integral) - log_m)
                                  : -std::numeric_limits<double>::infinity());
        out.iterates.push_back(next);
        out.iterations = n;
        if (!std::isfinite(next)) {
            out.value = next;
            return out;
        }
        if (std::abs(next - L) < tol) {
            out.value = next;
            out.converged = true;
            return out;
        }
        L = next;
    }
    out.value = L;
    return out;
}

JumpCertificate certify_jump(const Profile& profile, double survivors_mass, const ModelParams& params,
                             double epsilon, double eta, std::size_t max_iter) {
    require(epsilon > 0.0 && eta > 0.0, "epsilon and eta must be > 0");
    require(survivors_mass > 0.0, "survivors_mass must be > 0");
    const double scale = params.sigma * std::sqrt(epsilon);
    const double log_m = std::log(survivors_mass);
    const double target = 2.0 * eta / 3.0;
    JumpCertificate out;
    double q = 0.0;
    for (std::size_t n = 1; n <= max_iter; ++n) {
        const double shift = -params.exposure_c * q + params.alpha * epsilon;
        const double integral =
            integrate_profile(profile, [&](double y) { return norm_cdf((y + shift) / scale); }, -shift, scale);
        const double next =
            integral > 0.0 ? log_m - std::log(integral) : std::numeric_limits<double>::infinity();
        out.iterations = n;
        out.q_sup = std::max(out.q_sup, next);
        if (params.exposure_c > 0.0 && out.q_sup > target) {
            out.certified = true;
            return out;
        }
        if (!std::isfinite(next) || std::abs(next - q) < 1e-15) {
            return out;
        }
        q = next;
    }
    return out;
}

std::optional<double> holder_exponent(std::span<const double> series, double dt, double t0, double t1) {
    require(dt > 0.0, "dt must be > 0");
    const std::size_t n = series.size();
    require(n >= 1, "empty series");
    const auto i0 = static_cast<std::size_t>(std::max(0.0, std::ceil(t0 / dt - 1e-9)));
    const auto i1 = static_cast<std::size_t>(
        std::min(static_cast<double>(n - 1), std::floor(std::min(t1 / dt, 1e300) + 1e-9)));
    require(i1 >= i0 && i1 - i0 + 1 >= 64, "holder_exponent needs >= 64 grid points in the window");
    const std::span<const double> w = series.subspan(i0, i1 - i0 + 1);
    const std::size_t m = w.size();

    std::size_t lags = 3;
    while ((std::size_t{1} << lags) * 256 <= m) {
        ++lags;
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t k = 0; k < lags; ++k) {
        const std::size_t lag = std::size_t{1} << k;
        if (lag >= m) {
            break;
        }
        double worst = 0.0;
        for (std::size_t i = 0; i + lag < m; ++i) {
            worst = std::max(worst, std::abs(w[i + lag] - w[i]));
        }
        if (worst > 0.0) {
            xs.push_back(std::log(static_cast<double>(lag) * dt));
            ys.push_back(std::log(worst));
        }
    }
    if (xs.size() < 2) {
        return std::nullopt;
    }
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxy += (xs[k] - mx) * (ys[k] - my);
        sxx += (xs[k] - mx) * (xs[k] - mx);
    }
    return sxy / sxx;
}

bool PhysicalJumpReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const JumpCheck& c) { return c.passed; });
}

JumpCheck empirical_jump(std::span<const double> v, double exposure_c) {
    require(!v.empty(), "empty snapshot");
    const std::size_t S = v.size();
    auto c = [&](std::size_t j) {
        if (j >= S) {
            return std::numeric_limits<double>::infinity();
        }
        return -exposure_c * std::log1p(-static_cast<double>(j) / static_cast<double>(S));
    };
    // m(y) = #{v <= y} is constant on [v(j), v(j+1)); the first interval
    // where y > c_{m(y)} holds somewhere gives the infimum.
    std::size_t j = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), 0.0) - v.begin());
    double d_bar = std::numeric_limits<double>::infinity();
    for (; j < S; ++j) {
        const double left = j == 0 ? 0.0 : std::max(v[j - 1], 0.0);
        const double cand = std::max(left, c(j));
        if (cand < v[j]) {
            d_bar = cand;
            break;
        }
    }
    JumpCheck out;
    out.d_bar = d_bar;
    const auto below = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), d_bar) - v.begin());
    out.f_at_dbar = c(below);
    return out;
}

PhysicalJumpReport verify_physical_jump_condition(const SimulationResult& sim, double exposure_c,
                                                  double slack, double min_fraction) {
    PhysicalJumpReport rep;
    rep.slack = slack;
    for (std::size_t e = 0; e < sim.events.size(); ++e) {
        const CascadeEvent& ev = sim.events[e];
        const double frac = static_cast<double>(ev.n_defaults) / static_cast<double>(ev.survivors_before);
        if (frac < min_fraction) {
            continue;
        }
        const auto snap = std::find_if(sim.snapshots.begin(), sim.snapshots.end(),
                                       [&](const CascadeSnapshot& s) { return s.event_index == e; });
        if (snap == sim.snapshots.end()) {
            rep.skipped.push_back(e);
            continue;
        }
        JumpCheck chk = empirical_jump(snap->values, exposure_c);
        chk.event_index = e;
        chk.time = ev.time;
        chk.defaulted_fraction = frac;
        chk.loss = -ev.loss_increment;
        // A total collapse has F(D) = loss = inf.
        chk.margin = std::isinf(chk.f_at_dbar) && std::isinf(chk.loss) ? 0.0 : chk.f_at_dbar - chk.loss;
        chk.passed = chk.margin >= -slack;
        rep.checks.push_back(chk);
    }
    return rep;
}

}  // namespace contagion
