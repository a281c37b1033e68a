#include "nqs/scaling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "nqs/parallel.hpp"
#include "nqs/pauli.hpp"

namespace nqs::scaling {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double softplus(double u) { return u > 20.0 ? u : std::log1p(std::exp(u)); }
double softplus_inverse(double y) { return y > 20.0 ? y : std::log(std::expm1(y)); }
double sigmoid(double u) { return u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u)); }

struct FitData {
    std::vector<double> log_n, log_d, log_y;
};

// Parameter vector layout: u0 (A0 = softplus), ln A1, ln A2, alpha1, alpha2.
struct Objective {
    const FitData* data;
    double delta;

    double eval(const std::array<double, 5>& u, std::array<double, 5>* grad) const {
        const double a0 = softplus(u[0]);
        const double a1 = std::exp(u[1]), a2 = std::exp(u[2]);
        const double al1 = u[3], al2 = u[4];
        double loss = 0.0;
        if (grad) grad->fill(0.0);
        const size_t npts = data->log_y.size();
        for (size_t i = 0; i < npts; ++i) {
            const double term1 = a1 * std::exp(-al1 * data->log_n[i]);
            const double term2 = a2 * std::exp(-al2 * data->log_d[i]);
            const double f = a0 + term1 + term2;
            const double r = std::log(f) - data->log_y[i];
            const double ar = std::fabs(r);
            loss += ar <= delta ? 0.5 * r * r : delta * (ar - 0.5 * delta);
            if (grad) {
                const double dLdr = ar <= delta ? r : (r > 0.0 ? delta : -delta);
                const double dLdf = dLdr / f;
                (*grad)[0] += dLdf * sigmoid(u[0]);
                (*grad)[1] += dLdf * term1;
                (*grad)[2] += dLdf * term2;
                (*grad)[3] += dLdf * (-term1 * data->log_n[i]);
                (*grad)[4] += dLdf * (-term2 * data->log_d[i]);
            }
        }
        const double scale = 1.0 / static_cast<double>(npts);
        if (grad)
            for (double& g : *grad) g *= scale;
        return loss * scale;
    }
};

// Plain Adam with cosine-annealed learning rate on the five fit parameters.
double run_adam(const Objective& obj, std::array<double, 5>& u, long steps, double lr_peak) {
    std::array<double, 5> m{}, v{};
    std::array<double, 5> g{};
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    for (long t = 0; t < steps; ++t) {
        obj.eval(u, &g);
        const double frac = steps > 1 ? static_cast<double>(t) / static_cast<double>(steps - 1) : 1.0;
        const double lr = lr_peak * 0.5 * (1.0 + std::cos(kPi * frac));
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(t + 1));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(t + 1));
        for (size_t i = 0; i < 5; ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            u[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
    return obj.eval(u, nullptr);
}

}  // namespace

ScaledIterations compute_scaled_iterations(double t_steps, double b_mean, int n_qubits,
                                           int n_electrons, int multiplicity) {
    const double space =
        n_electrons >= 0
            ? static_cast<double>(pauli::search_space_size(n_qubits, n_electrons, multiplicity))
            : std::pow(2.0, n_qubits);
    ScaledIterations out;
    out.scale_factor = b_mean / space;
    out.d_prime = t_steps * out.scale_factor;
    return out;
}

double curve_eval(const ScalingCurve& c, double n_thousand, double d_prime) {
    return c.a0 + c.a1 / std::pow(n_thousand, c.alpha1) + c.a2 / std::pow(d_prime, c.alpha2);
}

double huber(double r, double delta) {
    const double ar = std::fabs(r);
    return ar <= delta ? 0.5 * r * r : delta * (ar - 0.5 * delta);
}

double huber_log_residual(const ScalingCurve& c, const DataPoint& p, double delta) {
    if (p.metric <= 0.0) throw std::invalid_argument("metric value must be positive");
    return huber(std::log(curve_eval(c, p.n_thousand, p.d_prime)) - std::log(p.metric), delta);
}

ScalingCurve fit_curve(std::vector<DataPoint> points, const std::string& metric,
                       const std::string& ansatz_name, const FitOptions& opt,
                       std::vector<std::string>* warnings) {
    if (points.empty()) throw std::invalid_argument("no data points to fit");
    double floor_value;
    if (metric == "vscore") floor_value = 1e-8;
    else if (metric == "abs_error") floor_value = 1e-5;
    else throw std::invalid_argument("metric must be vscore or abs_error");

    std::set<double> distinct_n, distinct_d;
    for (DataPoint& p : points) {
        if (p.n_thousand <= 0.0 || p.d_prime <= 0.0)
            throw std::invalid_argument("data points need positive N and D'");
        p.metric = std::max(p.metric, floor_value);
        distinct_n.insert(p.n_thousand);
        distinct_d.insert(p.d_prime);
    }
    if (distinct_n.size() < 2 || distinct_d.size() < 2)
        throw std::invalid_argument("fit needs at least two distinct N and two distinct D' values");
    if (warnings) {
        if (points.size() < 10) warnings->push_back("fewer than 10 data points");
        if (*distinct_n.rbegin() / *distinct_n.begin() < 10.0)
            warnings->push_back("N spans less than one decade");
        if (*distinct_d.rbegin() / *distinct_d.begin() < 10.0)
            warnings->push_back("D' spans less than one decade");
    }

    FitData data;
    double min_metric = std::numeric_limits<double>::infinity();
    for (const DataPoint& p : points) {
        data.log_n.push_back(std::log(p.n_thousand));
        data.log_d.push_back(std::log(p.d_prime));
        data.log_y.push_back(std::log(p.metric));
        min_metric = std::min(min_metric, p.metric);
    }
    const Objective obj{&data, opt.huber_delta};
    const double u0_init = softplus_inverse(0.5 * min_metric);

    const double alphas[] = {0.5, 1.0, 2.0, 4.0, 8.0};
    const double log10_amps[] = {-5.0, -3.0, -1.0, 0.0, 1.0};
    std::vector<std::array<double, 5>> starts;
    for (double e1 : log10_amps)
        for (double e2 : log10_amps)
            for (double al1 : alphas)
                for (double al2 : alphas)
                    starts.push_back({u0_init, e1 * std::log(10.0), e2 * std::log(10.0), al1, al2});

    // Short pilot round over the whole grid, then full-length runs for the
    // best few starts. Everything is deterministic, so the parallel loop only
    // fills per-start slots.
    std::vector<double> pilot_obj(starts.size());
    parallel::parallel_for(starts.size(), [&](size_t i) {
        std::array<double, 5> u = starts[i];
        pilot_obj[i] = run_adam(obj, u, opt.pilot_steps, opt.lr_peak);
    });
    std::vector<size_t> order(starts.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (pilot_obj[a] != pilot_obj[b]) return pilot_obj[a] < pilot_obj[b];
        return a < b;
    });
    const size_t n_full = std::min(static_cast<size_t>(opt.survivors), starts.size());

    std::vector<std::array<double, 5>> finals(n_full);
    std::vector<double> final_obj(n_full);
    parallel::parallel_for(n_full, [&](size_t i) {
        finals[i] = starts[order[i]];
        final_obj[i] = run_adam(obj, finals[i], opt.full_steps, opt.lr_peak);
    });
    size_t best = 0;
    for (size_t i = 1; i < n_full; ++i)
        if (final_obj[i] < final_obj[best]) best = i;

    ScalingCurve c;
    c.a0 = softplus(finals[best][0]);
    c.a1 = std::exp(finals[best][1]);
    c.a2 = std::exp(finals[best][2]);
    c.alpha1 = finals[best][3];
    c.alpha2 = finals[best][4];
    c.metric = metric;
    c.ansatz_name = ansatz_name;
    c.objective = final_obj[best];

    double mean_ly = 0.0;
    for (const DataPoint& p : points) mean_ly += std::log10(p.metric);
    mean_ly /= static_cast<double>(points.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (const DataPoint& p : points) {
        const double ly = std::log10(p.metric);
        const double lf = std::log10(curve_eval(c, p.n_thousand, p.d_prime));
        ss_res += (ly - lf) * (ly - lf);
        ss_tot += (ly - mean_ly) * (ly - mean_ly);
    }
    c.r2_log = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    return c;
}

FrontierResult efficient_frontier(const ScalingCurve& c) {
    if (c.a1 <= 0.0 || c.a2 <= 0.0 || c.alpha1 <= 0.0 || c.alpha2 <= 0.0)
        throw std::invalid_argument("frontier needs positive amplitudes and exponents");
    FrontierResult f;
    f.b = c.alpha1 / c.alpha2;
    f.a = std::pow(c.alpha1 * c.a1 / (c.alpha2 * c.a2), 1.0 / c.alpha2);
    return f;
}

Allocation optimal_allocation(const ScalingCurve& c, double compute, double k) {
    if (compute <= 0.0 || k <= 0.0) throw std::invalid_argument("budget and k must be positive");
    if (c.a1 <= 0.0 || c.a2 <= 0.0 || c.alpha1 <= 0.0 || c.alpha2 <= 0.0)
        throw std::invalid_argument("allocation needs positive amplitudes and exponents");
    const double ratio = c.alpha2 * c.a2 / (c.alpha1 * c.a1);
    const double asum = c.alpha1 + c.alpha2;
    Allocation out;
    out.n_star = std::pow(ratio, 1.0 / asum) * std::pow(compute / k, c.alpha2 / asum);
    out.d_prime_star = std::pow(1.0 / ratio, 1.0 / asum) * std::pow(compute / k, c.alpha1 / asum);
    return out;
}

}  // namespace nqs::scaling
