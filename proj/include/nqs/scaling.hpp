#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nqs::scaling {

struct DataPoint {
    double n_thousand = 0.0;  // model size in thousands of parameters
    double d_prime = 0.0;     // scaled iterations
    double metric = 0.0;      // V-score or absolute error
};

struct ScaledIterations {
    double scale_factor = 0.0;
    double d_prime = 0.0;
};

// SF = B_mean / search space size; D' = T * SF. A negative n_electrons means
// no particle-number constraint (the full 2^n space).
ScaledIterations compute_scaled_iterations(double t_steps, double b_mean, int n_qubits,
                                           int n_electrons, int multiplicity);

struct ScalingCurve {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0;
    double alpha1 = 0.0, alpha2 = 0.0;
    std::string metric;
    std::string ansatz_name;
    double r2_log = 0.0;     // R^2 of log10 predictions against log10 observations
    double objective = 0.0;  // mean Huber-on-log loss at the fitted parameters
};

double curve_eval(const ScalingCurve& c, double n_thousand, double d_prime);

double huber(double r, double delta);
double huber_log_residual(const ScalingCurve& c, const DataPoint& p, double delta = 1e-3);

struct FitOptions {
    long full_steps = 50000;
    long pilot_steps = 1500;
    int survivors = 8;       // starts promoted from the pilot round to full length
    double lr_peak = 0.05;
    double huber_delta = 1e-3;
    uint64_t seed = 1;
};

// Fits metric = A0 + A1/N^alpha1 + A2/D'^alpha2 by Adam on the mean Huber
// loss of natural-log residuals, with a deterministic multi-start grid over
// the amplitude and exponent initializations. metric is "vscore" (floor 1e-8)
// or "abs_error" (floor 1e-5). Throws when all points share one N or one D'
// value; appends to warnings when the data is thin (< 10 points or < 1 decade
// of span).
ScalingCurve fit_curve(std::vector<DataPoint> points, const std::string& metric,
                       const std::string& ansatz_name, const FitOptions& opt,
                       std::vector<std::string>* warnings = nullptr);

struct FrontierResult {
    double a = 0.0;  // coefficient of the compute-efficient path D' = a * N^b
    double b = 0.0;  // exponent alpha1 / alpha2
};

FrontierResult efficient_frontier(const ScalingCurve& c);

struct Allocation {
    double n_star = 0.0;       // thousands of parameters
    double d_prime_star = 0.0;
};

// Loss-minimizing split of a budget C = k * N * D' between model size and
// scaled iterations; satisfies k * n_star * d_prime_star = C and lies on the
// efficient frontier.
Allocation optimal_allocation(const ScalingCurve& c, double compute, double k);

}  // namespace nqs::scaling
