// curve_fit.hpp — linear segment fits and a small Levenberg-Marquardt driver

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <vector>

namespace dicke {

// One least-squares line over points [lo, hi) of a shared (x, y) sample.
struct LineSegment {
    std::size_t lo = 0;
    std::size_t hi = 0;
    double slope = 0.0;
    double intercept = 0.0;
    double sse = 0.0;
};

LineSegment fit_line(const std::vector<double>& x, const std::vector<double>& y,
                     std::size_t lo, std::size_t hi);

// Partition the sample into n_segments contiguous runs of at least min_points
// each, minimizing total squared error.  Exhaustive over breakpoints; meant
// for sweep-sized inputs (tens of points).
std::vector<LineSegment> segmented_linear_fit(const std::vector<double>& x,
                                              const std::vector<double>& y, int n_segments,
                                              std::size_t min_points = 4);

// Same, but choose the segment count in [1, max_segments] by BIC.
std::vector<LineSegment> best_segmented_fit(const std::vector<double>& x,
                                            const std::vector<double>& y, int max_segments = 3,
                                            std::size_t min_points = 4);

// Residual-based model for levmar_fit: y_pred(t, params).
using ScalarModel = std::function<double(double, const Eigen::VectorXd&)>;

struct LevMarResult {
    Eigen::VectorXd params;
    double rms = 0.0;  // sqrt(SSE / n)
    int iterations = 0;
    bool converged = false;
};

// Dense Levenberg-Marquardt with a forward-difference Jacobian.  Parameters
// are unconstrained; callers encode box constraints through transforms.
LevMarResult levmar_fit(const ScalarModel& model, const Eigen::VectorXd& t,
                        const Eigen::VectorXd& y, const Eigen::VectorXd& initial,
                        int max_iterations = 200, double tol = 1e-12);

} // namespace dicke
