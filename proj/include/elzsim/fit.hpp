// Copyright 2026 The elzsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

#include <Eigen/Dense>

namespace elzsim::fit {

template <int N>
using Params = Eigen::Matrix<double, N, 1>;

template <int N>
struct LmResult {
    Params<N> params = Params<N>::Zero();
    /// (J^T W J)^{-1} at the solution; scale by reduced chi2 for
    /// unit-free errors.
    Eigen::Matrix<double, N, N> covariance = Eigen::Matrix<double, N, N>::Zero();
    double chi2 = 0.0;
    std::size_t iterations = 0;
    bool converged = false;

    double reduced_chi2(std::size_t n_points) const {
        return n_points > N ? chi2 / static_cast<double>(n_points - N) : 0.0;
    }
};

struct LmOptions {
    std::size_t max_iterations = 500;
    double relative_tolerance = 1e-12;
    double initial_lambda = 1e-3;
};

/// Weighted least squares of y_i ~ model(x_i, p) by Levenberg-Marquardt.
///
/// `model(x, p, grad)` returns the prediction and writes d/dp into grad.
/// `project(p)` maps a trial step back into the feasible set (bounds).
/// Weights are 1/sigma_i^2; an empty span means unit weights.
template <int N, typename Model, typename Project>
LmResult<N> levenberg_marquardt(std::span<const double> x, std::span<const double> y, std::span<const double> w,
                                Params<N> p0, Model&& model, Project&& project, const LmOptions& opt = {}) {
    using Vec = Params<N>;
    using Mat = Eigen::Matrix<double, N, N>;
    const std::size_t n = x.size();
    auto weight = [&](std::size_t i) { return w.empty() ? 1.0 : w[i]; };

    auto evaluate = [&](const Vec& p, Mat* jtj, Vec* jtr) {
        double chi2 = 0.0;
        if (jtj) jtj->setZero();
        if (jtr) jtr->setZero();
        Vec g;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - model(x[i], p, &g);
            const double wi = weight(i);
            chi2 += wi * r * r;
            if (jtj) *jtj += wi * g * g.transpose();
            if (jtr) *jtr += wi * r * g;
        }
        return chi2;
    };

    LmResult<N> res;
    Vec p = project(p0);
    Mat jtj;
    Vec jtr;
    double chi2 = evaluate(p, &jtj, &jtr);
    double lambda = opt.initial_lambda;
    for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
        Mat a = jtj;
        for (int k = 0; k < N; ++k) a(k, k) += lambda * (jtj(k, k) > 0.0 ? jtj(k, k) : 1.0);
        const Vec step = a.ldlt().solve(jtr);
        const Vec trial = project(Vec(p + step));
        Mat jtj_t;
        Vec jtr_t;
        const double chi2_t = evaluate(trial, &jtj_t, &jtr_t);
        if (std::isfinite(chi2_t) && chi2_t <= chi2) {
            const double improvement = chi2 - chi2_t;
            p = trial;
            jtj = jtj_t;
            jtr = jtr_t;
            chi2 = chi2_t;
            lambda = std::max(lambda * 0.3, 1e-15);
            if (improvement <= opt.relative_tolerance * (chi2 + 1e-300) || step.norm() <= 1e-15 * (p.norm() + 1e-15)) {
                res.converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e16) {
                res.converged = true;  // no downhill direction left
                break;
            }
        }
    }
    res.params = p;
    res.chi2 = chi2;
    Eigen::FullPivLU<Mat> lu(jtj);
    res.covariance = lu.isInvertible() ? Mat(lu.inverse()) : Mat(Mat::Constant(std::numeric_limits<double>::infinity()));
    return res;
}

template <int N, typename Model>
LmResult<N> levenberg_marquardt(std::span<const double> x, std::span<const double> y, std::span<const double> w,
                                Params<N> p0, Model&& model, const LmOptions& opt = {}) {
    return levenberg_marquardt<N>(x, y, w, p0, std::forward<Model>(model), [](const Params<N>& p) { return p; }, opt);
}

}  // namespace elzsim::fit
