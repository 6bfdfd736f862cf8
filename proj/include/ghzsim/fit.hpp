// Weighted least-squares power-law fits on log-transformed data.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ghzsim/common.hpp"

namespace ghzsim {

enum class FitModel { PowerLaw, PowerLawTimesLog };

inline const char* fit_model_name(FitModel m) {
    return m == FitModel::PowerLaw ? "power-law" : "power-law-x-log";
}

struct FitPoint {
    double x = 0.0;       // e.g. lattice length L
    double y = 0.0;       // e.g. tau_s or t_tot
    double y_err = 0.0;   // optional absolute error on y (0 = unweighted)
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double cov_ss = 0.0;      // variance of slope
    double cov_ii = 0.0;      // variance of intercept
    double cov_si = 0.0;
    double residual_norm = 0.0;
    FitModel model = FitModel::PowerLaw;
    double x_min = 0.0, x_max = 0.0;  // fit window
};

// y ~ c x^slope, or y ~ c x^slope ln x for the x-log model (the regression
// then runs on log(y / ln x)). Errors propagate to log space as y_err / y.
inline FitResult fit_power_law(const std::vector<FitPoint>& pts, FitModel model = FitModel::PowerLaw) {
    if (pts.size() < 3) throw ConfigError("fit_power_law needs >= 3 points");
    std::vector<double> x, y, w;
    for (const auto& p : pts) {
        if (!(p.x > 0.0) || !(p.y > 0.0))
            throw ConfigError("fit_power_law needs positive data");
        const double ly = (model == FitModel::PowerLawTimesLog)
                              ? std::log(p.y / std::log(p.x))
                              : std::log(p.y);
        x.push_back(std::log(p.x));
        y.push_back(ly);
        w.push_back(p.y_err > 0.0 ? 1.0 / ((p.y_err / p.y) * (p.y_err / p.y)) : 1.0);
    }
    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += w[i];
        swx += w[i] * x[i];
        swy += w[i] * y[i];
        swxx += w[i] * x[i] * x[i];
        swxy += w[i] * x[i] * y[i];
    }
    const double det = sw * swxx - swx * swx;
    if (std::abs(det) < 1e-14 * sw * swxx || det == 0.0)
        throw ConfigError("fit_power_law: degenerate design matrix");
    FitResult r;
    r.model = model;
    r.slope = (sw * swxy - swx * swy) / det;
    r.intercept = (swxx * swy - swx * swxy) / det;
    r.cov_ss = sw / det;
    r.cov_ii = swxx / det;
    r.cov_si = -swx / det;
    double res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = y[i] - (r.intercept + r.slope * x[i]);
        res += w[i] * d * d;
    }
    r.residual_norm = std::sqrt(res);
    r.x_min = std::exp(*std::min_element(x.begin(), x.end()));
    r.x_max = std::exp(*std::max_element(x.begin(), x.end()));
    return r;
}

} // namespace ghzsim
