#include "fluxlab/scaling.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace fluxlab::scaling {

void ScalingSeries::validate() const {
    if (points.empty()) throw std::invalid_argument("ScalingSeries: empty");
    int prev = 0;
    for (const auto& [L, v] : points) {
        if (L <= prev) throw std::invalid_argument("ScalingSeries: L must be strictly increasing");
        if (!std::isfinite(v)) throw std::invalid_argument("ScalingSeries: non-finite value");
        prev = L;
    }
}

const char* form_name(ScalingForm f) {
    switch (f) {
        case ScalingForm::Constant: return "area";
        case ScalingForm::Log: return "log";
        case ScalingForm::Linear: return "volume";
    }
    return "?";
}

namespace {

double regressor(ScalingForm form, int L) {
    switch (form) {
        case ScalingForm::Constant: return 0.0;
        case ScalingForm::Log: return std::log(static_cast<double>(L));
        case ScalingForm::Linear: return static_cast<double>(L);
    }
    return 0.0;
}

}  // namespace

FitResult fit_form(const ScalingSeries& series, ScalingForm form) {
    series.validate();
    const int n = static_cast<int>(series.points.size());
    const int k = form == ScalingForm::Constant ? 1 : 2;
    if (n < k + (k == 2 ? 1 : 1))
        throw std::invalid_argument("fit_form: too few points for the requested form");

    FitResult out;
    if (form == ScalingForm::Constant) {
        double mean = 0.0;
        for (const auto& [L, v] : series.points) mean += v;
        mean /= n;
        out.a = mean;
        out.b = 0.0;
    } else {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const auto& [L, v] : series.points) {
            const double x = regressor(form, L);
            sx += x;
            sy += v;
            sxx += x * x;
            sxy += x * v;
        }
        const double det = n * sxx - sx * sx;
        if (std::abs(det) < 1e-300) throw std::invalid_argument("fit_form: degenerate design");
        out.b = (n * sxy - sx * sy) / det;
        out.a = (sy - out.b * sx) / n;
    }

    double rss = 0, tss = 0, mean = 0;
    for (const auto& [L, v] : series.points) mean += v;
    mean /= n;
    for (const auto& [L, v] : series.points) {
        const double pred = out.a + out.b * regressor(form, L);
        rss += (v - pred) * (v - pred);
        tss += (v - mean) * (v - mean);
    }
    out.rss = rss;
    out.r_squared = tss > 0 ? 1.0 - rss / tss : 1.0;
    return out;
}

MixedFit fit_mixed(const ScalingSeries& series) {
    series.validate();
    const int n = static_cast<int>(series.points.size());
    if (n < 4) throw std::invalid_argument("fit_mixed: need >= 4 points");
    // normal equations for [1, ln L, L]
    double M[3][3] = {};
    double r[3] = {};
    for (const auto& [L, v] : series.points) {
        const double x[3] = {1.0, std::log(static_cast<double>(L)), static_cast<double>(L)};
        for (int i = 0; i < 3; ++i) {
            r[i] += x[i] * v;
            for (int j = 0; j < 3; ++j) M[i][j] += x[i] * x[j];
        }
    }
    // Cramer solve
    auto det3 = [](const double m[3][3]) {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    const double d = det3(M);
    if (std::abs(d) < 1e-250) throw std::invalid_argument("fit_mixed: degenerate design");
    MixedFit out;
    double tmp[3][3];
    double* coef[3] = {&out.a, &out.b, &out.c};
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) tmp[i][j] = (j == c) ? r[i] : M[i][j];
        *coef[c] = det3(tmp) / d;
    }
    for (const auto& [L, v] : series.points) {
        const double pred = out.a + out.b * std::log(static_cast<double>(L)) + out.c * L;
        out.rss += (v - pred) * (v - pred);
    }
    return out;
}

ScalingFit classify_scaling(const ScalingSeries& series, int min_L, double resolution) {
    series.validate();
    ScalingSeries kept;
    kept.label = series.label;
    for (const auto& p : series.points)
        if (p.first >= min_L) kept.points.push_back(p);
    if (kept.points.size() < 4)
        throw std::invalid_argument("classify_scaling: need >= 4 points with L >= min_L");

    const int n = static_cast<int>(kept.points.size());
    double scale = 0.0;
    for (const auto& [L, v] : kept.points) scale = std::max(scale, std::abs(v));
    const double floor = n * resolution * resolution * scale * scale;
    auto score = [n, floor](double rss, int k) {
        return n * std::log(std::max(std::max(rss, floor), 1e-300) / n) + 2.0 * k;
    };

    const FitResult fc = fit_form(kept, ScalingForm::Constant);
    const FitResult fl = fit_form(kept, ScalingForm::Log);
    const FitResult fv = fit_form(kept, ScalingForm::Linear);

    ScalingFit out;
    out.score_constant = score(fc.rss, 1);
    out.score_log = score(fl.rss, 2);
    out.score_linear = score(fv.rss, 2);

    // minimal score; ties resolved toward fewer parameters, then fixed order
    out.cls = ScalingForm::Constant;
    const FitResult* best = &fc;
    double best_score = out.score_constant;
    if (out.score_log < best_score - 1e-12) {
        out.cls = ScalingForm::Log;
        best = &fl;
        best_score = out.score_log;
    }
    if (out.score_linear < best_score - 1e-12) {
        out.cls = ScalingForm::Linear;
        best = &fv;
        best_score = out.score_linear;
    }
    out.a = best->a;
    out.b = best->b;
    out.rss = best->rss;
    out.r_squared = best->r_squared;
    return out;
}

std::string ScalingFit::to_json() const {
    nlohmann::json j;
    j["class"] = form_name(cls);
    j["a"] = a;
    j["b"] = b;
    j["rss"] = rss;
    j["r_squared"] = r_squared;
    j["scores"] = {{"area", score_constant}, {"log", score_log}, {"volume", score_linear}};
    return j.dump();
}

CorrelationLengthFit correlation_length(const std::vector<std::pair<double, double>>& decay) {
    std::vector<std::pair<double, double>> usable;
    for (const auto& [r, c] : decay)
        if (c > 1e-12) usable.emplace_back(r, std::log(c));
    if (usable.size() < 3)
        throw std::invalid_argument("correlation_length: fewer than 3 usable points");

    const int n = static_cast<int>(usable.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : usable) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-300) throw std::invalid_argument("correlation_length: degenerate r grid");
    const double slope = (n * sxy - sx * sy) / det;
    const double inter = (sy - slope * sx) / n;

    double rss = 0, tss = 0;
    for (const auto& [x, y] : usable) {
        rss += std::pow(y - inter - slope * x, 2);
        tss += std::pow(y - sy / n, 2);
    }

    CorrelationLengthFit out;
    out.amplitude = std::exp(inter);
    out.r_squared = tss > 0 ? 1.0 - rss / tss : 1.0;
    if (slope >= -1e-9) {  // flat within round-off: not decaying
        out.xi = std::numeric_limits<double>::infinity();
        out.decaying = false;
    } else {
        out.xi = -1.0 / slope;
        out.decaying = true;
    }
    return out;
}

}  // namespace fluxlab::scaling
