#pragma once

// Finite-size scaling fits: area (constant), critical (a + b ln L) and
// volume (a + b L) forms in one dimension, information-criterion class
// selection, and correlation-length extraction from correlator decay.

#include <string>
#include <utility>
#include <vector>

namespace fluxlab::scaling {

struct ScalingSeries {
    std::vector<std::pair<int, double>> points;  // (L, value)
    std::string label;

    void validate() const;  // strictly increasing L, finite values
};

enum class ScalingForm { Constant, Log, Linear };

const char* form_name(ScalingForm f);

struct FitResult {
    double a = 0.0;
    double b = 0.0;
    double rss = 0.0;
    double r_squared = 1.0;
};

/// Least squares for value = a, a + b ln L, or a + b L.
FitResult fit_form(const ScalingSeries& series, ScalingForm form);

/// Optional three-parameter form a + b ln L + c L; not used by
/// classify_scaling (overfits at desk-scale point counts).
struct MixedFit {
    double a = 0.0, b = 0.0, c = 0.0, rss = 0.0;
};
MixedFit fit_mixed(const ScalingSeries& series);

struct ScalingFit {
    ScalingForm cls = ScalingForm::Constant;
    double a = 0.0;
    double b = 0.0;
    double rss = 0.0;
    double r_squared = 1.0;
    double score_constant = 0.0;
    double score_log = 0.0;
    double score_linear = 0.0;

    std::string to_json() const;
};

/// Fits all three forms and picks the minimal score n ln(rss/n) + 2k
/// (k = parameter count). Points with L below min_L are excluded; at least
/// four usable points are required. Residual sums are floored at
/// n (resolution * scale)^2 with scale = max |value|, so structure below
/// the data's trust level cannot decide the class; the floor scales with
/// the series and keeps classification invariant under positive rescaling.
ScalingFit classify_scaling(const ScalingSeries& series, int min_L = 8,
                            double resolution = 1e-6);

struct CorrelationLengthFit {
    double xi = 0.0;         // infinity() when not decaying
    double r_squared = 0.0;
    double amplitude = 0.0;  // C in C exp(-r/xi)
    bool decaying = false;
};

/// Log-linear fit of |correlator| = C exp(-r/xi) over separations; points at
/// or below the 1e-12 floor are dropped, >= 3 usable points required.
CorrelationLengthFit correlation_length(const std::vector<std::pair<double, double>>& decay);

}  // namespace fluxlab::scaling
