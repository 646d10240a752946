#include "homogfc/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace homogfc {

void validate_kinetics(const KineticsParams& k) {
    if (!(k.A >= 0.0)) throw ConfigError("pre-exponential factor A must be >= 0 (hypothesis (H1); A = 0 allowed for decoupled studies)");
    if (!(k.T_a > 0.0)) throw ConfigError("activation temperature T_a must be > 0 (hypothesis (H4))");
    if (!(k.Q > 0.0)) throw ConfigError("heat release Q must be > 0 (hypothesis (H1))");
}

double arrhenius_f(double T, double T_a) {
    if (T < 0.0)
        throw NumericalError("Arrhenius factor: absolute temperature T = " +
                             std::to_string(T) + " is negative");
    if (T == 0.0) return 0.0;  // continuous extension of exp(-T_a/T)
    return std::exp(-T_a / T);
}

double arrhenius_df(double T, double T_a) {
    if (!(T > 0.0))
        throw NumericalError("Arrhenius derivative: requires T > 0, got " +
                             std::to_string(T));
    return T_a / (T * T) * std::exp(-T_a / T);
}

double reaction_rate(double T, double C, const KineticsParams& k) {
    if (C < 0.0)
        throw NumericalError("reaction rate: concentration C = " +
                             std::to_string(C) + " is negative");
    return k.A * C * arrhenius_f(T, k.T_a);
}

void validate_scales(const CharacteristicScales& s) {
    auto pos = [](double v, const char* name) {
        if (!(v > 0.0))
            throw ConfigError(std::string("characteristic scale ") + name +
                              " must be > 0");
    };
    pos(s.L, "L");
    pos(s.b_c, "b_c");
    pos(s.D_c, "D_c");
    pos(s.lambda_gc, "lambda_gc");
    pos(s.c_gc, "c_gc");
    pos(s.c_sc, "c_sc");
    pos(s.lambda_sc, "lambda_sc");
    pos(s.A_c, "A_c");
    pos(s.Q_c, "Q_c");
    pos(s.C_c, "C_c");
    if (!(s.epsilon > 0.0 && s.epsilon < 1.0))
        throw ConfigError("scale separation epsilon must lie in (0,1)");
}

namespace {

// Nearest exponent gamma in {-1,0,1} with x ~ eps^gamma; exact half-way
// points round toward 0 (prefer the classical regime when ambiguous).
int classify_exponent(double x, double eps) {
    const double g = -std::log(x) / std::log(1.0 / eps);
    const double a = std::abs(g);
    double r = (a - std::floor(a) == 0.5) ? std::floor(a)  // tie: toward 0
                                          : std::floor(a + 0.5);
    r = std::copysign(r, g);
    return static_cast<int>(std::clamp(r, -1.0, 1.0));
}

}  // namespace

DimensionlessReport dimensionless_report(const CharacteristicScales& s) {
    validate_scales(s);
    const double alpha = s.lambda_gc / s.c_gc;  // thermal diffusivity
    DimensionlessReport r;
    r.Pe = s.b_c * s.L / alpha;
    r.Le = alpha / s.D_c;
    r.Da = s.A_c * s.L / alpha;
    r.K = s.lambda_sc / s.lambda_gc;
    r.m = s.c_sc / s.c_gc;
    r.P_T = 1.0;  // observation time fixed to the conductive time scale
    r.gamma_Pe = classify_exponent(r.Pe, s.epsilon);
    r.gamma_Da = classify_exponent(r.Da, s.epsilon);
    r.fast_regime = (r.gamma_Pe == -1 && r.gamma_Da == -1);
    return r;
}

std::string DimensionlessReport::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"Pe\":" << Pe << ",\"Le\":" << Le << ",\"Da\":" << Da
       << ",\"K\":" << K << ",\"m\":" << m << ",\"P_T\":" << P_T
       << ",\"gamma_Pe\":" << gamma_Pe << ",\"gamma_Da\":" << gamma_Da
       << ",\"fast_regime\":" << (fast_regime ? "true" : "false") << "}";
    return os.str();
}

}  // namespace homogfc
