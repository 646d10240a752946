#pragma once

#include <string>

#include "homogfc/errors.hpp"

namespace homogfc {

/// Surface reaction parameters: rate W(T,C) = A C f(T) with the Arrhenius
/// factor f(T) = exp(-T_a/T), first order in the oxidizer concentration.
struct KineticsParams {
    double A = 1.0;    // pre-exponential factor
    double T_a = 1.0;  // activation temperature
    double Q = 1.0;    // heat release
};

void validate_kinetics(const KineticsParams& k);

/// f(T) = exp(-T_a/T); continuously extended by f(0) = 0.
double arrhenius_f(double T, double T_a);

/// f'(T) = (T_a/T^2) exp(-T_a/T), T > 0.
double arrhenius_df(double T, double T_a);

double reaction_rate(double T, double C, const KineticsParams& k);

/// Characteristic quantities used for nondimensionalization and regime
/// classification.
struct CharacteristicScales {
    double L = 1.0;
    double b_c = 1.0;
    double D_c = 1.0;
    double lambda_gc = 1.0;
    double c_gc = 1.0;
    double c_sc = 1.0;
    double lambda_sc = 1.0;
    double A_c = 1.0;
    double Q_c = 1.0;
    double C_c = 1.0;
    double epsilon = 0.1;  // scale separation, in (0,1)
};

void validate_scales(const CharacteristicScales& s);

struct DimensionlessReport {
    double Pe, Le, Da;
    double K;    // conductivity ratio lambda_sc / lambda_gc
    double m;    // heat-capacity ratio c_sc / c_gc
    double P_T;  // conductive-transfer to observation time ratio (1 here)
    int gamma_Pe, gamma_Da;  // nearest exponent in {-1,0,1}: x ~ eps^gamma
    bool fast_regime;        // Pe and Da both O(1/eps)
    std::string to_json() const;
};

DimensionlessReport dimensionless_report(const CharacteristicScales& s);

}  // namespace homogfc
