#ifndef FIG8_KEPLER2B_HPP
#define FIG8_KEPLER2B_HPP

namespace fig8 {

/// Two-body stand-in for a distant test particle: all three primaries lumped
/// into a fictitious central mass m = 3 at the origin (G = 1). At an apsis
/// the particle state has the reversible-configuration form (x4, 0, 0, vy4).
struct KeplerApprox {
    enum class Apsis { apocenter, pericenter };
    double a = 0.0;  // semi-major axis
    double e = 0.0;  // eccentricity in [0, 1)
    Apsis apsis = Apsis::apocenter;

    /// Eccentricity with the pericenter sign convention folded in
    /// (pericenter formulas are the apocenter ones with e -> -e).
    double signed_e() const { return apsis == Apsis::pericenter ? -e : e; }

    double apsis_radius() const { return a * (1.0 + signed_e()); }
};

/// Vertical apsis speed sqrt(3(1-e)) / sqrt(x4) of the two-body ellipse with
/// apsis distance x4. Negative e (down to -1) is the pericenter convention;
/// e = 1 is the degenerate radial limit (returns 0).
double approx_velocity(double x4, double e);

/// Eccentricity of the ellipse through apocenter x4 whose orbital period is
/// 2m*tbar: e = x4 * (3 (2m tbar)^2 / (4 pi^2))^(-1/3) - 1. Throws
/// NoPhysicalSolution when the result leaves [0, 1). Note the catalog
/// family's particle sweeps HALF an ellipse per boundary leg, so predictions
/// for a leg of 2m*tbar use the doubled multiplier 2m here.
double eccentricity_from_period(double x4, int m, double tbar);

/// Closed-form seed for the boundary leg T0 = 2m*tbar: the ellipse whose
/// half-period equals the leg (period 4m*tbar), evaluated at the chosen
/// apsis. Returns {x4, vy4, T0}.
struct KeplerSeed {
    double x4;
    double vy4;
    double T0;
    double e;
    double a;
};
KeplerSeed kepler_seed(int m, double e, double tbar,
                       KeplerApprox::Apsis apsis = KeplerApprox::Apsis::apocenter);

}  // namespace fig8

#endif
