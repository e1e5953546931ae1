#pragma once

#include <string>
#include <vector>

#include "anosov/cocycle.hpp"
#include "anosov/shadowing.hpp"

namespace anosov {

enum class RegularityDirection { Stable, Unstable };
enum class RegularityVerdict { Differentiable, LipschitzOnly, HolderOnly };
std::string to_string(RegularityDirection d);
std::string to_string(RegularityVerdict v);

struct RegularityProbe {
  PlanePoint x;
  std::vector<double> separations;  // d_f(x, y_k)
  std::vector<double> images;       // d_g(Hx, Hy_k)
  std::vector<double> ratios;
  double derivative = 0;        // Richardson limit of the last two ratios
  double convergence_gap = 0;   // |ratio_last - ratio_prev|
  double exponent = 0;          // slope of log d_g against log d_f
  double fit_residual = 0;      // rms of that fit
  bool cauchy = false;
  bool bounded = false;
};

struct RegularityReport {
  RegularityDirection direction = RegularityDirection::Stable;
  std::vector<RegularityProbe> probes;
  double exponent = 0;         // mean probe exponent, clamped into (0, 1.5]
  double raw_exponent = 0;
  double ratio_law_residual = -1;  // filled by ratio_law_check, -1 when not run
  RegularityVerdict verdict = RegularityVerdict::HolderOnly;
  std::string note = "thresholds are engineering choices: Cauchy within 2%, bounded within a factor 2, slope below 0.98 is Hoelder";
};

// Halving sequence 1e-2, 5e-3, ... with `count` entries.
std::vector<double> dyadic_separations(double largest = 1e-2, int count = 8);

// Ratios d^s_g(Hx, Hy) / d^s_f(x, y) for y on the f-stable leaf of x at the
// given (signed) arclength separations. When `obstruction` is given and its
// max exceeds tol the pair is not conjugate and NotConjugatePair is thrown.
RegularityReport stable_derivative_estimate(const ConjugacyMap& H, const PlanePoint& x,
                                            const std::vector<double>& separations,
                                            const ObstructionReport* obstruction = nullptr, double tol = 1e-6);
RegularityReport stable_regularity(const ConjugacyMap& H, const std::vector<PlanePoint>& probes,
                                   const std::vector<double>& separations,
                                   const ObstructionReport* obstruction = nullptr, double tol = 1e-6);

// Along the unstable leaf of (x, chain) with the unstable affine metric. The
// g-side leaf carries the induced chain. Within the pushed-seed
// parametrisation the affine metric is d^u(z(0), z(s)) = |z'(0)| |s|.
RegularityReport unstable_derivative_estimate(const ConjugacyMap& H, const PastChain& chain,
                                              const std::vector<double>& separations,
                                              const ObstructionReport* obstruction = nullptr, double tol = 1e-6);

// Largest |D_i P(x_i) / (D_j P(x_j)) - 1| over probe pairs; stored in the report.
double ratio_law_check(RegularityReport& rep, const TransferReport& transfer);

std::string regularity_to_json(const RegularityReport& rep);

}  // namespace anosov
