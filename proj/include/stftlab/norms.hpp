#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stftlab/signal.hpp"

namespace stftlab {

/// Smoothness s, integrability p, weight power r, comparison exponent q and
/// the X^p_sigma weight sigma. p, q may be infinity.
struct NormSpec {
  double s = 0.0;
  double p = 2.0;
  double r = 0.0;
  double q = 2.0;
  double sigma = 0.0;

  void validate() const;
  /// s < 1 + 1/p: the modulus map is bounded on W^{s,p}.
  bool below_modulus_threshold() const { return s < 1.0 + 1.0 / p; }
};

/// ||<x>^r F||_{L^p} as a Riemann sum; <x> uses the 2D radius on TF fields.
/// Cells outside `mask` (when given) are skipped.
double lp_weighted_norm(const Signal& f, double p, double r = 0.0);
double lp_weighted_norm(const TFField& f, double p, double r = 0.0,
                        const std::vector<std::uint8_t>* mask = nullptr);

/// <D>^s F via the FFT multiplier (1 + |xi|^2)^{s/2}, xi in cycles per unit.
Signal bessel_potential(const Signal& f, double s);
TFField bessel_potential(const TFField& f, double s);

/// ||<x>^r F||_p + ||<D>^s F||_p.
double frac_sobolev_norm(const Signal& f, const NormSpec& spec);
double frac_sobolev_norm(const TFField& f, const NormSpec& spec);

enum class LPMode { below, at_or_above };

/// Smooth cutoff profile: 1 on [0, 1], 0 on [2, inf), C-infinity between.
double lp_profile(double t);

/// P_{<j} has multiplier lp_profile(|xi| / 2^j); P_{>=j} = Id - P_{<j}.
/// Requires 2^j not above the largest axis Nyquist frequency.
Signal littlewood_paley(const Signal& f, int j, LPMode mode);
TFField littlewood_paley(const TFField& f, int j, LPMode mode);

/// Norm used by distances and witnesses: L^q, W^{s,p}_r, or their sum
/// (the norm of W^{s,p}_r intersected with L^q).
struct DistanceNorm {
  enum class Kind { lq, sobolev, sobolev_lq };
  Kind kind = Kind::lq;
  NormSpec spec;

  static DistanceNorm lq(double q);
  static DistanceNorm sobolev(const NormSpec& spec);
  static DistanceNorm sobolev_lq(const NormSpec& spec);

  double operator()(const Signal& f) const;
  double operator()(const TFField& f) const;
  std::string name() const;
};

struct PhaseDistanceResult {
  double distance = 0.0;
  cplx lambda{1.0, 0.0};        // minimizes ||lambda F - G||
  std::string method;           // "closed-form" or "scan+refine"
  bool degenerate = false;      // <F, G> = 0: every unit lambda is optimal
};

/// inf over |lambda| = 1 of ||lambda F - G||. L^2 uses the closed form
/// lambda = <F, G> / |<F, G>| with <F, G> = sum conj(F) G; other norms scan
/// 720 phases and refine by golden section to 1e-10 rad. A mask restricts
/// the L^q norm to a TF domain (not allowed for Sobolev norms).
PhaseDistanceResult phase_inf_distance(const Signal& f, const Signal& g, const DistanceNorm& norm);
PhaseDistanceResult phase_inf_distance(const TFField& f, const TFField& g, const DistanceNorm& norm,
                                       const std::vector<std::uint8_t>* mask = nullptr);

/// rho = || |g| min |h| || / min(||g||, ||h||) for a decomposition f = g + h.
double disjointness_witness(const Signal& f, const Signal& g, const Signal& h, const DistanceNorm& norm);
double disjointness_witness(const TFField& f, const TFField& g, const TFField& h,
                            const DistanceNorm& norm);

/// || |F| ||_{W^{s,p}_r} / ||F||_{W^{s,p}_r}.
double modulus_sobolev_ratio(const Signal& f, const NormSpec& spec);
double modulus_sobolev_ratio(const TFField& f, const NormSpec& spec);

}  // namespace stftlab
