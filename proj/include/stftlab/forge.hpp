#pragma once

#include <string>
#include <vector>

#include "stftlab/norms.hpp"
#include "stftlab/signal.hpp"
#include "stftlab/transforms.hpp"

// Bump-sequence instability construction on a 1D grid: annuli
// A_n = {j_n <= |x| <= 2 j_n}, bumps eps_n = 2^-n <j_n>^-sigma tau_{3 j_n / 2} h,
// pairs k = c_n + b_n, k_n = c_n - b_n.
namespace stftlab {

struct AnnulusSchedule {
  Signal seed;                  // recentred at its peak and normalized on [-1, 1]
  double sigma = 0.0;
  double p = 2.0;
  double q = 2.0;
  double recentre_shift = 0.0;  // translation applied to the input seed
  double normalization = 1.0;   // factor applied after recentring
  std::vector<double> radii;    // j_1 .. j_nmax
  std::vector<double> scales;   // 2^-n <j_n>^-sigma
  std::vector<double> tails;    // ||h chi_{|x| >= j_n/2}||_{X^p_{2 sigma} + L^q_sigma}

  int n_max() const { return static_cast<int>(radii.size()); }
};

/// ||<x>^w1 f||_p + ||<x>^w2 f||_q restricted to `inside` (all of the grid
/// if empty). With (w1, w2) = (sigma, 0) this is the X^p_sigma + L^q norm.
double mixed_norm(const Signal& f, double p, double w1, double q, double w2,
                  const std::vector<std::uint8_t>& inside = {});

/// Indicator of {lo <= |x| <= hi} on the grid.
std::vector<std::uint8_t> shell(const Grid1D& g, double lo, double hi);

/// Smallest integer radii meeting the tail bound 2^{-3n}, then pushed to
/// 2 j_{n-1} + 1 for disjointness, and rounded so 3 j_n / 2 is on the grid.
/// Throws (naming the extent needed) when A_{n_max} plus a margin of 4 does
/// not fit in the window.
AnnulusSchedule select_annulus_schedule(const Signal& h, double sigma, double p, double q, int n_max);

std::vector<Signal> build_bumps(const AnnulusSchedule& schedule);

struct LemmaRow {
  int n = 0;
  double j = 0.0;
  double gub_x = 0.0;        // ||eps_n||_{X^p_sigma + L^q} * 2^n / ||h||_{X^p_sigma + L^q}
  double gub_lp = 0.0;       // ||eps_n||_{L^q + L^p} / (2^-n <j_n>^-sigma ||h||_{L^q + L^p})
  double mcb = 0.0;          // ||eps_n||_{L^q(A_n)} * 2^n <j_n>^sigma
  double mtb_value = 0.0;    // ||eps_n||_{X(A_n^c)}
  double mtb = 0.0;          // mtb_value * 2^{4n} <j_n>^sigma
  double sob_value = 0.0;    // max_{l < n} ||eps_l||_{X(A_n)}
  double sob = 0.0;          // sob_value * 2^{3n} <j_n>^sigma
  double mtb_slope = 0.0;    // log2(mtb_value_n / mtb_value_{n-1}); nan for n = 1
  double support_leak = 0.0; // fraction of L2 mass outside A_n + 1
};

std::vector<LemmaRow> verify_lemma_bounds(const AnnulusSchedule& schedule, const std::vector<Signal>& bumps);

struct InstabilityPair {
  Signal k;
  Signal kn;
  Signal c;
  Signal b;
  int n = 0;
  double delta = 0.0;
  double target = 0.0;  // a_n = 2^n
};

InstabilityPair assemble_pair(const AnnulusSchedule& schedule, const std::vector<Signal>& bumps,
                              double delta, int n);

struct RatioResult {
  double numerator = 0.0;    // inf_lambda ||k - lambda k_n||_{L^q}
  double denominator = 0.0;  // || |k| - |k_n| ||_{X^p_sigma}
  double ratio = 0.0;
  cplx lambda{1.0, 0.0};
  // "finite"; "exact_disjoint" when c_n and b_n have no overlap in double
  // precision (denominator exactly 0, numerator > 0); "degenerate" when k = k_n.
  std::string status;
};

/// |c + b| - |c - b| is evaluated as 4 Re(c conj b) / (|c + b| + |c - b|),
/// which keeps tiny overlaps from cancelling to zero.
Signal modulus_difference(const Signal& c, const Signal& b);
TFField modulus_difference(const TFField& c, const TFField& b);

RatioResult instability_ratio(const InstabilityPair& pair, const AnnulusSchedule& schedule);

struct LowerBoundCheck {
  double min_measured = 0.0;  // min over |lambda - 1| >= 1/2 of ||k - lambda k_n||_q
  double bound = 0.0;         // ||h||_q / 2 - 2 delta sum ||eps_j||_q
  int lambdas = 0;            // how many of the scanned lambdas were in the case
  bool holds = false;
};

LowerBoundCheck lowerbound_dichotomy(const InstabilityPair& pair, const AnnulusSchedule& schedule,
                                     const std::vector<Signal>& bumps, int samples = 64);

// ---------------------------------------------------------------------------
// STFT-level family: f_eps = f + sum e_n M_{a_n} f and f_{eps,k} with the
// signs of bumps n > k flipped. |V(M_a f)| is |V f| shifted by a in omega.

struct FamilySpec {
  double s = 1.0;
  double p = 2.0;
  double r = 1.0;
  double q = 2.0;
  double eps = 0.5;
  double smoothness_gap = 0.25;  // s' = s + gap in the closeness norm
  std::vector<double> ladder;    // a_1 < a_2 < ..., multiples of 1/L
};

struct StftFamily {
  Signal f;
  WindowSpec window = WindowSpec::gaussian();
  TFGrid tf;
  FamilySpec spec;
  std::vector<double> weights;      // e_n
  std::vector<double> bump_norms;   // ||V M_{a_n} f||_{W^{s',p}_r + L^q}
  double base_norm_2r = 0.0;        // ||V f||_{W^{s',p}_{2r} + L^q}
  double closeness = 0.0;           // ||V f - V f_eps||_{W^{s',p}_r + L^q}

  int n_max() const { return static_cast<int>(spec.ladder.size()); }
  /// f + sum_{n <= k} e_n M_{a_n} f (k = 0 gives f).
  Signal common(int k) const;
  /// sum_{n > k} e_n M_{a_n} f.
  Signal flipped(int k) const;
  Signal f_eps() const { return common(n_max()); }
  Signal f_eps_k(int k) const { return common(k) - flipped(k); }
  /// f plus only the first n bumps.
  Signal truncated(int n) const { return common(n); }
};

StftFamily stft_instability_family(const Signal& f, const WindowSpec& window, const TFGrid& tf,
                                   const FamilySpec& spec);

struct LpCheck {
  int j = 0;
  double lhs = 0.0;       // || D ||_{W^{s,p}}, D = |V f_{eps,k}| - |V f_eps|
  double low = 0.0;       // 2^{js} ||D||_p
  double high = 0.0;      // 2^{-j delta'} (|| |V f_{eps,k}| ||_{W^{s+delta',p}} + || |V f_eps| ||_{W^{s+delta',p}})
  double constant = 0.0;  // lhs / (low + high)
  double bound = 0.0;     // max(2, (1 + (1 + 4^{j+1})^{s/2}) / 2^{js}), valid for p = 2
};

struct FamilyRow {
  int k = 0;
  double numerator = 0.0;    // inf_lambda ||V f_eps - lambda V f_{eps,k}||_{L^q}
  double denominator = 0.0;  // || |V f_eps| - |V f_{eps,k}| ||_{W^{s,p}_r}
  double ratio = 0.0;
  std::vector<LpCheck> lp;
};

/// Ratio and Littlewood-Paley reduction for member k; LP checks run for
/// every j in `lp_scales` with delta' = `lp_delta`.
FamilyRow evaluate_family_member(const StftFamily& family, int k, const std::vector<int>& lp_scales,
                                 double lp_delta = 0.25);

}  // namespace stftlab
