/// @file nash_kuiper.hpp
/// @brief Convex-integration engine: shortness tests, primitive-metric
/// decomposition, the corrugation profile, spiral steps for curves,
/// corrugation steps for surfaces, mollified stages, and the stage driver
/// with convergence diagnostics.
///
/// One rectangular chart with a smooth amplitude cutoff near the boundary
/// replaces an atlas; the isometry defect is therefore only driven to zero
/// on the interior sub-domain (the cutoff band is excluded from the sup).

#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "wrinkle/geometry.hpp"
#include "wrinkle/grid.hpp"

namespace wrinkle {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Tabulated corrugation profile Gamma(z1, z2) in R^2, 2*pi-periodic and
/// mean-zero in z2, built so that
///   d/dz2 Gamma + (1,0) = sqrt(1+z1^2) (cos theta, sin theta),
///   theta(z1, z2) = alpha(z1) cos z2,
/// where alpha closes the period: mean_z2 cos(alpha cos z2) = 1/sqrt(1+z1^2).
/// Consequently |d/dz2 Gamma + (1,0)|^2 = 1 + z1^2 exactly.
class CorrugationProfile {
 public:
  CorrugationProfile(double delta_star, int n1, int n2);

  double delta_star() const { return ds_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }

  /// Table nodes (for invariant checks).
  double z1_node(int i) const { return i * h1_; }
  double z2_node(int k) const { return k * h2_; }
  std::array<double, 2> gamma_node(int i, int k) const {
    return {g1_[idx(i, k)], g2_[idx(i, k)]};
  }
  double alpha_node(int i) const { return alpha_[i]; }

  /// Bicubic interpolation (periodic in z2, clamped in z1).
  std::array<double, 2> gamma(double z1, double z2) const;
  /// z1-derivative of the interpolant.
  std::array<double, 2> dz1(double z1, double z2) const;
  /// Exact closed-form z2-derivative using the interpolated alpha(z1).
  std::array<double, 2> dz2(double z1, double z2) const;

 private:
  int idx(int i, int k) const { return i * n2_ + k; }
  double ds_;
  int n1_, n2_;
  double h1_, h2_;
  std::vector<double> alpha_;    // alpha(z1) per row
  std::vector<double> g1_, g2_;  // Gamma components, row-major (z1, z2)
};

/// Build the default 256x256 table; delta_star must stay <= 0.7 so the
/// period-closure equation remains solvable. Throws ClosureFailure if the
/// bisection cannot bracket.
CorrugationProfile build_corrugation_profile(double delta_star = 0.65,
                                             int n1 = 256, int n2 = 256);

/// Rank-one summand a^2 nu (x) nu of a positive symmetric field.
struct PrimitiveMetric {
  ScalarField a;           ///< amplitude, >= 0
  Eigen::Vector2d nu;      ///< fixed unit covector
};

/// Schedule and driver controls for the staged iteration.
///
/// Corrugations at widely separated frequencies interact: a step at lambda'
/// reading the wiggles a previous step left at lambda pays a pullback error
/// of roughly 4 sqrt(d d') (lambda/lambda'), where d, d' are the deficits
/// the two steps correct. At desk resolution the only convergent schedules
/// keep every consecutive frequency ratio large, which is why the default
/// ladder below starts far below the chart scale (the first corrugation arc
/// is wider than the chart; its metric gain is exact regardless) and ends at
/// the Nyquist cap. Each step measures the residual deficit and corrects it
/// (feedback), rather than decomposing once per stage; negative residual
/// oscillations are absorbed by inflating the target by (1 + headroom) times
/// the most negative directional component and rescaling the map.
struct StageParams {
  double K = 8.0;          ///< frequency ratio extending past the ladder
  double delta0 = 0.2;     ///< initial deficit scale
  double mu0 = 150.0;      ///< initial C^2 scale (l_q = delta_q / mu_q); the
                           ///< default keeps the mollifier width sub-grid at
                           ///< desk resolutions, where smoothing the border
                           ///< band hurts more than the interior gains
  double a = 0.49;         ///< schedule exponent, < 1/2
  double alpha = 0.12;     ///< target Holder exponent (diagnostic only)
  double r = 1.0;          ///< metric-ball radius of the quoted iteration
  double C4 = 0.3;         ///< inflation headroom over the minimal cone need
  int jn = 2;              ///< steps per stage (axis pair; the diagonal
                           ///< primitive joins the cycle when jn = 3)
  int max_stages = 3;
  double target = 8e-3;    ///< stop once the interior deficit sup drops below
  int ramp_nodes = 8;      ///< cutoff band width at the chart boundary
  int margin = 32;         ///< border excluded from interior sup norms
  std::uint64_t seed = 0;  ///< seeds the per-step corrugation phase offsets
  /// Frozen step frequencies, consumed jn per stage; steps beyond the ladder
  /// continue geometrically with ratio K.
  std::vector<double> ladder = {0.02, 0.16, 0.8, 9.0, 130.0, 800.0};
  /// Fraction of the measured directional deficit each step corrects, per
  /// stage (the last entry repeats). Correcting less than the full deficit
  /// keeps the residual positive, so stages rarely need cone inflation and
  /// the map stays short throughout.
  std::vector<double> fill = {0.75, 0.75, 0.9};
  /// Base corrugation phase per step (beyond the list: uniform random). The
  /// seed only perturbs phases by +-phase_jitter, enough to decorrelate
  /// independently seeded runs without leaving the tuned basin.
  std::vector<double> phases = {5.7596, 3.6652, 3.1416, 5.7596, 1.5708,
                                1.0472};
  double phase_jitter = 0.06;
};

/// Per-stage measurements.
struct StageDiagnostics {
  int q = 0;
  double deficit_sup = 0.0;  ///< interior sup after the stage
  double c0_step = 0.0;      ///< sup |y_new - y_old|
  double c1_step = 0.0;      ///< sup tangent change
  double c2_norm = 0.0;      ///< max second difference / h^2 after the stage
  double lambda_max = 0.0;   ///< largest frequency used in the stage
  bool stalled = false;      ///< deficit failed to decrease
};

struct EmbedDiagnostics {
  double initial_deficit = 0.0;
  std::vector<StageDiagnostics> stages;
};

/// Open polyline with uniform parameter spacing (for Nash spirals).
struct Curve {
  double t0 = 0.0, h = 0.0;
  std::vector<Eigen::Vector3d> y;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Deficit h = g - induced_metric(y) and the sup over interior nodes (border
/// of `margin` nodes excluded) of its max-abs eigenvalue.
std::pair<MetricField, double> metric_deficit(const Immersion& y,
                                              const MetricField& g,
                                              int margin = 1);

/// True iff the deficit is positive-definite at every interior node.
bool is_short(const Immersion& y, const MetricField& g, int margin = 1);

/// Split a positive symmetric field into three primitive metrics along
/// (1,0), (0,1) and (1,+-1)/sqrt(2); the diagonal direction's sign follows
/// the mean of h12. Throws OutsideCone when h11 < |h12| or h22 < |h12|
/// somewhere (the cone condition).
std::array<PrimitiveMetric, 3> primitive_decomposition(const MetricField& h);

/// Nash spiral for a curve: adds (a/lambda)(cos(lambda psi) nu +
/// sin(lambda psi) xi) with per-node frames nu, xi that must be orthonormal
/// and orthogonal to the tangent. Throws NonOrthonormalFrame.
Curve spiral_step(const Curve& c, const std::function<double(double)>& a,
                  const std::function<double(double)>& psi, double lambda,
                  const std::vector<Eigen::Vector3d>& nu,
                  const std::vector<Eigen::Vector3d>& xi);

/// Truncated-Gaussian mollification of width l (separable passes, replicate
/// padding, taps normalized so constants are fixed points). Throws
/// KernelWiderThanGrid.
ScalarField mollify(const ScalarField& f, double l);

/// Mollify the positions of an immersion and retabulate its tangents with
/// wide stencils of the smoothed positions.
Immersion mollify(const Immersion& y, double l);

/// One Kuiper corrugation of amplitude field pm.a in direction pm.nu at
/// frequency lambda, with optional phase offset. The map must carry stored
/// tangents; the new tangents are updated analytically (fast phase exact,
/// slow prefactors differentiated on the grid), which makes the leading
/// pullback gain exactly a^2 nu (x) nu. Amplitudes whose profile argument
/// would exceed delta_star are clamped (counted in the return). Throws
/// RankCondition if the tangent Gram matrix degenerates.
struct CorrugationReport {
  Immersion y;
  int clamped_nodes = 0;
};
CorrugationReport corrugation_step(const Immersion& y,
                                   const PrimitiveMetric& pm, double lambda,
                                   const CorrugationProfile& profile,
                                   double phase = 0.0);

/// One stage: mollify at l = delta_q/mu_q (skipped once l falls below the
/// grid scale), then run jn feedback corrugation steps at the ladder
/// frequencies for stage q. Each step measures the residual deficit,
/// inflates the target by (1 + C4) times the most negative directional
/// component over the interior (rescaling the map by 1/sqrt(1+c)), and
/// corrugates with amplitude sqrt(fill_q * clamped directional deficit).
/// Step-distance diagnostics are interior sups (the cutoff band excluded).
std::pair<Immersion, StageDiagnostics> run_stage(
    const Immersion& y, const MetricField& g, const StageParams& p, int q,
    const CorrugationProfile& profile);

/// Staged driver: iterates run_stage until the interior deficit sup falls
/// below target or max_stages is reached. Frequencies are capped at the
/// Nyquist limit pi/h (tangents are carried analytically, so node samples
/// stay exact up to the cap); if the next stage would exceed the cap before
/// reaching the target, throws BudgetExceeded (reporting the stage index
/// reached).
std::pair<Immersion, EmbedDiagnostics> run_embedding(
    const Immersion& y0, const MetricField& g, const StageParams& p,
    const CorrugationProfile& profile);

/// Independent wrinkled realizations of the same target metric, one per
/// subinterval, differing only through the seeded corrugation phases.
std::vector<Immersion> time_switch_sequence(
    const std::vector<Immersion>& short_maps, const MetricField& gstar,
    const StageParams& p, const CorrugationProfile& profile);

}  // namespace wrinkle
