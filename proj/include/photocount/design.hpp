// ============================================================================
// design.hpp -- KL distances between binomial count models and selection of
// the decision threshold xi and holding time tau.
//
// The selection maximizes min(D(P0||P1), D(P1||P0)). When the asymmetry and
// p-conditions hold, tau is fixed to T and only D(P0||P1) is maximized over
// xi (fast path); otherwise the full max-min search runs over the grid.
// ============================================================================
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "photocount/moments.hpp"
#include "photocount/params.hpp"

namespace photocount {

struct KlPair {
  double kl_01 = 0.0;  // D(P0 || P1)
  double kl_10 = 0.0;  // D(P1 || P0)
  // Conditioning mass of counts n beyond the other model's support, whose
  // coefficient ratio is truncated (kl_general_n only).
  double excluded_mass_01 = 0.0;
  double excluded_mass_10 = 0.0;
};

/// Equal-length binomials. Throws InvalidArgument when |N0 - N1| >= 1e-9
/// and ApproximationError("infinite_kl") when a P is exactly 0 or 1.
KlPair kl_equal_n(const BinomialApprox& b0, const BinomialApprox& b1);

/// Binomials with different (real) lengths. The coefficient term is
/// E_A[log C(N_A, n) - log C(N_B, n)] over the renormalized real-N PMF of A,
/// with log C(N_B, n) taken as 0 for n > floor(N_B). Equals kl_equal_n when
/// N0 = N1.
KlPair kl_general_n(const BinomialApprox& b0, const BinomialApprox& b1);

/// Small-mean approximations of the two directional distances.
double kl_approx_01(const BinomialApprox& b0, const BinomialApprox& b1);
double kl_approx_10(const BinomialApprox& b0, const BinomialApprox& b1);

struct ConditionCheck {
  bool holds = false;
  double margin = 0.0;  // rhs - lhs style slack; >= 0 (or > 0) when holds
};

struct DesignConditions {
  // log(gamma) > (1 + tau'/tau0') / (1 - 2 tau' N1), tau0' = 3T/2, at cfg.
  ConditionCheck lemma1_asymmetry;
  // p < 1/2 - log(gamma) / (2 (gamma - 1)) - lambda1' T, gamma at tau = T.
  ConditionCheck lemma2_tau;
  // p <= min{1 - e^{-(lambda1' T)^3}, (1 - lambda0 tau')/(alpha + 1/2),
  //          1 - 2(alpha - 1)/(2 alpha + 1) e^{lambda0'(tau + T)}} for every
  // tau of the grid.
  ConditionCheck p_bound_eq54;
  // Upper bound on D01(tau) - D01(T) over the grid compared with kGapCeiling.
  ConditionCheck kl_gap_bound;

  double gamma = 0.0;      // N1 / N0 at cfg
  double p = 0.0;
  double p_bound = 0.0;    // the minimum above, over the grid
  double gap_bound = 0.0;  // max over the grid

  bool fast_path_ok() const {
    return lemma1_asymmetry.holds && lemma2_tau.holds && p_bound_eq54.holds;
  }
};

inline constexpr double kGapCeiling = 0.0102;

/// Thermal crossing probability used by the worked bound: Q(xi / sigma0).
inline double worked_p_bound(double xi, double sigma0) { return gaussian_q(xi / sigma0); }

/// Upper bound of D01(tau) - D01(T) at one tau (a multiple of T).
/// Throws ApproximationError when a binomial approximation breaks down.
double kl_gap_bound_at(const ChannelParams& channel, const ReceiverConfig& cfg);

/// Evaluates all flags at cfg. `tau_grid` (multiples of T) drives the
/// p-condition and the gap bound; empty means {T, 2T, ..., 10T}.
DesignConditions check_conditions(const ChannelParams& channel, const ReceiverConfig& cfg,
                                  const std::vector<double>& tau_grid = {});

enum class SelectMode { kAuto, kFast, kFull, kBoth };

struct SelectOptions {
  SelectMode mode = SelectMode::kAuto;
  int workers = 0;
};

struct DesignCandidate {
  double xi = 0.0;
  double tau = 0.0;
  double kl_01 = 0.0;
  double kl_10 = 0.0;
  double objective = 0.0;  // kl_approx_01 (fast) or min(kl_01, kl_10) (full)
};

struct DesignResult {
  double xi_star = 0.0;
  double tau_star = 0.0;
  double kl_01 = 0.0;
  double kl_10 = 0.0;
  DesignConditions conditions;
  double predicted_ber = 0.5;
  bool separable = true;
  bool used_fast_path = false;
  std::optional<DesignCandidate> fast;
  std::optional<DesignCandidate> full;
  std::size_t skipped_points = 0;  // grid points with a broken approximation
  std::string first_skip_flag;
};

/// 64 points over (max(6 sigma0, 0.05), 1 + 3 sigma), cell centres.
std::vector<double> default_xi_grid(const ReceiverConfig& cfg);
/// {T, 2T, ..., 10T} truncated below 1.
std::vector<double> default_tau_grid(const ReceiverConfig& cfg);

/// Selects (xi*, tau*). Empty grids select the defaults. tau_grid entries
/// must be integer multiples of T. Lowest grid index wins ties.
DesignResult select_params(const ChannelParams& channel, const ReceiverConfig& cfg_template,
                           std::vector<double> xi_grid = {}, std::vector<double> tau_grid = {},
                           const SelectOptions& opts = {});

}  // namespace photocount
