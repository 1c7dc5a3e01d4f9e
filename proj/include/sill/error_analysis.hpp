#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sill/dictionary.hpp"
#include "sill/regression.hpp"

namespace sill {

/// An ordered center pair with v_l dominating v_k componentwise, so that
/// v_max(l, k) = v_l. Build through make_pair_error_spec, which swaps the
/// indices when needed and rejects incomparable pairs.
struct PairErrorSpec {
    int l = -1;
    int k = -1;
};

PairErrorSpec make_pair_error_spec(const SILLDictionary& dict, int a, int b);

/// Signed closure error of the ordered pair:
///   alpha Lambda_{v_l}(x) Lambda_{v_k}(x) - alpha Lambda_{v_l}(x).
/// Callers take |.| for bounds.
double pair_error(const Eigen::VectorXd& x, const SILLDictionary& dict,
                  const PairErrorSpec& spec);
double pair_error(const Eigen::VectorXd& x, const SILLDictionary& dict,
                  const PairErrorSpec& spec, double alpha);

/// The same error generalized to arbitrary (possibly incomparable) pairs:
///   alpha (Lambda_l(x) Lambda_k(x) - Lambda_{v_max(l,k)}(x)).
/// Coincides with pair_error when one center dominates the other.
double join_collapse_error(const Eigen::VectorXd& x, const SILLDictionary& dict,
                           int l, int k, double alpha);

/// |pair error| at a fixed point x evaluated for each steepness in `alphas`.
/// Requires x_i != mu_i for every coordinate of both centers (the convergence
/// statement excludes points on center hyperplanes).
std::vector<double> alpha_convergence_study(const Eigen::VectorXd& x,
                                            const SILLDictionary& dict,
                                            const PairErrorSpec& spec,
                                            const std::vector<double>& alphas);

/// Supremum estimate M_hat of |pair error| over the dictionary box padded by
/// two mesh spacings per side: dense grid scan (search_grid_density >= 16 per
/// dimension) followed by ten passes of coordinate-wise golden-section
/// refinement seeded at the grid argmax. Deterministic; grid ties break at
/// the lowest linear index.
double estimate_sup_error(const SILLDictionary& dict, const PairErrorSpec& spec,
                          double alpha, int search_grid_density);

/// Same estimator for arbitrary pairs via join_collapse_error.
double estimate_sup_error_general(const SILLDictionary& dict, int l, int k,
                                  double alpha, int search_grid_density);

struct ErrorBoundReport {
    Eigen::MatrixXd M_hat;         // N_L x N_L pair sup estimates (symmetric)
    Eigen::VectorXd M_hat_lambda;  // per Lambda row, weighted aggregate
    double total_rate = 0.0;       // sum over rows; the slope of the t-linear budget
    int search_grid_density = 0;
    Eigen::VectorXd search_lo, search_hi; // padded search box actually used
};

/// Full table of pair sup estimates plus the per-row aggregates
///   M_hat_Lambda_l = sum_i sum_k c_li |w_ik| M_hat_lk,
/// where c_li is the sup of (1 - lambda_{mu_i^l}) over the padded box.
ErrorBoundReport compute_error_bounds(const SILLDictionary& dict, const WeightMatrix& W,
                                      int search_grid_density);

/// t * total_rate: the accumulated-state-error budget, linear in t.
double trajectory_error_budget(const ErrorBoundReport& report, double t);

/// Extra per-row derivative-error contribution from imperfect regression,
/// using the conservative envelope sup alpha (1 - lambda) Lambda <= alpha:
///   sum_i sup|delta_i| * alpha.
double delta_propagation_bound(const Eigen::VectorXd& delta_sup, Steepness alpha);

/// Tighter variant using sup (1 - lambda) Lambda <= 1/4.
double delta_propagation_bound_refined(const Eigen::VectorXd& delta_sup, Steepness alpha);

/// `count` points uniform over the dictionary domain restricted to at least
/// `min_offset` away from every center coordinate in every dimension.
/// Deterministic in `seed`. Throws ContractError when the offset leaves no
/// room in some dimension.
Eigen::MatrixXd sample_off_center_points(const SILLDictionary& dict, int count,
                                         double min_offset, std::uint64_t seed);

} // namespace sill
