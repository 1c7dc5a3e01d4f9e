#pragma once

#include <Eigen/Dense>

#include "sill/errors.hpp"

namespace sill {

/// Sharpness parameter of the logistic factors. Strictly positive.
class Steepness {
public:
    explicit Steepness(double alpha);
    double value() const noexcept { return alpha_; }

private:
    double alpha_;
};

/// lambda_mu(x) = 1 / (1 + exp(-alpha (x - mu))).
/// Sign-branched so exp() only ever sees non-positive arguments; stays finite
/// for |alpha (x - mu)| well past 700.
double logistic_eval(double x, double mu, Steepness alpha);

/// Lambda_v(x) = prod_i lambda_{v_i}(x_i). Strictly inside (0, 1) except for
/// underflow to 0 at extreme arguments.
double conjunctive_eval(const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                        Steepness alpha);

/// Gradient of Lambda_v: component i is alpha (1 - lambda_{v_i}(x_i)) Lambda_v(x).
/// Uses the simplified product form, finite everywhere (no division by lambda).
Eigen::VectorXd conjunctive_gradient(const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& v, Steepness alpha);

/// Chain-rule-exact dLambda_v/dt along a flow with xdot = fx:
///   sum_i alpha (1 - lambda_{v_i}(x_i)) Lambda_v(x) fx_i.
double exact_lambda_derivative(const Eigen::VectorXd& x, const Eigen::VectorXd& fx,
                               const Eigen::VectorXd& v, Steepness alpha);

/// A dictionary of conjunctive-logistic observables over a join-closed center
/// set, plus the box it was built on. Centers are stored lexicographically
/// sorted (row-wise) and are immutable after construction; all member
/// functions are pure and safe to call concurrently.
class SILLDictionary {
public:
    /// Accepts any pairwise-distinct, join-closed center set inside
    /// [domain_lo, domain_hi]. Centers are sorted lexicographically.
    SILLDictionary(Eigen::MatrixXd centers, Steepness alpha,
                   Eigen::VectorXd domain_lo, Eigen::VectorXd domain_hi,
                   Eigen::VectorXd mesh_spacing);

    int state_dim() const noexcept { return static_cast<int>(centers_.cols()); }
    int num_centers() const noexcept { return static_cast<int>(centers_.rows()); }
    /// 1 + n + N_L
    int lift_dim() const noexcept { return 1 + state_dim() + num_centers(); }

    Steepness alpha() const noexcept { return alpha_; }
    const Eigen::MatrixXd& centers() const noexcept { return centers_; }
    Eigen::VectorXd center(int l) const;
    const Eigen::VectorXd& domain_lo() const noexcept { return domain_lo_; }
    const Eigen::VectorXd& domain_hi() const noexcept { return domain_hi_; }
    const Eigen::VectorXd& mesh_spacing() const noexcept { return mesh_spacing_; }

    /// Index of the componentwise maximum of centers l and k. The element is
    /// guaranteed to exist by the join-closure invariant; a miss means the
    /// dictionary is corrupted and throws InvariantError.
    int join(int l, int k) const;

    /// Full N_L x N_L table of join indices.
    Eigen::MatrixXi join_table() const;

    /// The Lambda block of the lifting: Lambda_{v_l}(x) for every center, in
    /// center order.
    Eigen::VectorXd lambda_values(const Eigen::VectorXd& x) const;

    /// Index of a center equal (bitwise) to c, or -1.
    int find_center(const Eigen::VectorXd& c) const;

private:
    Eigen::MatrixXd centers_;
    Steepness alpha_;
    Eigen::VectorXd domain_lo_, domain_hi_, mesh_spacing_;
};

/// Cartesian-product lattice over [domain_lo, domain_hi] with the given
/// per-dimension spacing: grid values {lo_i, lo_i + eps_i, ...} up to hi_i.
/// Join-closed by construction. Spacing wider than the domain extent yields a
/// single grid value in that dimension.
SILLDictionary build_lattice(const Eigen::VectorXd& domain_lo,
                             const Eigen::VectorXd& domain_hi,
                             const Eigen::VectorXd& spacing, Steepness alpha);

/// psi(x) = [1; x; Lambda(x)], length 1 + n + N_L.
Eigen::VectorXd lift(const Eigen::VectorXd& x, const SILLDictionary& dict);

} // namespace sill
