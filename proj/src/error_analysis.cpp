#include "sill/error_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sill {

namespace {

double canonical_u01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

double conjunctive_with_alpha(const Eigen::VectorXd& x, const SILLDictionary& dict,
                              int l, double alpha) {
    const Steepness a(alpha);
    double prod = 1.0;
    for (int i = 0; i < dict.state_dim(); ++i) {
        prod *= logistic_eval(x[i], dict.centers()(l, i), a);
    }
    return prod;
}

// |join_collapse_error| as a callable of x for a fixed pair.
struct PairObjective {
    const SILLDictionary* dict;
    int l, k, j;
    double alpha;

    double operator()(const Eigen::VectorXd& x) const {
        const double Ll = conjunctive_with_alpha(x, *dict, l, alpha);
        const double Lk = conjunctive_with_alpha(x, *dict, k, alpha);
        const double Lj = conjunctive_with_alpha(x, *dict, j, alpha);
        return std::abs(alpha * (Ll * Lk - Lj));
    }
};

// Golden-section maximization of g along coordinate `coord` within
// [x[coord] - h, x[coord] + h]. Updates x in place.
void golden_refine_coord(const PairObjective& g, Eigen::VectorXd& x, int coord, double h) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = x[coord] - h;
    double b = x[coord] + h;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    Eigen::VectorXd p = x;
    p[coord] = c;
    double fc = g(p);
    p[coord] = d;
    double fd = g(p);
    for (int it = 0; it < 80 && (b - a) > 1e-13 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            p[coord] = c;
            fc = g(p);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            p[coord] = d;
            fd = g(p);
        }
    }
    x[coord] = 0.5 * (a + b);
}

double sup_search(const SILLDictionary& dict, const PairObjective& g, int density) {
    if (density < 16) {
        throw ContractError("estimate_sup_error: search_grid_density must be >= 16");
    }
    const int n = dict.state_dim();
    Eigen::VectorXd lo = dict.domain_lo() - 2.0 * dict.mesh_spacing();
    Eigen::VectorXd hi = dict.domain_hi() + 2.0 * dict.mesh_spacing();

    // Dense scan; ties resolved toward the lowest linear index by strict >.
    std::vector<int> idx(n, 0);
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(density);
    Eigen::VectorXd x(n), best_x(n);
    double best = -1.0;
    for (std::size_t row = 0; row < total; ++row) {
        for (int i = 0; i < n; ++i) {
            x[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / (density - 1);
        }
        const double val = g(x);
        if (val > best) {
            best = val;
            best_x = x;
        }
        for (int i = n - 1; i >= 0; --i) {
            if (++idx[i] < density) break;
            idx[i] = 0;
        }
    }

    Eigen::VectorXd step = (hi - lo) / (density - 1);
    Eigen::VectorXd p = best_x;
    for (int pass = 0; pass < 10; ++pass) {
        for (int coord = 0; coord < n; ++coord) {
            golden_refine_coord(g, p, coord, step[coord]);
        }
        step *= 0.5;
    }
    return std::max(best, g(p));
}

} // namespace

PairErrorSpec make_pair_error_spec(const SILLDictionary& dict, int a, int b) {
    const int NL = dict.num_centers();
    if (a < 0 || a >= NL || b < 0 || b >= NL) {
        throw ContractError("make_pair_error_spec: center index out of range");
    }
    const int j = dict.join(a, b);
    if (j == a) return PairErrorSpec{a, b};
    if (j == b) return PairErrorSpec{b, a};
    throw ContractError("make_pair_error_spec: centers are incomparable "
                        "(use join_collapse_error for general pairs)");
}

double pair_error(const Eigen::VectorXd& x, const SILLDictionary& dict,
                  const PairErrorSpec& spec) {
    return pair_error(x, dict, spec, dict.alpha().value());
}

double pair_error(const Eigen::VectorXd& x, const SILLDictionary& dict,
                  const PairErrorSpec& spec, double alpha) {
    if (x.size() != dict.state_dim()) {
        throw ContractError("pair_error: dimension mismatch");
    }
    const double Ll = conjunctive_with_alpha(x, dict, spec.l, alpha);
    const double Lk = conjunctive_with_alpha(x, dict, spec.k, alpha);
    return alpha * (Ll * Lk - Ll);
}

double join_collapse_error(const Eigen::VectorXd& x, const SILLDictionary& dict,
                           int l, int k, double alpha) {
    const double Ll = conjunctive_with_alpha(x, dict, l, alpha);
    const double Lk = conjunctive_with_alpha(x, dict, k, alpha);
    const double Lj = conjunctive_with_alpha(x, dict, dict.join(l, k), alpha);
    return alpha * (Ll * Lk - Lj);
}

std::vector<double> alpha_convergence_study(const Eigen::VectorXd& x,
                                            const SILLDictionary& dict,
                                            const PairErrorSpec& spec,
                                            const std::vector<double>& alphas) {
    for (int i = 0; i < dict.state_dim(); ++i) {
        if (x[i] == dict.centers()(spec.l, i) || x[i] == dict.centers()(spec.k, i)) {
            throw ContractError(
                "alpha_convergence_study: x lies on a center coordinate (excluded)");
        }
    }
    std::vector<double> out;
    out.reserve(alphas.size());
    for (double a : alphas) {
        if (!(a > 0.0) || !std::isfinite(a)) {
            throw ContractError("alpha_convergence_study: alphas must be positive");
        }
        out.push_back(std::abs(pair_error(x, dict, spec, a)));
    }
    return out;
}

double estimate_sup_error(const SILLDictionary& dict, const PairErrorSpec& spec,
                          double alpha, int search_grid_density) {
    PairObjective g{&dict, spec.l, spec.k, spec.l, alpha};
    return sup_search(dict, g, search_grid_density);
}

double estimate_sup_error_general(const SILLDictionary& dict, int l, int k,
                                  double alpha, int search_grid_density) {
    PairObjective g{&dict, l, k, dict.join(l, k), alpha};
    return sup_search(dict, g, search_grid_density);
}

ErrorBoundReport compute_error_bounds(const SILLDictionary& dict, const WeightMatrix& W,
                                      int search_grid_density) {
    const int n = dict.state_dim();
    const int NL = dict.num_centers();
    if (W.W.rows() != n || W.W.cols() != NL) {
        throw ContractError("compute_error_bounds: weight matrix shape mismatch");
    }
    const double alpha = dict.alpha().value();

    ErrorBoundReport rep;
    rep.search_grid_density = search_grid_density;
    rep.search_lo = dict.domain_lo() - 2.0 * dict.mesh_spacing();
    rep.search_hi = dict.domain_hi() + 2.0 * dict.mesh_spacing();

    rep.M_hat.resize(NL, NL);
    for (int l = 0; l < NL; ++l) {
        for (int k = l; k < NL; ++k) {
            const double m = estimate_sup_error_general(dict, l, k, alpha,
                                                        search_grid_density);
            rep.M_hat(l, k) = m;
            rep.M_hat(k, l) = m;
        }
    }

    // c_li = sup over the padded box of (1 - lambda_{mu_i^l}(x_i)); the factor
    // is decreasing in x_i, so the sup sits at the lower search bound.
    rep.M_hat_lambda = Eigen::VectorXd::Zero(NL);
    const Steepness a(alpha);
    for (int l = 0; l < NL; ++l) {
        double row = 0.0;
        for (int i = 0; i < n; ++i) {
            const double c_li =
                1.0 - logistic_eval(rep.search_lo[i], dict.centers()(l, i), a);
            for (int k = 0; k < NL; ++k) {
                row += c_li * std::abs(W.W(i, k)) * rep.M_hat(l, k);
            }
        }
        rep.M_hat_lambda[l] = row;
    }
    rep.total_rate = rep.M_hat_lambda.sum();
    return rep;
}

double trajectory_error_budget(const ErrorBoundReport& report, double t) {
    if (t < 0.0 || !std::isfinite(t)) {
        throw ContractError("trajectory_error_budget: t must be finite and >= 0");
    }
    return t * report.total_rate;
}

double delta_propagation_bound(const Eigen::VectorXd& delta_sup, Steepness alpha) {
    return alpha.value() * delta_sup.cwiseAbs().sum();
}

double delta_propagation_bound_refined(const Eigen::VectorXd& delta_sup, Steepness alpha) {
    return 0.25 * alpha.value() * delta_sup.cwiseAbs().sum();
}

Eigen::MatrixXd sample_off_center_points(const SILLDictionary& dict, int count,
                                         double min_offset, std::uint64_t seed) {
    if (count < 1) {
        throw ContractError("sample_off_center_points: count must be >= 1");
    }
    if (!(min_offset > 0.0) || !std::isfinite(min_offset)) {
        throw ContractError("sample_off_center_points: min_offset must be positive");
    }
    const int n = dict.state_dim();
    const int NL = dict.num_centers();

    // Per-dimension bands [lo, hi] minus (c - d, c + d) around every distinct
    // center coordinate.
    std::vector<std::vector<std::pair<double, double>>> segments(n);
    for (int i = 0; i < n; ++i) {
        std::vector<double> coords(NL);
        for (int l = 0; l < NL; ++l) coords[l] = dict.centers()(l, i);
        std::sort(coords.begin(), coords.end());
        coords.erase(std::unique(coords.begin(), coords.end()), coords.end());

        double start = dict.domain_lo()[i];
        for (double c : coords) {
            if (c - min_offset > start) {
                segments[i].push_back({start, c - min_offset});
            }
            start = std::max(start, c + min_offset);
        }
        if (dict.domain_hi()[i] > start) {
            segments[i].push_back({start, dict.domain_hi()[i]});
        }
        if (segments[i].empty()) {
            throw ContractError("sample_off_center_points: min_offset leaves no room "
                                "in dimension " + std::to_string(i));
        }
    }

    std::mt19937_64 eng(seed);
    Eigen::MatrixXd pts(count, n);
    for (int s = 0; s < count; ++s) {
        for (int i = 0; i < n; ++i) {
            double total = 0.0;
            for (const auto& seg : segments[i]) total += seg.second - seg.first;
            double u = canonical_u01(eng) * total;
            double val = segments[i].back().second;
            for (const auto& seg : segments[i]) {
                const double len = seg.second - seg.first;
                if (u <= len) {
                    val = seg.first + u;
                    break;
                }
                u -= len;
            }
            pts(s, i) = val;
        }
    }
    return pts;
}

} // namespace sill
