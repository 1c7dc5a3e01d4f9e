#include "sill/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sill {

namespace {

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (int i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

void require_same_dim(const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                      const char* what) {
    if (x.size() != v.size()) {
        throw ContractError(std::string(what) + ": dimension mismatch (" +
                            std::to_string(x.size()) + " vs " +
                            std::to_string(v.size()) + ")");
    }
}

} // namespace

Steepness::Steepness(double alpha) : alpha_(alpha) {
    if (!std::isfinite(alpha) || alpha <= 0.0) {
        throw ContractError("Steepness: alpha must be finite and > 0");
    }
}

double logistic_eval(double x, double mu, Steepness alpha) {
    if (!std::isfinite(x) || !std::isfinite(mu)) {
        throw DomainError("logistic_eval: non-finite input");
    }
    const double z = alpha.value() * (x - mu);
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double conjunctive_eval(const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                        Steepness alpha) {
    require_same_dim(x, v, "conjunctive_eval");
    double prod = 1.0;
    for (int i = 0; i < x.size(); ++i) {
        prod *= logistic_eval(x[i], v[i], alpha);
    }
    return prod;
}

Eigen::VectorXd conjunctive_gradient(const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& v, Steepness alpha) {
    require_same_dim(x, v, "conjunctive_gradient");
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd lam(n);
    double prod = 1.0;
    for (int i = 0; i < n; ++i) {
        lam[i] = logistic_eval(x[i], v[i], alpha);
        prod *= lam[i];
    }
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) {
        g[i] = alpha.value() * (1.0 - lam[i]) * prod;
    }
    return g;
}

double exact_lambda_derivative(const Eigen::VectorXd& x, const Eigen::VectorXd& fx,
                               const Eigen::VectorXd& v, Steepness alpha) {
    require_same_dim(x, fx, "exact_lambda_derivative");
    return conjunctive_gradient(x, v, alpha).dot(fx);
}

SILLDictionary::SILLDictionary(Eigen::MatrixXd centers, Steepness alpha,
                               Eigen::VectorXd domain_lo, Eigen::VectorXd domain_hi,
                               Eigen::VectorXd mesh_spacing)
    : centers_(std::move(centers)),
      alpha_(alpha),
      domain_lo_(std::move(domain_lo)),
      domain_hi_(std::move(domain_hi)),
      mesh_spacing_(std::move(mesh_spacing)) {
    const int n = static_cast<int>(centers_.cols());
    const int NL = static_cast<int>(centers_.rows());
    if (NL < 1 || n < 1) {
        throw ContractError("SILLDictionary: need at least one center and one dimension");
    }
    if (domain_lo_.size() != n || domain_hi_.size() != n || mesh_spacing_.size() != n) {
        throw ContractError("SILLDictionary: domain/spacing dimension mismatch");
    }
    for (int i = 0; i < n; ++i) {
        if (!(domain_lo_[i] <= domain_hi_[i])) {
            throw ContractError("SILLDictionary: domain_lo must not exceed domain_hi");
        }
        if (!(mesh_spacing_[i] > 0.0) || !std::isfinite(mesh_spacing_[i])) {
            throw ContractError("SILLDictionary: mesh_spacing must be positive");
        }
    }
    if (!centers_.allFinite()) {
        throw DomainError("SILLDictionary: non-finite center coordinate");
    }
    const double tol = 1e-12;
    for (int l = 0; l < NL; ++l) {
        for (int i = 0; i < n; ++i) {
            if (centers_(l, i) < domain_lo_[i] - tol || centers_(l, i) > domain_hi_[i] + tol) {
                throw ContractError("SILLDictionary: center outside [domain_lo, domain_hi]");
            }
        }
    }

    // Sort rows lexicographically for a deterministic layout.
    std::vector<int> order(NL);
    for (int l = 0; l < NL; ++l) order[l] = l;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return lex_less(centers_.row(a).transpose(), centers_.row(b).transpose());
    });
    Eigen::MatrixXd sorted(NL, n);
    for (int l = 0; l < NL; ++l) sorted.row(l) = centers_.row(order[l]);
    centers_ = std::move(sorted);

    for (int l = 1; l < NL; ++l) {
        if (centers_.row(l) == centers_.row(l - 1)) {
            throw ContractError("SILLDictionary: duplicate center");
        }
    }

    // Join-closure check. Exhaustive for moderate sizes; larger sets must be
    // full Cartesian lattices, which we verify structurally instead.
    if (NL <= 1024) {
        for (int l = 0; l < NL; ++l) {
            Eigen::VectorXd vmax(n);
            for (int k = l + 1; k < NL; ++k) {
                for (int i = 0; i < n; ++i) {
                    vmax[i] = std::max(centers_(l, i), centers_(k, i));
                }
                if (find_center(vmax) < 0) {
                    throw ContractError("SILLDictionary: center set is not join-closed");
                }
            }
        }
    } else {
        std::size_t prod = 1;
        for (int i = 0; i < n; ++i) {
            std::vector<double> vals(centers_.col(i).data(), centers_.col(i).data() + NL);
            std::sort(vals.begin(), vals.end());
            vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
            prod *= vals.size();
        }
        if (prod != static_cast<std::size_t>(NL)) {
            throw ContractError(
                "SILLDictionary: center set too large for exhaustive join check "
                "and not a full Cartesian lattice");
        }
    }
}

Eigen::VectorXd SILLDictionary::center(int l) const {
    if (l < 0 || l >= num_centers()) {
        throw ContractError("SILLDictionary::center: index out of range");
    }
    return centers_.row(l).transpose();
}

int SILLDictionary::find_center(const Eigen::VectorXd& c) const {
    // Centers are lexicographically sorted; binary search with exact compare.
    int lo = 0, hi = num_centers();
    while (lo < hi) {
        const int mid = (lo + hi) / 2;
        if (lex_less(centers_.row(mid).transpose(), c)) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    if (lo < num_centers() && centers_.row(lo).transpose() == c) return lo;
    return -1;
}

int SILLDictionary::join(int l, int k) const {
    const int NL = num_centers();
    if (l < 0 || l >= NL || k < 0 || k >= NL) {
        throw ContractError("SILLDictionary::join: index out of range");
    }
    Eigen::VectorXd vmax = centers_.row(l).cwiseMax(centers_.row(k)).transpose();
    const int idx = find_center(vmax);
    if (idx < 0) {
        throw InvariantError("SILLDictionary::join: join element missing (corrupted dictionary)");
    }
    return idx;
}

Eigen::MatrixXi SILLDictionary::join_table() const {
    const int NL = num_centers();
    Eigen::MatrixXi table(NL, NL);
    for (int l = 0; l < NL; ++l) {
        table(l, l) = l;
        for (int k = l + 1; k < NL; ++k) {
            const int j = join(l, k);
            table(l, k) = j;
            table(k, l) = j;
        }
    }
    return table;
}

Eigen::VectorXd SILLDictionary::lambda_values(const Eigen::VectorXd& x) const {
    if (x.size() != state_dim()) {
        throw ContractError("SILLDictionary::lambda_values: dimension mismatch");
    }
    const int NL = num_centers();
    Eigen::VectorXd out(NL);
    for (int l = 0; l < NL; ++l) {
        double prod = 1.0;
        for (int i = 0; i < state_dim(); ++i) {
            prod *= logistic_eval(x[i], centers_(l, i), alpha_);
        }
        out[l] = prod;
    }
    return out;
}

SILLDictionary build_lattice(const Eigen::VectorXd& domain_lo,
                             const Eigen::VectorXd& domain_hi,
                             const Eigen::VectorXd& spacing, Steepness alpha) {
    const int n = static_cast<int>(domain_lo.size());
    if (domain_hi.size() != n || spacing.size() != n) {
        throw ContractError("build_lattice: dimension mismatch");
    }
    std::vector<std::vector<double>> axes(n);
    std::size_t NL = 1;
    for (int i = 0; i < n; ++i) {
        if (!(domain_lo[i] < domain_hi[i])) {
            throw ContractError("build_lattice: domain_lo must be < domain_hi componentwise");
        }
        if (!(spacing[i] > 0.0) || !std::isfinite(spacing[i])) {
            throw ContractError("build_lattice: spacing must be positive");
        }
        const int count =
            static_cast<int>(std::floor((domain_hi[i] - domain_lo[i]) / spacing[i] + 1e-9)) + 1;
        axes[i].resize(count);
        for (int j = 0; j < count; ++j) axes[i][j] = domain_lo[i] + j * spacing[i];
        NL *= static_cast<std::size_t>(count);
    }
    if (NL > 10'000'000u) {
        throw ResourceError("build_lattice: lattice would exceed 1e7 centers");
    }

    Eigen::MatrixXd centers(static_cast<Eigen::Index>(NL), n);
    std::vector<int> idx(n, 0);
    for (std::size_t row = 0; row < NL; ++row) {
        for (int i = 0; i < n; ++i) centers(static_cast<Eigen::Index>(row), i) = axes[i][idx[i]];
        // advance odometer, last dimension fastest (lexicographic order)
        for (int i = n - 1; i >= 0; --i) {
            if (++idx[i] < static_cast<int>(axes[i].size())) break;
            idx[i] = 0;
        }
    }
    return SILLDictionary(std::move(centers), alpha, domain_lo, domain_hi, spacing);
}

Eigen::VectorXd lift(const Eigen::VectorXd& x, const SILLDictionary& dict) {
    if (x.size() != dict.state_dim()) {
        throw ContractError("lift: dimension mismatch");
    }
    Eigen::VectorXd psi(dict.lift_dim());
    psi[0] = 1.0;
    psi.segment(1, dict.state_dim()) = x;
    psi.tail(dict.num_centers()) = dict.lambda_values(x);
    return psi;
}

} // namespace sill
