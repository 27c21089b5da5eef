#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "susyqm/calculus.hpp"
#include "susyqm/grid.hpp"
#include "susyqm/model.hpp"

namespace susyqm {

/// H = -d^2/dx^2 + V discretized with the 3-point Laplacian on the interior
/// points of a grid, Dirichlet conditions at both ends. Symmetric
/// tridiagonal: diagonal 2/h^2 + V(x_i), off-diagonal -1/h^2.
struct DiscretizedHamiltonian {
    Grid grid;
    std::vector<double> diagonal;     // size n-2
    std::vector<double> off_diagonal; // size n-3

    std::size_t dim() const { return diagonal.size(); }

    /// Matrix-vector product on a full-grid sample (boundary entries are
    /// treated as zero); boundary outputs are masked.
    SampledFunction apply(const SampledFunction& psi) const {
        const std::size_t n = grid.size();
        const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
        SampledFunction out(grid);
        out.set_masked(0);
        out.set_masked(n - 1);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (psi.masked(i) || psi.masked(i - 1) || psi.masked(i + 1)) {
                out.set_masked(i);
                continue;
            }
            const double left = (i == 1) ? 0.0 : psi.value(i - 1);
            const double right = (i == n - 2) ? 0.0 : psi.value(i + 1);
            out.set(i, diagonal[i - 1] * psi.value(i) - inv_h2 * (left + right));
        }
        return out;
    }
};

inline DiscretizedHamiltonian discretize_samples(const SampledFunction& V) {
    const Grid& g = V.grid();
    const std::size_t n = g.size();
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    DiscretizedHamiltonian H{g, {}, {}};
    H.diagonal.resize(n - 2);
    H.off_diagonal.assign(n - 3, -inv_h2);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (V.masked(i))
            throw GridError("potential sample is masked at an interior point x=" +
                            std::to_string(g.x(i)));
        H.diagonal[i - 1] = 2.0 * inv_h2 + V.value(i);
    }
    return H;
}

inline DiscretizedHamiltonian discretize(const ParametricPotential& V,
                                         const ParamPoint& a,
                                         const Grid& grid) {
    V.require_admissible(a);
    for (double s : V.poles(a))
        if (s >= grid.x_lo() && s <= grid.x_hi())
            throw GridError(V.id + ": singular point x=" + std::to_string(s) +
                            " lies inside the grid");
    auto f = [&](double x) { return V.evaluate(x, a); };
    return discretize_samples(sample(grid, f));
}

struct SpectrumResult {
    std::vector<double> eigenvalues;
    std::vector<SampledFunction> eigenvectors; // full grid, zero at both ends
    Grid grid;
};

namespace detail {

// Number of eigenvalues of the symmetric tridiagonal matrix strictly below
// sigma, by the classic Sturm sequence (LDL^T pivot signs).
inline std::size_t sturm_count(const std::vector<double>& d,
                               const std::vector<double>& e,
                               double sigma,
                               double pivmin) {
    std::size_t count = 0;
    double q = d[0] - sigma;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < d.size(); ++i) {
        if (std::abs(q) < pivmin) q = (q < 0.0) ? -pivmin : pivmin;
        q = d[i] - sigma - e[i - 1] * e[i - 1] / q;
        if (q < 0.0) ++count;
    }
    return count;
}

// Solve (T - sigma) x = b with partial pivoting; T symmetric tridiagonal.
inline void shifted_tridiag_solve(const std::vector<double>& d,
                                  const std::vector<double>& e,
                                  double sigma,
                                  std::vector<double>& x) {
    const std::size_t m = d.size();
    std::vector<double> a(m), b(m, 0.0), c(m, 0.0); // main, upper, upper+1
    for (std::size_t i = 0; i < m; ++i) a[i] = d[i] - sigma;
    for (std::size_t i = 0; i + 1 < m; ++i) b[i] = e[i];
    std::vector<double> sub(m, 0.0);
    for (std::size_t i = 1; i < m; ++i) sub[i] = e[i - 1];

    const double tiny = 1e-300;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        if (std::abs(sub[i + 1]) > std::abs(a[i])) {
            std::swap(a[i], sub[i + 1]);
            std::swap(b[i], a[i + 1]);
            std::swap(c[i], b[i + 1]);
            std::swap(x[i], x[i + 1]);
        }
        if (a[i] == 0.0) a[i] = tiny;
        const double mfac = sub[i + 1] / a[i];
        a[i + 1] -= mfac * b[i];
        b[i + 1] -= mfac * c[i];
        x[i + 1] -= mfac * x[i];
    }
    if (a[m - 1] == 0.0) a[m - 1] = tiny;
    x[m - 1] /= a[m - 1];
    if (m >= 2) {
        x[m - 2] = (x[m - 2] - b[m - 2] * x[m - 1]) / (a[m - 2] == 0.0 ? tiny : a[m - 2]);
        for (std::size_t k = m - 2; k-- > 0;) {
            x[k] = (x[k] - b[k] * x[k + 1] - c[k] * x[k + 2]) / (a[k] == 0.0 ? tiny : a[k]);
        }
    }
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace detail

/// The k lowest eigenpairs of a discretized Hamiltonian. Eigenvalues by
/// Sturm-sequence bisection to relative tolerance 1e-12, eigenvectors by
/// inverse iteration (at most 5 sweeps), re-orthogonalized against earlier
/// vectors when levels nearly coincide. Eigenvectors are unit-normalized in
/// the discrete L2 sense and returned on the full grid with zero endpoints.
inline SpectrumResult eigen_lowest(const DiscretizedHamiltonian& H, std::size_t k) {
    const std::vector<double>& d = H.diagonal;
    const std::vector<double>& e = H.off_diagonal;
    const std::size_t m = d.size();
    if (k < 1 || k > m / 4)
        throw GridError("eigen_lowest: requested level count must satisfy 1 <= k <= dim/4");

    // Gershgorin bracket for the whole spectrum.
    double lo = d[0], hi = d[0];
    for (std::size_t i = 0; i < m; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(e[i - 1]);
        if (i + 1 < m) r += std::abs(e[i]);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
    double emax = 0.0;
    for (double v : e) emax = std::max(emax, std::abs(v));
    const double pivmin = std::max(emax * emax, 1.0) * 1e-290;
    const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});

    SpectrumResult out{{}, {}, H.grid};
    out.eigenvalues.resize(k);

    for (std::size_t j = 0; j < k; ++j) {
        double a = lo, b = hi;
        int iter = 0;
        while (b - a > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)})) {
            const double mid = 0.5 * (a + b);
            if (detail::sturm_count(d, e, mid, pivmin) >= j + 1)
                b = mid;
            else
                a = mid;
            if (++iter > 2000) {
                std::ostringstream os;
                os << "sturm bisection failed to converge for level " << j
                   << " inside [" << a << ", " << b << "]";
                throw GridError(os.str());
            }
        }
        out.eigenvalues[j] = 0.5 * (a + b);
    }
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end());

    // Inverse iteration per level.
    std::vector<std::vector<double>> vecs;
    for (std::size_t j = 0; j < k; ++j) {
        const double sigma = out.eigenvalues[j] + scale * 1e-13;
        std::vector<double> x(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double t = std::sin(12.9898 * static_cast<double>(i + 1) +
                                      0.7 * static_cast<double>(j + 1));
            x[i] = t;
        }
        for (int sweep = 0; sweep < 5; ++sweep) {
            detail::shifted_tridiag_solve(d, e, sigma, x);
            const double gap_tol = 1e-8 * std::max(1.0, std::abs(out.eigenvalues[j]));
            for (std::size_t p = 0; p < j; ++p) {
                if (std::abs(out.eigenvalues[p] - out.eigenvalues[j]) < gap_tol) {
                    const double proj = detail::dot(x, vecs[p]);
                    for (std::size_t i = 0; i < m; ++i) x[i] -= proj * vecs[p][i];
                }
            }
            double nrm = std::sqrt(detail::dot(x, x));
            if (nrm == 0.0) nrm = 1.0;
            for (auto& v : x) v /= nrm;
        }
        vecs.push_back(x);
    }

    const double h = H.grid.spacing();
    for (std::size_t j = 0; j < k; ++j) {
        SampledFunction psi(H.grid);
        double nrm = std::sqrt(h * detail::dot(vecs[j], vecs[j]));
        std::size_t imax = 0;
        for (std::size_t i = 1; i < m; ++i)
            if (std::abs(vecs[j][i]) > std::abs(vecs[j][imax])) imax = i;
        const double sgn = vecs[j][imax] >= 0.0 ? 1.0 : -1.0;
        psi.set(0, 0.0);
        psi.set(H.grid.size() - 1, 0.0);
        for (std::size_t i = 0; i < m; ++i) psi.set(i + 1, sgn * vecs[j][i] / nrm);
        out.eigenvectors.push_back(std::move(psi));
    }
    return out;
}

/// A = d/dx + W (dagger=false) or A† = -d/dx + W (dagger=true) applied to a
/// sampled wave function by finite differences.
inline SampledFunction apply_ladder(const FactorizationPair& pair,
                                    const ParamPoint& a,
                                    const SampledFunction& psi,
                                    bool dagger) {
    SampledFunction dpsi = derivative(psi);
    SampledFunction W = pair.w.sampled(a, psi.grid());
    const double s = dagger ? -1.0 : 1.0;
    SampledFunction out(psi.grid());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        if (dpsi.masked(i) || W.masked(i) || psi.masked(i)) {
            out.set_masked(i);
            continue;
        }
        out.set(i, s * dpsi.value(i) + W.value(i) * psi.value(i));
    }
    return out;
}

struct AnnihilationReport {
    double norm_ratio = 0.0;     // |A psi0| / |psi0|  (A† for AA† pairs)
    double boundary_decay = 1.0; // max boundary probability density / peak density
    bool overflow = false;
    bool normalizable = false;
    SampledFunction psi0;
};

/// Builds the ground-state candidate of a factorization and tests it.
/// For order A†A the candidate is psi0 ~ exp(-int W), annihilated by A; for
/// order AA† it is exp(+int W), annihilated by A†. The candidate counts as
/// normalizable when its probability density at both grid ends has decayed
/// below 1e-8 of its peak.
inline AnnihilationReport annihilation_check(const FactorizationPair& pair,
                                             const ParamPoint& a,
                                             const Grid& grid,
                                             double decay_tol = 1e-8) {
    const double esgn = (pair.order == OperatorOrder::AdaggerA) ? -1.0 : 1.0;

    SampledFunction S(grid); // esgn * int W
    if (pair.w.has_antiderivative()) {
        for (std::size_t i = 0; i < grid.size(); ++i)
            S.set(i, esgn * pair.w.antiderivative(grid.x(i), a));
    } else {
        S = map(cumulative_integral(pair.w.sampled(a, grid)),
                [&](double s) { return esgn * s; });
    }

    AnnihilationReport rep{.psi0 = SampledFunction(grid)};

    double smax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (S.masked(i)) {
            rep.overflow = true;
            continue;
        }
        smax = std::max(smax, S.value(i));
    }
    if (!std::isfinite(smax)) {
        rep.overflow = true;
        rep.normalizable = false;
        return rep;
    }

    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (S.masked(i)) {
            rep.psi0.set_masked(i);
            continue;
        }
        rep.psi0.set(i, std::exp(S.value(i) - smax)); // peak value 1
    }

    const std::size_t n = grid.size();
    if (rep.psi0.masked(0) || rep.psi0.masked(n - 1)) {
        rep.boundary_decay = 1.0;
    } else {
        const double b = std::max(std::abs(rep.psi0.value(0)), std::abs(rep.psi0.value(n - 1)));
        rep.boundary_decay = b * b; // peak density is 1
    }

    SampledFunction dpsi = derivative_order4(rep.psi0);
    SampledFunction W = pair.w.sampled(a, grid);
    const double opsgn = (pair.order == OperatorOrder::AdaggerA) ? 1.0 : -1.0;
    SampledFunction Apsi(grid);
    for (std::size_t i = 0; i < n; ++i) {
        if (dpsi.masked(i) || W.masked(i) || rep.psi0.masked(i)) {
            Apsi.set_masked(i);
            continue;
        }
        Apsi.set(i, opsgn * dpsi.value(i) + W.value(i) * rep.psi0.value(i));
    }
    const double denom = rep.psi0.l2_norm();
    rep.norm_ratio = denom > 0.0 ? Apsi.l2_norm() / denom : std::numeric_limits<double>::infinity();
    rep.normalizable = !rep.overflow && rep.boundary_decay < decay_tol;
    return rep;
}

struct IsospectralReport {
    std::vector<std::pair<double, double>> matched; // (E of V, E of partner)
    std::optional<double> unmatched_ground;
    bool ok = false;
    std::string message;
};

/// Compares the low spectra of V and a sampled partner potential. Partners
/// are expected to share every level except possibly one low-lying state,
/// so eigenvalues are paired greedily and a single unmatched level on the
/// V side is tolerated and reported.
inline IsospectralReport isospectral_check(const ParametricPotential& V,
                                           const ParamPoint& a,
                                           const SampledFunction& partner,
                                           const Grid& grid,
                                           std::size_t k,
                                           double match_tol) {
    for (std::size_t i = 1; i + 1 < partner.size(); ++i)
        if (partner.masked(i))
            throw GridError("partner potential has masked interior points");

    SpectrumResult s1 = eigen_lowest(discretize(V, a, grid), k);
    SpectrumResult s2 = eigen_lowest(discretize_samples(partner), k);

    IsospectralReport rep;
    std::vector<double> lone1, lone2;
    std::size_t i = 0, j = 0;
    while (i < k && j < k) {
        const double e1 = s1.eigenvalues[i], e2 = s2.eigenvalues[j];
        if (std::abs(e1 - e2) <= match_tol) {
            rep.matched.emplace_back(e1, e2);
            ++i;
            ++j;
        } else if (e1 < e2) {
            lone1.push_back(e1);
            ++i;
        } else {
            lone2.push_back(e2);
            ++j;
        }
    }
    // Whatever remains when one list is exhausted sits at the top of the
    // window and is not evidence of anything; ignore it.

    if (lone2.size() > 0) {
        rep.ok = false;
        rep.message = "partner shows a low level absent from the original spectrum";
    } else if (lone1.size() > 1) {
        rep.ok = false;
        rep.message = "more than one unmatched low level";
    } else {
        rep.ok = true;
        if (lone1.size() == 1) rep.unmatched_ground = lone1[0];
    }
    return rep;
}

} // namespace susyqm
