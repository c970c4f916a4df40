#pragma once

// Cutoff spectral decompositions of the degree-0 operator L = [d,delta],
// truncated canonical sections and zeta factors, and the cutoff-independent
// glued coordinate [rho h]_{det E, delta} of det H(E,d).
//
// Spectral projectors are assembled per degree from a complex Schur
// decomposition: the selected eigenvalues are bubbled to the top of the
// triangular factor with unitary swaps, and the projector is completed by a
// triangular Sylvester solve.

#include "detline.hpp"

#include <algorithm>
#include <functional>

namespace torzeta {

inline constexpr double kClusterRelTol = 1e-8;
inline constexpr double kRingRelTol = 1e-6;

// ---------------------------------------------------------------------------
// Schur-based spectral projectors
// ---------------------------------------------------------------------------

namespace detail {

/// Swap the adjacent diagonal entries (k, k+1) of the upper-triangular T by a
/// unitary similarity, updating U accordingly.
inline void schur_swap(Mat& T, Mat& U, int k) {
    Cplx t11 = T(k, k), t22 = T(k + 1, k + 1), t12 = T(k, k + 1);
    // Eigenvector of [[t11, t12],[0, t22]] for eigenvalue t22: (t12, t22-t11).
    Cplx x = t12, y = t22 - t11;
    double nx = std::abs(x), ny = std::abs(y);
    if (ny == 0.0) return;  // equal eigenvalues, nothing to move
    double nrm = std::hypot(nx, ny);
    Cplx c = x / nrm, s = y / nrm;
    // G = [[c, -conj(s)], [s, conj(c)]] has first column (c, s) ~ eigenvector.
    Mat G(2, 2);
    G << c, -std::conj(s), s, std::conj(c);
    T.middleCols(k, 2) = T.middleCols(k, 2) * G;
    T.middleRows(k, 2) = G.adjoint() * T.middleRows(k, 2);
    U.middleCols(k, 2) = U.middleCols(k, 2) * G;
    T(k + 1, k) = 0.0;
}

/// Spectral projector of M onto the invariant subspace of the eigenvalues
/// selected by `pick` (by index into eigs, the diagonal of the Schur factor).
inline Mat schur_projector(const Mat& M, const std::function<bool(Cplx)>& pick) {
    int n = static_cast<int>(M.rows());
    if (n == 0) return Mat(0, 0);
    Eigen::ComplexSchur<Mat> schur(M, true);
    Mat T = schur.matrixT();
    Mat U = schur.matrixU();
    // Bubble selected eigenvalues to the top, preserving relative order.
    int front = 0;
    for (int k = 0; k < n; ++k) {
        if (!pick(T(k, k))) continue;
        for (int j = k; j > front; --j) schur_swap(T, U, j - 1);
        ++front;
    }
    int m = front;
    if (m == 0) return Mat::Zero(n, n);
    if (m == n) return Mat::Identity(n, n);
    // T = [[A, C],[0, B]]; solve A X - X B = C, then P = U [[I, X],[0,0]] U*.
    Mat A = T.topLeftCorner(m, m);
    Mat B = T.bottomRightCorner(n - m, n - m);
    Mat C = T.topRightCorner(m, n - m);
    Mat X(m, n - m);
    // Triangular Sylvester: columns left to right, rows bottom to top.
    for (int j = 0; j < n - m; ++j) {
        for (int i = m - 1; i >= 0; --i) {
            Cplx rhs = C(i, j);
            for (int k2 = i + 1; k2 < m; ++k2) rhs -= A(i, k2) * X(k2, j);
            for (int k2 = 0; k2 < j; ++k2) rhs += X(i, k2) * B(k2, j);
            Cplx denom = A(i, i) - B(j, j);
            if (std::abs(denom) < 1e-14 * (std::abs(A(i, i)) + std::abs(B(j, j)) + 1.0))
                throw StructuralError("schur_projector: eigenvalue clusters not separated");
            X(i, j) = rhs / denom;
        }
    }
    Mat PT = Mat::Zero(n, n);
    PT.topLeftCorner(m, m) = Mat::Identity(m, m);
    PT.topRightCorner(m, n - m) = X;
    return U * PT * U.adjoint();
}

}  // namespace detail

/// One eigenvalue cluster of a degree-0 operator.
struct EigCluster {
    Cplx value;                   // cluster representative (mean)
    int total_mult = 0;           // algebraic multiplicity over all degrees
    std::vector<int> mult;        // per degree (indexed from E.p)
    bool below = false;           // |value| < cutoff
    std::vector<Cplx> members;    // raw eigenvalues in the cluster
};

namespace detail {

struct EigItem {
    Cplx v;
    int degree;
};

/// Connectivity clustering: items within `tol` of each other merge
/// transitively.
inline std::vector<EigCluster> cluster_at(const std::vector<EigItem>& items,
                                          const GradedSpace& E, double tol) {
    size_t n = items.size();
    std::vector<size_t> parent(n);
    for (size_t i = 0; i < n; ++i) parent[i] = i;
    std::function<size_t(size_t)> find = [&](size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if (std::abs(items[i].v - items[j].v) <= tol) parent[find(i)] = find(j);
    std::map<size_t, EigCluster> byroot;
    std::vector<size_t> order;
    for (size_t i = 0; i < n; ++i) {
        size_t r = find(i);
        auto it = byroot.find(r);
        if (it == byroot.end()) {
            byroot[r] = {Cplx(0), 0, std::vector<int>(E.dims.size(), 0), false, {}};
            order.push_back(r);
        }
        EigCluster& c = byroot[r];
        c.mult[static_cast<size_t>(items[i].degree - E.p)] += 1;
        c.total_mult += 1;
        c.value += (items[i].v - c.value) / static_cast<double>(c.total_mult);
        c.members.push_back(items[i].v);
    }
    // deterministic order: by (re, im) of the center
    std::vector<EigCluster> out;
    for (size_t r : order) out.push_back(byroot[r]);
    std::sort(out.begin(), out.end(), [](const EigCluster& a, const EigCluster& b) {
        if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
        return a.value.imag() < b.value.imag();
    });
    return out;
}

/// A clustering is accepted when every cluster's Schur projector has integral
/// per-degree traces matching the multiplicity counts (a split generalized
/// eigenspace fails this or the triangular Sylvester separation).
inline bool clusters_valid(const GradedMap& L, const std::vector<EigCluster>& clusters,
                           const std::vector<EigItem>& items) {
    const GradedSpace& E = L.source;
    // Assignment by nearest member (matches the connectivity clustering).
    auto nearest = [&](Cplx z) {
        size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (size_t c = 0; c < clusters.size(); ++c)
            for (Cplx m : clusters[c].members) {
                double d = std::abs(z - m);
                if (d < bd) { bd = d; best = c; }
            }
        return best;
    };
    (void)items;
    try {
        for (size_t c = 0; c < clusters.size(); ++c) {
            for (int i = E.p; i <= E.q; ++i) {
                if (E.dim(i) == 0) continue;
                Mat P = schur_projector(L.block(i),
                                        [&](Cplx z) { return nearest(z) == c; });
                double tr = P.trace().real();
                int want = clusters[c].mult[static_cast<size_t>(i - E.p)];
                if (std::abs(tr - want) > 1e-6 * (1.0 + std::abs(tr))) return false;
                if (std::abs(P.trace().imag()) > 1e-6) return false;
            }
        }
    } catch (const StructuralError&) {
        return false;
    }
    return true;
}

}  // namespace detail

/// Eigenvalues of all degree blocks of L, clustered by connectivity.  The
/// tolerance starts at kClusterRelTol (relative) and escalates while the
/// clusters fail the spectral-projector validation; defective eigenvalues
/// scatter like eps^{1/k} and are re-merged this way.
inline std::vector<EigCluster> eigenvalue_clusters(const GradedMap& L) {
    if (L.shift != 0 || L.source != L.target)
        throw StructuralError("eigenvalue_clusters: L must be a degree-0 endomorphism");
    const GradedSpace& E = L.source;
    std::vector<detail::EigItem> items;
    double scale = 0;  // tolerance reference: operator size, not spectral radius
    for (int i = E.p; i <= E.q; ++i) {
        if (E.dim(i) == 0) continue;
        scale = std::max(scale, L.block(i).norm());
        Eigen::ComplexEigenSolver<Mat> es(L.block(i), false);
        for (int k = 0; k < es.eigenvalues().size(); ++k)
            items.push_back({es.eigenvalues()(k), i});
    }
    if (items.empty()) return {};
    scale = std::max(scale, 1e-300);
    for (double tol = kClusterRelTol * scale; tol <= 3e-3 * scale; tol *= 10.0) {
        auto clusters = detail::cluster_at(items, E, tol);
        if (detail::clusters_valid(L, clusters, items)) return clusters;
    }
    throw StructuralError("eigenvalue_clusters: spectrum does not separate into stable clusters");
}

/// Cutoff decomposition E = E_{<a} + E_{>a} of a degree-0 operator.
struct SpectralSplit {
    GradedMap L;
    double a = 0;
    std::vector<EigCluster> clusters;
    GradedMap P_below;
    GradedMap P_above;
};

/// Spectral split at radius a.  Rejects cutoffs within kRingRelTol * max|eig|
/// of an eigenvalue modulus, naming the offending eigenvalue.
inline SpectralSplit spectral_split(const GradedMap& L, double a) {
    if (a <= 0) throw StructuralError("spectral_split: cutoff must be positive");
    SpectralSplit s;
    s.L = L;
    s.a = a;
    s.clusters = eigenvalue_clusters(L);
    double scale = 1e-300;
    for (const auto& cl : s.clusters) scale = std::max(scale, std::abs(cl.value));
    for (auto& cl : s.clusters) {
        if (std::abs(std::abs(cl.value) - a) < kRingRelTol * std::max(scale, a)) {
            std::ostringstream os;
            os << "spectral_split: eigenvalue " << cl.value.real();
            if (cl.value.imag() != 0) os << (cl.value.imag() < 0 ? "-" : "+") << std::abs(cl.value.imag()) << "i";
            os << " lies on the cutoff circle |z| = " << a;
            throw StructuralError(os.str());
        }
        cl.below = std::abs(cl.value) < a;
    }
    const GradedSpace& E = L.source;
    s.P_below = GradedMap(E, E, 0);
    s.P_above = GradedMap(E, E, 0);
    for (int i = E.p; i <= E.q; ++i) {
        if (E.dim(i) == 0) continue;
        Mat P = detail::schur_projector(L.block(i), [a](Cplx z) { return std::abs(z) < a; });
        s.P_above.blocks[i] = Mat::Identity(E.dim(i), E.dim(i)) - P;
        s.P_below.blocks[i] = std::move(P);
    }
    return s;
}

/// Index of the cluster nearest to z0, or npos when z0 is not within a
/// cluster radius of the spectrum.
inline size_t find_cluster(const std::vector<EigCluster>& clusters, Cplx z0) {
    size_t best = std::string::npos;
    double bd = std::numeric_limits<double>::infinity();
    double scale = 1e-300;
    for (size_t c = 0; c < clusters.size(); ++c) {
        scale = std::max(scale, std::abs(clusters[c].value));
        double d = std::abs(z0 - clusters[c].value);
        if (d < bd) { bd = d; best = c; }
    }
    if (best == std::string::npos || bd > 1e-3 * (1.0 + scale)) return std::string::npos;
    return best;
}

/// Spectral projector onto the generalized eigenspace of the cluster at z0
/// (eigenvalues are assigned to their nearest cluster center).
inline GradedMap spectral_projector(const GradedMap& L, Cplx z0) {
    auto clusters = eigenvalue_clusters(L);
    size_t idx = find_cluster(clusters, z0);
    if (idx == std::string::npos)
        throw StructuralError("spectral_projector: z0 is not in the spectrum");
    auto nearest_is_idx = [&clusters, idx](Cplx z) {
        size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (size_t c = 0; c < clusters.size(); ++c)
            for (Cplx m : clusters[c].members) {
                double d = std::abs(z - m);
                if (d < bd) { bd = d; best = c; }
            }
        return best == idx;
    };
    const GradedSpace& E = L.source;
    GradedMap P(E, E, 0);
    for (int i = E.p; i <= E.q; ++i) {
        if (E.dim(i) == 0) continue;
        P.blocks[i] = detail::schur_projector(L.block(i), nearest_is_idx);
    }
    return P;
}

// ---------------------------------------------------------------------------
// Subspace restriction
// ---------------------------------------------------------------------------

/// Per-degree orthonormal bases of the range of a (numerical) projector.
inline std::map<int, Mat> projector_range_bases(const GradedMap& P) {
    const GradedSpace& E = P.source;
    std::map<int, Mat> bases;
    for (int i = E.p; i <= E.q; ++i) {
        int n = E.dim(i);
        if (n == 0) continue;
        Mat Pi = P.block(i);
        int k = static_cast<int>(std::lround(Pi.trace().real()));
        if (k < 0 || k > n) throw StructuralError("projector_range_bases: bad projector trace");
        if (k == 0) continue;
        Eigen::JacobiSVD<Mat> svd(Pi, Eigen::ComputeThinU);
        bases[i] = svd.matrixU().leftCols(k);
    }
    return bases;
}

/// Restriction of a fixed-shift map to an invariant subspace in the given
/// bases (full column rank, not necessarily orthonormal).  Restriction is
/// similarity-invariant, so determinants and tau values computed downstream
/// do not depend on the basis choice.
inline GradedMap restrict_map(const GradedMap& f, const std::map<int, Mat>& bases) {
    const GradedSpace& E = f.source;
    std::vector<int> dims;
    for (int i = E.p; i <= E.q; ++i) {
        auto it = bases.find(i);
        dims.push_back(it == bases.end() ? 0 : static_cast<int>(it->second.cols()));
    }
    GradedSpace S(E.p, dims);
    GradedMap r(S, S, f.shift);
    for (int i = S.p; i <= S.q; ++i) {
        int tgt = i + f.shift;
        if (S.dim(i) == 0 || tgt < S.p || tgt > S.q || S.dim(tgt) == 0) continue;
        const Mat& Qi = bases.at(i);
        const Mat& Qt = bases.at(tgt);
        Mat img = f.block(i) * Qi;
        Mat coef = Qt.colPivHouseholderQr().solve(img);
        double leak = (img - Qt * coef).norm();
        if (leak > 1e-6 * (1.0 + img.norm()))
            throw StructuralError("restrict_map: subspace not invariant at degree " +
                                  std::to_string(i));
        r.blocks[i] = std::move(coef);
    }
    return r;
}

/// k_{<a} = P k P; a homotopy for delta restricted to E_{<a}.
inline GradedMap truncated_homotopy(const SpectralSplit& split, const GradedMap& k) {
    return compose(split.P_below, compose(k, split.P_below));
}

/// sum_p (-1)^p dim E^p_{<a}; zero whenever delta is exact and commutes with L.
inline int truncated_dim_alternating_sum(const SpectralSplit& split) {
    int s = 0;
    const GradedSpace& E = split.L.source;
    for (int i = E.p; i <= E.q; ++i) {
        if (E.dim(i) == 0) continue;
        int k = static_cast<int>(std::lround(split.P_below.block(i).trace().real()));
        s += ((i % 2) ? -1 : 1) * k;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Truncated zeta factors
// ---------------------------------------------------------------------------

enum class Band { Below, Above, Between };

struct TruncatedZeta {
    bool finite = true;
    Cplx value = 1.0;  // meaningful when finite
    int order = 0;     // order of the product at this sigma (0 when finite)
};

namespace detail {

inline std::map<int, Mat> band_bases(const GradedMap& L, Band band, double a, double b) {
    auto pick = [&](Cplx z) {
        double m = std::abs(z);
        switch (band) {
            case Band::Below: return m < a;
            case Band::Above: return m > a;
            case Band::Between: return m > a && m < b;
        }
        return false;
    };
    const GradedSpace& E = L.source;
    std::map<int, Mat> bases;
    for (int i = E.p; i <= E.q; ++i) {
        if (E.dim(i) == 0) continue;
        Mat P = schur_projector(L.block(i), pick);
        int k = static_cast<int>(std::lround(P.trace().real()));
        if (k == 0) continue;
        Eigen::JacobiSVD<Mat> svd(P, Eigen::ComputeThinU);
        bases[i] = svd.matrixU().leftCols(k);
    }
    return bases;
}

}  // namespace detail

/// prod_i det((L+sigma)|_{band, degree i})^{(-1)^i i}.  Empty bands give 1;
/// if L+sigma is singular on the band, reports the order of the product at
/// this sigma instead of a value.
inline TruncatedZeta truncated_zeta(const GradedMap& L, Band band, double a, double b,
                                    Cplx sigma) {
    auto bases = detail::band_bases(L, band, a, b);
    GradedMap Lb = restrict_map(L, bases);
    const GradedSpace& S = Lb.source;
    TruncatedZeta out;
    double scale = 1e-300;
    std::vector<std::pair<int, Mat>> blocks;  // degree, L+sigma
    for (int i = S.p; i <= S.q; ++i) {
        if (S.dim(i) == 0) continue;
        Mat m = Lb.block(i) + sigma * Mat::Identity(S.dim(i), S.dim(i));
        scale = std::max(scale, m.norm());
        blocks.emplace_back(i, std::move(m));
    }
    // Detect a pole/zero: any eigenvalue of L on the band equal to -sigma.
    int order = 0;
    for (const auto& [i, m] : blocks) {
        Eigen::ComplexEigenSolver<Mat> es(m, false);
        int mult = 0;
        for (int k = 0; k < es.eigenvalues().size(); ++k)
            if (std::abs(es.eigenvalues()(k)) < 1e3 * kClusterRelTol * scale) ++mult;
        order += ((i % 2) ? -1 : 1) * i * mult;
        if (mult > 0) out.finite = false;
    }
    if (!out.finite) {
        out.order = order;
        return out;
    }
    double lm = 0, ph = 0;
    for (const auto& [i, m] : blocks) {
        auto [l, arg] = detail::logdet(m);
        double e = ((i % 2) ? -1.0 : 1.0) * i;
        lm += e * l;
        ph += e * arg;
    }
    out.value = detail::from_logdet(lm, ph);
    return out;
}

/// Order at sigma = -z0 of prod_i det((L+sigma)|_{E^i})^{(-1)^i i}, computed
/// from per-degree algebraic multiplicities and cross-checked against
/// Trs[N P_{z0}].  z0 outside the spectrum gives 0.
inline int zeta_order_at(const GradedMap& L, Cplx z0) {
    auto clusters = eigenvalue_clusters(L);
    size_t idx = find_cluster(clusters, z0);
    if (idx == std::string::npos) return 0;
    const EigCluster* hit = &clusters[idx];
    const GradedSpace& E = L.source;
    int order = 0;
    for (int i = E.p; i <= E.q; ++i)
        order += ((i % 2) ? -1 : 1) * i * hit->mult[static_cast<size_t>(i - E.p)];
    // Independent route: supertrace of N composed with the spectral projector.
    GradedMap P = spectral_projector(L, hit->value);
    Cplx tr = supertrace(compose(number_operator(E), P));
    long rounded = std::lround(tr.real());
    if (std::abs(tr - Cplx(static_cast<double>(rounded))) > 1e-6 * (1.0 + std::abs(tr)))
        throw StructuralError("zeta_order_at: Trs[N P] is not an integer");
    if (rounded != order)
        throw StructuralError("zeta_order_at: multiplicity count " + std::to_string(order) +
                              " disagrees with Trs[N P] = " + std::to_string(rounded));
    return order;
}

// ---------------------------------------------------------------------------
// The glued section
// ---------------------------------------------------------------------------

namespace detail {

/// Scalar of rho(h) relative to the standard frame: per degree the frame
/// [ d b_{i-1} | h_i | b_i ] with b_i a lift of the coimage of d_i and h_i
/// the given closed representatives.  Alternating determinant product.
inline Cplx rho_scalar(const GradedSpace& E, const GradedMap& d, const std::map<int, Mat>& h,
                       double scale_hint = 0.0) {
    double lm = 0, ph = 0;
    std::map<int, Mat> coim;
    double dnorm = std::max(d.frobenius_norm(), scale_hint);
    for (int i = E.p; i <= E.q; ++i) {
        int n = E.dim(i);
        if (n == 0) continue;
        Mat di = d.block(i);
        if (di.rows() > 0 && di.cols() > 0) {
            Eigen::JacobiSVD<Mat> svd(di, Eigen::ComputeFullV);
            int r = svd_rank(svd, dnorm);
            if (r > 0) coim[i] = svd.matrixV().leftCols(r);
        }
    }
    for (int i = E.p; i <= E.q; ++i) {
        int n = E.dim(i);
        if (n == 0) continue;
        int r_prev = (coim.count(i - 1) && E.dim(i - 1) > 0)
                         ? static_cast<int>(coim[i - 1].cols()) : 0;
        int r_cur = coim.count(i) ? static_cast<int>(coim[i].cols()) : 0;
        auto hit = h.find(i);
        int hi = (hit == h.end()) ? 0 : static_cast<int>(hit->second.cols());
        if (r_prev + hi + r_cur != n)
            throw StructuralError("rho_scalar: representatives do not complete the frame at degree " +
                                  std::to_string(i) + " (need " + std::to_string(n - r_prev - r_cur) +
                                  " classes, got " + std::to_string(hi) + ")");
        Mat G(n, n);
        int col = 0;
        if (r_prev > 0) {
            G.middleCols(col, r_prev) = d.block(i - 1) * coim[i - 1];
            col += r_prev;
        }
        if (hi > 0) {
            if (hit->second.rows() != n) throw StructuralError("rho_scalar: bad class row count");
            G.middleCols(col, hi) = hit->second;
            col += hi;
        }
        if (r_cur > 0) G.middleCols(col, r_cur) = coim[i];
        auto [l, a] = logdet(G);
        if (!std::isfinite(l))
            throw StructuralError("rho_scalar: degenerate frame at degree " + std::to_string(i) +
                                  " (classes dependent modulo im d?)");
        double e = (i % 2) ? -1.0 : 1.0;
        lm += e * l;
        ph += e * a;
    }
    return from_logdet(lm, ph);
}

inline void require_closed(const GradedSpace& E, const GradedMap& d, const std::map<int, Mat>& h) {
    for (const auto& [i, m] : h) {
        if (m.cols() == 0) continue;
        Mat dv = d.block(i) * m;
        if (dv.norm() > 1e-8 * (1.0 + m.norm()) * (1.0 + d.frobenius_norm()))
            throw StructuralError("glued_section: representatives at degree " + std::to_string(i) +
                                  " are not closed");
    }
}

}  // namespace detail

/// The coordinate [rho h]_{det E, delta} of h in det H(E,d), computed through
/// the cutoff factorization at radius a:
///   [rho h] = [rho_{<a} h]_{det E_{<a}, delta} *
///             prod_i det([d,delta]|_{E^i_{>a}})^{(-1)^i i}.
/// The value does not depend on a.
inline Cplx glued_section(const Complex& c, double a, const std::map<int, Mat>& h) {
    if (!c.d || !c.delta) throw StructuralError("glued_section: need d and delta");
    const GradedSpace& E = c.space;
    detail::require_closed(E, *c.d, h);
    GradedMap L = supercommutator(*c.d, *c.delta);
    SpectralSplit split = spectral_split(L, a);

    // Below the cutoff: map classes through P_{<a} and compute the ratio
    // [rho_{<a} h] / tau(delta_{<a}) in the subspace coordinates.
    auto bases = projector_range_bases(split.P_below);
    GradedMap d_lo = restrict_map(*c.d, bases);
    GradedMap delta_lo = restrict_map(*c.delta, bases);
    std::map<int, Mat> h_lo;
    for (const auto& [i, m] : h) {
        if (m.cols() == 0) continue;
        auto it = bases.find(i);
        if (it == bases.end())
            throw StructuralError("glued_section: classes at degree " + std::to_string(i) +
                                  " vanish below the cutoff");
        h_lo[i] = it->second.adjoint() * (split.P_below.block(i) * m);
    }
    Cplx rho_lo = detail::rho_scalar(d_lo.source, d_lo, h_lo, c.d->frobenius_norm());
    Complex c_lo;
    c_lo.space = d_lo.source;
    c_lo.delta = delta_lo;
    Cplx tau_lo = tau_delta(c_lo).scalar;

    // Above the cutoff: the regularized determinant factor at sigma = 0.
    TruncatedZeta hi = truncated_zeta(L, Band::Above, a, 0.0, Cplx(0.0));
    if (!hi.finite) throw StructuralError("glued_section: L singular above the cutoff");

    // Relative sign of the det E = det E_{<a} (x) det E_{>a} identification
    // between the rho-side frames [dB | H | B] and the delta-side frames:
    // the interleaving parity of the rho columns across the split, against
    // the calibrated concatenation sign of tau(delta).
    auto bases_hi = projector_range_bases(split.P_above);
    GradedMap d_hi = restrict_map(*c.d, bases_hi);
    long flips = 0;
    auto rank_of = [&](const GradedMap& f, int i) {
        Mat b = f.block(i);
        if (b.rows() == 0 || b.cols() == 0) return 0;
        Eigen::JacobiSVD<Mat> svd(b);
        return detail::svd_rank(svd, c.d->frobenius_norm());
    };
    for (int i = E.p; i <= E.q; ++i) {
        int r_hi_prev = (i > E.p) ? rank_of(d_hi, i - 1) : 0;
        if (r_hi_prev == 0) continue;
        int r_lo_cur = rank_of(d_lo, i);
        auto hit = h_lo.find(i);
        int hcols = (hit == h_lo.end()) ? 0 : static_cast<int>(hit->second.cols());
        flips += static_cast<long>(r_hi_prev) * (hcols + r_lo_cur);
    }
    double s_rho = (flips % 2) ? -1.0 : 1.0;
    double s_delta = detail::concat_sign_tau_delta(d_lo.source, d_hi.source);
    return (rho_lo / tau_lo) * hi.value * s_rho * s_delta;
}

/// Direct (cutoff-free) evaluation of the same coordinate: rho(h) against
/// tau(delta) in the full standard frame.  Used as the oracle for the cutoff
/// route.
inline Cplx glued_section_direct(const Complex& c, const std::map<int, Mat>& h) {
    if (!c.d || !c.delta) throw StructuralError("glued_section_direct: need d and delta");
    detail::require_closed(c.space, *c.d, h);
    Cplx rho = detail::rho_scalar(c.space, *c.d, h);
    Cplx tau = tau_delta(c).scalar;
    return rho / tau;
}

// ---------------------------------------------------------------------------
// Band identities
// ---------------------------------------------------------------------------

struct BandIdentityReport {
    double section_vs_zeta = 0;   // tau_(a,b)(d) = R_(a,b)(0) tau_(a,b)(delta)
    double tau_multiplicative = 0;  // tau_{<b}(delta) = tau_{<a} (x) tau_(a,b)
    double zeta_multiplicative = 0; // R_{<b} = R_{<a} R_(a,b) at a test sigma
};

/// Checks the band identity and multiplicativity over the splitting at a < b.
inline BandIdentityReport band_section_identity(const Complex& c, double a, double b,
                                                Cplx test_sigma = Cplx(0.37, 0.11)) {
    if (!c.d || !c.delta) throw StructuralError("band_section_identity: need d and delta");
    GradedMap L = supercommutator(*c.d, *c.delta);
    BandIdentityReport rep;

    auto bases_ab = detail::band_bases(L, Band::Between, a, b);
    GradedMap d_ab = restrict_map(*c.d, bases_ab);
    GradedMap delta_ab = restrict_map(*c.delta, bases_ab);
    Complex band;
    band.space = d_ab.source;
    band.d = d_ab;
    band.delta = delta_ab;
    if (band.space.total_dim() > 0) {
        Cplx lhs = tau_d(band).scalar;
        TruncatedZeta R = truncated_zeta(L, Band::Between, a, b, Cplx(0.0));
        if (!R.finite) throw StructuralError("band_section_identity: band is not L-invertible");
        Cplx rhs = R.value * tau_delta(band).scalar;
        rep.section_vs_zeta = std::abs(lhs - rhs) / (1.0 + std::abs(rhs));
    }

    // tau multiplicativity on the delta side, with the bases of E_{<b} chosen
    // as the concatenation [E_{<a} | E_{(a,b)}] so the frames are comparable.
    auto bases_a = detail::band_bases(L, Band::Below, a, 0.0);
    std::map<int, Mat> bases_b;
    const GradedSpace& E = c.space;
    for (int i = E.p; i <= E.q; ++i) {
        int ka = bases_a.count(i) ? static_cast<int>(bases_a[i].cols()) : 0;
        int kab = bases_ab.count(i) ? static_cast<int>(bases_ab[i].cols()) : 0;
        if (ka + kab == 0) continue;
        Mat m(E.dim(i), ka + kab);
        if (ka > 0) m.leftCols(ka) = bases_a[i];
        if (kab > 0) m.rightCols(kab) = bases_ab[i];
        bases_b[i] = std::move(m);
    }
    {
        GradedMap delta_b = restrict_map(*c.delta, bases_b);
        Complex cb;
        cb.space = delta_b.source;
        cb.delta = delta_b;
        Cplx whole = tau_delta(cb).scalar;

        GradedMap delta_a = restrict_map(*c.delta, bases_a);
        Complex ca;
        ca.space = delta_a.source;
        ca.delta = delta_a;
        Cplx parts = tau_delta(ca).scalar * tau_delta(band).scalar *
                     detail::concat_sign_tau_delta(delta_a.source, band.space);
        rep.tau_multiplicative = std::abs(whole - parts) / (1.0 + std::abs(parts));
    }

    {
        TruncatedZeta rb = truncated_zeta(L, Band::Below, b, 0.0, test_sigma);
        TruncatedZeta ra = truncated_zeta(L, Band::Below, a, 0.0, test_sigma);
        TruncatedZeta rab = truncated_zeta(L, Band::Between, a, b, test_sigma);
        if (rb.finite && ra.finite && rab.finite)
            rep.zeta_multiplicative =
                std::abs(rb.value - ra.value * rab.value) / (1.0 + std::abs(rb.value));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Poincare-duality shadow
// ---------------------------------------------------------------------------

/// The Poincare-dual surrogate: E'^j = (E^{p+q-j})*, with d' and delta' the
/// correspondingly regraded transposes of d and delta.
inline Complex poincare_dual(const Complex& c) {
    const GradedSpace& E = c.space;
    int pq = E.p + E.q;
    std::vector<int> dims;
    for (int j = E.p; j <= E.q; ++j) dims.push_back(E.dim(pq - j));
    GradedSpace D(E.p, dims);
    Complex r;
    r.space = D;
    if (c.d) {
        GradedMap dp(D, D, 1);
        for (int j = D.p; j < D.q; ++j) {
            // d'^j = (d^{pq-j-1})^T : (E^{pq-j})* -> (E^{pq-j-1})*
            Mat m = c.d->block(pq - j - 1);
            if (m.size() > 0 && D.dim(j) > 0 && D.dim(j + 1) > 0) dp.blocks[j] = m.transpose();
        }
        r.d = std::move(dp);
    }
    if (c.delta) {
        GradedMap del(D, D, -1);
        for (int j = D.p + 1; j <= D.q; ++j) {
            // delta'^j = (delta^{pq-j+1})^T : (E^{pq-j})* -> (E^{pq-j+1})*
            Mat m = c.delta->block(pq - j + 1);
            if (m.size() > 0 && D.dim(j) > 0 && D.dim(j - 1) > 0) del.blocks[j] = m.transpose();
        }
        r.delta = std::move(del);
    }
    return r;
}

/// Classes of the Poincare dual complex dual to the given classes of (E,d)
/// under the evaluation pairing (functionals selecting class coordinates).
/// The identification det H(E') ~ det H(E)^{(-1)^{n-1}} reverses the order of
/// the cohomology factors, so the dual wedge carries the anti-isomorphism
/// sign prod_i (-1)^{h_i (h_i - 1)/2}; it is folded into the first class.
inline std::map<int, Mat> poincare_dual_classes(const Complex& c, const CohomologyData& H) {
    const GradedSpace& E = c.space;
    int pq = E.p + E.q;
    long rev = 0;
    std::map<int, Mat> dual;
    for (int i = E.p; i <= E.q; ++i) {
        int h = H.betti(i);
        if (h == 0) continue;
        rev += static_cast<long>(h) * (h - 1) / 2;
        // Rows of G_i^{-1} that pick out the class coordinates are closed
        // functionals on E^i, i.e. columns in (E^i)* = E'^{pq-i}.
        Mat Ginv = H.frames.at(i).inverse();
        int off = H.rank_d(i - 1);
        Mat rows = Ginv.middleRows(off, h);      // h x n
        dual[pq - i] = rows.transpose();         // functionals as columns
    }
    if ((rev % 2) != 0 && !dual.empty()) dual.begin()->second.col(0) *= -1.0;
    return dual;
}

}  // namespace torzeta
