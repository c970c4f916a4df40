#pragma once

// Exact complexes with [d,delta] = 1 carrying an odd involution Gamma with
// delta Gamma = Gamma d and Gamma|_B = d + delta, the comparison section
// rho_Gamma = (det Gamma_{-+})^{-1} of det E, the A/B/C splitting, and the
// contact-type model family on exterior algebras.

#include "detline.hpp"

namespace torzeta {

/// An odd degree-reversing map: the block at source degree j maps E^j to
/// E^{p+q-j}.  Not a GradedMap (no fixed shift).
struct ReversingMap {
    GradedSpace space;
    std::map<int, Mat> blocks;  // source degree -> (dim E^{p+q-j} x dim E^j)

    Mat block(int j) const {
        auto it = blocks.find(j);
        if (it != blocks.end()) return it->second;
        return Mat::Zero(space.dim(space.p + space.q - j), space.dim(j));
    }

    double frobenius_norm() const {
        double s = 0;
        for (const auto& [j, m] : blocks) s += m.squaredNorm();
        return std::sqrt(s);
    }
};

struct GammaStructure {
    Complex complex;    // d, delta present, [d,delta] = 1
    ReversingMap gamma; // Gamma^2 = 1, delta Gamma = Gamma d, Gamma|_B = d+delta
};

namespace detail {

/// Orthonormal basis of the column span of m.
inline Mat column_span_basis(const Mat& m) {
    if (m.cols() == 0 || m.rows() == 0) return Mat(m.rows(), 0);
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
    int r = svd_rank(svd);
    return svd.matrixU().leftCols(r);
}

}  // namespace detail

/// Residuals of the GammaStructure axioms; all vanish on a valid structure.
struct GammaAxiomReport {
    double comm_minus_one = 0;    // [d,delta] - 1
    double gamma_sq_minus_one = 0;
    double intertwine = 0;        // delta Gamma - Gamma d
    double middle_block = 0;      // (Gamma - d - delta)|_B

    double max() const {
        return std::max(std::max(comm_minus_one, gamma_sq_minus_one),
                        std::max(intertwine, middle_block));
    }
};

inline GammaAxiomReport check_gamma_axioms(const GammaStructure& gs) {
    const Complex& c = gs.complex;
    if (!c.d || !c.delta) throw StructuralError("GammaStructure: need d and delta");
    const GradedSpace& E = c.space;
    if (((E.q - E.p) % 2 + 2) % 2 == 0)
        throw StructuralError("GammaStructure: q - p must be odd");
    const int pq = E.p + E.q;
    GammaAxiomReport r;

    r.comm_minus_one =
        (supercommutator(*c.d, *c.delta) - identity_map(E)).frobenius_norm();

    double g2 = 0;
    for (int j = E.p; j <= E.q; ++j) {
        if (E.dim(j) == 0) continue;
        Mat m = gs.gamma.block(pq - j) * gs.gamma.block(j) -
                Mat::Identity(E.dim(j), E.dim(j));
        g2 += m.squaredNorm();
    }
    r.gamma_sq_minus_one = std::sqrt(g2);

    double tw = 0;
    for (int j = E.p; j <= E.q; ++j) {
        if (E.dim(j) == 0) continue;
        int tgt = pq - j - 1;  // both delta.Gamma and Gamma.d land here
        int rows = (tgt >= E.p && tgt <= E.q) ? E.dim(tgt) : 0;
        if (rows == 0) continue;
        Mat lhs = c.delta->block(pq - j) * gs.gamma.block(j);
        Mat rhs = (j + 1 <= E.q && E.dim(j + 1) > 0)
                      ? Mat(gs.gamma.block(j + 1) * c.d->block(j))
                      : Mat::Zero(rows, E.dim(j));
        tw += (lhs - rhs).squaredNorm();
    }
    r.intertwine = std::sqrt(tw);

    // B = delta E^{mid} + d E^{mid-1}, mid = (p+q+1)/2.  On the first piece
    // Gamma must equal d (delta kills it); on the second, delta.
    int mid = (pq + 1) / 2;
    double mb = 0;
    Mat b1 = detail::column_span_basis(c.delta->block(mid));   // in E^{mid-1}
    if (b1.cols() > 0)
        mb = std::max(mb, Mat((gs.gamma.block(mid - 1) - c.d->block(mid - 1)) * b1).norm());
    Mat b2 = detail::column_span_basis(c.d->block(mid - 1));   // in E^{mid}
    if (b2.cols() > 0)
        mb = std::max(mb, Mat((gs.gamma.block(mid) - c.delta->block(mid)) * b2).norm());
    r.middle_block = mb;
    return r;
}

/// rho_Gamma = (det Gamma_{-+})^{-1} in det E, realized as the alternating
/// product over the upper half of the grading:
///   rho_Gamma = prod_{k=(p+q+1)/2}^{q} det(Gamma: E^{p+q-k} -> E^k)^{(-1)^k}.
/// Theorem: tau(d) = tau(delta) = rho_Gamma.
inline DetLineElement rho_gamma(const GammaStructure& gs, double tol = 1e-10) {
    GammaAxiomReport rep = check_gamma_axioms(gs);
    double scale = 1.0 + gs.gamma.frobenius_norm();
    if (rep.gamma_sq_minus_one > tol * scale)
        throw StructuralError("rho_gamma: Gamma^2 = 1 violated, residual " +
                              std::to_string(rep.gamma_sq_minus_one));
    if (rep.intertwine > tol * scale)
        throw StructuralError("rho_gamma: delta Gamma = Gamma d violated, residual " +
                              std::to_string(rep.intertwine));
    if (rep.middle_block > tol * scale)
        throw StructuralError("rho_gamma: Gamma|_B = d + delta violated, residual " +
                              std::to_string(rep.middle_block));
    if (rep.comm_minus_one > tol * scale)
        throw StructuralError("rho_gamma: [d,delta] = 1 violated, residual " +
                              std::to_string(rep.comm_minus_one));

    const GradedSpace& E = gs.complex.space;
    double lm = 0, ph = 0;
    for (int k = (E.p + E.q + 1) / 2; k <= E.q; ++k) {
        int src = E.p + E.q - k;
        if (E.dim(src) != E.dim(k))
            throw StructuralError("rho_gamma: Gamma block not square at degree " +
                                  std::to_string(k));
        if (E.dim(k) == 0) continue;
        auto [l, a] = detail::logdet(gs.gamma.block(src));
        if (!std::isfinite(l)) throw StructuralError("rho_gamma: singular Gamma block");
        double e = (k % 2) ? -1.0 : 1.0;
        lm += e * l;
        ph += e * a;
    }
    return {det_frame(E), detail::from_logdet(lm, ph)};
}

// ---------------------------------------------------------------------------
// The contact-type model
// ---------------------------------------------------------------------------

namespace detail {

/// Bitmask bases of Lambda(W*), dim W = 2m, grouped by degree, each degree
/// sorted by increasing mask.
struct ExteriorBasis {
    int m;
    std::vector<std::vector<unsigned>> masks;      // by exterior degree 0..2m
    std::vector<std::map<unsigned, int>> indices;  // mask -> position

    explicit ExteriorBasis(int m_) : m(m_) {
        int w = 2 * m;
        masks.assign(static_cast<size_t>(w) + 1, {});
        for (unsigned s = 0; s < (1u << w); ++s)
            masks[static_cast<size_t>(__builtin_popcount(s))].push_back(s);
        indices.assign(static_cast<size_t>(w) + 1, {});
        for (int j = 0; j <= w; ++j)
            for (int t = 0; t < static_cast<int>(masks[static_cast<size_t>(j)].size()); ++t)
                indices[static_cast<size_t>(j)][masks[static_cast<size_t>(j)][static_cast<size_t>(t)]] = t;
    }

    /// K: e_I -> e_{I^c} away from the middle degree, identity on Lambda^m.
    unsigned K(unsigned s, int deg) const {
        unsigned full = (m == 0) ? 0u : ((1u << (2 * m)) - 1u);
        return (deg == m) ? s : (full & ~s);
    }
};

}  // namespace detail

/// The (2m+1)-dimensional contact model: E = Lambda(W*) + a^Lambda(W*) with
/// dim W = 2m, elements (u, v) standing for u + a^v, d(u,v) = (0,u) (wedge by
/// the contact form), delta(u,v) = (v,0) (contraction i_Z), [d,delta] = 1,
/// Gamma(u,v) = (Kv, Ku).
inline GammaStructure contact_model(int m) {
    if (m < 0) throw StructuralError("contact_model: m must be >= 0");
    detail::ExteriorBasis B(m);
    int w = 2 * m;
    int n = w + 1;  // degrees 0..n

    auto lam = [&](int j) -> int {
        return (j < 0 || j > w) ? 0 : static_cast<int>(B.masks[static_cast<size_t>(j)].size());
    };
    std::vector<int> dims;
    for (int j = 0; j <= n; ++j) dims.push_back(lam(j) + lam(j - 1));
    GradedSpace E(0, dims);

    auto voff = [&](int j) { return lam(j); };  // v part follows the u part

    GradedMap d(E, E, 1), delta(E, E, -1);
    for (int j = 0; j <= n; ++j) {
        if (E.dim(j) == 0) continue;
        if (j + 1 <= n && lam(j) > 0) {  // d(u,v) = (0,u)
            Mat b = Mat::Zero(E.dim(j + 1), E.dim(j));
            for (int t = 0; t < lam(j); ++t) b(voff(j + 1) + t, t) = 1.0;
            d.blocks[j] = std::move(b);
        }
        if (j - 1 >= 0 && lam(j - 1) > 0) {  // delta(u,v) = (v,0)
            Mat b = Mat::Zero(E.dim(j - 1), E.dim(j));
            for (int t = 0; t < lam(j - 1); ++t) b(t, voff(j) + t) = 1.0;
            delta.blocks[j] = std::move(b);
        }
    }

    ReversingMap gamma;
    gamma.space = E;
    for (int j = 0; j <= n; ++j) {
        if (E.dim(j) == 0 || E.dim(n - j) == 0) continue;
        Mat b = Mat::Zero(E.dim(n - j), E.dim(j));
        for (int t = 0; t < lam(j); ++t) {  // u-monomial of degree j -> v-slot
            unsigned mask = B.masks[static_cast<size_t>(j)][static_cast<size_t>(t)];
            int pos = B.indices[static_cast<size_t>(w - j)].at(B.K(mask, j));
            b(voff(n - j) + pos, t) = 1.0;
        }
        for (int t = 0; t < lam(j - 1); ++t) {  // v-monomial (degree j-1) -> u-slot
            unsigned mask = B.masks[static_cast<size_t>(j - 1)][static_cast<size_t>(t)];
            int pos = B.indices[static_cast<size_t>(w - (j - 1))].at(B.K(mask, j - 1));
            b(pos, voff(j) + t) = 1.0;
        }
        gamma.blocks[j] = std::move(b);
    }

    GammaStructure gs;
    gs.complex.space = E;
    gs.complex.d = std::move(d);
    gs.complex.delta = std::move(delta);
    gs.gamma = std::move(gamma);
    return gs;
}

// ---------------------------------------------------------------------------
// The A/B/C splitting
// ---------------------------------------------------------------------------

/// A subcomplex presented by per-degree orthonormal bases; carries the
/// restrictions of d and delta in those bases.
struct SubComplex {
    std::map<int, Mat> bases;  // degree -> n_i x k_i
    Complex restricted;        // complex in the basis coordinates
};

namespace detail {

inline SubComplex restrict_to(const GradedSpace& E, const std::map<int, Mat>& bases,
                              const GradedMap* d, const GradedMap* delta) {
    std::vector<int> dims;
    for (int i = E.p; i <= E.q; ++i) {
        auto it = bases.find(i);
        dims.push_back(it == bases.end() ? 0 : static_cast<int>(it->second.cols()));
    }
    GradedSpace S(E.p, dims);
    SubComplex sc;
    sc.bases = bases;
    sc.restricted.space = S;
    auto restrict_map = [&](const GradedMap& f) {
        GradedMap r(S, S, f.shift);
        for (int i = S.p; i <= S.q; ++i) {
            int tgt = i + f.shift;
            if (S.dim(i) == 0 || tgt < S.p || tgt > S.q || S.dim(tgt) == 0) continue;
            const Mat& Qi = bases.at(i);
            const Mat& Qt = bases.at(tgt);
            Mat img = f.block(i) * Qi;
            Mat coef = Qt.adjoint() * img;  // orthonormal bases
            double leak = (img - Qt * coef).norm();
            if (leak > 1e-8 * (1.0 + img.norm()))
                throw StructuralError("restrict_to: subspace not invariant at degree " +
                                      std::to_string(i));
            r.blocks[i] = std::move(coef);
        }
        return r;
    };
    if (d) sc.restricted.d = restrict_map(*d);
    if (delta) sc.restricted.delta = restrict_map(*delta);
    return sc;
}

}  // namespace detail

struct AbcSplit {
    SubComplex A, B, C;
};

/// The splitting E = A + B + C of an exact complex with [d,delta] = 1 and
/// q - p odd:
///   A = (+)_{p <= i <= (p+q-3)/2} E^i  +  d E^{(p+q-3)/2}
///   B = delta E^{(p+q+1)/2}  +  d E^{(p+q-1)/2}
///   C = delta E^{(p+q+3)/2}  +  (+)_{(p+q+3)/2 <= i <= q} E^i
inline AbcSplit abc_split(const Complex& c) {
    if (!c.d || !c.delta) throw StructuralError("abc_split: need d and delta");
    const GradedSpace& E = c.space;
    const int pq = E.p + E.q;
    if (((E.q - E.p) % 2 + 2) % 2 == 0) throw StructuralError("abc_split: q - p must be odd");

    std::map<int, Mat> a, b, cc;
    for (int i = E.p; i <= (pq - 3) / 2; ++i)
        if (E.dim(i) > 0) a[i] = Mat::Identity(E.dim(i), E.dim(i));
    {
        Mat im = detail::column_span_basis(c.d->block((pq - 3) / 2));
        if (im.cols() > 0) a[(pq - 1) / 2] = im;
    }
    {
        Mat b1 = detail::column_span_basis(c.delta->block((pq + 1) / 2));
        if (b1.cols() > 0) b[(pq - 1) / 2] = b1;
        Mat b2 = detail::column_span_basis(c.d->block((pq - 1) / 2));
        if (b2.cols() > 0) b[(pq + 1) / 2] = b2;
    }
    {
        Mat im = detail::column_span_basis(c.delta->block((pq + 3) / 2));
        if (im.cols() > 0) cc[(pq + 1) / 2] = im;
    }
    for (int i = (pq + 3) / 2; i <= E.q; ++i)
        if (E.dim(i) > 0) cc[i] = Mat::Identity(E.dim(i), E.dim(i));

    AbcSplit s;
    s.A = detail::restrict_to(E, a, &*c.d, &*c.delta);
    s.B = detail::restrict_to(E, b, &*c.d, &*c.delta);
    s.C = detail::restrict_to(E, cc, &*c.d, &*c.delta);
    return s;
}

}  // namespace torzeta
