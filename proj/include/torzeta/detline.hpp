#pragma once

// Determinant lines as scalar-plus-frame objects, the canonical sections
// tau(d), tau(delta) of det E for exact differentials, torsion ratios, norms,
// duality and shift pairings, and determinants of graded isomorphisms.
//
// Every element of a determinant line is stored as a complex scalar relative
// to the standard-basis volume frame det E = (x)_{i=p..q} (det E^i)^{(-1)^i}
// (ordered product, increasing i).  Canonical isomorphisms between such lines
// are scalar maps; their signs are fixed once per shape by evaluating both
// sides on a split model complex, where all sections are explicit signed
// frames.

#include "graded.hpp"

#include <cmath>
#include <sstream>

namespace torzeta {

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

struct FrameFactor {
    int degree;
    int exponent;  // +1 or -1
    int dim;
    bool operator==(const FrameFactor& o) const {
        return degree == o.degree && exponent == o.exponent && dim == o.dim;
    }
};

/// Ordered list of (degree, exponent) factors of one or more det lines.
struct Frame {
    std::vector<FrameFactor> factors;

    int parity() const {
        int s = 0;
        for (const auto& f : factors) s += f.dim;
        return s & 1;
    }
    bool operator==(const Frame& o) const { return factors == o.factors; }
    bool operator!=(const Frame& o) const { return !(*this == o); }

    std::string describe() const {
        std::ostringstream os;
        for (const auto& f : factors)
            os << "(detE^" << f.degree << ")^" << (f.exponent > 0 ? "+1" : "-1") << " ";
        return os.str();
    }
};

/// Standard frame of det E.
inline Frame det_frame(const GradedSpace& E) {
    Frame f;
    for (int i = E.p; i <= E.q; ++i)
        f.factors.push_back({i, (i % 2) ? -1 : 1, E.dim(i)});
    return f;
}

inline Frame inverse_frame(const Frame& f) {
    Frame r;
    for (auto it = f.factors.rbegin(); it != f.factors.rend(); ++it)
        r.factors.push_back({it->degree, -it->exponent, it->dim});
    return r;
}

inline Frame tensor_frame(const Frame& a, const Frame& b) {
    Frame r = a;
    r.factors.insert(r.factors.end(), b.factors.begin(), b.factors.end());
    return r;
}

/// An element of a determinant line: scalar relative to the standard frame.
struct DetLineElement {
    Frame frame;
    Cplx scalar = 0;

    int parity() const { return frame.parity(); }

    DetLineElement inverse() const {
        if (scalar == Cplx(0)) throw StructuralError("DetLineElement: inverse of zero");
        return {inverse_frame(frame), Cplx(1) / scalar};
    }
};

/// Product of elements of the same line (scalars multiply; used for ratios
/// via inverse()).
inline Cplx ratio(const DetLineElement& a, const DetLineElement& b) {
    if (a.frame != b.frame)
        throw StructuralError("DetLineElement ratio: frame mismatch: " + a.frame.describe() +
                              "vs " + b.frame.describe());
    if (b.scalar == Cplx(0)) throw StructuralError("DetLineElement ratio: zero denominator");
    return a.scalar / b.scalar;
}

// ---------------------------------------------------------------------------
// Alternating determinant products
// ---------------------------------------------------------------------------

namespace detail {

/// log det of a square block via partial-pivot LU, as (log modulus, phase).
inline std::pair<double, double> logdet(const Mat& m) {
    if (m.rows() != m.cols()) throw StructuralError("logdet: non-square block");
    if (m.rows() == 0) return {0.0, 0.0};
    Eigen::PartialPivLU<Mat> lu(m);
    double lm = 0, ph = 0;
    // permutation sign
    ph += (lu.permutationP().determinant() < 0) ? M_PI : 0.0;
    for (int k = 0; k < m.rows(); ++k) {
        Cplx u = lu.matrixLU()(k, k);
        double a = std::abs(u);
        if (a == 0) return {-std::numeric_limits<double>::infinity(), 0.0};
        lm += std::log(a);
        ph += std::arg(u);
    }
    return {lm, ph};
}

inline Cplx from_logdet(double lm, double ph) {
    if (lm == -std::numeric_limits<double>::infinity()) return Cplx(0);
    return std::exp(lm) * Cplx(std::cos(ph), std::sin(ph));
}

}  // namespace detail

/// prod_i det(L|_{E^i})^{(-1)^i} (weight = 0) or prod_i det(L|_{E^i})^{(-1)^i i}
/// (weight = 1), accumulated in log space.
inline Cplx alternating_det_product(const GradedMap& L, int weight) {
    if (L.shift != 0 || L.source != L.target)
        throw StructuralError("alternating_det_product: L must be a degree-0 endomorphism");
    double lm = 0, ph = 0;
    for (int i = L.source.p; i <= L.source.q; ++i) {
        if (L.source.dim(i) == 0) continue;
        auto [l, a] = detail::logdet(L.block(i));
        double e = ((i % 2) ? -1.0 : 1.0) * (weight ? static_cast<double>(i) : 1.0);
        if (l == -std::numeric_limits<double>::infinity()) {
            if (e == 0) continue;
            throw StructuralError("alternating_det_product: singular block at degree " +
                                  std::to_string(i));
        }
        lm += e * l;
        ph += e * a;
    }
    return detail::from_logdet(lm, ph);
}

// ---------------------------------------------------------------------------
// The canonical section tau(d)
// ---------------------------------------------------------------------------

namespace detail {

/// Complement of the column span of `im` (n x r) inside C^n, as n x (n-r).
/// Orthonormal by default; with an rng, a random complement (resampled until
/// well conditioned against im).
inline Mat complement_basis(const Mat& im, int n, Rng* rng) {
    int r = static_cast<int>(im.cols());
    int k = n - r;
    if (k < 0) throw StructuralError("complement_basis: too many image columns");
    if (k == 0) return Mat(n, 0);
    if (rng) {
        for (int attempt = 0; attempt < 64; ++attempt) {
            Mat cand = rng->matrix(n, k);
            Mat full(n, n);
            if (r > 0) full << im, cand;
            else full = cand;
            Eigen::JacobiSVD<Mat> svd(full);
            double smin = svd.singularValues()(n - 1);
            double smax = svd.singularValues()(0);
            if (smin > 1e-4 * smax) return cand;
        }
        throw StructuralError("complement_basis: resampling failed");
    }
    if (r == 0) return Mat::Identity(n, n);
    Eigen::JacobiSVD<Mat> svd(im, Eigen::ComputeFullU);
    return svd.matrixU().rightCols(k);
}

/// Scalar of tau(d) = (x)_i (d sigma^{i-1} ^ sigma^i)^{(-1)^i} relative to the
/// standard frame, for an exact degree +1 differential given by its blocks.
/// The same sigma^i is reused as d sigma^i in the next factor, which makes the
/// value independent of the complement choices.  Throws StructuralError when
/// the frames fail to be invertible (d not exact).
inline Cplx tau_scalar_exact(const GradedSpace& E, const GradedMap& d, Rng* rng) {
    double lm = 0, ph = 0;
    Mat dsigma_prev(E.dim(E.p), 0);  // d sigma^{i-1}, columns in E^i
    for (int i = E.p; i <= E.q; ++i) {
        int n = E.dim(i);
        int carry = static_cast<int>(dsigma_prev.cols());
        if (carry > n)
            throw StructuralError("tau: image exceeds dimension at degree " + std::to_string(i) +
                                  " (differential not exact)");
        if (n == 0) {
            dsigma_prev = Mat(E.dim(i + 1), 0);
            continue;
        }
        Mat sigma = complement_basis(dsigma_prev, n, rng);
        Mat S(n, n);
        if (carry > 0 && sigma.cols() > 0)
            S << dsigma_prev, sigma;
        else if (carry > 0)
            S = dsigma_prev;
        else
            S = sigma;
        auto [l, a] = logdet(S);
        if (!std::isfinite(l))
            throw StructuralError("tau: singular frame at degree " + std::to_string(i) +
                                  " (differential not exact)");
        double e = (i % 2) ? -1.0 : 1.0;
        lm += e * l;
        ph += e * a;
        dsigma_prev = Mat(d.block(i) * sigma);
    }
    if (dsigma_prev.cols() > 0)
        throw StructuralError("tau: residual image beyond top degree (differential not exact)");
    return from_logdet(lm, ph);
}

}  // namespace detail

/// tau(d) for an exact complex.  The optional rng draws random complement
/// choices; the value is choice-independent.
inline DetLineElement tau_d(const Complex& c, Rng* rng = nullptr) {
    if (!c.d) throw StructuralError("tau_d: complex has no d");
    if (!is_differential(*c.d)) throw StructuralError("tau_d: d.d != 0");
    Cplx s;
    try {
        s = detail::tau_scalar_exact(c.space, *c.d, rng);
    } catch (const StructuralError&) {
        CohomologyData H = cohomology(c);
        std::ostringstream os;
        os << "tau_d: differential is not exact; dim H = [";
        for (size_t k = 0; k < H.dims.size(); ++k) os << (k ? "," : "") << H.dims[k];
        os << "]";
        throw StructuralError(os.str());
    }
    return {det_frame(c.space), s};
}

namespace detail {

inline GradedSpace underline_space(const GradedSpace& E) { return dual_space(E); }

/// delta viewed as a degree +1 differential on the underline space (degree i
/// of E becomes degree -i).
inline GradedMap underline_delta(const GradedMap& delta) {
    GradedSpace U = underline_space(delta.source);
    GradedMap d(U, U, 1);
    for (const auto& [i, m] : delta.blocks) d.blocks[-i] = m;
    return d;
}

/// The anti-isomorphism det(underline E) -> det E acts on each factor by
/// (-1)^{m(m-1)/2}, m = dim E^i.
inline double anti_iso_sign(const GradedSpace& E) {
    long s = 0;
    for (int n : E.dims) s += static_cast<long>(n) * (n - 1) / 2;
    return (s % 2) ? -1.0 : 1.0;
}

}  // namespace detail

/// tau(delta) for an exact degree -1 differential, as an element of det E in
/// the same standard frame as tau(d).
inline DetLineElement tau_delta(const Complex& c, Rng* rng = nullptr) {
    if (!c.delta) throw StructuralError("tau_delta: complex has no delta");
    if (!is_differential(*c.delta)) throw StructuralError("tau_delta: delta.delta != 0");
    GradedSpace U = detail::underline_space(c.space);
    GradedMap du = detail::underline_delta(*c.delta);
    Cplx s;
    try {
        s = detail::tau_scalar_exact(U, du, rng);
    } catch (const StructuralError&) {
        Complex uc;
        uc.space = U;
        uc.d = du;
        CohomologyData H = cohomology(uc);
        std::ostringstream os;
        os << "tau_delta: delta is not exact; dim H = [";
        for (size_t k = 0; k < H.dims.size(); ++k) os << (k ? "," : "") << H.dims[k];
        os << "]";
        throw StructuralError(os.str());
    }
    return {det_frame(c.space), detail::anti_iso_sign(c.space) * s};
}

// ---------------------------------------------------------------------------
// Torsion ratio
// ---------------------------------------------------------------------------

inline bool invertible_blockwise(const GradedMap& L, double rel_tol = 1e-9) {
    for (int i = L.source.p; i <= L.source.q; ++i) {
        int n = L.source.dim(i);
        if (n == 0) continue;
        Eigen::JacobiSVD<Mat> svd(L.block(i));
        if (svd.singularValues()(n - 1) <= rel_tol * (1.0 + svd.singularValues()(0)))
            return false;
    }
    return true;
}

/// tau(d) (x) tau(delta)^{-1} computed from the canonical sections.
/// Requires [d,delta] invertible.
inline Cplx torsion_ratio(const Complex& c, Rng* rng = nullptr) {
    if (!c.d || !c.delta) throw StructuralError("torsion_ratio: need both d and delta");
    GradedMap L = supercommutator(*c.d, *c.delta);
    if (!invertible_blockwise(L))
        throw StructuralError("torsion_ratio: [d,delta] is singular");
    DetLineElement td = tau_d(c, rng);
    DetLineElement tdel = tau_delta(c, rng);
    return td.scalar / tdel.scalar;
}

// ---------------------------------------------------------------------------
// Determinant of a graded isomorphism, automorphism action
// ---------------------------------------------------------------------------

/// det f = prod_i det(f|_{E^i})^{(-1)^i} as a section of (det E)^{-1} (x) det E'
/// (or the r-shifted target line).  Blocks must be square and invertible.
inline DetLineElement det_graded_iso(const GradedMap& f) {
    double lm = 0, ph = 0;
    for (int i = f.source.p; i <= f.source.q; ++i) {
        int n = f.source.dim(i);
        if (n == 0) continue;
        if (f.target.dim(i + f.shift) != n)
            throw StructuralError("det_graded_iso: block at degree " + std::to_string(i) +
                                  " is not square");
        auto [l, a] = detail::logdet(f.block(i));
        if (l == -std::numeric_limits<double>::infinity())
            throw StructuralError("det_graded_iso: singular block at degree " + std::to_string(i));
        double e = (i % 2) ? -1.0 : 1.0;
        lm += e * l;
        ph += e * a;
    }
    Frame fr = tensor_frame(inverse_frame(det_frame(f.source)), det_frame(f.target));
    return {fr, detail::from_logdet(lm, ph)};
}

/// det g|_E for a degree-preserving automorphism (a plain scalar).
inline Cplx det_aut(const GradedMap& g) { return det_graded_iso(g).scalar; }

struct AutAction {
    Complex conjugated;
    Cplx det_g;
};

/// (g.d, g.delta) = (g d g^{-1}, g delta g^{-1}) together with det g|_E.
inline AutAction act_aut(const GradedMap& g, const Complex& c) {
    AutAction r;
    r.det_g = det_aut(g);
    r.conjugated.space = c.space;
    if (c.d) r.conjugated.d = conjugate(g, *c.d);
    if (c.delta) r.conjugated.delta = conjugate(g, *c.delta);
    return r;
}

// ---------------------------------------------------------------------------
// Canonical pairings (duality and shift), calibrated on split models
// ---------------------------------------------------------------------------

namespace detail {

inline int round_sign(Cplx v, const char* what) {
    double re = v.real();
    if (std::abs(v.imag()) > 1e-6 || std::abs(std::abs(re) - 1.0) > 1e-6)
        throw StructuralError(std::string("calibration failed for ") + what);
    return re > 0 ? 1 : -1;
}

/// Sign of the canonical pairing det E (x) det E* -> C on standard frames:
/// the split exact model must pair tau(d) with tau(d~) to 1.
inline double dual_pairing_sign(const GradedSpace& E) {
    auto r = exact_ranks(E);
    GradedMap d0 = split_exact_d(E, r);
    Cplx a = tau_scalar_exact(E, d0, nullptr);
    GradedMap dt = dual_transpose(d0);
    Cplx b = tau_scalar_exact(dt.source, dt, nullptr);
    return round_sign(Cplx(1) / (a * b), "dual pairing");
}

/// Sign of the canonical pairing det E (x) det E_1 -> C on standard frames:
/// the split model must satisfy tau_E(d) tau_{E_1}(-d) = 1.
inline double shift_pairing_sign(const GradedSpace& E) {
    auto r = exact_ranks(E);
    GradedMap d0 = split_exact_d(E, r);
    Cplx a = tau_scalar_exact(E, d0, nullptr);
    GradedSpace E1(E.p - 1, E.dims);  // E_1^j = E^{j+1}
    GradedMap md(E1, E1, 1);
    for (const auto& [i, m] : d0.blocks) md.blocks[i - 1] = -m;
    Cplx b = tau_scalar_exact(E1, md, nullptr);
    return round_sign(Cplx(1) / (a * b), "shift pairing");
}

}  // namespace detail

/// The graded space whose standard det frame this is; rejects frames that are
/// not a single det E.
inline GradedSpace space_of_frame(const Frame& f) {
    if (f.factors.empty()) throw StructuralError("space_of_frame: empty frame");
    int p = f.factors.front().degree;
    std::vector<int> dims;
    int expect = p;
    for (const auto& ff : f.factors) {
        if (ff.degree != expect || ff.exponent != ((ff.degree % 2) ? -1 : 1))
            throw StructuralError("space_of_frame: not a standard det frame");
        dims.push_back(ff.dim);
        ++expect;
    }
    return GradedSpace(p, dims);
}

/// Canonical pairing det E (x) det E* ~ C.  `s` lives in det E, `t` in det E*.
inline Cplx pair_dual(const DetLineElement& s, const DetLineElement& t) {
    GradedSpace E = space_of_frame(s.frame);
    if (t.frame != det_frame(dual_space(E)))
        throw StructuralError("pair_dual: frames are not canonically paired");
    return s.scalar * t.scalar * detail::dual_pairing_sign(E);
}

/// tau_E(d) tau_{E_1}(-d) under the canonical pairing det E (x) det E_1 ~ C;
/// equal to 1 for every exact d.
inline Cplx shift_identity_check(const Complex& c, Rng* rng = nullptr) {
    if (!c.d) throw StructuralError("shift_identity_check: no d");
    DetLineElement te = tau_d(c, rng);
    GradedSpace E1(c.space.p - 1, c.space.dims);
    GradedMap md(E1, E1, 1);
    for (const auto& [i, m] : c.d->blocks) md.blocks[i - 1] = -m;
    Cplx t1 = detail::tau_scalar_exact(E1, md, rng);
    return te.scalar * t1 * detail::shift_pairing_sign(c.space);
}

/// Norm on det E induced by the standard Hermitian metric (standard frame has
/// norm 1).
inline double hermitian_norm(const DetLineElement& s) { return std::abs(s.scalar); }

// ---------------------------------------------------------------------------
// Direct sums
// ---------------------------------------------------------------------------

/// E'' = E + E' with per-degree concatenated bases.
inline GradedSpace direct_sum_space(const GradedSpace& A, const GradedSpace& B) {
    int p = std::min(A.p, B.p);
    int q = std::max(A.q, B.q);
    std::vector<int> dims;
    for (int i = p; i <= q; ++i) dims.push_back(A.dim(i) + B.dim(i));
    return GradedSpace(p, dims);
}

inline GradedMap direct_sum_map(const GradedMap& f, const GradedMap& g) {
    if (f.shift != g.shift) throw StructuralError("direct_sum_map: shifts differ");
    GradedSpace S = direct_sum_space(f.source, g.source);
    GradedSpace T = direct_sum_space(f.target, g.target);
    GradedMap r(S, T, f.shift);
    for (int i = S.p; i <= S.q; ++i) {
        int nf = f.source.dim(i), ng = g.source.dim(i);
        int mf = f.target.dim(i + f.shift), mg = g.target.dim(i + f.shift);
        if (nf + ng == 0 || mf + mg == 0) continue;
        Mat b = Mat::Zero(mf + mg, nf + ng);
        if (nf > 0 && mf > 0) b.topLeftCorner(mf, nf) = f.block(i);
        if (ng > 0 && mg > 0) b.bottomRightCorner(mg, ng) = g.block(i);
        r.blocks[i] = std::move(b);
    }
    return r;
}

inline Complex direct_sum(const Complex& a, const Complex& b) {
    Complex r;
    r.space = direct_sum_space(a.space, b.space);
    if (a.d && b.d) r.d = direct_sum_map(*a.d, *b.d);
    if (a.delta && b.delta) r.delta = direct_sum_map(*a.delta, *b.delta);
    return r;
}

namespace detail {

/// Sign relating tau on a direct sum (concatenated standard frames) to the
/// product of the tau's, calibrated on split models.
inline double concat_sign_tau_d(const GradedSpace& A, const GradedSpace& B) {
    GradedMap dA = split_exact_d(A, exact_ranks(A));
    GradedMap dB = split_exact_d(B, exact_ranks(B));
    GradedMap dS = direct_sum_map(dA, dB);
    Cplx whole = tau_scalar_exact(dS.source, dS, nullptr);
    Cplx parts = tau_scalar_exact(A, dA, nullptr) * tau_scalar_exact(B, dB, nullptr);
    return round_sign(whole / parts, "direct-sum tau(d)");
}

inline GradedMap split_exact_delta(const GradedSpace& E) {
    GradedSpace U = underline_space(E);
    GradedMap du = split_exact_d(U, exact_ranks(U));
    GradedMap delta(E, E, -1);
    for (const auto& [j, m] : du.blocks) delta.blocks[-j] = m;
    return delta;
}

inline double concat_sign_tau_delta(const GradedSpace& A, const GradedSpace& B) {
    GradedMap dA = split_exact_delta(A);
    GradedMap dB = split_exact_delta(B);
    GradedMap dS = direct_sum_map(dA, dB);
    Complex whole;
    whole.space = dS.source;
    whole.delta = dS;
    Complex ca, cb;
    ca.space = A;
    ca.delta = dA;
    cb.space = B;
    cb.delta = dB;
    Cplx w = tau_delta(whole).scalar;
    Cplx p = tau_delta(ca).scalar * tau_delta(cb).scalar;
    return round_sign(w / p, "direct-sum tau(delta)");
}

}  // namespace detail

}  // namespace torzeta
