#pragma once

// Finite Z-graded complex vector spaces, degree-shifting block maps, and the
// supertrace/supercommutator calculus on them.  Everything is dense
// double-precision complex; rank decisions use a relative singular-value
// threshold.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace torzeta {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

/// Thrown when an operation is applied to structurally incompatible data
/// (shape or degree mismatch, singular input, violated precondition).
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kRankRelTol = 1e-9;   // singular-value cutoff, relative
inline constexpr double kDiffRelTol = 1e-12;  // ||d.d|| <= tol * ||d||^2

// ---------------------------------------------------------------------------
// GradedSpace
// ---------------------------------------------------------------------------

/// A finite Z-graded vector space E = E^p + ... + E^q.  Each degree carries
/// the implicit standard ordered basis of C^{n_i}.
struct GradedSpace {
    int p = 0;
    int q = -1;
    std::vector<int> dims;  // dims[i - p] = dim E^i

    GradedSpace() = default;
    GradedSpace(int p_, std::vector<int> dims_) : p(p_), dims(std::move(dims_)) {
        q = p + static_cast<int>(dims.size()) - 1;
        for (int n : dims)
            if (n < 0) throw StructuralError("GradedSpace: negative dimension");
        if (dims.empty()) throw StructuralError("GradedSpace: empty degree range");
    }

    int dim(int i) const { return (i < p || i > q) ? 0 : dims[static_cast<size_t>(i - p)]; }

    int total_dim() const {
        int s = 0;
        for (int n : dims) s += n;
        return s;
    }

    /// chi = sum (-1)^i dim E^i
    int chi() const {
        int s = 0;
        for (int i = p; i <= q; ++i) s += ((i % 2) ? -1 : 1) * dim(i);
        return s;
    }

    /// chi' = sum (-1)^i i dim E^i
    int chi_prime() const {
        int s = 0;
        for (int i = p; i <= q; ++i) s += ((i % 2) ? -1 : 1) * i * dim(i);
        return s;
    }

    bool operator==(const GradedSpace& o) const { return p == o.p && dims == o.dims; }
    bool operator!=(const GradedSpace& o) const { return !(*this == o); }
};

// ---------------------------------------------------------------------------
// GradedMap
// ---------------------------------------------------------------------------

/// A degree-k linear map f : E -> E', stored as one dense block per source
/// degree.  Blocks whose source or target degree is out of range are implicit
/// zeros and never stored.
struct GradedMap {
    GradedSpace source;
    GradedSpace target;
    int shift = 0;
    std::map<int, Mat> blocks;  // source degree -> (dim target^{i+shift} x dim source^i)

    GradedMap() = default;
    GradedMap(GradedSpace src, GradedSpace tgt, int k)
        : source(std::move(src)), target(std::move(tgt)), shift(k) {}

    int parity() const { return ((shift % 2) + 2) % 2; }

    bool stores(int i) const { return blocks.count(i) != 0; }

    /// Block at source degree i (implicit zeros materialized on demand).
    Mat block(int i) const {
        auto it = blocks.find(i);
        if (it != blocks.end()) return it->second;
        return Mat::Zero(target.dim(i + shift), source.dim(i));
    }

    void set_block(int i, Mat m) {
        if (m.rows() != target.dim(i + shift) || m.cols() != source.dim(i))
            throw StructuralError("GradedMap::set_block: block shape mismatch at degree " +
                                  std::to_string(i));
        if (m.size() == 0) return;
        blocks[i] = std::move(m);
    }

    double frobenius_norm() const {
        double s = 0;
        for (const auto& [i, m] : blocks) s += m.squaredNorm();
        return std::sqrt(s);
    }

    GradedMap& operator*=(Cplx a) {
        for (auto& [i, m] : blocks) m *= a;
        return *this;
    }
};

inline GradedMap operator*(Cplx a, GradedMap f) {
    f *= a;
    return f;
}

inline GradedMap operator+(const GradedMap& f, const GradedMap& g) {
    if (f.source != g.source || f.target != g.target || f.shift != g.shift)
        throw StructuralError("GradedMap+: incompatible maps");
    GradedMap r = f;
    for (int i = r.source.p; i <= r.source.q; ++i) {
        if (r.source.dim(i) == 0 || r.target.dim(i + r.shift) == 0) continue;
        Mat b = f.block(i) + g.block(i);
        if (b.squaredNorm() > 0 || r.stores(i)) r.blocks[i] = std::move(b);
    }
    return r;
}

inline GradedMap operator-(const GradedMap& f, const GradedMap& g) { return f + (Cplx(-1) * g); }

inline GradedMap identity_map(const GradedSpace& E) {
    GradedMap id(E, E, 0);
    for (int i = E.p; i <= E.q; ++i)
        if (E.dim(i) > 0) id.blocks[i] = Mat::Identity(E.dim(i), E.dim(i));
    return id;
}

inline GradedMap zero_map(const GradedSpace& E, const GradedSpace& F, int shift) {
    return GradedMap(E, F, shift);
}

/// N acts by multiplication by i on E^i.
inline GradedMap number_operator(const GradedSpace& E) {
    GradedMap n(E, E, 0);
    for (int i = E.p; i <= E.q; ++i)
        if (E.dim(i) > 0) n.blocks[i] = Cplx(i, 0) * Mat::Identity(E.dim(i), E.dim(i));
    return n;
}

/// Blockwise composition f.g (g first).
inline GradedMap compose(const GradedMap& f, const GradedMap& g) {
    if (f.source != g.target)
        throw StructuralError("compose: f.source does not match g.target");
    GradedMap r(g.source, f.target, f.shift + g.shift);
    for (int i = g.source.p; i <= g.source.q; ++i) {
        if (g.source.dim(i) == 0) continue;
        int mid = i + g.shift;
        int out = mid + f.shift;
        if (f.source.dim(mid) == 0 || f.target.dim(out) == 0) continue;
        r.blocks[i] = f.block(mid) * g.block(i);
    }
    return r;
}

/// [f,g] = fg - (-1)^{|f||g|} gf.
inline GradedMap supercommutator(const GradedMap& f, const GradedMap& g) {
    GradedMap fg = compose(f, g);
    GradedMap gf = compose(g, f);
    double sign = (f.parity() && g.parity()) ? -1.0 : 1.0;
    return fg - (Cplx(sign) * gf);
}

/// Trs f = sum (-1)^i tr f|_{E^i}; defined for degree-0 endomorphisms only.
inline Cplx supertrace(const GradedMap& f) {
    if (f.shift != 0) throw StructuralError("supertrace: map has nonzero shift");
    if (f.source != f.target) throw StructuralError("supertrace: source != target");
    Cplx s = 0;
    for (int i = f.source.p; i <= f.source.q; ++i) {
        if (f.source.dim(i) == 0) continue;
        s += Cplx((i % 2) ? -1.0 : 1.0) * f.block(i).trace();
    }
    return s;
}

/// Conjugate-transpose with respect to the standard Hermitian metric.
inline GradedMap adjoint(const GradedMap& f) {
    GradedMap r(f.target, f.source, -f.shift);
    for (const auto& [i, m] : f.blocks) r.blocks[i + f.shift] = m.adjoint();
    return r;
}

inline GradedSpace dual_space(const GradedSpace& E) {
    std::vector<int> d(E.dims.rbegin(), E.dims.rend());
    return GradedSpace(-E.q, std::move(d));
}

/// Transpose regraded to the dual space, E*^i = (E^{-i})*.  The transpose of
/// a degree-k map keeps degree k.
inline GradedMap dual_transpose(const GradedMap& f) {
    GradedMap r(dual_space(f.target), dual_space(f.source), f.shift);
    for (const auto& [i, m] : f.blocks) r.blocks[-(i + f.shift)] = m.transpose();
    return r;
}

// ---------------------------------------------------------------------------
// Complex
// ---------------------------------------------------------------------------

inline bool is_differential(const GradedMap& m) {
    double n = m.frobenius_norm();
    if (n == 0) return true;
    return compose(m, m).frobenius_norm() <= kDiffRelTol * n * n;
}

/// A graded space with up to two differentials: d of degree +1, delta of
/// degree -1.
struct Complex {
    GradedSpace space;
    std::optional<GradedMap> d;
    std::optional<GradedMap> delta;

    void validate() const {
        if (d) {
            if (d->shift != 1 || d->source != space || d->target != space)
                throw StructuralError("Complex: d must be a degree +1 endomorphism of the space");
            if (!is_differential(*d)) throw StructuralError("Complex: d.d != 0");
        }
        if (delta) {
            if (delta->shift != -1 || delta->source != space || delta->target != space)
                throw StructuralError("Complex: delta must be a degree -1 endomorphism");
            if (!is_differential(*delta)) throw StructuralError("Complex: delta.delta != 0");
        }
    }
};

// ---------------------------------------------------------------------------
// Cohomology
// ---------------------------------------------------------------------------

namespace detail {

/// Rank with a relative threshold; `floor` supplies the operator scale so a
/// block that is numerically zero inside a larger operator reports rank 0.
inline int svd_rank(const Eigen::JacobiSVD<Mat>& svd, double floor = 0.0) {
    if (svd.singularValues().size() == 0) return 0;
    double cut = kRankRelTol * std::max(svd.singularValues()(0), floor);
    if (cut == 0.0) return 0;
    int r = 0;
    for (int k = 0; k < svd.singularValues().size(); ++k)
        if (svd.singularValues()(k) > cut) ++r;
    return r;
}

}  // namespace detail

/// dims, representatives and projection data for H(E,d).  Per degree we store
/// the invertible frame G_i = [ d b_{i-1} | h_i | b_i ] where b_i spans a
/// complement of ker d_i and h_i lifts a basis of H^i; class coordinates of a
/// closed element are the middle rows of G_i^{-1} v.
struct CohomologyData {
    GradedSpace space;
    std::vector<int> dims;       // dim H^i
    std::vector<int> d_ranks;    // rank d_i
    std::map<int, Mat> reps;     // h_i, n_i x dims[i]
    std::map<int, Mat> frames;   // G_i
    std::map<int, Eigen::PartialPivLU<Mat>> frame_lu;

    int betti(int i) const {
        return (i < space.p || i > space.q) ? 0 : dims[static_cast<size_t>(i - space.p)];
    }
    int rank_d(int i) const {
        return (i < space.p || i > space.q) ? 0 : d_ranks[static_cast<size_t>(i - space.p)];
    }

    /// Coordinates of the classes of closed columns v in the representative
    /// basis of H^i.
    Mat class_coordinates(int i, const Mat& v) const {
        int n = space.dim(i);
        if (v.rows() != n) throw StructuralError("class_coordinates: wrong vector size");
        if (betti(i) == 0) return Mat::Zero(0, v.cols());
        auto it = frame_lu.find(i);
        Mat coords = it->second.solve(v);
        int off = rank_d(i - 1);
        return coords.middleRows(off, betti(i));
    }
};

/// Cohomology of (E, d) by SVD rank-revealing factorizations.
inline CohomologyData cohomology(const Complex& c) {
    if (!c.d) throw StructuralError("cohomology: complex has no d");
    const GradedSpace& E = c.space;
    const GradedMap& d = *c.d;
    if (!is_differential(d)) throw StructuralError("cohomology: d.d != 0");

    CohomologyData H;
    H.space = E;
    H.dims.assign(E.dims.size(), 0);
    H.d_ranks.assign(E.dims.size(), 0);

    std::map<int, Mat> coim;   // b_i: orthonormal complement of ker d_i
    std::map<int, Mat> image;  // d b_{i-1} (not orthonormalized)
    for (int i = E.p; i <= E.q; ++i) {
        int n = E.dim(i);
        if (n == 0) continue;
        Mat di = d.block(i);
        int r = 0;
        if (di.rows() > 0 && di.cols() > 0) {
            Eigen::JacobiSVD<Mat> svd(di, Eigen::ComputeThinU | Eigen::ComputeFullV);
            r = detail::svd_rank(svd, d.frobenius_norm());
            if (r > 0) {
                Mat b = svd.matrixV().leftCols(r);
                coim[i] = b;
                image[i + 1] = di * b;
            }
        }
        H.d_ranks[static_cast<size_t>(i - E.p)] = r;
    }

    for (int i = E.p; i <= E.q; ++i) {
        int n = E.dim(i);
        if (n == 0) continue;
        int r_prev = H.rank_d(i - 1);
        int r_cur = H.rank_d(i);
        int h = n - r_prev - r_cur;
        if (h < 0) throw StructuralError("cohomology: inconsistent ranks (d.d != 0 violated?)");
        H.dims[static_cast<size_t>(i - E.p)] = h;

        // Representatives: orthonormal basis of ker d_i orthogonal to im d_{i-1}.
        Mat reps(n, h);
        if (h > 0) {
            Mat di = d.block(i);
            Mat kerb;
            if (di.rows() == 0 || di.size() == 0) {
                kerb = Mat::Identity(n, n);
            } else {
                Eigen::JacobiSVD<Mat> svd(di, Eigen::ComputeFullV);
                int r = detail::svd_rank(svd, d.frobenius_norm());
                kerb = svd.matrixV().rightCols(n - r);
            }
            Mat proj = kerb;
            if (r_prev > 0) {
                Eigen::HouseholderQR<Mat> qr(image[i]);
                Mat qim = Mat(qr.householderQ()).leftCols(r_prev);
                proj = kerb - qim * (qim.adjoint() * kerb);
            }
            Eigen::JacobiSVD<Mat> psvd(proj, Eigen::ComputeThinU);
            if (detail::svd_rank(psvd) != h)
                throw StructuralError("cohomology: failed to split ker/im");
            reps = psvd.matrixU().leftCols(h);
        }
        H.reps[i] = reps;

        Mat G(n, n);
        int col = 0;
        if (r_prev > 0) {
            G.middleCols(col, r_prev) = image[i];
            col += r_prev;
        }
        if (h > 0) {
            G.middleCols(col, h) = reps;
            col += h;
        }
        if (r_cur > 0) {
            G.middleCols(col, r_cur) = coim[i];
            col += r_cur;
        }
        H.frames[i] = G;
        H.frame_lu.emplace(i, Eigen::PartialPivLU<Mat>(G));
    }
    return H;
}

// ---------------------------------------------------------------------------
// Seeded random generators
// ---------------------------------------------------------------------------

/// Deterministic RNG with explicit normal sampling (no reliance on
/// implementation-defined std distributions), so reports are byte-identical
/// across platforms.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(splitmix(seed ^ 0x9e3779b97f4a7c15ull)) {}

    /// Independent substream for (master seed, trial index).
    static Rng for_trial(uint64_t master, uint64_t trial) {
        return Rng(splitmix(master) ^ splitmix(trial * 0xbf58476d1ce4e5b9ull + 0x94d049bb133111ebull));
    }

    double uniform() {  // [0,1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0, u2 = 0;
        do { u1 = uniform(); } while (u1 <= 1e-300);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Complex normal with unit variance.
    Cplx cnormal() { return Cplx(normal() * M_SQRT1_2, normal() * M_SQRT1_2); }

    Cplx unit_phase() {
        double a = 2.0 * M_PI * uniform();
        return Cplx(std::cos(a), std::sin(a));
    }

    Mat matrix(int rows, int cols) {
        Mat m(rows, cols);
        for (int j = 0; j < cols; ++j)
            for (int i = 0; i < rows; ++i) m(i, j) = cnormal();
        return m;
    }

    uint64_t raw() { return gen_(); }

  private:
    static uint64_t splitmix(uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0;
};

/// I + 0.5 R with unit-variance entries, resampled while cond > 1e4.
inline Mat random_gl(Rng& rng, int n) {
    if (n == 0) return Mat(0, 0);
    for (;;) {
        Mat g = Mat::Identity(n, n) + 0.5 * rng.matrix(n, n);
        Eigen::JacobiSVD<Mat> svd(g);
        double smin = svd.singularValues()(n - 1);
        double smax = svd.singularValues()(0);
        if (smin > 0 && smax / smin < 1e4) return g;
    }
}

/// Degree-preserving automorphism with well-conditioned blocks.
inline GradedMap random_automorphism(const GradedSpace& E, Rng& rng) {
    GradedMap g(E, E, 0);
    for (int i = E.p; i <= E.q; ++i)
        if (E.dim(i) > 0) g.blocks[i] = random_gl(rng, E.dim(i));
    return g;
}

inline GradedMap inverse_automorphism(const GradedMap& g) {
    GradedMap inv(g.source, g.target, 0);
    for (int i = g.source.p; i <= g.source.q; ++i)
        if (g.source.dim(i) > 0) inv.blocks[i] = g.block(i).inverse();
    return inv;
}

/// g.f = g f g^{-1} for degree-0 g.
inline GradedMap conjugate(const GradedMap& g, const GradedMap& f) {
    return compose(compose(g, f), inverse_automorphism(g));
}

namespace detail {

/// Ranks r_i = n_i - r_{i-1} an exact degree +1 differential must have;
/// throws naming the violated feasibility condition.
inline std::vector<int> exact_ranks(const GradedSpace& E) {
    std::vector<int> r(E.dims.size(), 0);
    int prev = 0;
    for (int i = E.p; i <= E.q; ++i) {
        int ri = E.dim(i) - prev;
        if (ri < 0)
            throw StructuralError("random_exact_complex: rank infeasible at degree " +
                                  std::to_string(i) + " (required rank negative)");
        r[static_cast<size_t>(i - E.p)] = ri;
        prev = ri;
    }
    if (prev != 0)
        throw StructuralError("random_exact_complex: chi = " + std::to_string(E.chi()) +
                              " != 0, no exact differential exists");
    return r;
}

/// Split-model exact differential: the last r_i coordinates of E^i map
/// identically onto the first r_i coordinates of E^{i+1}.
inline GradedMap split_exact_d(const GradedSpace& E, const std::vector<int>& r) {
    GradedMap d(E, E, 1);
    for (int i = E.p; i < E.q; ++i) {
        int ri = r[static_cast<size_t>(i - E.p)];
        if (ri == 0 || E.dim(i + 1) == 0) continue;
        Mat b = Mat::Zero(E.dim(i + 1), E.dim(i));
        b.block(0, E.dim(i) - ri, ri, ri) = Mat::Identity(ri, ri);
        d.blocks[i] = std::move(b);
    }
    return d;
}

}  // namespace detail

/// Exact complex with differential of degree +1: a split model conjugated by
/// a random degree-0 automorphism.  Deterministic per seed.
inline Complex random_exact_complex(uint64_t seed, const GradedSpace& E) {
    auto r = detail::exact_ranks(E);
    Rng rng(seed);
    GradedMap g = random_automorphism(E, rng);
    Complex c;
    c.space = E;
    c.d = conjugate(g, detail::split_exact_d(E, r));
    return c;
}

inline Complex random_exact_complex(uint64_t seed, int p, std::vector<int> dims) {
    return random_exact_complex(seed, GradedSpace(p, std::move(dims)));
}

/// Exact degree -1 differential (delta), via the same split construction run
/// on the reversed grading.
inline GradedMap random_exact_delta(Rng& rng, const GradedSpace& E) {
    std::vector<int> s(E.dims.size() + 1, 0);  // s[i-p] = rank delta_i
    int next = 0;
    for (int i = E.q; i >= E.p; --i) {
        int si = E.dim(i) - next;
        if (si < 0) throw StructuralError("random_exact_delta: rank infeasible at degree " +
                                          std::to_string(i));
        s[static_cast<size_t>(i - E.p)] = si;
        next = si;
    }
    if (s[0] != 0) throw StructuralError("random_exact_delta: chi != 0");
    GradedMap delta(E, E, -1);
    for (int i = E.p + 1; i <= E.q; ++i) {
        int si = s[static_cast<size_t>(i - E.p)];
        if (si == 0) continue;
        Mat b = Mat::Zero(E.dim(i - 1), E.dim(i));
        b.block(0, E.dim(i) - si, si, si) = Mat::Identity(si, si);
        delta.blocks[i] = std::move(b);
    }
    GradedMap g = random_automorphism(E, rng);
    return conjugate(g, delta);
}

/// A pair (d, delta), both exact, with [d,delta] invertible: the split model
/// with per-degree complex scales on the transpose side, then independent
/// conjugations with resampling while [d,delta] is near singular.
inline Complex random_invertible_pair(uint64_t seed, const GradedSpace& E) {
    auto r = detail::exact_ranks(E);
    Rng rng(seed);
    GradedMap d0 = detail::split_exact_d(E, r);
    for (int attempt = 0; attempt < 64; ++attempt) {
        GradedMap delta0(E, E, -1);
        for (int i = E.p + 1; i <= E.q; ++i) {
            int ri = r[static_cast<size_t>(i - 1 - E.p)];
            if (ri == 0) continue;
            Cplx c = (0.5 + 1.5 * rng.uniform()) * rng.unit_phase();
            delta0.blocks[i] = c * d0.block(i - 1).adjoint();
        }
        GradedMap g1 = random_automorphism(E, rng);
        GradedMap g2 = random_automorphism(E, rng);
        Complex c;
        c.space = E;
        c.d = conjugate(g1, d0);
        c.delta = conjugate(g2, delta0);
        GradedMap L = supercommutator(*c.d, *c.delta);
        bool ok = true;
        for (int i = E.p; i <= E.q && ok; ++i) {
            int n = E.dim(i);
            if (n == 0) continue;
            Eigen::JacobiSVD<Mat> svd(L.block(i));
            if (svd.singularValues()(n - 1) < 1e-6 * (1.0 + svd.singularValues()(0))) ok = false;
        }
        if (ok) return c;
    }
    throw StructuralError("random_invertible_pair: could not reach invertible [d,delta]");
}

/// delta exact, d a differential with prescribed ranks (possibly rank
/// deficient, so H(E,d) can be nonzero), conjugated by one automorphism.
///
/// The model is a direct sum of elementary pieces spanning two adjacent
/// degrees (i, i+1):
///   - torsion cone: d(u) = b v, delta(v) = c u; contributes a nonzero
///     eigenvalue bc of [d,delta] (moduli laid out on a geometric ladder so
///     cutoff radii exist between clusters);
///   - harmonic pair: d = 0, delta(y) = c x; contributes H^i, H^{i+1} and a
///     semisimple zero of [d,delta];
///   - Jordan piece (a coupled cone + pair): d(e2) = b f1, delta(f_k) = c e_k;
///     contributes a defective zero (Jordan block of size 2).
/// The cohomology dims h_i = n_i - r_{i-1} - r_i must decompose into adjacent
/// pairs; patterns that cannot (their delta admits no exact structure of this
/// form) are rejected.
inline Complex random_surrogate(uint64_t seed, const GradedSpace& E,
                                const std::vector<int>& d_ranks) {
    auto rank_at = [&](int i) -> int {
        if (i < E.p || i > E.q || i - E.p >= static_cast<int>(d_ranks.size())) return 0;
        return d_ranks[static_cast<size_t>(i - E.p)];
    };
    if (rank_at(E.q) != 0)
        throw StructuralError("random_surrogate: d rank at the top degree must be 0");
    std::vector<int> h(E.dims.size(), 0);
    for (int i = E.p; i <= E.q; ++i) {
        int hi = E.dim(i) - rank_at(i - 1) - rank_at(i);
        if (hi < 0) throw StructuralError("random_surrogate: d rank pattern infeasible at degree " +
                                          std::to_string(i));
        h[static_cast<size_t>(i - E.p)] = hi;
    }
    // greedy adjacent pairing of the cohomology dims
    std::vector<int> pairs(E.dims.size(), 0);  // pairs[i-p] at degrees (i, i+1)
    {
        std::vector<int> rem = h;
        for (int i = E.p; i <= E.q; ++i) {
            int& cur = rem[static_cast<size_t>(i - E.p)];
            if (cur == 0) continue;
            if (i == E.q || rem[static_cast<size_t>(i + 1 - E.p)] < cur)
                throw StructuralError(
                    "random_surrogate: cohomology dims do not pair across adjacent degrees");
            rem[static_cast<size_t>(i + 1 - E.p)] -= cur;
            pairs[static_cast<size_t>(i - E.p)] = cur;
            cur = 0;
        }
    }

    Rng rng(seed);
    GradedMap d0(E, E, 1), delta0(E, E, -1);
    for (int i = E.p; i <= E.q; ++i) {
        if (E.dim(i) > 0 && E.dim(i + 1) > 0) {
            d0.blocks[i] = Mat::Zero(E.dim(i + 1), E.dim(i));
        }
        if (E.dim(i) > 0 && i > E.p && E.dim(i - 1) > 0)
            delta0.blocks[i] = Mat::Zero(E.dim(i - 1), E.dim(i));
    }
    // Coordinates are handed out per degree in order: first the targets of
    // pieces starting below, then the sources of pieces starting here.
    std::vector<int> used(E.dims.size(), 0);
    auto take = [&](int i) {
        int& u = used[static_cast<size_t>(i - E.p)];
        if (u >= E.dim(i)) throw StructuralError("random_surrogate: coordinate bookkeeping failed");
        return u++;
    };
    int cone_index = 0;
    for (int i = E.p; i < E.q; ++i) {
        int cones = rank_at(i);
        int hpairs = pairs[static_cast<size_t>(i - E.p)];
        // couple one cone with one pair into a Jordan piece now and then
        int jordan = (cones > 0 && hpairs > 0 && rng.uniform() < 0.4) ? 1 : 0;
        for (int k = 0; k < jordan; ++k) {
            int e1 = take(i), e2 = take(i), f1 = take(i + 1), f2 = take(i + 1);
            Cplx b = (0.5 + 1.0 * rng.uniform()) * rng.unit_phase();
            Cplx c1 = (0.5 + 1.0 * rng.uniform()) * rng.unit_phase();
            Cplx c2 = (0.5 + 1.0 * rng.uniform()) * rng.unit_phase();
            d0.blocks[i](f1, e2) = b;
            delta0.blocks[i + 1](e1, f1) = c1;
            delta0.blocks[i + 1](e2, f2) = c2;
        }
        for (int k = jordan; k < cones; ++k) {
            int u = take(i), v = take(i + 1);
            double modulus = 0.35 * std::pow(1.9, cone_index++) * (0.85 + 0.3 * rng.uniform());
            Cplx b = std::sqrt(modulus) * rng.unit_phase();
            Cplx c = std::sqrt(modulus) * rng.unit_phase();
            d0.blocks[i](v, u) = b;
            delta0.blocks[i + 1](u, v) = c;
        }
        for (int k = jordan; k < hpairs; ++k) {
            int x = take(i), y = take(i + 1);
            Cplx c = (0.5 + 1.0 * rng.uniform()) * rng.unit_phase();
            delta0.blocks[i + 1](x, y) = c;
        }
    }
    for (int i = E.p; i <= E.q; ++i)
        if (used[static_cast<size_t>(i - E.p)] != E.dim(i))
            throw StructuralError("random_surrogate: coordinates left over at degree " +
                                  std::to_string(i));
    if (!is_differential(d0)) throw StructuralError("random_surrogate: assembled d not a differential");
    if (!is_differential(delta0))
        throw StructuralError("random_surrogate: assembled delta not a differential");

    GradedMap g = random_automorphism(E, rng);
    Complex c;
    c.space = E;
    c.d = conjugate(g, d0);
    c.delta = conjugate(g, delta0);
    return c;
}

}  // namespace torzeta
