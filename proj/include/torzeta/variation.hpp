#pragma once

// Families of exact degree -1 differentials, homotopies, the 1-form
// kappa = Trs[alpha d(delta)] on such families, finite-difference checks of
// the connection identity d tau(delta) = kappa tau(delta) and of d kappa = 0,
// and the exact algebraic identities behind them.
//
// Sign convention: alpha is odd, parameter 1-forms are odd, and moving alpha
// past a 1-form slot costs a factor (-1).  Contracting kappa with a tangent
// direction therefore gives kappa(v) = -Trs[alpha delta_v] where delta_v is
// the directional derivative of delta.

#include "detline.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <functional>

namespace torzeta {

/// A homotopy for an exact delta: alpha of degree +1 with [delta, alpha] = 1.
struct Homotopy {
    GradedMap alpha;
};

/// alpha = [delta, delta*]^{-1} delta*; satisfies alpha^2 = 0 and
/// [delta, alpha] = 1 whenever delta is exact.
inline Homotopy homotopy_from_metric(const GradedMap& delta) {
    if (delta.shift != -1) throw StructuralError("homotopy_from_metric: delta must have degree -1");
    GradedMap ds = adjoint(delta);
    GradedMap A = supercommutator(delta, ds);
    GradedMap alpha(delta.source, delta.source, 1);
    const GradedSpace& E = delta.source;
    for (int i = E.p; i < E.q; ++i) {
        if (E.dim(i) == 0 || E.dim(i + 1) == 0) continue;
        Mat Ab = A.block(i + 1);
        Eigen::PartialPivLU<Mat> lu(Ab);
        double rc = lu.rcond();
        if (!(rc > 1e-12))
            throw StructuralError("homotopy_from_metric: [delta,delta*] singular at degree " +
                                  std::to_string(i + 1) + " (delta not exact)");
        alpha.blocks[i] = lu.solve(ds.block(i));
    }
    // verify the homotopy identity
    GradedMap r = supercommutator(delta, alpha) - identity_map(E);
    if (r.frobenius_norm() > 1e-8 * (1.0 + delta.frobenius_norm() * alpha.frobenius_norm()))
        throw StructuralError("homotopy_from_metric: [delta,alpha] != 1");
    return {alpha};
}

/// A 1- or 2-parameter family of exact degree -1 differentials.
struct DifferentialCurve {
    GradedSpace space;
    std::function<GradedMap(double, double)> delta;  // (t, u) -> delta(t,u)
    bool two_param = false;

    GradedMap at(double t, double u = 0.0) const {
        GradedMap m = delta(t, u);
        if (m.shift != -1) throw StructuralError("DifferentialCurve: delta must have shift -1");
        if (!is_differential(m)) throw StructuralError("DifferentialCurve: delta(t)^2 != 0");
        return m;
    }
};

namespace detail {

inline GradedMap central_difference(const DifferentialCurve& curve, double t, double u,
                                    int dir, double h) {
    GradedMap plus = (dir == 0) ? curve.at(t + h, u) : curve.at(t, u + h);
    GradedMap minus = (dir == 0) ? curve.at(t - h, u) : curve.at(t, u - h);
    return Cplx(1.0 / (2.0 * h)) * (plus - minus);
}

}  // namespace detail

/// kappa contracted with an explicit tangent vector delta_dot (a shift -1 map
/// with delta delta_dot + delta_dot delta = 0): kappa(v) = -Trs[alpha v].
inline Cplx kappa_pairing(const GradedMap& alpha, const GradedMap& delta_dot) {
    return -supertrace(compose(alpha, delta_dot));
}

/// kappa contracted with the coordinate direction `dir` at (t,u):
/// kappa(d_dir) = -Trs[alpha delta_dir].  Independent of the homotopy choice.
inline Cplx kappa_eval(const DifferentialCurve& curve, double t, double u = 0.0, int dir = 0,
                       double h = 1e-4, const GradedMap* alpha_override = nullptr) {
    GradedMap delta = curve.at(t, u);
    GradedMap dot = detail::central_difference(curve, t, u, dir, h);
    GradedMap alpha = alpha_override ? *alpha_override : homotopy_from_metric(delta).alpha;
    return -supertrace(compose(alpha, dot));
}

/// |d/dt log tau(delta(t)) - kappa(d_t)| with central differences at step h.
/// Falls back to Richardson extrapolation (h and h/2) when the plain residual
/// exceeds `tol`.
inline double check_connection_identity(const DifferentialCurve& curve, double t,
                                        double h = 1e-4, double tol = 1e-5) {
    auto log_tau = [&](double s) {
        Complex c;
        c.space = curve.space;
        c.delta = curve.at(s, 0.0);
        return tau_delta(c).scalar;
    };
    Cplx kap = kappa_eval(curve, t, 0.0, 0, h);
    auto deriv = [&](double step) {
        Cplx r = log_tau(t + step) / log_tau(t - step);
        return std::log(r) / (2.0 * step);
    };
    Cplx d1 = deriv(h);
    double res = std::abs(d1 - kap);
    if (res <= tol) return res;
    Cplx d2 = deriv(h / 2.0);
    Cplx extrap = (4.0 * d2 - d1) / 3.0;
    return std::abs(extrap - kap);
}

/// Antisymmetrized mixed difference of the kappa components at (t,u):
/// |d_t kappa_u - d_u kappa_t| (the coefficient of d kappa).  Should vanish.
inline double check_kappa_closed(const DifferentialCurve& curve, double t, double u,
                                 double h = 1e-4) {
    if (!curve.two_param) throw StructuralError("check_kappa_closed: need a two-parameter family");
    auto kap = [&](double a, double b, int dir) { return kappa_eval(curve, a, b, dir, h); };
    Cplx dt_ku = (kap(t + h, u, 1) - kap(t - h, u, 1)) / (2.0 * h);
    Cplx du_kt = (kap(t, u + h, 0) - kap(t, u - h, 0)) / (2.0 * h);
    return std::abs(dt_ku - du_kt);
}

/// Loop integral of Re kappa around the square [t0,t0+l] x [u0,u0+l],
/// Simpson's rule per edge; near zero since Re kappa is exact.
inline double loop_integral_re_kappa(const DifferentialCurve& curve, double t0, double u0,
                                     double l, int segments = 8) {
    if (!curve.two_param) throw StructuralError("loop_integral_re_kappa: need two parameters");
    auto seg = [&](double at, double au, double bt, double bu) {
        // integrate Re kappa along the straight edge (at,au) -> (bt,bu)
        double total = 0;
        for (int k = 0; k < segments; ++k) {
            double f0 = static_cast<double>(k) / segments;
            double f1 = static_cast<double>(k + 1) / segments;
            double fm = 0.5 * (f0 + f1);
            auto val = [&](double f) {
                double ct = at + f * (bt - at), cu = au + f * (bu - au);
                Cplx k0 = kappa_eval(curve, ct, cu, 0);
                Cplx k1 = kappa_eval(curve, ct, cu, 1);
                return (k0 * (bt - at) + k1 * (bu - au)).real();
            };
            total += (val(f0) + 4.0 * val(fm) + val(f1)) / (6.0 * segments);
        }
        return total;
    };
    double s = 0;
    s += seg(t0, u0, t0 + l, u0);
    s += seg(t0 + l, u0, t0 + l, u0 + l);
    s += seg(t0 + l, u0 + l, t0, u0 + l);
    s += seg(t0, u0 + l, t0, u0);
    return std::abs(s);
}

// ---------------------------------------------------------------------------
// Exact algebraic identities (no differentiation)
// ---------------------------------------------------------------------------

/// Residuals of the three identities underlying the kappa calculus, evaluated
/// on matrices.  The 1-form slots d(delta), d(alpha) are populated from a
/// two-direction conjugation family delta_v = [V, delta], alpha_v = [V, alpha]
/// (ungraded commutators with the degree-0 generators V_t, V_s), which
/// satisfies the constraints [delta, d delta] = 0 and [d delta, alpha] =
/// [delta, d alpha] exactly.
struct AlgebraicIdentityReport {
    double two_form_identity = 0;  // d(alpha d delta) = [delta,(d alpha) alpha d delta] + (alpha d delta)^2
    double number_identity = 0;    // N - alpha delta = [delta, alpha N]
    double gap_identity = 0;       // Trs[alpha [delta, f]] = Trs[f], f of degree 0

    double max() const { return std::max(two_form_identity, std::max(number_identity, gap_identity)); }
};

inline AlgebraicIdentityReport check_algebraic_identities(const GradedMap& delta,
                                                          const GradedMap& alpha,
                                                          const GradedMap& Vt,
                                                          const GradedMap& Vs,
                                                          const GradedMap& f) {
    const GradedSpace& E = delta.source;
    if (f.shift != 0) throw StructuralError("check_algebraic_identities: f must have degree 0");
    {
        GradedMap r = supercommutator(delta, alpha) - identity_map(E);
        if (r.frobenius_norm() > 1e-10 * (1.0 + alpha.frobenius_norm() * delta.frobenius_norm()))
            throw StructuralError("check_algebraic_identities: [delta,alpha] != 1");
    }
    AlgebraicIdentityReport rep;

    auto comm = [](const GradedMap& a, const GradedMap& b) {  // ungraded, for even a
        return compose(a, b) - compose(b, a);
    };
    GradedMap dt = comm(Vt, delta), ds = comm(Vs, delta);    // d delta slots
    GradedMap at = comm(Vt, alpha), as = comm(Vs, alpha);    // d alpha slots

    // Coefficient of dt^ds in d(alpha d delta) = [delta, (d alpha) alpha d delta]
    // + (alpha d delta)^2, with the Z2-graded tensor signs unwound:
    //   (alpha_s delta_t - alpha_t delta_s)
    //     = delta W + W delta + [alpha delta_t, alpha delta_s],
    //   W = alpha_t alpha delta_s - alpha_s alpha delta_t.
    {
        GradedMap lhs = compose(as, dt) - compose(at, ds);
        GradedMap W = compose(at, compose(alpha, ds)) - compose(as, compose(alpha, dt));
        GradedMap rhs = compose(delta, W) + compose(W, delta) +
                        comm(compose(alpha, dt), compose(alpha, ds));
        double scale = 1.0 + lhs.frobenius_norm() + rhs.frobenius_norm();
        rep.two_form_identity = (lhs - rhs).frobenius_norm() / scale;
    }

    // N - alpha delta = [delta, alpha N]
    {
        GradedMap N = number_operator(E);
        GradedMap lhs = N - compose(alpha, delta);
        GradedMap rhs = supercommutator(delta, compose(alpha, N));
        double scale = 1.0 + lhs.frobenius_norm();
        rep.number_identity = (lhs - rhs).frobenius_norm() / scale;
    }

    // Trs[alpha (delta f - f delta)] = Trs[f]  (f carries an implicit 1-form)
    {
        Cplx lhs = supertrace(compose(alpha, comm(delta, f)));
        Cplx rhs = supertrace(f);
        rep.gap_identity = std::abs(lhs - rhs) / (1.0 + std::abs(rhs));
    }
    return rep;
}

/// Convenience: a smooth two-parameter conjugation-and-scale family
/// delta(t,u) = e^{a t + b u} g(t,u) delta0 g(t,u)^{-1} with
/// g = exp(t V1 + u V2).
inline DifferentialCurve conjugation_curve(const GradedSpace& E, const GradedMap& delta0,
                                           const GradedMap& V1, const GradedMap& V2,
                                           double a = 0.0, double b = 0.0) {
    DifferentialCurve c;
    c.space = E;
    c.two_param = true;
    c.delta = [E, delta0, V1, V2, a, b](double t, double u) {
        GradedMap g(E, E, 0);
        for (int i = E.p; i <= E.q; ++i) {
            if (E.dim(i) == 0) continue;
            Mat x = t * V1.block(i) + u * V2.block(i);
            g.blocks[i] = x.exp();
        }
        GradedMap m = conjugate(g, delta0);
        m *= std::exp(Cplx(a * t + b * u));
        return m;
    };
    return c;
}

}  // namespace torzeta
