#pragma once

// Named verification suites over seeded random instances, with one record per
// check (residual, tolerance, pass).  Reports serialize to JSON; timing is
// kept out of the canonical serialization so identical (seed, flags) runs are
// byte-identical.

#include "fried.hpp"
#include "gamma.hpp"
#include "serialize.hpp"
#include "spectral.hpp"
#include "variation.hpp"

#include <chrono>
#include <functional>

namespace torzeta {

struct CheckRecord {
    std::string name;
    double residual = 0;
    double tolerance = 0;
    bool pass = false;
    double wall_ms = 0;
};

struct SuiteReport {
    std::string suite;
    uint64_t seed = 0;
    int trials = 0;
    std::vector<CheckRecord> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

inline Json report_to_json(const SuiteReport& r, bool include_timings = false) {
    Json checks = Json::array();
    for (const auto& c : r.checks) {
        Json jc{{"name", c.name},
                {"residual", c.residual},
                {"tolerance", c.tolerance},
                {"pass", c.pass}};
        if (include_timings) jc["wall_ms"] = c.wall_ms;
        checks.push_back(std::move(jc));
    }
    return Json{{"suite", r.suite},
                {"seed", r.seed},
                {"trials", r.trials},
                {"checks", std::move(checks)},
                {"all_pass", r.all_pass()}};
}

namespace detail {

class CheckRunner {
  public:
    explicit CheckRunner(SuiteReport& rep, const std::map<std::string, double>* overrides)
        : rep_(rep), overrides_(overrides) {}

    /// Runs `body` (returning a residual) and records it against `tol`.
    void run(const std::string& name, double tol, const std::function<double()>& body) {
        if (overrides_) {
            auto it = overrides_->find(name);
            if (it != overrides_->end()) tol = it->second;
        }
        CheckRecord rec;
        rec.name = name;
        rec.tolerance = tol;
        auto t0 = std::chrono::steady_clock::now();
        try {
            rec.residual = body();
            rec.pass = rec.residual <= tol;
        } catch (const std::exception& e) {
            rec.residual = std::numeric_limits<double>::infinity();
            rec.pass = false;
            rec.name += std::string(" [error: ") + e.what() + "]";
        }
        rec.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        rep_.checks.push_back(std::move(rec));
    }

  private:
    SuiteReport& rep_;
    const std::map<std::string, double>* overrides_;
};

/// A random shape with span q-p in [1, max_span], per-degree dims <= 6.
/// Ranks r_i and cohomology dims h_i are chosen first; n_i = r_{i-1}+h_i+r_i.
inline GradedSpace random_shape(Rng& rng, int max_span, bool allow_h,
                                std::vector<int>* d_ranks_out = nullptr) {
    int span = 1 + static_cast<int>(rng.uniform() * max_span);
    if (span > max_span) span = max_span;
    int p = static_cast<int>(rng.uniform() * 5) - 2;
    std::vector<int> r(static_cast<size_t>(span), 0);
    for (auto& x : r) x = 1 + static_cast<int>(rng.uniform() * 3) % 3;
    // Cohomology dims are added in adjacent-degree pairs (sum (-1)^i h_i = 0,
    // and delta pairs them off degree by degree).
    std::vector<int> h(static_cast<size_t>(span) + 1, 0);
    if (allow_h) {
        int pairs = 1 + ((rng.uniform() < 0.3) ? 1 : 0);
        for (int t = 0; t < pairs; ++t) {
            int slot = static_cast<int>(rng.uniform() * span) % span;
            h[static_cast<size_t>(slot)] += 1;
            h[static_cast<size_t>(slot) + 1] += 1;
        }
    }
    std::vector<int> dims;
    for (int i = 0; i <= span; ++i) {
        int rp = (i > 0) ? r[static_cast<size_t>(i - 1)] : 0;
        int rc = (i < span) ? r[static_cast<size_t>(i)] : 0;
        dims.push_back(rp + h[static_cast<size_t>(i)] + rc);
    }
    if (d_ranks_out) {
        *d_ranks_out = r;
        d_ranks_out->push_back(0);
    }
    return GradedSpace(p, dims);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// detline suite
// ---------------------------------------------------------------------------

inline SuiteReport run_detline_suite(uint64_t seed, int trials,
                                     const std::map<std::string, double>* tol = nullptr) {
    SuiteReport rep;
    rep.suite = "detline";
    rep.seed = seed;
    rep.trials = trials;
    detail::CheckRunner run(rep, tol);

    run.run("torsion_ratio_hand_instance", 1e-12, [] {
        GradedSpace E(0, {1, 1});
        Complex c;
        c.space = E;
        c.d = GradedMap(E, E, 1);
        c.d->blocks[0] = Mat::Constant(1, 1, Cplx(2.0));
        c.delta = GradedMap(E, E, -1);
        c.delta->blocks[1] = Mat::Constant(1, 1, Cplx(3.0));
        return std::abs(torsion_ratio(c) - Cplx(1.0 / 6.0));
    });

    run.run("torsion_ratio_theorem", 1e-9, [&] {
        double worst = 0;
        for (int t = 0; t < trials; ++t) {
            Rng rng = Rng::for_trial(seed, static_cast<uint64_t>(t));
            GradedSpace E = detail::random_shape(rng, 4, false);
            Complex c = random_invertible_pair(rng.raw(), E);
            GradedMap L = supercommutator(*c.d, *c.delta);
            Cplx lhs = torsion_ratio(c);
            Cplx rhs = alternating_det_product(L, 1);
            worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
            Cplx unit = alternating_det_product(L, 0);
            worst = std::max(worst, std::abs(unit - Cplx(1.0)));
        }
        return worst;
    });

    run.run("tau_choice_independence", 1e-9, [&] {
        double worst = 0;
        int inst = std::max(4, trials / 10);
        for (int t = 0; t < inst; ++t) {
            Rng rng = Rng::for_trial(seed ^ 0xC0FFEEull, static_cast<uint64_t>(t));
            GradedSpace E = detail::random_shape(rng, 4, false);
            Complex c = random_invertible_pair(rng.raw(), E);
            std::vector<Cplx> vd, vdel;
            for (int k = 0; k < 10; ++k) {
                vd.push_back(tau_d(c, &rng).scalar);
                vdel.push_back(tau_delta(c, &rng).scalar);
            }
            auto spread = [](const std::vector<Cplx>& v) {
                double mx = 0;
                for (size_t i = 1; i < v.size(); ++i)
                    mx = std::max(mx, std::abs(v[i] - v[0]) / std::abs(v[0]));
                return mx;
            };
            worst = std::max(worst, std::max(spread(vd), spread(vdel)));
        }
        return worst;
    });

    run.run("tau_scaling_law", 1e-10, [&] {
        double worst = 0;
        for (int t = 0; t < trials; ++t) {
            Rng rng = Rng::for_trial(seed ^ 0x5CA1Eull, static_cast<uint64_t>(t));
            GradedSpace E = detail::random_shape(rng, 4, false);
            Complex c = random_exact_complex(rng.raw(), E);
            Cplx a = (0.5 + 1.5 * rng.uniform()) * rng.unit_phase();
            Complex ca = c;
            *ca.d *= a;
            Cplx lhs = tau_d(ca).scalar;
            Cplx rhs = std::pow(a, E.chi_prime()) * tau_d(c).scalar;
            worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
        }
        return worst;
    });

    run.run("aut_equivariance", 1e-9, [&] {
        double worst = 0;
        for (int t = 0; t < trials; ++t) {
            Rng rng = Rng::for_trial(seed ^ 0xA07ull, static_cast<uint64_t>(t));
            GradedSpace E = detail::random_shape(rng, 4, false);
            Complex c = random_exact_complex(rng.raw(), E);
            GradedMap g = random_automorphism(E, rng);
            AutAction act = act_aut(g, c);
            Cplx lhs = tau_d(act.conjugated).scalar;
            Cplx rhs = act.det_g * tau_d(c).scalar;
            worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
        }
        return worst;
    });

    run.run("det_iso_multiplicative", 1e-10, [&] {
        double worst = 0;
        for (int t = 0; t < std::max(8, trials / 4); ++t) {
            Rng rng = Rng::for_trial(seed ^ 0xDE7ull, static_cast<uint64_t>(t));
            GradedSpace E = detail::random_shape(rng, 4, true);
            GradedMap g1 = random_automorphism(E, rng);
            GradedMap g2 = random_automorphism(E, rng);
            Cplx lhs = det_graded_iso(compose(g1, g2)).scalar;
            Cplx rhs = det_graded_iso(g1).scalar * det_graded_iso(g2).scalar;
            worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
        }
        return worst;
    });

    run.run("det_aut_equals_det_on_cohomology", 1e-9, [&] {
        double worst = 0;
        for (int t = 0; t < std::max(8, trials / 4); ++t) {
            Rng rng = Rng::for_trial(seed ^ 0xC0DEull, static_cast<uint64_t>(t));
            std::vector<int> ranks;
            GradedSpace E = detail::random_shape(rng, 3, true, &ranks);
            // split model with commuting block-diagonal automorphism
            GradedMap d0(E, E, 1);
            GradedMap g0(E, E, 0);
            std::map<int, Mat> C;  // coimage blocks, reused one degree up
            for (int i = E.p; i <= E.q; ++i) {
                int n = E.dim(i);
                if (n == 0) continue;
                int rp = (i > E.p) ? ranks[static_cast<size_t>(i - 1 - E.p)] : 0;
                int rc = ranks[static_cast<size_t>(i - E.p)];
                int h = n - rp - rc;
                Mat gi = Mat::Zero(n, n);
                if (rp > 0) gi.topLeftCorner(rp, rp) = C[i - 1];
                if (h > 0) gi.block(rp, rp, h, h) = random_gl(rng, h);
                if (rc > 0) {
                    C[i] = random_gl(rng, rc);
                    gi.bottomRightCorner(rc, rc) = C[i];
                }
                g0.blocks[i] = std::move(gi);
                if (rc > 0 && i < E.q) {
                    Mat b = Mat::Zero(E.dim(i + 1), n);
                    b.block(0, n - rc, rc, rc) = Mat::Identity(rc, rc);
                    d0.blocks[i] = std::move(b);
                }
            }
            GradedMap u = random_automorphism(E, rng);
            Complex c;
            c.space = E;
            c.d = conjugate(u, d0);
            GradedMap g = conjugate(u, g0);
            if (supercommutator(g, *c.d).frobenius_norm() > 1e-9 * g.frobenius_norm())
                throw StructuralError("suite: constructed g does not commute with d");
            Cplx lhs = det_aut(g);
            CohomologyData H = cohomology(c);
            double lm = 0, ph = 0;
            for (int i = E.p; i <= E.q; ++i) {
                int h = H.betti(i);
                if (h == 0) continue;
                Mat act = H.class_coordinates(i, g.block(i) * H.reps.at(i));
                auto [l, a] = detail::logdet(act);
                double e = (i % 2) ? -1.0 : 1.0;
                lm += e * l;
                ph += e * a;
            }
            Cplx rhs = detail::from_logdet(lm, ph);
            worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
        }
        return worst;
    });

    run.run("duality_pairing", 1e-9, [&] {
        double worst = 0;
        for (int t = 0; t < trials; ++t) {
            Rng rng = Rng::for_trial(seed ^ 0xD0A1ull, static_cast<uint64_t>(t));
            GradedSpace E = detail::random_shape(rng, 4, false);
            Complex c = random_exact_complex(rng.raw(), E);
            GradedMap dt = dual_transpose(*c.d);
            Complex cd;
            cd.space = dt.source;
            cd.d = dt;
            Cplx pairing = pair_dual(tau_d(c), tau_d(cd));
            worst = std::max(worst, std::abs(pairing - Cplx(1.0)));
        }
        return worst;
    });

    run.run("shift_identity", 1e-9, [&] {
        double worst = 0;
        for (int t = 0; t < trials; ++t) {
            Rng rng = Rng::for_trial(seed ^ 0x5F1F7ull, static_cast<uint64_t>(t));
            GradedSpace E = detail::random_shape(rng, 4, false);
            Complex c = random_exact_complex(rng.raw(), E);
            worst = std::max(worst, std::abs(shift_identity_check(c) - Cplx(1.0)));
        }
        return worst;
    });

    run.run("norm_identities", 1e-8, [&] {
        double worst = 0;
        for (int t = 0; t < trials; ++t) {
            Rng rng = Rng::for_trial(seed ^ 0x42Aull, static_cast<uint64_t>(t));
            GradedSpace E = detail::random_shape(rng, 4, false);
            Complex c = random_invertible_pair(rng.raw(), E);
            GradedMap dstar = adjoint(*c.d);
            GradedMap delstar = adjoint(*c.delta);
            double n_d = hermitian_norm(tau_d(c));
            double n_del = hermitian_norm(tau_delta(c));
            Cplx pd = alternating_det_product(supercommutator(*c.d, dstar), 1);
            Cplx pdel = alternating_det_product(supercommutator(*c.delta, delstar), 1);
            // ||tau(d)||^2 = prod det[d,d*]^{(-1)^i i}
            worst = std::max(worst, std::abs(n_d * n_d - pd) / std::abs(pd));
            // ||tau(delta)||^2 = prod det[delta,delta*]^{(-1)^{i-1} i}
            worst = std::max(worst, std::abs(n_del * n_del - Cplx(1.0) / pdel) /
                                        std::abs(Cplx(1.0) / pdel));
            // product identity against |prod det[d,delta]^{(-1)^i i}|^2
            Cplx tr = alternating_det_product(supercommutator(*c.d, *c.delta), 1);
            double lhs = std::abs(pd * pdel);
            double rhs = std::abs(tr) * std::abs(tr);
            worst = std::max(worst, std::abs(lhs - rhs) / rhs);
        }
        return worst;
    });

    run.run("tau_direct_sum_multiplicative", 1e-10, [&] {
        double worst = 0;
        for (int t = 0; t < std::max(8, trials / 4); ++t) {
            Rng rng = Rng::for_trial(seed ^ 0x50Dull, static_cast<uint64_t>(t));
            GradedSpace A = detail::random_shape(rng, 3, false);
            GradedSpace B = detail::random_shape(rng, 3, false);
            Complex ca = random_exact_complex(rng.raw(), A);
            Complex cb = random_exact_complex(rng.raw(), B);
            Complex cs = direct_sum(ca, cb);
            Cplx whole = tau_d(cs).scalar;
            Cplx parts = tau_d(ca).scalar * tau_d(cb).scalar *
                         detail::concat_sign_tau_d(ca.space, cb.space);
            worst = std::max(worst, std::abs(whole - parts) / std::abs(parts));
        }
        return worst;
    });

    run.run("gamma_theorem_contact_models", 1e-9, [&] {
        double worst = 0;
        for (int m = 0; m <= 2; ++m) {
            GammaStructure gs = contact_model(m);
            Cplx td = tau_d(gs.complex).scalar;
            Cplx tdel = tau_delta(gs.complex).scalar;
            Cplx rg = rho_gamma(gs).scalar;
            worst = std::max(worst, std::abs(td - rg) / std::abs(rg));
            worst = std::max(worst, std::abs(tdel - rg) / std::abs(rg));
        }
        return worst;
    });

    run.run("gamma_abc_split_multiplicative", 1e-9, [&] {
        double worst = 0;
        for (int m = 1; m <= 2; ++m) {
            GammaStructure gs = contact_model(m);
            const Complex& c = gs.complex;
            AbcSplit s = abc_split(c);
            // frame change from the concatenated A|B|C bases to the standard one
            const GradedSpace& E = c.space;
            double lm = 0, ph = 0;
            std::map<int, Mat> cat;
            for (int i = E.p; i <= E.q; ++i) {
                if (E.dim(i) == 0) continue;
                std::vector<const Mat*> parts;
                for (const SubComplex* sc : {&s.A, &s.B, &s.C}) {
                    auto it = sc->bases.find(i);
                    if (it != sc->bases.end() && it->second.cols() > 0) parts.push_back(&it->second);
                }
                Mat T(E.dim(i), E.dim(i));
                int col = 0;
                for (const Mat* m2 : parts) {
                    T.middleCols(col, static_cast<int>(m2->cols())) = *m2;
                    col += static_cast<int>(m2->cols());
                }
                if (col != E.dim(i)) throw StructuralError("abc bases do not fill the degree");
                auto [l, a] = detail::logdet(T);
                double e = (i % 2) ? -1.0 : 1.0;
                lm += e * l;
                ph += e * a;
            }
            Cplx frame_change = detail::from_logdet(lm, ph);
            Cplx sign_ab = detail::concat_sign_tau_d(s.A.restricted.space, s.B.restricted.space);
            Cplx sign_abc = detail::concat_sign_tau_d(
                direct_sum_space(s.A.restricted.space, s.B.restricted.space),
                s.C.restricted.space);
            Cplx parts = tau_d(s.A.restricted).scalar * tau_d(s.B.restricted).scalar *
                         tau_d(s.C.restricted).scalar * sign_ab * sign_abc * frame_change;
            Cplx whole = tau_d(c).scalar;
            worst = std::max(worst, std::abs(whole - parts) / std::abs(parts));

            Cplx dsign_ab = detail::concat_sign_tau_delta(s.A.restricted.space, s.B.restricted.space);
            Cplx dsign_abc = detail::concat_sign_tau_delta(
                direct_sum_space(s.A.restricted.space, s.B.restricted.space),
                s.C.restricted.space);
            Cplx dparts = tau_delta(s.A.restricted).scalar * tau_delta(s.B.restricted).scalar *
                          tau_delta(s.C.restricted).scalar * dsign_ab * dsign_abc * frame_change;
            Cplx dwhole = tau_delta(c).scalar;
            worst = std::max(worst, std::abs(dwhole - dparts) / std::abs(dparts));
        }
        return worst;
    });

    return rep;
}

// ---------------------------------------------------------------------------
// variation suite
// ---------------------------------------------------------------------------

inline SuiteReport run_variation_suite(uint64_t seed, int trials,
                                       const std::map<std::string, double>* tol = nullptr) {
    SuiteReport rep;
    rep.suite = "variation";
    rep.seed = seed;
    rep.trials = trials;
    detail::CheckRunner run(rep, tol);

    auto make_curve = [](Rng& rng, GradedSpace& E_out) {
        GradedSpace E = detail::random_shape(rng, 3, false);
        Complex c = random_invertible_pair(rng.raw(), E);
        GradedMap V1 = random_automorphism(E, rng);  // generators (any degree-0 maps)
        GradedMap V2 = random_automorphism(E, rng);
        E_out = E;
        return conjugation_curve(E, *c.delta, V1, V2, 0.2, -0.15);
    };

    run.run("kappa_homotopy_independence", 1e-9, [&] {
        // kappa paired with an exact tangent [V, delta] + a delta must not
        // depend on which homotopy alpha is used.
        double worst = 0;
        int inst = std::max(4, trials / 20);
        for (int t = 0; t < inst; ++t) {
            Rng rng = Rng::for_trial(seed ^ 0x4Aull, static_cast<uint64_t>(t));
            GradedSpace E = detail::random_shape(rng, 3, false);
            Complex c = random_invertible_pair(rng.raw(), E);
            const GradedMap& delta = *c.delta;
            GradedMap V = random_automorphism(E, rng);
            GradedMap dot = (compose(V, delta) - compose(delta, V)) +
                            (rng.cnormal() * delta);
            GradedMap alpha0 = homotopy_from_metric(delta).alpha;
            Cplx base = kappa_pairing(alpha0, dot);
            for (int k = 0; k < 5; ++k) {
                GradedMap xi(E, E, 2);
                for (int i = E.p; i + 2 <= E.q; ++i)
                    if (E.dim(i) > 0 && E.dim(i + 2) > 0)
                        xi.blocks[i] = rng.matrix(E.dim(i + 2), E.dim(i));
                GradedMap alpha2 = alpha0 + supercommutator(delta, xi);
                Cplx v = kappa_pairing(alpha2, dot);
                worst = std::max(worst, std::abs(v - base) / (1.0 + std::abs(base)));
            }
        }
        return worst;
    });

    run.run("connection_identity", 1e-5, [&] {
        double worst = 0;
        int inst = std::max(4, trials / 20);
        for (int t = 0; t < inst; ++t) {
            Rng rng = Rng::for_trial(seed ^ 0xC0DDull, static_cast<uint64_t>(t));
            GradedSpace E;
            DifferentialCurve curve = make_curve(rng, E);
            worst = std::max(worst, check_connection_identity(curve, 0.25));
        }
        return worst;
    });

    run.run("connection_identity_scaling_curve", 1e-6, [&] {
        // delta(t) = e^t delta0: d/dt log tau(delta) = -chi' exactly.
        Rng rng = Rng::for_trial(seed ^ 0x5CA1EC07ull, 0);
        GradedSpace E = detail::random_shape(rng, 3, false);
        Complex c = random_invertible_pair(rng.raw(), E);
        GradedMap delta0 = *c.delta;
        DifferentialCurve curve;
        curve.space = E;
        curve.delta = [E, delta0](double t, double) {
            GradedMap m = delta0;
            m *= std::exp(Cplx(t));
            return m;
        };
        Cplx kap = kappa_eval(curve, 0.1);
        return std::abs(kap - Cplx(-E.chi_prime()));
    });

    run.run("kappa_closedness", 1e-4, [&] {
        double worst = 0;
        int inst = std::max(3, trials / 30);
        for (int t = 0; t < inst; ++t) {
            Rng rng = Rng::for_trial(seed ^ 0xC105ull, static_cast<uint64_t>(t));
            GradedSpace E;
            DifferentialCurve curve = make_curve(rng, E);
            worst = std::max(worst, check_kappa_closed(curve, 0.15, -0.1));
        }
        return worst;
    });

    run.run("re_kappa_loop_integral", 1e-4, [&] {
        Rng rng = Rng::for_trial(seed ^ 0x100Full, 0);
        GradedSpace E;
        DifferentialCurve curve = make_curve(rng, E);
        return loop_integral_re_kappa(curve, 0.0, 0.0, 0.1);
    });

    run.run("algebraic_identities", 1e-12, [&] {
        double worst = 0;
        for (int t = 0; t < std::max(10, trials / 4); ++t) {
            Rng rng = Rng::for_trial(seed ^ 0xA19ull, static_cast<uint64_t>(t));
            GradedSpace E = detail::random_shape(rng, 4, false);
            Complex c = random_invertible_pair(rng.raw(), E);
            GradedMap alpha = homotopy_from_metric(*c.delta).alpha;
            GradedMap Vt = random_automorphism(E, rng);
            GradedMap Vs = random_automorphism(E, rng);
            GradedMap f(E, E, 0);
            for (int i = E.p; i <= E.q; ++i)
                if (E.dim(i) > 0) f.blocks[i] = rng.matrix(E.dim(i), E.dim(i));
            auto repI = check_algebraic_identities(*c.delta, alpha, Vt, Vs, f);
            worst = std::max(worst, repI.max());
        }
        return worst;
    });

    return rep;
}

// ---------------------------------------------------------------------------
// spectral suite
// ---------------------------------------------------------------------------

namespace detail {

/// Admissible cutoffs for L: midpoints between consecutive distinct
/// eigenvalue moduli (and one above everything).  Returns up to `want`.
inline std::vector<double> admissible_cutoffs(const GradedMap& L, int want) {
    auto clusters = eigenvalue_clusters(L);
    std::vector<double> mods;
    for (const auto& cl : clusters) mods.push_back(std::abs(cl.value));
    std::sort(mods.begin(), mods.end());
    mods.erase(std::unique(mods.begin(), mods.end(),
                           [&](double a, double b) { return std::abs(a - b) < 1e-6 * (1.0 + b); }),
               mods.end());
    std::vector<double> cuts;
    for (size_t k = 0; k + 1 < mods.size(); ++k) {
        double mid = 0.5 * (mods[k] + mods[k + 1]);
        if (mid > mods[k] * 1.01 && mid < mods[k + 1] * 0.99) cuts.push_back(mid);
    }
    cuts.push_back(mods.empty() ? 1.0 : mods.back() * 2.0 + 1.0);
    if (static_cast<int>(cuts.size()) > want)
        cuts.erase(cuts.begin(), cuts.end() - want);
    return cuts;
}

inline Complex random_glue_instance(Rng& rng, bool with_cohomology) {
    for (;;) {
        std::vector<int> ranks;
        GradedSpace E = detail::random_shape(rng, 3, with_cohomology, &ranks);
        int total_rank = 0;
        for (int r : ranks) total_rank += r;
        if (total_rank < 2) continue;  // at least two cones, so >= 3 cutoff radii
        if (!with_cohomology) return random_invertible_pair(rng.raw(), E);
        return random_surrogate(rng.raw(), E, ranks);
    }
}

}  // namespace detail

inline SuiteReport run_spectral_suite(uint64_t seed, int trials,
                                      const std::map<std::string, double>* tol = nullptr) {
    SuiteReport rep;
    rep.suite = "spectral";
    rep.seed = seed;
    rep.trials = trials;
    detail::CheckRunner run(rep, tol);

    run.run("projector_invariants", 1e-9, [&] {
        double worst = 0;
        for (int t = 0; t < std::max(10, trials / 4); ++t) {
            Rng rng = Rng::for_trial(seed ^ 0x9E0ull, static_cast<uint64_t>(t));
            Complex c = detail::random_glue_instance(rng, (t % 2) == 1);
            GradedMap L = supercommutator(*c.d, *c.delta);
            auto cuts = detail::admissible_cutoffs(L, 2);
            for (double a : cuts) {
                SpectralSplit s = spectral_split(L, a);
                GradedMap P = s.P_below;
                double scale = 1.0 + P.frobenius_norm();
                worst = std::max(worst, (compose(P, P) - P).frobenius_norm() / scale);
                worst = std::max(worst, supercommutator(P, *c.d).frobenius_norm() / scale);
                worst = std::max(worst, supercommutator(P, *c.delta).frobenius_norm() / scale);
                // rank additivity
                for (int i = c.space.p; i <= c.space.q; ++i) {
                    if (c.space.dim(i) == 0) continue;
                    long rb = std::lround(s.P_below.block(i).trace().real());
                    long ra = std::lround(s.P_above.block(i).trace().real());
                    if (rb + ra != c.space.dim(i))
                        throw StructuralError("projector ranks do not add at degree " +
                                              std::to_string(i));
                }
            }
        }
        return worst;
    });

    run.run("truncated_homotopy_identity", 1e-9, [&] {
        double worst = 0;
        for (int t = 0; t < std::max(10, trials / 4); ++t) {
            Rng rng = Rng::for_trial(seed ^ 0x7D0Bull, static_cast<uint64_t>(t));
            Complex c = detail::random_glue_instance(rng, false);
            GradedMap L = supercommutator(*c.d, *c.delta);
            GradedMap k = homotopy_from_metric(*c.delta).alpha;
            auto cuts = detail::admissible_cutoffs(L, 2);
            for (double a : cuts) {
                SpectralSplit s = spectral_split(L, a);
                GradedMap klo = truncated_homotopy(s, k);
                // [delta, k_{<a}] = 1 on E_{<a}: compare against P_below
                GradedMap r = supercommutator(*c.delta, klo) - s.P_below;
                GradedMap rr = compose(compose(s.P_below, r), s.P_below);
                worst = std::max(worst, rr.frobenius_norm() / (1.0 + k.frobenius_norm()));
            }
        }
        return worst;
    });

    run.run("truncated_dim_alternating_sum", 0.0, [&] {
        for (int t = 0; t < std::max(10, trials / 4); ++t) {
            Rng rng = Rng::for_trial(seed ^ 0xD1E5ull, static_cast<uint64_t>(t));
            Complex c = detail::random_glue_instance(rng, (t % 2) == 1);
            GradedMap L = supercommutator(*c.d, *c.delta);
            for (double a : detail::admissible_cutoffs(L, 3))
                if (truncated_dim_alternating_sum(spectral_split(L, a)) != 0)
                    return 1.0;
        }
        return 0.0;
    });

    run.run("glued_section_hand_instance", 1e-12, [] {
        GradedSpace E(0, {1, 1});
        Complex c;
        c.space = E;
        c.d = GradedMap(E, E, 1);
        c.d->blocks[0] = Mat::Constant(1, 1, Cplx(2.0));
        c.delta = GradedMap(E, E, -1);
        c.delta->blocks[1] = Mat::Constant(1, 1, Cplx(3.0));
        std::map<int, Mat> h;  // exact case
        double r1 = std::abs(glued_section(c, 1.0, h) - Cplx(1.0 / 6.0));
        double r2 = std::abs(glued_section(c, 10.0, h) - Cplx(1.0 / 6.0));
        return std::max(r1, r2);
    });

    run.run("glued_section_cutoff_independence", 1e-8, [&] {
        double worst = 0;
        int inst = std::max(10, trials / 4);
        for (int t = 0; t < inst; ++t) {
            Rng rng = Rng::for_trial(seed ^ 0x91BEull, static_cast<uint64_t>(t));
            bool withH = (t % 2) == 1;
            Complex c = detail::random_glue_instance(rng, withH);
            GradedMap L = supercommutator(*c.d, *c.delta);
            std::map<int, Mat> h;
            CohomologyData H = cohomology(c);
            for (int i = c.space.p; i <= c.space.q; ++i)
                if (H.betti(i) > 0) h[i] = H.reps.at(i);
            Cplx direct = glued_section_direct(c, h);
            auto cuts = detail::admissible_cutoffs(L, 3);
            for (double a : cuts) {
                Cplx v = glued_section(c, a, h);
                worst = std::max(worst, std::abs(v - direct) / std::abs(direct));
            }
        }
        return worst;
    });

    run.run("band_identity_and_multiplicativity", 1e-9, [&] {
        double worst = 0;
        for (int t = 0; t < std::max(10, trials / 4); ++t) {
            Rng rng = Rng::for_trial(seed ^ 0xBA2Dull, static_cast<uint64_t>(t));
            Complex c = detail::random_glue_instance(rng, false);
            GradedMap L = supercommutator(*c.d, *c.delta);
            auto cuts = detail::admissible_cutoffs(L, 3);
            if (cuts.size() < 2) continue;
            double a = cuts[0], b = cuts[cuts.size() - 1];
            BandIdentityReport r = band_section_identity(c, a, b);
            worst = std::max(worst, std::max(r.section_vs_zeta, r.tau_multiplicative));
            worst = std::max(worst, r.zeta_multiplicative);
        }
        return worst;
    });

    run.run("zeta_order_equals_supertrace", 0.0, [&] {
        for (int t = 0; t < std::max(10, trials / 4); ++t) {
            Rng rng = Rng::for_trial(seed ^ 0x02DE2ull, static_cast<uint64_t>(t));
            Complex c = detail::random_glue_instance(rng, (t % 2) == 1);
            GradedMap L = supercommutator(*c.d, *c.delta);
            for (const auto& cl : eigenvalue_clusters(L))
                zeta_order_at(L, cl.value);  // throws on mismatch
        }
        return 0.0;
    });

    run.run("poincare_duality_shadow", 1e-8, [&] {
        double worst = 0;
        for (int t = 0; t < std::max(10, trials / 4); ++t) {
            Rng rng = Rng::for_trial(seed ^ 0xF0Dull, static_cast<uint64_t>(t));
            bool withH = (t % 2) == 1;
            Complex c = detail::random_glue_instance(rng, withH);
            std::map<int, Mat> h;
            CohomologyData H = cohomology(c);
            for (int i = c.space.p; i <= c.space.q; ++i)
                if (H.betti(i) > 0) h[i] = H.reps.at(i);
            Cplx glued = glued_section_direct(c, h);
            Complex cd = poincare_dual(c);
            std::map<int, Mat> hd = poincare_dual_classes(c, H);
            Cplx glued_dual = glued_section_direct(cd, hd);
            int n = c.space.q - c.space.p;
            Cplx expect = (n % 2 == 1) ? glued : Cplx(1.0) / glued;
            worst = std::max(worst, std::abs(glued_dual - expect) / std::abs(expect));
        }
        return worst;
    });

    return rep;
}

// ---------------------------------------------------------------------------
// fried suite
// ---------------------------------------------------------------------------

inline SuiteReport run_fried_suite(uint64_t seed,
                                   const std::map<std::string, double>* tol = nullptr) {
    SuiteReport rep;
    rep.suite = "fried";
    rep.seed = seed;
    rep.trials = 0;
    detail::CheckRunner run(rep, tol);
    SuspensionModel cat;  // [[2,1],[1,1]]

    run.run("cat_map_orbit_counts", 0.0, [&] {
        auto N = fixed_counts(cat, 8);
        auto P = primitive_counts(N);
        std::vector<long> nExp{0, 1, 5, 16, 45, 121, 320, 841, 2205};
        std::vector<long> pExp{0, 1, 2, 5, 10, 24, 50, 120, 270};
        for (int k = 1; k <= 8; ++k) {
            if (N[static_cast<size_t>(k)] != nExp[static_cast<size_t>(k)]) return 1.0;
            if (P[static_cast<size_t>(k)] != pExp[static_cast<size_t>(k)]) return 1.0;
        }
        return 0.0;
    });

    run.run("orbit_growth_bound", 0.0, [&] {
        auto N = fixed_counts(cat, 60);
        double c = std::log(std::abs(cat.lambda())) + 0.01;
        for (int k = 1; k <= 60; ++k) {
            double logN = std::log(N[static_cast<size_t>(k)].convert_to<double>());
            if (logN > std::log(3.0) + c * k) return 1.0;
        }
        return 0.0;
    });

    run.run("truncated_vs_closed_form", 1e-8, [&] {
        double worst = 0;
        for (double s = 1.5; s <= 3.0 + 1e-9; s += 0.1) {
            ZetaEvaluation ev = fried_zeta_with_oracle(cat, Cplx(s, 0.0), 60);
            if (!ev.has_closed_form || !ev.tail_bounded) return 1.0;
            double diff = std::abs(ev.value - ev.closed_form);
            worst = std::max(worst, diff);
            if (diff > ev.tail_bound + 1e-14) return 1.0;  // bound must dominate
            if (ev.tail_bound > 1e-8) return 1.0;
        }
        return worst;
    });

    run.run("value_at_sigma_2", 5e-4, [&] {
        // 3 significant figures: 0.8190...
        ClosedFormValue cf = fried_closed_form(cat, Cplx(2.0, 0.0));
        return std::abs(cf.value - Cplx(0.8190));
    });

    run.run("log_series_agreement", 1e-8, [&] {
        Cplx ls = fried_log_series(cat, Cplx(2.0, 0.0), 60);
        ZetaEvaluation ev = fried_zeta_truncated(cat, Cplx(2.0, 0.0), 60);
        return std::abs(std::exp(ls) - ev.value) / std::abs(ev.value);
    });

    run.run("log_derivative_check", 1e-6, [&] {
        double h = 1e-4;
        Cplx lp = fried_log_series(cat, Cplx(2.0 + h, 0.0), 60);
        Cplx lmn = fried_log_series(cat, Cplx(2.0 - h, 0.0), 60);
        Cplx fd = (lp - lmn) / (2.0 * h);
        return std::abs(fd - fried_closed_form_log_derivative(cat, Cplx(2.0, 0.0)));
    });

    run.run("poincare_duality_residual", 1e-9, [&] {
        double worst = duality_check(cat, Cplx(2.0, 0.0), 60);
        worst = std::max(worst, duality_check(cat, Cplx(2.5, 0.4), 60));
        SuspensionModel tw = cat;
        tw.theta = 0.7;
        worst = std::max(worst, duality_check(tw, Cplx(2.0, 0.0), 60));
        return worst;
    });

    run.run("pole_order_at_zero", 0.0, [&] {
        ClosedFormValue cf = fried_closed_form(cat, Cplx(0.0, 0.0));
        if (cf.finite || cf.order != -2) return 1.0;
        SuspensionModel big{3, 1, 2, 1, 0.0};  // tr = 4
        ClosedFormValue cf2 = fried_closed_form(big, Cplx(0.0, 0.0));
        if (cf2.finite || cf2.order != -2) return 1.0;
        return 0.0;
    });

    run.run("twist_shift_symmetry", 1e-10, [&] {
        SuspensionModel tw = cat;
        tw.theta = 0.7;
        Cplx a = fried_zeta_truncated(tw, Cplx(2.0, 0.0), 40).value;
        Cplx b = fried_zeta_truncated(cat, Cplx(2.0, -0.7), 40).value;
        return std::abs(a - b) / std::abs(b);
    });

    run.run("conjugation_symmetry", 1e-10, [&] {
        // R_{Z,F*}(sigma) = conj R_{Z,F}(conj sigma); F* carries twist -theta.
        SuspensionModel tw = cat;
        tw.theta = 0.4;
        SuspensionModel dual = cat;
        dual.theta = -0.4;
        Cplx sigma(2.2, 0.3);
        Cplx lhs = fried_zeta_truncated(dual, sigma, 40).value;
        Cplx rhs = std::conj(fried_zeta_truncated(tw, std::conj(sigma), 40).value);
        return std::abs(lhs - rhs) / std::abs(rhs);
    });

    run.run("unstable_sign_identically_one", 0.0, [&] {
        // eps_u = sgn det(1 - phi_{-t*})|_{T_u}: the reversed return map
        // contracts the unstable line, so every factor is positive.
        double lam = cat.lambda();
        for (int k = 1; k <= 60; ++k)
            if (1.0 - std::pow(std::abs(lam), -k) <= 0.0) return 1.0;
        SuspensionModel neg{-2, 1, 1, -1, 0.0};  // tr = -3
        double lamn = std::abs(neg.lambda());
        for (int k = 1; k <= 60; ++k)
            if (1.0 - std::pow(lamn, -k) <= 0.0) return 1.0;
        return 0.0;
    });

    run.run("negative_trace_stable_signs", 0.0, [&] {
        SuspensionModel neg{-2, 1, 1, -1, 0.0};
        for (int k = 1; k <= 6; ++k)
            if (stable_sign(neg, k) != ((k % 2) ? -1 : 1)) return 1.0;
        for (int k = 1; k <= 6; ++k)
            if (stable_sign(cat, k) != 1) return 1.0;
        return 0.0;
    });

    (void)seed;
    return rep;
}

// ---------------------------------------------------------------------------
// aggregation
// ---------------------------------------------------------------------------

inline std::vector<SuiteReport> run_suites(const std::string& selector, uint64_t seed, int trials,
                                           const std::map<std::string, double>* tol = nullptr) {
    std::vector<SuiteReport> out;
    auto want = [&](const char* name) { return selector == "all" || selector == name; };
    if (selector != "all" && selector != "detline" && selector != "variation" &&
        selector != "spectral" && selector != "fried")
        throw StructuralError("unknown suite: " + selector);
    if (want("detline")) out.push_back(run_detline_suite(seed, trials, tol));
    if (want("variation")) out.push_back(run_variation_suite(seed, trials, tol));
    if (want("spectral")) out.push_back(run_spectral_suite(seed, trials, tol));
    if (want("fried")) out.push_back(run_fried_suite(seed, tol));
    return out;
}

inline Json reports_to_json(const std::vector<SuiteReport>& reports, uint64_t seed,
                            bool include_timings = false) {
    Json suites = Json::array();
    bool all = true;
    for (const auto& r : reports) {
        suites.push_back(report_to_json(r, include_timings));
        all = all && r.all_pass();
    }
    return Json{{"seed", seed}, {"suites", std::move(suites)}, {"all_pass", all}};
}

}  // namespace torzeta
