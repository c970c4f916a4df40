#include <torzeta/variation.hpp>

#include <catch_amalgamated.hpp>

using namespace torzeta;
using Catch::Approx;

namespace {

Complex pair_11(Cplx dval, Cplx deltaval) {
    GradedSpace E(0, {1, 1});
    Complex c;
    c.space = E;
    c.d = GradedMap(E, E, 1);
    c.d->blocks[0] = Mat::Constant(1, 1, dval);
    c.delta = GradedMap(E, E, -1);
    c.delta->blocks[1] = Mat::Constant(1, 1, deltaval);
    return c;
}

Complex random_pair(uint64_t seed, int span = 3) {
    Rng rng(seed);
    int p = static_cast<int>(rng.uniform() * 3) - 1;
    std::vector<int> r(static_cast<size_t>(span));
    for (auto& x : r) x = 1 + static_cast<int>(rng.uniform() * 2);
    std::vector<int> dims;
    for (int i = 0; i <= span; ++i) {
        int rp = (i > 0) ? r[static_cast<size_t>(i - 1)] : 0;
        int rc = (i < span) ? r[static_cast<size_t>(i)] : 0;
        dims.push_back(rp + rc);
    }
    return random_invertible_pair(rng.raw(), GradedSpace(p, dims));
}

}  // namespace

TEST_CASE("homotopy from the metric") {
    SECTION("1x1 hand values") {
        Complex c = pair_11(1.0, 1.0);
        Homotopy h = homotopy_from_metric(*c.delta);
        CHECK(std::abs(h.alpha.block(0)(0, 0) - Cplx(1.0)) < 1e-14);
        Complex c3 = pair_11(1.0, 3.0);
        Homotopy h3 = homotopy_from_metric(*c3.delta);
        CHECK(std::abs(h3.alpha.block(0)(0, 0) - Cplx(1.0 / 3.0)) < 1e-14);
    }
    SECTION("alpha is a differential and a homotopy") {
        for (uint64_t s = 0; s < 10; ++s) {
            Complex c = random_pair(s);
            Homotopy h = homotopy_from_metric(*c.delta);
            CHECK(compose(h.alpha, h.alpha).frobenius_norm() <
                  1e-10 * (1.0 + h.alpha.frobenius_norm()));
            GradedMap r = supercommutator(*c.delta, h.alpha) - identity_map(c.space);
            CHECK(r.frobenius_norm() <=
                  1e-10 * (1.0 + c.delta->frobenius_norm() * h.alpha.frobenius_norm()));
        }
    }
    SECTION("singular [delta, delta*] is rejected") {
        GradedSpace E(0, {1, 1});
        GradedMap zero(E, E, -1);
        CHECK_THROWS_AS(homotopy_from_metric(zero), StructuralError);
    }
}

TEST_CASE("kappa on explicit curves") {
    SECTION("constant curve gives zero") {
        Complex c = random_pair(4);
        GradedMap delta0 = *c.delta;
        DifferentialCurve curve;
        curve.space = c.space;
        curve.delta = [delta0](double, double) { return delta0; };
        CHECK(std::abs(kappa_eval(curve, 0.2)) < 1e-10);
    }
    SECTION("scaling curve evaluates to -chi'") {
        Complex c = random_pair(5);
        GradedMap delta0 = *c.delta;
        const GradedSpace E = c.space;
        DifferentialCurve curve;
        curve.space = E;
        curve.delta = [delta0](double t, double) {
            GradedMap m = delta0;
            m *= std::exp(Cplx(t));
            return m;
        };
        Cplx kap = kappa_eval(curve, 0.3);
        CHECK(std::abs(kap - Cplx(-E.chi_prime())) < 1e-7);
    }
    SECTION("homotopy independence is exact on exact tangents") {
        for (uint64_t s = 0; s < 6; ++s) {
            Complex c = random_pair(s + 20);
            const GradedSpace& E = c.space;
            Rng rng(s);
            GradedMap V = random_automorphism(E, rng);
            GradedMap dot = compose(V, *c.delta) - compose(*c.delta, V);
            GradedMap alpha = homotopy_from_metric(*c.delta).alpha;
            Cplx base = kappa_pairing(alpha, dot);
            for (int k = 0; k < 5; ++k) {
                GradedMap xi(E, E, 2);
                for (int i = E.p; i + 2 <= E.q; ++i)
                    if (E.dim(i) > 0 && E.dim(i + 2) > 0)
                        xi.blocks[i] = rng.matrix(E.dim(i + 2), E.dim(i));
                Cplx v = kappa_pairing(alpha + supercommutator(*c.delta, xi), dot);
                CHECK(std::abs(v - base) <= 1e-9 * (1.0 + std::abs(base)));
            }
        }
    }
}

TEST_CASE("connection identity d log tau(delta) = kappa") {
    SECTION("constant curve") {
        Complex c = random_pair(31);
        GradedMap delta0 = *c.delta;
        DifferentialCurve curve;
        curve.space = c.space;
        curve.delta = [delta0](double, double) { return delta0; };
        CHECK(check_connection_identity(curve, 0.0) < 1e-9);
    }
    SECTION("scaling curve against the scaling law") {
        Complex c = random_pair(32);
        GradedMap delta0 = *c.delta;
        DifferentialCurve curve;
        curve.space = c.space;
        curve.delta = [delta0](double t, double) {
            GradedMap m = delta0;
            m *= std::exp(Cplx(t));
            return m;
        };
        CHECK(check_connection_identity(curve, 0.2) < 1e-6);
    }
    SECTION("conjugation curves") {
        for (uint64_t s = 0; s < 5; ++s) {
            Complex c = random_pair(s + 40);
            Rng rng(s + 1);
            GradedMap V1 = random_automorphism(c.space, rng);
            GradedMap V2 = random_automorphism(c.space, rng);
            DifferentialCurve curve =
                conjugation_curve(c.space, *c.delta, V1, V2, 0.3, -0.2);
            CHECK(check_connection_identity(curve, 0.15) <= 1e-5);
        }
    }
}

TEST_CASE("kappa is closed") {
    SECTION("family constant in u") {
        Complex c = random_pair(51);
        GradedMap delta0 = *c.delta;
        DifferentialCurve curve;
        curve.space = c.space;
        curve.two_param = true;
        curve.delta = [delta0](double t, double) {
            GradedMap m = delta0;
            m *= std::exp(Cplx(0.3 * t));
            return m;
        };
        CHECK(check_kappa_closed(curve, 0.1, 0.2) < 1e-6);
    }
    SECTION("conjugation families") {
        for (uint64_t s = 0; s < 4; ++s) {
            Complex c = random_pair(s + 60);
            Rng rng(s + 2);
            GradedMap V1 = random_automorphism(c.space, rng);
            GradedMap V2 = random_automorphism(c.space, rng);
            DifferentialCurve curve =
                conjugation_curve(c.space, *c.delta, V1, V2, 0.2, 0.1);
            CHECK(check_kappa_closed(curve, 0.12, -0.07) <= 1e-4);
        }
    }
    SECTION("loop integral of Re kappa vanishes") {
        Complex c = random_pair(71);
        Rng rng(9);
        GradedMap V1 = random_automorphism(c.space, rng);
        GradedMap V2 = random_automorphism(c.space, rng);
        DifferentialCurve curve = conjugation_curve(c.space, *c.delta, V1, V2, 0.15, -0.1);
        CHECK(loop_integral_re_kappa(curve, 0.0, 0.0, 0.1) <= 1e-4);
    }
}

TEST_CASE("exact algebraic identities") {
    SECTION("1x1 number identity is exact") {
        Complex c = pair_11(1.0, 2.0);
        GradedMap alpha = homotopy_from_metric(*c.delta).alpha;
        Rng rng(1);
        GradedMap Vt = random_automorphism(c.space, rng);
        GradedMap Vs = random_automorphism(c.space, rng);
        GradedMap f(c.space, c.space, 0);
        f.blocks[0] = rng.matrix(1, 1);
        f.blocks[1] = rng.matrix(1, 1);
        auto rep = check_algebraic_identities(*c.delta, alpha, Vt, Vs, f);
        CHECK(rep.number_identity < 1e-15);
        CHECK(rep.gap_identity < 1e-15);
        CHECK(rep.two_form_identity < 1e-15);
    }
    SECTION("random instances stay at machine precision") {
        for (uint64_t s = 0; s < 12; ++s) {
            Complex c = random_pair(s + 80, 4);
            GradedMap alpha = homotopy_from_metric(*c.delta).alpha;
            Rng rng(s + 3);
            GradedMap Vt = random_automorphism(c.space, rng);
            GradedMap Vs = random_automorphism(c.space, rng);
            GradedMap f(c.space, c.space, 0);
            for (int i = c.space.p; i <= c.space.q; ++i)
                if (c.space.dim(i) > 0) f.blocks[i] = rng.matrix(c.space.dim(i), c.space.dim(i));
            auto rep = check_algebraic_identities(*c.delta, alpha, Vt, Vs, f);
            CHECK(rep.max() <= 1e-12);
        }
    }
    SECTION("precondition [delta, alpha] = 1 is enforced") {
        Complex c = random_pair(91);
        GradedMap alpha = homotopy_from_metric(*c.delta).alpha;
        alpha *= Cplx(2.0);
        Rng rng(4);
        GradedMap V = random_automorphism(c.space, rng);
        GradedMap f(c.space, c.space, 0);
        CHECK_THROWS_AS(check_algebraic_identities(*c.delta, alpha, V, V, f),
                        StructuralError);
    }
}
