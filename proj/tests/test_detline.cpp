#include <torzeta/detline.hpp>

#include <catch_amalgamated.hpp>

using namespace torzeta;
using Catch::Approx;

namespace {

Complex hand_complex(Cplx dval, Cplx deltaval) {
    GradedSpace E(0, {1, 1});
    Complex c;
    c.space = E;
    c.d = GradedMap(E, E, 1);
    c.d->blocks[0] = Mat::Constant(1, 1, dval);
    c.delta = GradedMap(E, E, -1);
    c.delta->blocks[1] = Mat::Constant(1, 1, deltaval);
    return c;
}

GradedSpace random_exactable_shape(Rng& rng, int max_span = 4) {
    int span = 1 + static_cast<int>(rng.uniform() * max_span) % max_span;
    int p = static_cast<int>(rng.uniform() * 5) - 2;
    std::vector<int> r(static_cast<size_t>(span));
    for (auto& x : r) x = 1 + static_cast<int>(rng.uniform() * 3) % 3;
    std::vector<int> dims;
    for (int i = 0; i <= span; ++i) {
        int rp = (i > 0) ? r[static_cast<size_t>(i - 1)] : 0;
        int rc = (i < span) ? r[static_cast<size_t>(i)] : 0;
        dims.push_back(rp + rc);
    }
    return GradedSpace(p, dims);
}

}  // namespace

TEST_CASE("tau_d hand values") {
    CHECK(std::abs(tau_d(hand_complex(1.0, 1.0)).scalar - Cplx(1.0)) < 1e-15);
    CHECK(std::abs(tau_d(hand_complex(2.0, 1.0)).scalar - Cplx(0.5)) < 1e-15);
}

TEST_CASE("tau_d rejects non-exact differentials with the cohomology dims") {
    GradedSpace E(0, {2, 2});
    Complex c;
    c.space = E;
    c.d = GradedMap(E, E, 1);
    Mat d0 = Mat::Zero(2, 2);
    d0(0, 0) = 1.0;  // rank 1, H^0 = H^1 = 1
    c.d->blocks[0] = d0;
    CHECK_THROWS_WITH(tau_d(c), Catch::Matchers::ContainsSubstring("dim H = [1,1]"));
}

TEST_CASE("tau_delta hand values") {
    CHECK(std::abs(tau_delta(hand_complex(1.0, 1.0)).scalar - Cplx(1.0)) < 1e-15);
    CHECK(std::abs(tau_delta(hand_complex(1.0, 3.0)).scalar - Cplx(3.0)) < 1e-15);
}

TEST_CASE("torsion ratio") {
    SECTION("hand instance 1/6 against both theorem identities") {
        Complex c = hand_complex(2.0, 3.0);
        Cplx ratio = torsion_ratio(c);
        CHECK(std::abs(ratio - Cplx(1.0 / 6.0)) < 1e-15);
        GradedMap L = supercommutator(*c.d, *c.delta);
        CHECK(std::abs(alternating_det_product(L, 1) - ratio) < 1e-15);
        CHECK(std::abs(alternating_det_product(L, 0) - Cplx(1.0)) < 1e-15);
    }
    SECTION("identity commutator gives ratio 1") {
        Complex c = hand_complex(2.0, 0.5);
        CHECK(std::abs(torsion_ratio(c) - Cplx(1.0)) < 1e-14);
    }
    SECTION("singular [d,delta] is rejected") {
        GradedSpace E(0, {1, 2, 1});
        Complex c = random_exact_complex(3, 0, {1, 2, 1});
        c.delta = GradedMap(E, E, -1);  // zero delta: [d,delta] = 0
        CHECK_THROWS_AS(torsion_ratio(c), StructuralError);
    }
    SECTION("theorem on random 4-degree complexes") {
        for (uint64_t s = 0; s < 30; ++s) {
            Rng rng(s * 31 + 5);
            GradedSpace E = random_exactable_shape(rng, 4);
            Complex c = random_invertible_pair(rng.raw(), E);
            GradedMap L = supercommutator(*c.d, *c.delta);
            Cplx lhs = torsion_ratio(c);
            Cplx rhs = alternating_det_product(L, 1);
            CHECK(std::abs(lhs - rhs) <= 1e-9 * std::abs(rhs));
            CHECK(std::abs(alternating_det_product(L, 0) - Cplx(1.0)) <= 1e-9);
        }
    }
}

TEST_CASE("choice independence of the canonical sections") {
    Rng master(1234);
    for (int t = 0; t < 6; ++t) {
        GradedSpace E = random_exactable_shape(master, 4);
        Complex c = random_invertible_pair(master.raw(), E);
        Cplx d0 = tau_d(c).scalar;
        Cplx del0 = tau_delta(c).scalar;
        for (int k = 0; k < 10; ++k) {
            CHECK(std::abs(tau_d(c, &master).scalar - d0) <= 1e-9 * std::abs(d0));
            CHECK(std::abs(tau_delta(c, &master).scalar - del0) <= 1e-9 * std::abs(del0));
        }
    }
}

TEST_CASE("scaling law tau(a d) = a^{chi'} tau(d)") {
    Rng rng(99);
    for (int t = 0; t < 20; ++t) {
        GradedSpace E = random_exactable_shape(rng, 4);
        Complex c = random_exact_complex(rng.raw(), E);
        Cplx a = Cplx(3.0);  // the documented special case
        Complex ca = c;
        *ca.d *= a;
        Cplx lhs = tau_d(ca).scalar;
        Cplx rhs = std::pow(a, E.chi_prime()) * tau_d(c).scalar;
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
    }
}

TEST_CASE("det of graded isomorphisms") {
    SECTION("identity and scalar maps") {
        GradedSpace E(0, {2, 1});
        CHECK(std::abs(det_graded_iso(identity_map(E)).scalar - Cplx(1.0)) < 1e-15);
        GradedMap a2(E, E, 0);
        Cplx a(1.7, 0.4);
        a2.blocks[0] = a * Mat::Identity(2, 2);
        a2.blocks[1] = a * Mat::Identity(1, 1);
        // a^2 / a = a at dims (2,1)
        CHECK(std::abs(det_graded_iso(a2).scalar - a) < 1e-14);
    }
    SECTION("multiplicative under composition") {
        Rng rng(17);
        GradedSpace E(-1, {2, 3, 2});
        for (int t = 0; t < 10; ++t) {
            GradedMap g1 = random_automorphism(E, rng);
            GradedMap g2 = random_automorphism(E, rng);
            Cplx lhs = det_graded_iso(compose(g1, g2)).scalar;
            Cplx rhs = det_graded_iso(g1).scalar * det_graded_iso(g2).scalar;
            CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
        }
    }
    SECTION("singular map rejected") {
        GradedSpace E(0, {1, 1});
        GradedMap z(E, E, 0);
        z.blocks[0] = Mat::Zero(1, 1);
        z.blocks[1] = Mat::Identity(1, 1);
        CHECK_THROWS_AS(det_graded_iso(z), StructuralError);
    }
}

TEST_CASE("automorphism action") {
    Rng rng(55);
    GradedSpace E = random_exactable_shape(rng, 3);
    Complex c = random_exact_complex(rng.raw(), E);

    SECTION("identity acts trivially") {
        AutAction a = act_aut(identity_map(E), c);
        CHECK(std::abs(a.det_g - Cplx(1.0)) < 1e-15);
        CHECK((*a.conjugated.d - *c.d).frobenius_norm() < 1e-15);
    }
    SECTION("equivariance tau(g.d) = det g tau(d)") {
        for (int t = 0; t < 10; ++t) {
            GradedMap g = random_automorphism(E, rng);
            AutAction a = act_aut(g, c);
            Cplx lhs = tau_d(a.conjugated).scalar;
            Cplx rhs = a.det_g * tau_d(c).scalar;
            CHECK(std::abs(lhs - rhs) <= 1e-9 * std::abs(rhs));
        }
    }
    SECTION("g = a^N realizes the scaling law") {
        Cplx a(0.9, 0.35);
        GradedMap g(E, E, 0);
        for (int i = E.p; i <= E.q; ++i)
            if (E.dim(i) > 0) g.blocks[i] = std::pow(a, i) * Mat::Identity(E.dim(i), E.dim(i));
        AutAction act = act_aut(g, c);
        // g.d = a d
        GradedMap ad = *c.d;
        ad *= a;
        CHECK((*act.conjugated.d - ad).frobenius_norm() <= 1e-10 * ad.frobenius_norm());
        CHECK(std::abs(act.det_g - std::pow(a, E.chi_prime())) <= 1e-10);
    }
}

TEST_CASE("duality pairing") {
    SECTION("standard frames of the (1,1) shape pair to 1") {
        GradedSpace E(0, {1, 1});
        DetLineElement s{det_frame(E), Cplx(1.0)};
        DetLineElement t{det_frame(dual_space(E)), Cplx(1.0)};
        CHECK(std::abs(pair_dual(s, t) - Cplx(1.0)) < 1e-15);
    }
    SECTION("hand instance: tau(d) = 1/2, tau(d~) = 2, pairing 1") {
        Complex c = hand_complex(2.0, 1.0);
        GradedMap dt = dual_transpose(*c.d);
        Complex cd;
        cd.space = dt.source;
        cd.d = dt;
        CHECK(std::abs(tau_d(cd).scalar - Cplx(2.0)) < 1e-14);
        CHECK(std::abs(pair_dual(tau_d(c), tau_d(cd)) - Cplx(1.0)) < 1e-14);
    }
    SECTION("random exact complexes pair to 1") {
        Rng rng(321);
        for (int t = 0; t < 20; ++t) {
            GradedSpace E = random_exactable_shape(rng, 4);
            Complex c = random_exact_complex(rng.raw(), E);
            GradedMap dt = dual_transpose(*c.d);
            Complex cd;
            cd.space = dt.source;
            cd.d = dt;
            CHECK(std::abs(pair_dual(tau_d(c), tau_d(cd)) - Cplx(1.0)) <= 1e-9);
        }
    }
    SECTION("frame mismatch is rejected") {
        GradedSpace E(0, {1, 1});
        DetLineElement s{det_frame(E), Cplx(1.0)};
        CHECK_THROWS_AS(pair_dual(s, s), StructuralError);
    }
}

TEST_CASE("shift identity") {
    CHECK(std::abs(shift_identity_check(hand_complex(1.0, 1.0)) - Cplx(1.0)) < 1e-14);
    CHECK(std::abs(shift_identity_check(hand_complex(2.0, 1.0)) - Cplx(1.0)) < 1e-14);
    Rng rng(77);
    for (int t = 0; t < 20; ++t) {
        GradedSpace E = random_exactable_shape(rng, 4);
        Complex c = random_exact_complex(rng.raw(), E);
        CHECK(std::abs(shift_identity_check(c) - Cplx(1.0)) <= 1e-9);
    }
}

TEST_CASE("hermitian norms") {
    SECTION("hand values") {
        CHECK(hermitian_norm(tau_d(hand_complex(1.0, 1.0))) == Approx(1.0));
        Complex c = hand_complex(2.0, 3.0);
        double n2 = hermitian_norm(tau_d(c));
        CHECK(n2 * n2 == Approx(0.25));
        GradedMap L = supercommutator(*c.d, adjoint(*c.d));
        CHECK(alternating_det_product(L, 1).real() == Approx(0.25));
    }
    SECTION("norm identities on random instances") {
        Rng rng(88);
        for (int t = 0; t < 15; ++t) {
            GradedSpace E = random_exactable_shape(rng, 4);
            Complex c = random_invertible_pair(rng.raw(), E);
            double nd = hermitian_norm(tau_d(c));
            double ndel = hermitian_norm(tau_delta(c));
            Cplx pd = alternating_det_product(supercommutator(*c.d, adjoint(*c.d)), 1);
            Cplx pdel = alternating_det_product(supercommutator(*c.delta, adjoint(*c.delta)), 1);
            CHECK(std::abs(nd * nd - pd) <= 1e-8 * std::abs(pd));
            CHECK(std::abs(ndel * ndel - 1.0 / pdel) <= 1e-8 * std::abs(1.0 / pdel));
            Cplx tr = alternating_det_product(supercommutator(*c.d, *c.delta), 1);
            CHECK(std::abs(pd * pdel) == Approx(std::abs(tr) * std::abs(tr)).epsilon(1e-8));
        }
    }
}

TEST_CASE("tau is multiplicative over direct sums") {
    Rng rng(13);
    for (int t = 0; t < 12; ++t) {
        GradedSpace A = random_exactable_shape(rng, 3);
        GradedSpace B = random_exactable_shape(rng, 3);
        Complex ca = random_exact_complex(rng.raw(), A);
        Complex cb = random_exact_complex(rng.raw(), B);
        Complex cs = direct_sum(ca, cb);
        Cplx whole = tau_d(cs).scalar;
        Cplx parts =
            tau_d(ca).scalar * tau_d(cb).scalar * detail::concat_sign_tau_d(A, B);
        CHECK(std::abs(whole - parts) <= 1e-10 * std::abs(parts));
    }
    // the delta side, via exact deltas
    for (int t = 0; t < 8; ++t) {
        GradedSpace A = random_exactable_shape(rng, 3);
        GradedSpace B = random_exactable_shape(rng, 3);
        Complex ca, cb;
        ca.space = A;
        ca.delta = random_exact_delta(rng, A);
        cb.space = B;
        cb.delta = random_exact_delta(rng, B);
        Complex cs = direct_sum(ca, cb);
        Cplx whole = tau_delta(cs).scalar;
        Cplx parts = tau_delta(ca).scalar * tau_delta(cb).scalar *
                     detail::concat_sign_tau_delta(A, B);
        CHECK(std::abs(whole - parts) <= 1e-10 * std::abs(parts));
    }
}

TEST_CASE("concatenation sign hand value") {
    // dims (1,2,1) + (1,2,1): the interleaving parity flips the product
    GradedSpace A(0, {1, 2, 1});
    CHECK(detail::concat_sign_tau_d(A, A) == -1.0);
    GradedSpace B(0, {1, 1});
    CHECK(detail::concat_sign_tau_d(B, B) == 1.0);
}
