#include <torzeta/gamma.hpp>

#include <catch_amalgamated.hpp>

using namespace torzeta;

namespace {

GammaStructure conjugated_contact_model(int m, uint64_t seed) {
    GammaStructure gs = contact_model(m);
    const GradedSpace& E = gs.complex.space;
    Rng rng(seed);
    GradedMap g = random_automorphism(E, rng);
    GradedMap ginv = inverse_automorphism(g);
    GammaStructure out;
    out.complex.space = E;
    out.complex.d = conjugate(g, *gs.complex.d);
    out.complex.delta = conjugate(g, *gs.complex.delta);
    out.gamma.space = E;
    int pq = E.p + E.q;
    for (int j = E.p; j <= E.q; ++j) {
        if (E.dim(j) == 0 || E.dim(pq - j) == 0) continue;
        out.gamma.blocks[j] = g.block(pq - j) * gs.gamma.block(j) * ginv.block(j);
    }
    return out;
}

}  // namespace

TEST_CASE("contact model axioms are exact") {
    for (int m = 0; m <= 2; ++m) {
        GammaStructure gs = contact_model(m);
        gs.complex.validate();
        GammaAxiomReport rep = check_gamma_axioms(gs);
        INFO("m = " << m);
        CHECK(rep.comm_minus_one == 0.0);
        CHECK(rep.gamma_sq_minus_one == 0.0);
        CHECK(rep.intertwine == 0.0);
        CHECK(rep.middle_block == 0.0);
        // dims are binomials of 2m+1
        const GradedSpace& E = gs.complex.space;
        CHECK(E.p == 0);
        CHECK(E.q == 2 * m + 1);
        CHECK(E.total_dim() == (1 << (2 * m + 1)));
    }
}

TEST_CASE("m = 0 is the one-dimensional swap model") {
    GammaStructure gs = contact_model(0);
    CHECK(gs.complex.space.dims == std::vector<int>{1, 1});
    CHECK(gs.gamma.block(0)(0, 0) == Cplx(1.0));
    CHECK(std::abs(rho_gamma(gs).scalar - Cplx(1.0)) < 1e-15);
    CHECK(std::abs(tau_d(gs.complex).scalar - Cplx(1.0)) < 1e-15);
    CHECK(std::abs(tau_delta(gs.complex).scalar - Cplx(1.0)) < 1e-15);
}

TEST_CASE("Gamma comparison theorem tau(d) = tau(delta) = rho_Gamma") {
    SECTION("contact models") {
        for (int m = 0; m <= 2; ++m) {
            GammaStructure gs = contact_model(m);
            Cplx rg = rho_gamma(gs).scalar;
            INFO("m = " << m);
            CHECK(std::abs(tau_d(gs.complex).scalar - rg) <= 1e-9 * std::abs(rg));
            CHECK(std::abs(tau_delta(gs.complex).scalar - rg) <= 1e-9 * std::abs(rg));
        }
    }
    SECTION("conjugated models with nontrivial scalars") {
        for (int m = 0; m <= 2; ++m) {
            for (uint64_t s = 1; s <= 3; ++s) {
                GammaStructure gs = conjugated_contact_model(m, s * 41 + static_cast<uint64_t>(m));
                Cplx rg = rho_gamma(gs, 1e-8).scalar;
                INFO("m = " << m << " seed " << s);
                if (m > 0) CHECK(std::abs(rg - Cplx(1.0)) > 1e-6);  // genuinely nontrivial
                CHECK(std::abs(tau_d(gs.complex).scalar - rg) <= 1e-9 * std::abs(rg));
                CHECK(std::abs(tau_delta(gs.complex).scalar - rg) <= 1e-9 * std::abs(rg));
            }
        }
    }
}

TEST_CASE("axiom violations are reported") {
    GammaStructure gs = contact_model(1);
    SECTION("broken involution") {
        gs.gamma.blocks[0] *= Cplx(2.0);
        CHECK_THROWS_WITH(rho_gamma(gs), Catch::Matchers::ContainsSubstring("Gamma^2"));
    }
    SECTION("broken intertwining") {
        GammaStructure bad = contact_model(1);
        bad.gamma.blocks[1] = -bad.gamma.blocks[1];
        CHECK_THROWS_AS(rho_gamma(bad), StructuralError);
    }
    SECTION("even span rejected") {
        GammaStructure bad;
        bad.complex.space = GradedSpace(0, {1, 2, 1});
        bad.complex.d = GradedMap(bad.complex.space, bad.complex.space, 1);
        bad.complex.delta = GradedMap(bad.complex.space, bad.complex.space, -1);
        bad.gamma.space = bad.complex.space;
        CHECK_THROWS_WITH(check_gamma_axioms(bad),
                          Catch::Matchers::ContainsSubstring("odd"));
    }
}

TEST_CASE("A/B/C splitting") {
    for (int m = 1; m <= 2; ++m) {
        GammaStructure base = contact_model(m);
        GammaStructure gs = conjugated_contact_model(m, 7 + static_cast<uint64_t>(m));
        const Complex& c = gs.complex;
        AbcSplit s = abc_split(c);
        const GradedSpace& E = c.space;
        INFO("m = " << m);

        // direct sum: per-degree dimensions add up
        for (int i = E.p; i <= E.q; ++i) {
            int total = s.A.restricted.space.dim(i) + s.B.restricted.space.dim(i) +
                        s.C.restricted.space.dim(i);
            CHECK(total == E.dim(i));
        }
        // each part is an exact subcomplex for both differentials
        for (const SubComplex* sc : {&s.A, &s.B, &s.C}) {
            sc->restricted.validate();
            if (sc->restricted.space.total_dim() == 0) continue;
            CohomologyData H = cohomology(sc->restricted);
            for (int i = E.p; i <= E.q; ++i) CHECK(H.betti(i) == 0);
        }
        // multiplicativity: tau(d) = tau_A tau_B tau_C through the frame change
        double lm = 0, ph = 0;
        for (int i = E.p; i <= E.q; ++i) {
            if (E.dim(i) == 0) continue;
            Mat T(E.dim(i), E.dim(i));
            int col = 0;
            for (const SubComplex* sc : {&s.A, &s.B, &s.C}) {
                auto it = sc->bases.find(i);
                if (it == sc->bases.end()) continue;
                T.middleCols(col, static_cast<int>(it->second.cols())) = it->second;
                col += static_cast<int>(it->second.cols());
            }
            REQUIRE(col == E.dim(i));
            auto [l, a] = detail::logdet(T);
            double e = (i % 2) ? -1.0 : 1.0;
            lm += e * l;
            ph += e * a;
        }
        Cplx frame_change = detail::from_logdet(lm, ph);
        Cplx sab = detail::concat_sign_tau_d(s.A.restricted.space, s.B.restricted.space);
        Cplx sabc = detail::concat_sign_tau_d(
            direct_sum_space(s.A.restricted.space, s.B.restricted.space),
            s.C.restricted.space);
        Cplx parts = tau_d(s.A.restricted).scalar * tau_d(s.B.restricted).scalar *
                     tau_d(s.C.restricted).scalar * sab * sabc * frame_change;
        Cplx whole = tau_d(c).scalar;
        CHECK(std::abs(whole - parts) <= 1e-9 * std::abs(parts));
        (void)base;
    }
}
