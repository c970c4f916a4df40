#include <torzeta/graded.hpp>

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

}  // namespace

TEST_CASE("compose basics") {
    GradedSpace E(0, {2, 3, 1});
    Rng rng(3);
    GradedMap f(E, E, 1);
    for (int i = 0; i < 2; ++i) f.blocks[i] = rng.matrix(E.dim(i + 1), E.dim(i));
    CHECK((compose(identity_map(E), f) - f).frobenius_norm() == 0.0);
    CHECK((compose(f, identity_map(E)) - f).frobenius_norm() == 0.0);

    Complex c = random_exact_complex(11, 0, {1, 2, 1});
    CHECK(compose(*c.d, *c.d).frobenius_norm() <=
          kDiffRelTol * c.d->frobenius_norm() * c.d->frobenius_norm());

    GradedSpace F(0, {2, 2});
    GradedMap g(F, F, 1);
    g.blocks[0] = Mat::Identity(2, 2);
    CHECK_THROWS_AS(compose(f, g), StructuralError);
}

TEST_CASE("supercommutator signs") {
    GradedSpace E(0, {2, 2, 2});
    Rng rng(5);
    GradedMap d(E, E, 1), delta(E, E, -1);
    for (int i = 0; i < 2; ++i) d.blocks[i] = rng.matrix(2, 2);
    for (int i = 1; i <= 2; ++i) delta.blocks[i] = rng.matrix(2, 2);
    // odd-odd: [d, delta] = d delta + delta d
    GradedMap lhs = supercommutator(d, delta);
    GradedMap rhs = compose(d, delta) + compose(delta, d);
    CHECK((lhs - rhs).frobenius_norm() < 1e-14);

    // [delta, N] = delta for any degree -1 map
    GradedMap N = number_operator(E);
    GradedMap dn = supercommutator(delta, N);
    CHECK((dn - delta).frobenius_norm() < 1e-14 * (1.0 + delta.frobenius_norm()));

    // [f, f] = 0 for even f
    GradedMap f(E, E, 0);
    for (int i = 0; i <= 2; ++i) f.blocks[i] = rng.matrix(2, 2);
    CHECK(supercommutator(f, f).frobenius_norm() < 1e-14);
}

TEST_CASE("supertrace") {
    GradedSpace E01(0, {1, 1});
    CHECK(supertrace(identity_map(E01)) == Cplx(0.0));

    GradedSpace E(0, {1, 2});
    CHECK(supertrace(number_operator(E)).real() == Approx(-2.0));

    // vanishes on supercommutators of composable maps
    Rng rng(7);
    GradedSpace F(-1, {2, 3, 2});
    for (int t = 0; t < 25; ++t) {
        int k = static_cast<int>(rng.uniform() * 3) - 1;
        GradedMap f(F, F, k), g(F, F, -k);
        for (int i = F.p; i <= F.q; ++i) {
            if (F.dim(i) > 0 && F.dim(i + k) > 0) f.blocks[i] = rng.matrix(F.dim(i + k), F.dim(i));
            if (F.dim(i) > 0 && F.dim(i - k) > 0) g.blocks[i] = rng.matrix(F.dim(i - k), F.dim(i));
        }
        double scale = 1.0 + f.frobenius_norm() * g.frobenius_norm();
        CHECK(std::abs(supertrace(supercommutator(f, g))) <= 1e-10 * scale);
    }

    GradedMap shifted(F, F, 1);
    CHECK_THROWS_AS(supertrace(shifted), StructuralError);
}

TEST_CASE("chi parity bookkeeping") {
    Rng rng(19);
    for (int t = 0; t < 40; ++t) {
        int span = 1 + static_cast<int>(rng.uniform() * 4);
        int p = static_cast<int>(rng.uniform() * 7) - 3;
        std::vector<int> dims;
        for (int i = 0; i <= span; ++i) dims.push_back(static_cast<int>(rng.uniform() * 5));
        if (std::all_of(dims.begin(), dims.end(), [](int x) { return x == 0; })) dims[0] = 1;
        GradedSpace E(p, dims);
        int chi = E.chi(), chip = E.chi_prime(), dim = E.total_dim();
        // chi = dim E mod 2 ; chi' = (chi - dim E)/2 mod 2
        CHECK(((chi % 2) + 2) % 2 == dim % 2);
        CHECK((chi - dim) % 2 == 0);
        CHECK(((chip % 2) + 2) % 2 == ((((chi - dim) / 2) % 2) + 2) % 2);
    }
}

TEST_CASE("cohomology") {
    SECTION("random exact complex has H = 0") {
        Complex c = random_exact_complex(23, -1, {2, 4, 3, 1});
        CohomologyData H = cohomology(c);
        for (int i = c.space.p; i <= c.space.q; ++i) CHECK(H.betti(i) == 0);
    }
    SECTION("zero differential gives H = E") {
        GradedSpace E(0, {2, 3});
        Complex c;
        c.space = E;
        c.d = GradedMap(E, E, 1);
        CohomologyData H = cohomology(c);
        CHECK(H.betti(0) == 2);
        CHECK(H.betti(1) == 3);
    }
    SECTION("hand instance (1,2,1)") {
        GradedSpace E(0, {1, 2, 1});
        Complex c;
        c.space = E;
        c.d = GradedMap(E, E, 1);
        Mat d0(2, 1);
        d0 << 1.0, 0.0;
        Mat d1(1, 2);
        d1 << 0.0, 1.0;
        c.d->set_block(0, d0);
        c.d->set_block(1, d1);
        CohomologyData H = cohomology(c);
        for (int i = 0; i <= 2; ++i) CHECK(H.betti(i) == 0);
    }
    SECTION("euler characteristic from ranks is exact") {
        Rng rng(31);
        for (int t = 0; t < 20; ++t) {
            std::vector<int> dims{1 + static_cast<int>(rng.uniform() * 3),
                                  1 + static_cast<int>(rng.uniform() * 4),
                                  1 + static_cast<int>(rng.uniform() * 3)};
            GradedSpace E(0, dims);
            // arbitrary differential: d1 d0 = 0 via d1 restricted to coker
            GradedMap d(E, E, 1);
            Mat d0 = rng.matrix(E.dim(1), E.dim(0));
            d.blocks[0] = d0;
            // d1 with rows annihilating im d0
            Eigen::JacobiSVD<Mat> svd(d0, Eigen::ComputeFullU);
            int r = 0;
            for (int k = 0; k < svd.singularValues().size(); ++k)
                if (svd.singularValues()(k) > 1e-9 * svd.singularValues()(0)) ++r;
            Mat left = svd.matrixU().rightCols(E.dim(1) - r);
            d.blocks[1] = rng.matrix(E.dim(2), E.dim(1) - r) * left.adjoint();
            Complex c;
            c.space = E;
            c.d = d;
            CohomologyData H = cohomology(c);
            int chiH = 0;
            for (int i = 0; i <= 2; ++i) chiH += ((i % 2) ? -1 : 1) * H.betti(i);
            CHECK(chiH == E.chi());
        }
    }
    SECTION("missing d is an error") {
        Complex c;
        c.space = GradedSpace(0, {1, 1});
        CHECK_THROWS_AS(cohomology(c), StructuralError);
    }
}

TEST_CASE("adjoint and dual transpose") {
    Rng rng(41);
    GradedSpace E(-1, {2, 3, 1});
    GradedMap f(E, E, 1);
    for (int i = -1; i <= 0; ++i)
        if (E.dim(i) > 0 && E.dim(i + 1) > 0) f.blocks[i] = rng.matrix(E.dim(i + 1), E.dim(i));

    SECTION("adjoint is an involution and fixes the identity") {
        GradedMap ff = adjoint(adjoint(f));
        CHECK((ff - f).frobenius_norm() < 1e-15);
        GradedMap id = identity_map(E);
        CHECK((adjoint(id) - id).frobenius_norm() == 0.0);
        GradedMap one(GradedSpace(0, {1, 1}), GradedSpace(0, {1, 1}), 1);
        one.blocks[0] = Mat::Constant(1, 1, Cplx(2.0, 1.0));
        GradedMap oneadj = adjoint(one);
        CHECK(oneadj.shift == -1);
        CHECK(oneadj.block(1)(0, 0) == Cplx(2.0, -1.0));
    }

    SECTION("dual of an exact differential is exact") {
        Complex c = random_exact_complex(5, -1, {2, 3, 1});
        GradedMap dt = dual_transpose(*c.d);
        Complex cd;
        cd.space = dt.source;
        cd.d = dt;
        CohomologyData H = cohomology(cd);
        for (int i = cd.space.p; i <= cd.space.q; ++i) CHECK(H.betti(i) == 0);
        // double dual is the original
        GradedMap dd = dual_transpose(dt);
        CHECK(dd.source == c.d->source);
        CHECK((dd - *c.d).frobenius_norm() < 1e-15);
    }
}

TEST_CASE("random exact complex generator") {
    SECTION("dims (1,1) gives an invertible 1x1 differential") {
        Complex c = random_exact_complex(9, 0, {1, 1});
        CHECK(std::abs(c.d->block(0)(0, 0)) > 1e-6);
    }
    SECTION("deterministic per seed") {
        Complex a = random_exact_complex(77, 0, {1, 2, 1});
        Complex b = random_exact_complex(77, 0, {1, 2, 1});
        CHECK((*a.d - *b.d).frobenius_norm() == 0.0);
        Complex c = random_exact_complex(78, 0, {1, 2, 1});
        CHECK((*a.d - *c.d).frobenius_norm() > 1e-8);
    }
    SECTION("chi obstruction is reported") {
        CHECK_THROWS_WITH(random_exact_complex(1, 0, {1, 1, 1}),
                          Catch::Matchers::ContainsSubstring("chi"));
        CHECK_THROWS_WITH(random_exact_complex(1, 0, {1, 3, 1, 1}),
                          Catch::Matchers::ContainsSubstring("infeasible"));
    }
    SECTION("differential and exactness hold") {
        for (uint64_t s = 0; s < 10; ++s) {
            Complex c = random_exact_complex(s, -2, {2, 4, 3, 1});
            c.validate();
            CohomologyData H = cohomology(c);
            for (int i = c.space.p; i <= c.space.q; ++i) CHECK(H.betti(i) == 0);
        }
    }
}

TEST_CASE("surrogate generator invariants") {
    for (uint64_t s = 0; s < 8; ++s) {
        GradedSpace E(0, {2, 4, 2});
        std::vector<int> ranks{1, 1, 0};
        Complex c = random_surrogate(s, E, ranks);
        c.validate();
        GradedMap L = supercommutator(*c.d, *c.delta);
        // L commutes with both differentials
        CHECK(supercommutator(L, *c.d).frobenius_norm() <
              1e-10 * (1.0 + L.frobenius_norm() * c.d->frobenius_norm()));
        CHECK(supercommutator(L, *c.delta).frobenius_norm() <
              1e-10 * (1.0 + L.frobenius_norm() * c.delta->frobenius_norm()));
        // delta exact: regrade it as a degree +1 differential and take cohomology
        GradedSpace U = dual_space(E);
        GradedMap du(U, U, 1);
        for (const auto& [i, m] : c.delta->blocks) du.blocks[-i] = m;
        Complex uc;
        uc.space = U;
        uc.d = du;
        CohomologyData HU = cohomology(uc);
        for (int i = U.p; i <= U.q; ++i) CHECK(HU.betti(i) == 0);

        CohomologyData H = cohomology(c);
        CHECK(H.betti(0) == 1);
        CHECK(H.betti(1) == 2);
        CHECK(H.betti(2) == 1);
    }
}
