#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qdflow/moduli.hpp"

using namespace qdflow;

namespace {

// m = {7}: Q0 = x^3 + 1, one apparent singularity at q with sign eps
ExtendedPoint cubic_point(long q, long v, int eps) {
    ExtendedPoint pt;
    pt.base.a_inf = {Scalar(1L), Scalar(0L)};
    pt.q = {Scalar(q)};
    pt.v = {Scalar(v)};
    pt.eps = {eps};
    return pt;
}

const PoleOrders kCubic = PoleOrders::from_orders({7});

}  // namespace

TEST_CASE("pole order bookkeeping") {
    CHECK(kCubic.m_inf == 4);
    CHECK(kCubic.n() == 1);
    CHECK(kCubic.dim_m() == 2);
    PoleOrders o51 = PoleOrders::from_orders({5, 1});
    CHECK(o51.m_inf == 3);
    CHECK(o51.m_fin == std::vector<int>{1});
    CHECK(o51.n() == 1);
    PoleOrders o53 = PoleOrders::from_orders({5, 3});
    CHECK(o53.n() == 2);
    PoleOrders o9 = PoleOrders::from_orders({9});
    CHECK(o9.n() == 2);
    PoleOrders o71 = PoleOrders::from_orders({7, 1});
    CHECK(o71.n() == 2);
    CHECK_THROWS_AS(PoleOrders::from_orders({5}), invalid_point_error);  // n = 0
    CHECK_THROWS_AS(PoleOrders::from_orders({4}), invalid_point_error);  // even
    CHECK_THROWS_AS(PoleOrders::from_orders({3, 1}), invalid_point_error);
}

TEST_CASE("coordinate layout dimensions and names") {
    CoordinateLayout l7(kCubic);
    CHECK(l7.base_dim() == 2);
    CHECK(l7.total_dim() == 4);
    CHECK(l7.name(0) == "a_inf[0]");
    CHECK(l7.name(2) == "q[0]");
    CHECK(l7.name(3) == "v[0]");
    CHECK(l7.low_index_coords() == std::vector<int>{0});

    CoordinateLayout l71(PoleOrders::from_orders({7, 1}));
    CHECK(l71.base_dim() == 4);
    CHECK(l71.total_dim() == 8);
    CHECK(l71.name(2) == "w[0]");
    CHECK(l71.name(3) == "a[0][1]");
    CHECK(l71.low_index_coords() == std::vector<int>{0, 3});

    CoordinateLayout l53(PoleOrders::from_orders({5, 3}));
    CHECK(l53.base_dim() == 4);
    CHECK(l53.name(0) == "w[0]");
    CHECK(l53.low_index_coords() == std::vector<int>{1, 2});
}

TEST_CASE("layout get/set/jet round trips") {
    ExtendedPoint pt = cubic_point(2, 5, 1);
    CoordinateLayout l(kCubic);
    CHECK(l.get(pt, 2) == Scalar(2L));
    l.set(pt, 3, Scalar(7L));
    CHECK(pt.v[0] == Scalar(7L));
    ExtendedPoint j = l.seed_jet(pt, 2);
    CHECK(j.q[0].tangent() == Scalar(1L));
    CHECK(j.v[0].tangent() == Scalar(0L));
    CHECK(j.base.a_inf[0].has_jet());
    auto tan = l.read_tangent(j);
    CHECK(tan[2] == Scalar(1L));
    CHECK(tan[0].is_zero());
}

TEST_CASE("build_Q0 matches the direct formulas") {
    // m = {7}: x^3 + 1
    RationalFunction q0 = build_Q0(kCubic, cubic_point(2, 0, 1).base);
    CHECK(q0.is_polynomial());
    CHECK(q0.num().coeff(3) == Scalar(1L));
    CHECK(q0.num().coeff(0) == Scalar(1L));
    CHECK(q0.num().coeff(1).is_zero());

    // m = {5,1}: x + a/(x-w)
    PoleOrders o = PoleOrders::from_orders({5, 1});
    ModuliPoint pt;
    pt.poles.push_back({Scalar(3L), {Scalar(5L)}});  // w=3, a_1=5
    RationalFunction f = build_Q0(o, pt);
    // (x(x-3) + 5)/(x-3)
    CHECK(f.eval(Scalar(4L)) == Scalar(4L) + Scalar(5L));
    CHECK(f.eval(Scalar(0L)) == Scalar::exact(-5, 3));
}

TEST_CASE("compute_p honors eps and exactness") {
    CHECK(compute_p(kCubic, cubic_point(2, 0, 1), 0) == Scalar(3L));
    CHECK(compute_p(kCubic, cubic_point(2, 0, -1), 0) == Scalar(-3L));
    ScalarContextGuard guard;
    Scalar p = compute_p(kCubic, cubic_point(1, 0, 1), 0);  // sqrt(2): inexact
    CHECK(scalar_context().degraded);
    CHECK(std::abs(p.to_c64().real() - 1.4142135623730951) < 1e-12);
}

TEST_CASE("Q1 for the cubic with one singularity") {
    // q=2, v=0: Q1 = 3/(x-2); v=5: Q1 = 3/(x-2) + 30
    RationalFunction q1a = build_Q1(kCubic, cubic_point(2, 0, 1));
    CHECK(q1a.eval(Scalar(3L)) == Scalar(3L));
    CHECK(q1a.eval(Scalar(4L)) == Scalar::exact(3, 2));
    RationalFunction q1b = build_Q1(kCubic, cubic_point(2, 5, 1));
    CHECK(q1b.eval(Scalar(3L)) == Scalar(33L));
    RationalFunction r = build_R(kCubic, cubic_point(2, 5, 1));
    CHECK(r.num().degree() == 0);
    CHECK(r.eval(Scalar(9L)) == Scalar(30L));
}

TEST_CASE("Q2 for the cubic with one singularity") {
    // q=2, v=0: Q2 = 3/(4(x-2)^2); v=5: adds 5/(x-2) + 25
    RationalFunction q2a = build_Q2(kCubic, cubic_point(2, 0, 1));
    CHECK(q2a.eval(Scalar(3L)) == Scalar::exact(3, 4));
    CHECK(q2a.eval(Scalar(4L)) == Scalar::exact(3, 16));
    RationalFunction q2b = build_Q2(kCubic, cubic_point(2, 5, 1));
    CHECK(q2b.eval(Scalar(3L)) == Scalar::exact(3, 4) + Scalar(5L) + Scalar(25L));
    RationalFunction s = build_S(kCubic, cubic_point(2, 5, 1));
    CHECK(s.eval(Scalar(100L)) == Scalar(25L));
}

TEST_CASE("assembled potential and apparent singularity, n = 1") {
    ExtendedPoint pt = cubic_point(2, 0, 1);
    PotentialTriple t = build_potentials(kCubic, pt);
    RationalFunction q = assemble_Q(t, Scalar(1L));
    // x^3 + 1 + 3/(x-2) + 3/(4(x-2)^2) at x=3: 28 + 3 + 3/4
    CHECK(q.eval(Scalar(3L)) == Scalar(31L) + Scalar::exact(3, 4));
    Scalar u = compute_u(kCubic, pt, 0, Scalar(1L));
    CHECK(u == Scalar(3L));
    auto rep = verify_apparent_singularity(q, pt.q[0], u);
    CHECK(rep.dev2.is_zero());
    CHECK(rep.dev1.is_zero());
    CHECK(rep.dev0.is_zero());
    CHECK(rep.max_residual == 0.0);

    // perturbing Q2 by 1/(x-q) shows up at Laurent order -1 exactly
    RationalFunction bump(Polynomial(Scalar(1L)),
                          Polynomial(std::vector<Scalar>{-pt.q[0], Scalar(1L)}));
    auto rep2 = verify_apparent_singularity(q + bump, pt.q[0], u);
    CHECK(rep2.dev1 == Scalar(1L));
    CHECK(rep2.dev2.is_zero());
}

TEST_CASE("apparent singularity chain closes at every q, several hbar, n = 2") {
    PoleOrders o = PoleOrders::from_orders({9});
    SampleConfig cfg;
    cfg.seed = 7;
    ExtendedPoint pt = random_point(o, cfg);
    PotentialTriple t = build_potentials(o, pt);
    for (const Scalar& h : {Scalar(1L), Scalar(2L), Scalar::exact_i()}) {
        RationalFunction q = assemble_Q(t, h);
        for (size_t I = 0; I < 2; ++I) {
            Scalar u = compute_u(o, pt, I, h);
            auto rep = verify_apparent_singularity(q, pt.q[I], u);
            CHECK(rep.dev2.is_zero());
            CHECK(rep.dev1.is_zero());
            CHECK(rep.dev0.is_zero());
        }
    }
}

TEST_CASE("apparent singularity chain for every acceptance family") {
    for (const auto& orders_list :
         std::vector<std::vector<int>>{{7}, {5, 1}, {9}, {5, 3}, {7, 1}}) {
        PoleOrders o = PoleOrders::from_orders(orders_list);
        SampleConfig cfg;
        cfg.seed = 3;
        ExtendedPoint pt = random_point(o, cfg);
        PotentialTriple t = build_potentials(o, pt);
        RationalFunction q = assemble_Q(t, Scalar(2L));
        for (size_t I = 0; I < pt.q.size(); ++I) {
            Scalar u = compute_u(o, pt, I, Scalar(2L));
            auto rep = verify_apparent_singularity(q, pt.q[I], u);
            CHECK(rep.max_residual == 0.0);
        }
    }
}

TEST_CASE("R and S interpolation degrees stay within their pole budget") {
    PoleOrders o = PoleOrders::from_orders({5, 3});
    SampleConfig cfg;
    cfg.seed = 11;
    ExtendedPoint pt = random_point(o, cfg);
    RationalFunction r = build_R(o, pt);
    RationalFunction s = build_S(o, pt);
    // F has degree m_1 = 2; numerators have degree <= n-1 = 1
    CHECK(r.num().degree() <= 1);
    CHECK(s.num().degree() <= 1);
    CHECK(build_Q1(o, pt).den().degree() <= 2 + 2);
}

TEST_CASE("sampler determinism and exactness") {
    PoleOrders o = PoleOrders::from_orders({7, 1});
    SampleConfig cfg;
    cfg.seed = 42;
    ExtendedPoint a = random_point(o, cfg);
    ExtendedPoint b = random_point(o, cfg);
    CHECK(a.q[0] == b.q[0]);
    CHECK(a.base.poles[0].w == b.base.poles[0].w);
    CHECK(a.eps == b.eps);
    // exact eligibility: p_I is exact
    ScalarContextGuard guard;
    for (size_t I = 0; I < a.q.size(); ++I) {
        Scalar p = compute_p(o, a, I);
        CHECK(p.is_exact());
        CHECK(!p.is_zero());
    }
    CHECK(!scalar_context().degraded);
    SampleConfig cfg2 = cfg;
    cfg2.seed = 43;
    ExtendedPoint c = random_point(o, cfg2);
    CHECK(!(c.q[0] == a.q[0]));  // different seed, different point
}

TEST_CASE("sampler output is valid for all acceptance families and seeds") {
    for (const auto& ol : std::vector<std::vector<int>>{{7}, {5, 1}, {9}, {5, 3}, {7, 1}}) {
        PoleOrders o = PoleOrders::from_orders(ol);
        for (unsigned long seed : {1ul, 2ul, 3ul}) {
            SampleConfig cfg;
            cfg.seed = seed;
            ExtendedPoint pt = random_point(o, cfg);
            CHECK_NOTHROW(validate_extended(o, pt));
            for (size_t I = 0; I < pt.q.size(); ++I) CHECK(compute_p(o, pt, I).is_exact());
        }
    }
}

TEST_CASE("genericity check and clearing polynomial") {
    ExtendedPoint pt = cubic_point(2, 0, 1);
    GenericityResult g = genericity_check(kCubic, pt, Scalar(1L));
    CHECK(g.simple_zeros);
    CHECK(g.degree == 5);
    CHECK(g.expected_degree == 5);
    CHECK(!g.discriminant.is_zero());
    // the clearing polynomial reproduces Q at a probe point
    Polynomial sp = clearing_polynomial(kCubic, pt, Scalar(1L));
    RationalFunction q = assemble_Q(build_potentials(kCubic, pt), Scalar(1L));
    Scalar x(7L);
    Scalar den = (x - Scalar(2L)) * (x - Scalar(2L));
    CHECK(sp.eval(x) == q.eval(x) * den);
}

TEST_CASE("curve stats match the expected genus counts") {
    CurveStats s = curve_stats(kCubic, cubic_point(2, 0, 1), Scalar(1L));
    CHECK(s.genus_sigma == 2);
    CHECK(s.genus_sigma0 == 1);
    CHECK(s.branch_points_sigma == 6);
    CHECK(s.branch_points_sigma0 == 4);

    PoleOrders o53 = PoleOrders::from_orders({5, 3});
    SampleConfig cfg;
    cfg.seed = 5;
    ExtendedPoint pt = random_point(o53, cfg);
    CurveStats s2 = curve_stats(o53, pt, Scalar(2L));
    CHECK(s2.genus_sigma == 4);
    CHECK(s2.genus_sigma0 == 2);
}

TEST_CASE("independence matrix is the expected Vandermonde-like matrix") {
    PoleOrders o = PoleOrders::from_orders({9});
    SampleConfig cfg;
    cfg.seed = 2;
    ExtendedPoint pt = random_point(o, cfg);
    Matrix nm = independence_matrix(o, pt);
    CHECK(nm.rows() == 2);
    CHECK(nm.at(0, 0) == Scalar(1L));
    CHECK(nm.at(0, 1) == pt.q[0]);
    CHECK(nm.at(1, 1) == pt.q[1]);
    CHECK(nm.det() == pt.q[1] - pt.q[0]);
}

TEST_CASE("y expansion with pinned branch at an apparent singularity") {
    ExtendedPoint pt = cubic_point(2, 0, 1);
    RationalFunction q0 = build_Q0(kCubic, pt.base);
    Scalar p = compute_p(kCubic, pt, 0);
    CurveBranch b = expand_y(q0, ExpansionSite::finite(pt.q[0]), 10, p);
    CHECK(b.c0 == Scalar(9L));
    CHECK(b.sqrt_c0.has_value());
    CHECK(*b.sqrt_c0 == Scalar(3L));
    CHECK(b.y_norm.coeff(0) == Scalar(1L));
    // (sqrt_c0 * y_norm)^2 reproduces Q0 locally
    LocalSeries sq = (b.y_norm * b.y_norm) * b.c0;
    LocalSeries direct = puiseux_expand(q0, ExpansionSite::finite(pt.q[0]), 8);
    for (long k = 0; k <= 8; ++k) CHECK((sq.coeff(k) - direct.coeff(k)).is_zero());
    // wrong branch value is rejected
    CHECK_THROWS_AS(expand_y(q0, ExpansionSite::finite(pt.q[0]), 10, Scalar(5L)),
                    invalid_point_error);
}

TEST_CASE("y expansion at a double-cover pole keeps c0 factored") {
    PoleOrders o = PoleOrders::from_orders({5, 1});
    ModuliPoint mp;
    mp.poles.push_back({Scalar(0L), {Scalar(2L)}});  // Q0 = x + 2/x, pole at w=0
    ExtendedPoint pt;
    pt.base = mp;
    pt.q = {Scalar(1L)};
    pt.v = {Scalar(0L)};
    pt.eps = {1};
    RationalFunction q0 = build_Q0(o, pt.base);
    // at w=0 with local parameter x = s^2: Q0 = s^2 + 2 s^-2, leading c0 = 2
    CurveBranch b = expand_y(q0, ExpansionSite::finite(Scalar(0L), 2), 10);
    CHECK(b.c0 == Scalar(2L));
    CHECK(!b.sqrt_c0.has_value());
    CHECK(b.y_norm.val() == -1);
    CHECK(b.y_norm.coeff(-1) == Scalar(1L));
    LocalSeries sq = (b.y_norm * b.y_norm) * b.c0;
    CHECK(sq.coeff(-2) == Scalar(2L));
    CHECK(sq.coeff(2) == Scalar(1L));
}

TEST_CASE("sigma has residue eps/2 over each apparent singularity") {
    for (int eps : {1, -1}) {
        ExtendedPoint pt = cubic_point(2, 5, eps);
        PotentialTriple t = build_potentials(kCubic, pt);
        Scalar p = compute_p(kCubic, pt, 0);
        ExpansionSite site = ExpansionSite::finite(pt.q[0]);
        CurveBranch plus = expand_y(t.Q0, site, 12, p);     // sheet with y0 = +p
        CurveBranch minus = expand_y(t.Q0, site, 12, -p);   // opposite sheet
        NormalizedForm s_plus = sigma_form(t.Q1, plus, site, 6);
        NormalizedForm s_minus = sigma_form(t.Q1, minus, site, 6);
        CHECK(s_plus.residue() == Scalar::exact(1, 2));
        CHECK(s_minus.residue() == Scalar::exact(-1, 2));
    }
}

TEST_CASE("tau is holomorphic at the double-cover sites") {
    PoleOrders o = PoleOrders::from_orders({5, 1});
    SampleConfig cfg;
    cfg.seed = 9;
    ExtendedPoint pt = random_point(o, cfg);
    PotentialTriple t = build_potentials(o, pt);
    // at the finite pole
    ExpansionSite ws = ExpansionSite::finite(pt.base.poles[0].w, 2);
    CurveBranch bw = expand_y(t.Q0, ws, 14);
    NormalizedForm tw = tau_form(t, bw, ws, 6);
    CHECK(tw.body.val() >= 0);
    // at infinity
    ExpansionSite is = ExpansionSite::infinity(2);
    CurveBranch bi = expand_y(t.Q0, is, 14);
    NormalizedForm ti = tau_form(t, bi, is, 6);
    CHECK(ti.body.val() >= 0);
    // sigma stays pole-free away from the q_I as well
    NormalizedForm sw = sigma_form(t.Q1, bw, ws, 6);
    CHECK(sw.body.val() >= 0);
}

TEST_CASE("normalized pairing recombines odd half powers exactly") {
    // two psi-like forms at a double-cover site: scale c0^1 exact
    PoleOrders o = PoleOrders::from_orders({5, 1});
    ModuliPoint mp;
    mp.poles.push_back({Scalar(0L), {Scalar(2L)}});
    ExtendedPoint pt;
    pt.base = mp;
    pt.q = {Scalar(1L)};
    pt.v = {Scalar(0L)};
    pt.eps = {1};
    RationalFunction q0 = build_Q0(o, pt.base);
    ExpansionSite site = ExpansionSite::finite(Scalar(0L), 2);
    CurveBranch b = expand_y(q0, site, 16);
    NormalizedForm psi = psi_form(b, site, 10);
    ScalarContextGuard guard;
    // Res(d^{-1} psi * psi): both carry sqrt(2); the product is exact
    Scalar val = normalized_pairing(psi, psi);
    CHECK(!scalar_context().degraded);
    CHECK(val.is_exact());
    // psi is an even series at a double cover site: its own residue vanishes
    CHECK(psi.body.residue().is_zero());
}
