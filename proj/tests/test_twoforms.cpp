#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>

#include "qdflow/twoforms.hpp"

using namespace qdflow;

namespace {

const PoleOrders kCubic = PoleOrders::from_orders({7});

ExtendedPoint cubic_point(long q, long v, int eps) {
    ExtendedPoint pt;
    pt.base.a_inf = {Scalar(1L), Scalar(0L)};
    pt.q = {Scalar(q)};
    pt.v = {Scalar(v)};
    pt.eps = {eps};
    return pt;
}

Scalar imag_unit() { return Scalar(GaussianRational(mpq_class(0), mpq_class(1))); }

ExtendedPoint sample(const PoleOrders& o, unsigned long seed) {
    SampleConfig cfg;
    cfg.seed = seed;
    return random_point(o, cfg);
}

bool entries_exact(const Matrix& m) {
    for (size_t j = 0; j < m.rows(); ++j)
        for (size_t k = 0; k < m.cols(); ++k)
            if (!m.at(j, k).is_exact()) return false;
    return true;
}

bool equal_exactly(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (size_t j = 0; j < a.rows(); ++j)
        for (size_t k = 0; k < a.cols(); ++k)
            if (!(a.at(j, k) - b.at(j, k)).is_zero()) return false;
    return true;
}

bool antisymmetric_exactly(const Matrix& m) {
    for (size_t j = 0; j < m.rows(); ++j)
        for (size_t k = 0; k < m.cols(); ++k)
            if (!(m.at(j, k) + m.at(k, j)).is_zero()) return false;
    return true;
}

}  // namespace

TEST_CASE("derivatives of the curve form have vanishing residues at every site") {
    ExtendedPoint pt = cubic_point(2, 5, 1);
    CoordinateLayout layout(kCubic);
    for (const SiteInfo& si : full_sites(kCubic, pt)) {
        for (int j = 0; j < layout.total_dim(); ++j) {
            NormalizedForm f = direct_one_form(kCubic, pt, Scalar(1L),
                                               [&] {
                                                   std::vector<Scalar> e(
                                                       static_cast<size_t>(layout.total_dim()),
                                                       Scalar(0L));
                                                   e[static_cast<size_t>(j)] = Scalar(1L);
                                                   return e;
                                               }(),
                                               si.site, si.order);
            CHECK(f.body.residue().is_zero());
        }
    }
}

TEST_CASE("the full residue matrix is exact and antisymmetric") {
    ExtendedPoint pt = cubic_point(2, 5, 1);
    for (const Scalar& h : {Scalar(2L), imag_unit()}) {
        Matrix om = omega_direct(kCubic, pt, h);
        CHECK(om.rows() == 4);
        CHECK(entries_exact(om));
        CHECK(antisymmetric_exactly(om));
    }
}

TEST_CASE("the flow generators span the kernel of the 2-form") {
    ExtendedPoint pt = cubic_point(2, 5, 1);
    KernelReport rep = kernel_check(kCubic, pt, Scalar(2L));
    CHECK(rep.exact_zero);
    CHECK(rep.max_residual == 0.0);
    CHECK(rep.kernel_dim == 2);

    PoleOrders o = PoleOrders::from_orders({5, 1});
    ExtendedPoint sp = sample(o, 4);
    KernelReport rep2 = kernel_check(o, sp, imag_unit());
    CHECK(rep2.exact_zero);
    CHECK(rep2.kernel_dim == 2 * o.n());

    // sensitivity: a perturbed generator is no longer annihilated
    Matrix om = omega_direct(o, sp, imag_unit());
    std::vector<Scalar> L = main_flows(o, sp)[0].at(imag_unit());
    L[0] = L[0] + Scalar(std::complex<double>(1e-3, 0.0));
    double worst = 0.0;
    for (const Scalar& c : om.apply(L)) worst = std::max(worst, c.abs());
    CHECK(worst > 1e-4 * om.max_abs());
}

TEST_CASE("the hbar fit has exactly three terms and matches the residue parts") {
    std::vector<Scalar> samples = {Scalar(1L),           Scalar(2L), Scalar(3L),
                                   Scalar::exact(1, 2), imag_unit(), Scalar(5L)};

    ExtendedPoint pt = cubic_point(2, 5, 1);
    DecomposeReport rep = omega_decompose(kCubic, pt, samples);
    CHECK(rep.h3_max == 0.0);
    CHECK(rep.h1_max == 0.0);
    CHECK(rep.fit_residual == 0.0);
    TwoFormParts parts = omega_parts_residue(kCubic, pt);
    CHECK(equal_exactly(rep.minus, parts.minus));
    CHECK(equal_exactly(rep.mid, parts.mid));
    CHECK(equal_exactly(rep.plus, parts.plus));

    PoleOrders o = PoleOrders::from_orders({5, 1});
    ExtendedPoint sp = sample(o, 4);
    DecomposeReport rep2 = omega_decompose(o, sp, samples);
    CHECK(rep2.h3_max == 0.0);
    CHECK(rep2.h1_max == 0.0);
    TwoFormParts parts2 = omega_parts_residue(o, sp);
    CHECK(equal_exactly(rep2.minus, parts2.minus));
    CHECK(equal_exactly(rep2.mid, parts2.mid));
    CHECK(equal_exactly(rep2.plus, parts2.plus));

    CHECK_THROWS_AS(
        omega_decompose(kCubic, pt, {Scalar(1L), Scalar(2L), Scalar(3L), Scalar(4L)}),
        invalid_point_error);
}

TEST_CASE("block structure of the residue parts over base and fibre") {
    PoleOrders o = PoleOrders::from_orders({5, 1});
    ExtendedPoint sp = sample(o, 4);
    CoordinateLayout layout(o);
    int bdim = layout.base_dim();
    int dim = layout.total_dim();
    int n = o.n();
    TwoFormParts parts = omega_parts_residue(o, sp);

    // the hbar^-2 part only sees the base coordinates ...
    for (int j = bdim; j < dim; ++j)
        for (int k = 0; k < dim; ++k)
            CHECK(parts.minus.at(static_cast<size_t>(j), static_cast<size_t>(k)).is_zero());
    // ... and restricts to the 2-form on the space of potentials
    Matrix om = omega_M(o, sp.base);
    for (int j = 0; j < bdim; ++j)
        for (int k = 0; k < bdim; ++k)
            CHECK((om.at(static_cast<size_t>(j), static_cast<size_t>(k)) -
                   parts.minus.at(static_cast<size_t>(j), static_cast<size_t>(k)))
                      .is_zero());

    // the fibre-fibre block of the hbar^0 part is exactly sum dv_I ^ dq_I
    for (int I = 0; I < n; ++I)
        for (int J = 0; J < n; ++J) {
            size_t qi = static_cast<size_t>(layout.q_index(I));
            size_t vj = static_cast<size_t>(layout.v_index(J));
            Scalar expect(I == J ? 1L : 0L);
            CHECK((parts.plus.at(vj, qi) - expect).is_zero());
            CHECK((parts.plus.at(qi, vj) + expect).is_zero());
            CHECK(parts.plus
                      .at(static_cast<size_t>(layout.q_index(I)),
                          static_cast<size_t>(layout.q_index(J)))
                      .is_zero());
            CHECK(parts.plus
                      .at(static_cast<size_t>(layout.v_index(I)),
                          static_cast<size_t>(layout.v_index(J)))
                      .is_zero());
        }
}

TEST_CASE("base 2-form: concrete antidiagonal entries and zero pattern") {
    // Q0 = x^3 + a1 x + a0: the only site is infinity and the pairing
    // residue of the a0/a1 directions is exactly 1
    ModuliPoint cubic;
    cubic.a_inf = {Scalar(7L), Scalar(3L)};
    Matrix om = omega_M(kCubic, cubic);
    CHECK((om.at(0, 1) - Scalar(1L)).is_zero());
    CHECK((om.at(1, 0) + Scalar(1L)).is_zero());
    OmegaPatternReport pr = check_omega_pattern(kCubic, om);
    CHECK(pr.ok());

    // Q0 = x + a1/(x-w): the w-site residue of the (a1, w) pairing is
    // exactly 1 and the infinity site contributes nothing
    PoleOrders o51 = PoleOrders::from_orders({5, 1});
    ModuliPoint mp;
    mp.poles.push_back({Scalar(3L), {Scalar(5L)}});
    Matrix om51 = omega_M(o51, mp);
    CHECK((om51.at(1, 0) - Scalar(1L)).is_zero());  // slots: w=0, a1=1
    CHECK(check_omega_pattern(o51, om51).ok());

    PoleOrders o53 = PoleOrders::from_orders({5, 3});
    ExtendedPoint sp = sample(o53, 6);
    Matrix om53 = omega_M(o53, sp.base);
    OmegaPatternReport pr53 = check_omega_pattern(o53, om53);
    CHECK(pr53.cross_block_zero);
    CHECK(pr53.triangular_zero);
    CHECK(pr53.antidiagonal_nonzero);
    CHECK(pr53.invertible);
}

TEST_CASE("flipping the branch signs negates exactly the middle part") {
    PoleOrders o = PoleOrders::from_orders({5, 1});
    ExtendedPoint sp = sample(o, 4);
    ExtendedPoint flipped = sp;
    for (int& e : flipped.eps) e = -e;

    TwoFormParts a = omega_parts_residue(o, sp);
    TwoFormParts b = omega_parts_residue(o, flipped);
    CHECK(equal_exactly(a.minus, b.minus));
    CHECK(equal_exactly(a.plus, b.plus));
    size_t dim = a.mid.rows();
    Matrix neg(dim, dim);
    for (size_t j = 0; j < dim; ++j)
        for (size_t k = 0; k < dim; ++k) neg.at(j, k) = -b.mid.at(j, k);
    CHECK(equal_exactly(a.mid, neg));
}

TEST_CASE("coordinate scaling acts on the three parts with weights 2, 1, 0") {
    ExtendedPoint pt = cubic_point(2, 5, 1);
    for (double lambda : {1.1, 2.0}) {
        HomothetyReport rep = homothety_check(kCubic, pt, lambda);
        CHECK(rep.res_minus < 1e-8);
        CHECK(rep.res_mid < 1e-8);
        CHECK(rep.res_plus < 1e-8);
    }
    PoleOrders o = PoleOrders::from_orders({5, 1});
    ExtendedPoint sp = sample(o, 4);
    HomothetyReport rep = homothety_check(o, sp, 2.0);
    CHECK(rep.res_minus < 1e-8);
    CHECK(rep.res_mid < 1e-8);
    CHECK(rep.res_plus < 1e-8);
}

TEST_CASE("weighted Euler field satisfies the scaling identity exactly") {
    const std::vector<std::vector<int>> families = {{7}, {5, 1}, {9}, {5, 3}, {7, 1}};
    for (const auto& fam : families) {
        PoleOrders o = PoleOrders::from_orders(fam);
        ExtendedPoint sp = sample(o, 2);
        FlatnessReport rep = euler_identity(o, sp, Scalar(2L));
        CHECK(rep.exact_zero);
    }
    FlatnessReport rep = euler_identity(kCubic, cubic_point(2, 5, 1), imag_unit());
    CHECK(rep.exact_zero);
}

TEST_CASE("contour quadrature reproduces the residue pairings") {
    ExtendedPoint pt = cubic_point(2, 5, 1);
    CoordinateLayout layout(kCubic);
    int dim = layout.total_dim();
    Scalar h(1L);

    // Q = x^3 + 56 + 8/(x-2) + 3/(4 (x-2)^2): zeros lie within |x| < 4 and
    // the nearest one to the apparent singularity at x = 2 is ~0.094 away
    struct Probe {
        ExpansionSite site;
        double radius;
        int mult;
        long order;
    };
    std::vector<Probe> probes = {{ExpansionSite::infinity(2), 0.1, 1, 36},
                                 {ExpansionSite::finite(Scalar(2L), 1), 0.04, 2, 32}};

    Matrix assembled(static_cast<size_t>(dim), static_cast<size_t>(dim));
    int compared = 0;
    for (const Probe& pr : probes) {
        std::vector<NormalizedForm> f;
        std::vector<std::vector<Scalar>> dirs;
        for (int j = 0; j < dim; ++j) {
            std::vector<Scalar> e(static_cast<size_t>(dim), Scalar(0L));
            e[static_cast<size_t>(j)] = Scalar(1L);
            f.push_back(direct_one_form(kCubic, pt, h, e, pr.site, pr.order));
            dirs.push_back(e);
        }
        for (int j = 0; j < dim; ++j)
            for (int k = j + 1; k < dim; ++k) {
                Scalar series = normalized_pairing(f[static_cast<size_t>(j)],
                                                   f[static_cast<size_t>(k)]);
                Scalar quad = contour_oracle(kCubic, pt, h, dirs[static_cast<size_t>(j)],
                                             dirs[static_cast<size_t>(k)], pr.site, pr.radius);
                double mag = std::max(1.0, series.abs());
                CHECK((series - quad).abs() < 1e-8 * mag);
                ++compared;
                Scalar contrib = quad * Scalar(static_cast<long>(pr.mult));
                size_t ju = static_cast<size_t>(j), ku = static_cast<size_t>(k);
                assembled.at(ju, ku) = assembled.at(ju, ku) + contrib;
                assembled.at(ku, ju) = assembled.at(ku, ju) - contrib;
            }
    }
    CHECK(compared >= 10);

    Matrix om = omega_direct(kCubic, pt, h);
    for (size_t j = 0; j < om.rows(); ++j)
        for (size_t k = 0; k < om.cols(); ++k)
            CHECK((om.at(j, k) - assembled.at(j, k)).abs() <
                  1e-8 * std::max(1.0, om.max_abs()));
}

TEST_CASE("finite-difference closure of the parts and the base form") {
    ExtendedPoint pt = cubic_point(2, 5, 1);
    CHECK(closure_check(kCubic, pt, PartSelector::Minus) < 1e-6);
    CHECK(closure_check(kCubic, pt, PartSelector::Mid) < 1e-6);
    CHECK(closure_check(kCubic, pt, PartSelector::Plus) < 1e-6);

    PoleOrders o = PoleOrders::from_orders({5, 3});
    ExtendedPoint sp = sample(o, 6);
    CHECK(closure_check_base(o, sp.base) < 1e-6);
}
