#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "qdflow/metric.hpp"

using namespace qdflow;
using cd = std::complex<double>;

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

ExtendedPoint sample(const PoleOrders& o, unsigned long seed) {
    SampleConfig cfg;
    cfg.seed = seed;
    return random_point(o, cfg);
}

Scalar imag_unit() { return Scalar(GaussianRational(mpq_class(0), mpq_class(1))); }

bool equal_exactly(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (size_t j = 0; j < a.rows(); ++j)
        for (size_t k = 0; k < a.cols(); ++k)
            if (!(a.at(j, k) - b.at(j, k)).is_zero()) return false;
    return true;
}

Matrix negated(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    for (size_t j = 0; j < m.rows(); ++j)
        for (size_t k = 0; k < m.cols(); ++k) out.at(j, k) = -m.at(j, k);
    return out;
}

Scalar pow2(long t) {
    if (t >= 0) return Scalar(GaussianRational(mpq_class(mpz_class(1) << t)));
    return Scalar(GaussianRational(mpq_class(mpz_class(1), mpz_class(1) << (-t))));
}

}  // namespace

TEST_CASE("quaternion frame satisfies the defining relations exactly") {
    for (const auto& [o, pt] : {std::pair<PoleOrders, ExtendedPoint>{kCubic, cubic_point(2, 5, 1)},
                                {PoleOrders::from_orders({5, 1}), sample(PoleOrders::from_orders({5, 1}), 3)}}) {
        QuaternionFrame fr = build_frame(o, pt);
        FrameReport rep = frame_relations(fr);
        CHECK(rep.exact_zero);
        CHECK(rep.max_residual == 0.0);

        // I has eigenvalues -i and +i, each with half-dimensional eigenspace
        size_t dim = fr.I.rows();
        Matrix shift_p = fr.I - Matrix::identity(dim) * imag_unit();
        Matrix shift_m = fr.I + Matrix::identity(dim) * imag_unit();
        CHECK(shift_p.rank() == dim / 2);
        CHECK(shift_m.rank() == dim / 2);
    }
}

TEST_CASE("metric identities hold exactly at exact points") {
    for (const auto& [o, pt] : {std::pair<PoleOrders, ExtendedPoint>{kCubic, cubic_point(2, 5, 1)},
                                {PoleOrders::from_orders({5, 1}), sample(PoleOrders::from_orders({5, 1}), 3)},
                                {PoleOrders::from_orders({5, 3}), sample(PoleOrders::from_orders({5, 3}), 6)}}) {
        MetricReport rep = metric_identities(o, pt);
        CHECK(rep.exact_zero);
        CHECK(rep.worst() == 0.0);
        CHECK(!rep.det_g.is_zero());
    }
}

TEST_CASE("metric identities hold in float mode") {
    PoleOrders o = PoleOrders::from_orders({7, 1});
    ExtendedPoint pt = point_to_kind(o, sample(o, 2), NumKind::F64);
    MetricReport rep = metric_identities(o, pt);
    CHECK(rep.worst() < 1e-8);
    CHECK(rep.det_g.abs() > 1e-12);
}

TEST_CASE("annihilator identity is sensitive to the frame pairing") {
    ExtendedPoint pt = cubic_point(2, 5, 1);
    TwoFormParts parts = omega_parts_residue(kCubic, pt);
    QuaternionFrame fr = build_frame(kCubic, pt);
    Matrix omega_I = parts.mid * (-imag_unit());

    // replace V_1 by an unrelated vector: Omega_-(U_1,.) + i Omega_I(V,.)
    // must no longer cancel
    std::vector<Scalar> v = {Scalar(1L), Scalar(-2L), Scalar(3L), Scalar(1L)};
    std::vector<Scalar> r1 = parts.minus.transpose().apply(fr.u_basis[0]);
    std::vector<Scalar> r2 = omega_I.transpose().apply(v);
    double res = 0.0;
    for (size_t k = 0; k < r1.size(); ++k)
        res = std::max(res, (r1[k] + imag_unit() * r2[k]).abs());
    CHECK(res > 1e-4);
}

TEST_CASE("branch-sign flip fixes I and negates J, K and the metric") {
    PoleOrders o = PoleOrders::from_orders({5, 1});
    ExtendedPoint pt = sample(o, 4);
    ExtendedPoint flipped = pt;
    for (int& e : flipped.eps) e = -e;

    QuaternionFrame fa = build_frame(o, pt), fb = build_frame(o, flipped);
    CHECK(equal_exactly(fa.I, fb.I));
    CHECK(equal_exactly(fa.J, negated(fb.J)));
    CHECK(equal_exactly(fa.K, negated(fb.K)));
    CHECK(equal_exactly(metric_at(o, pt), negated(metric_at(o, flipped))));
}

TEST_CASE("coordinate scaling acts on the metric with weight one") {
    // lambda = 8 with {5,1} weights (denominator 3) keeps every factor an
    // exact power of two: g at the scaled point, pulled back, is 8 g.
    PoleOrders o = PoleOrders::from_orders({5, 1});
    ExtendedPoint pt = sample(o, 4);
    CoordinateLayout layout(o);
    int dim = layout.total_dim();
    std::vector<Scalar> w = coordinate_weights(o);

    ExtendedPoint sp = pt;
    std::vector<long> t(static_cast<size_t>(dim));
    for (int j = 0; j < dim; ++j) {
        mpq_class three_w = w[static_cast<size_t>(j)].exact_value().re * 3;
        REQUIRE(three_w.get_den() == 1);
        t[static_cast<size_t>(j)] = three_w.get_num().get_si();
        layout.set(sp, j, layout.get(pt, j) * pow2(t[static_cast<size_t>(j)]));
    }
    Matrix g = metric_at(o, pt), gs = metric_at(o, sp);
    for (int j = 0; j < dim; ++j)
        for (int k = 0; k < dim; ++k) {
            size_t ju = static_cast<size_t>(j), ku = static_cast<size_t>(k);
            Scalar lhs = gs.at(ju, ku) * pow2(t[ju] + t[ku]);
            Scalar rhs = g.at(ju, ku) * Scalar(8L);
            CHECK((lhs - rhs).is_zero());
        }
}

TEST_CASE("numerical Ricci: flat and curved reference metrics") {
    // constant metric: exactly flat
    MetricField flat = [](const std::vector<cd>&) {
        Matrix g(2, 2);
        g.at(0, 0) = Scalar(cd(2, 0));
        g.at(0, 1) = g.at(1, 0) = Scalar(cd(0.5, 0.25));
        g.at(1, 1) = Scalar(cd(3, 1));
        return g;
    };
    CHECK(ricci_numeric(flat, {cd(0.3, 0), cd(-0.2, 0.1)}, 1e-4).max_abs() < 1e-12);

    // polar-type coordinates: curvilinear but flat
    MetricField polar = [](const std::vector<cd>& x) {
        Matrix g(2, 2);
        g.at(0, 0) = Scalar(cd(1, 0));
        g.at(1, 1) = Scalar(x[0] * x[0]);
        return g;
    };
    CHECK(ricci_numeric(polar, {cd(1.3, 0.2), cd(0.4, 0)}, 1e-4).max_abs() < 1e-8);

    // round sphere g = diag(1, sin^2 x0): Ric = g exactly
    MetricField sphere = [](const std::vector<cd>& x) {
        Matrix g(2, 2);
        g.at(0, 0) = Scalar(cd(1, 0));
        cd s = std::sin(x[0]);
        g.at(1, 1) = Scalar(s * s);
        return g;
    };
    std::vector<cd> base = {cd(0.7, 0.2), cd(0.3, 0)};
    auto err = [&](double h) {
        Matrix ric = ricci_numeric(sphere, base, h);
        return (ric - sphere(base)).max_abs();
    };
    CHECK(err(1e-4) < 1e-5);
    // the nested central differences are second order in the step
    double e1 = err(2e-3), e2 = err(1e-3);
    CHECK(e1 / e2 > 2.5);
    CHECK(e1 / e2 < 6.0);
}

TEST_CASE("the assembled hyper-Kahler metric is Ricci-flat") {
    ExtendedPoint pt = point_to_kind(kCubic, cubic_point(2, 5, 1), NumKind::F64);
    CoordinateLayout layout(kCubic);
    int dim = layout.total_dim();

    MetricField field = [&](const std::vector<cd>& x) {
        ExtendedPoint q = pt;
        for (int j = 0; j < dim; ++j)
            layout.set(q, j, Scalar(x[static_cast<size_t>(j)]));
        return metric_at(kCubic, q);
    };
    std::vector<cd> base;
    for (int j = 0; j < dim; ++j) base.push_back(layout.get(pt, j).to_c64());
    Matrix ric = ricci_numeric(field, base, 1e-4);
    double scale = std::max(1.0, metric_at(kCubic, pt).max_abs());
    CHECK(ric.max_abs() / scale < 1e-4);
}
