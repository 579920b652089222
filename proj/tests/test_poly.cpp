#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qdflow/poly.hpp"

using namespace qdflow;

namespace {
Polynomial P(std::initializer_list<long> ascending) {
    std::vector<Scalar> c;
    for (long v : ascending) c.emplace_back(v);
    return Polynomial(std::move(c));
}
}  // namespace

TEST_CASE("basic arithmetic and degree bookkeeping") {
    Polynomial f = P({1, 2, 3});  // 3x^2+2x+1
    Polynomial g = P({-1, 1});    // x-1
    CHECK(f.degree() == 2);
    CHECK((f + g).coeff(0) == Scalar(0L));
    CHECK((f * g).degree() == 3);
    CHECK((f - f).is_zero());
    CHECK((f - f).degree() == -1);
    CHECK(f.eval(Scalar(2L)) == Scalar(17L));
    CHECK(Polynomial::x().eval(Scalar(5L)) == Scalar(5L));
}

TEST_CASE("from_roots and evaluation") {
    Polynomial f = Polynomial::from_roots({Scalar(1L), Scalar(2L), Scalar(3L)});
    CHECK(f.degree() == 3);
    CHECK(f.leading() == Scalar(1L));
    CHECK(f.eval(Scalar(1L)).is_zero());
    CHECK(f.eval(Scalar(2L)).is_zero());
    CHECK(f.eval(Scalar(0L)) == Scalar(-6L));
}

TEST_CASE("derivative") {
    Polynomial f = P({5, 0, 0, 2});  // 2x^3+5
    Polynomial d = f.derivative();
    CHECK(d.degree() == 2);
    CHECK(d.coeff(2) == Scalar(6L));
    CHECK(d.coeff(0) == Scalar(0L));
}

TEST_CASE("taylor shift") {
    // (x)^2 shifted by c: (y+c)^2 = y^2 + 2cy + c^2
    Polynomial f = P({0, 0, 1});
    Polynomial s = f.taylor_shift(Scalar(3L));
    CHECK(s.coeff(0) == Scalar(9L));
    CHECK(s.coeff(1) == Scalar(6L));
    CHECK(s.coeff(2) == Scalar(1L));
    // shift by 0 is identity
    Polynomial t = f.taylor_shift(Scalar(0L));
    CHECK(t.coeff(2) == Scalar(1L));
    CHECK(t.coeff(0).is_zero());
    // eval consistency: f(c + u) = shift(f, c)(u)
    Polynomial g = P({7, -2, 0, 1});
    Scalar c = Scalar::exact(1, 2), u = Scalar::exact(-2, 3);
    CHECK(g.taylor_shift(c).eval(u) == g.eval(c + u));
}

TEST_CASE("divrem is exact euclidean division") {
    Polynomial a = P({-1, 0, 0, 1});  // x^3-1
    Polynomial b = P({-1, 1});        // x-1
    Polynomial q, r;
    Polynomial::divrem(a, b, q, r);
    CHECK(r.is_zero());
    CHECK(q.degree() == 2);
    CHECK((q * b - a).is_zero());

    Polynomial a2 = P({1, 1, 1});
    Polynomial b2 = P({3, 2});
    Polynomial::divrem(a2, b2, q, r);
    CHECK((q * b2 + r - a2).is_zero());
    CHECK(r.degree() < b2.degree());
}

TEST_CASE("gcd of exact polynomials is monic") {
    Polynomial f = P({-1, 0, 1});            // (x-1)(x+1)
    Polynomial g = P({-2, 1}) * P({-1, 1});  // (x-2)(x-1)
    Polynomial d = Polynomial::gcd(f, g);
    CHECK(d.degree() == 1);
    CHECK(d.leading() == Scalar(1L));
    CHECK(d.coeff(0) == Scalar(-1L));
    CHECK(Polynomial::gcd(f, P({1})).degree() == 0);
}

TEST_CASE("resultant and discriminant known values") {
    // disc(x^2 + bx + c) = b^2 - 4c
    Polynomial f = P({7, 3, 1});
    CHECK(Polynomial::discriminant(f) == Scalar(9L - 28L));
    // disc(x^3 + px + q) = -4p^3 - 27 q^2
    Polynomial g = P({2, -5, 0, 1});
    CHECK(Polynomial::discriminant(g) == Scalar(4L * 125L - 27L * 4L));
    // res(x-a, x-b) = b - a ... with sign convention res = prod (a_i - b_j)
    Polynomial xa = P({-2, 1}), xb = P({-7, 1});
    Scalar r = Polynomial::resultant(xa, xb);
    CHECK((r == Scalar(5L) || r == Scalar(-5L)));
    // multiplicative in the first argument
    Polynomial h = P({1, 4, 1});
    CHECK(Polynomial::resultant(xa * xb, h) ==
          Polynomial::resultant(xa, h) * Polynomial::resultant(xb, h));
    // discriminant of a polynomial with a double root vanishes
    Polynomial dbl = P({-1, 1}) * P({-1, 1}) * P({3, 1});
    CHECK(Polynomial::discriminant(dbl).is_zero());
}

TEST_CASE("resultant equals product of root differences") {
    // f = (x-1)(x-2), g = (x-3)(x-4): res(f,g) = prod (ri - sj) = (-2)(-3)(-1)(-2) = 12
    Polynomial f = Polynomial::from_roots({Scalar(1L), Scalar(2L)});
    Polynomial g = Polynomial::from_roots({Scalar(3L), Scalar(4L)});
    CHECK(Polynomial::resultant(f, g) == Scalar(12L));
}

TEST_CASE("jet coefficients propagate through arithmetic") {
    // f = x^2 + (3+e) x : derivative of f(5) wrt e is 5
    Polynomial f(std::vector<Scalar>{Scalar(0L), Scalar(3L).with_tangent(Scalar(1L)), Scalar(1L)});
    Scalar v = f.eval(Scalar(5L));
    CHECK(v.value() == Scalar(40L));
    CHECK(v.tangent() == Scalar(5L));
    CHECK(f.has_jet());
    CHECK(f.value_part().coeff(1) == Scalar(3L));
    CHECK(f.tangent_part().coeff(1) == Scalar(1L));
    CHECK(f.tangent_part().coeff(2).is_zero());
}

TEST_CASE("rational function normalization cancels common factors") {
    Polynomial n = P({-1, 0, 1});  // x^2-1
    Polynomial d = P({-1, 1});     // x-1
    RationalFunction f(n, d);
    CHECK(f.den().degree() == 0);
    CHECK(f.num().degree() == 1);
    CHECK(f.eval(Scalar(4L)) == Scalar(5L));
}

TEST_CASE("rational arithmetic and derivative") {
    RationalFunction x = RationalFunction::x();
    RationalFunction one = RationalFunction::constant(Scalar(1L));
    RationalFunction f = one / x;  // 1/x
    RationalFunction df = f.derivative();
    // d(1/x) = -1/x^2
    CHECK(RationalFunction::equal_exact(df, -(one / (x * x))));
    RationalFunction g = f + x;  // (1+x^2)/x
    CHECK(g.eval(Scalar(2L)) == Scalar::exact(5, 2));
    CHECK_THROWS_AS(f.eval(Scalar(0L)), invalid_point_error);
}

TEST_CASE("diff_norm detects equality and difference") {
    RationalFunction x = RationalFunction::x();
    RationalFunction a = (x * x - RationalFunction::constant(Scalar(1L))) /
                         (x - RationalFunction::constant(Scalar(1L)));
    RationalFunction b = x + RationalFunction::constant(Scalar(1L));
    CHECK(RationalFunction::diff_norm(a, b) == 0.0);
    CHECK(RationalFunction::equal_exact(a, b));
    RationalFunction c = x + RationalFunction::constant(Scalar(2L));
    CHECK(RationalFunction::diff_norm(a, c) > 0.1);
    CHECK(!RationalFunction::equal_exact(a, c));
}

TEST_CASE("rational functions with jets keep tangent data") {
    // f = 1/(x - (2+e)); df/de at x=0 is 1/(x-2)^2 -> 1/4
    Polynomial den(std::vector<Scalar>{-Scalar(2L).with_tangent(Scalar(1L)), Scalar(1L)});
    RationalFunction f(Polynomial(Scalar(1L)), den);
    Scalar v = f.eval(Scalar(0L));
    CHECK(v.value() == Scalar::exact(-1, 2));
    CHECK(v.tangent() == Scalar::exact(1, 4));
    RationalFunction ft = f.tangent_part();
    CHECK(ft.eval(Scalar(0L)) == Scalar::exact(1, 4));
}
