#ifndef QDFLOW_POLY_HPP
#define QDFLOW_POLY_HPP

#include <vector>

#include "qdflow/scalar.hpp"

namespace qdflow {

// Dense univariate polynomial, coefficients ascending.  Zero polynomial has
// empty coefficient vector and degree() == -1.  Coefficients may carry jets;
// trimming removes only structurally zero scalars (value and tangent).
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(Scalar c);
    explicit Polynomial(std::vector<Scalar> coeffs);

    static Polynomial x();                        // the monomial x
    static Polynomial monomial(int k, Scalar c);  // c * x^k
    static Polynomial from_roots(const std::vector<Scalar>& roots);

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const Scalar& operator[](size_t k) const { return c_[k]; }
    const std::vector<Scalar>& coeffs() const { return c_; }
    Scalar coeff(int k) const;  // 0 outside range
    Scalar leading() const;
    bool has_jet() const;

    Polynomial operator-() const;
    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator*(const Scalar& s) const;
    Polynomial operator/(const Scalar& s) const;

    Polynomial derivative() const;
    Scalar eval(const Scalar& x) const;
    Polynomial taylor_shift(const Scalar& c) const;  // P(x) -> P(y + c) in y
    Polynomial pow(int e) const;

    // euclidean division; divisor leading coefficient must be invertible
    static void divrem(const Polynomial& a, const Polynomial& b, Polynomial& q, Polynomial& r);

    // exact-mode, jet-free monic gcd
    static Polynomial gcd(const Polynomial& a, const Polynomial& b);

    static Scalar resultant(const Polynomial& a, const Polynomial& b);
    static Scalar discriminant(const Polynomial& p);

    Polynomial value_part() const;
    Polynomial tangent_part() const;

    double max_abs() const;  // largest coefficient magnitude (0 for zero poly)
    std::string str() const;

private:
    void trim();
    std::vector<Scalar> c_;
};

// Quotient of polynomials.  normalize() reduces by the gcd and makes the
// denominator monic in exact jet-free arithmetic; with jets or floats it
// only scales the denominator monic (gcd over dual numbers is not defined,
// and float gcd is numerically meaningless).
class RationalFunction {
public:
    RationalFunction() : num_(), den_(Scalar(1L)) {}
    explicit RationalFunction(Polynomial num);
    RationalFunction(Polynomial num, Polynomial den);

    static RationalFunction constant(Scalar c);
    static RationalFunction x();

    const Polynomial& num() const { return num_; }
    const Polynomial& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_polynomial() const { return den_.degree() == 0; }

    RationalFunction operator-() const;
    RationalFunction operator+(const RationalFunction& o) const;
    RationalFunction operator-(const RationalFunction& o) const;
    RationalFunction operator*(const RationalFunction& o) const;
    RationalFunction operator/(const RationalFunction& o) const;
    RationalFunction operator*(const Scalar& s) const;
    RationalFunction operator/(const Scalar& s) const;

    RationalFunction derivative() const;
    Scalar eval(const Scalar& x) const;  // throws invalid_point_error at a pole

    RationalFunction value_part() const;
    RationalFunction tangent_part() const;  // d/de of (N+eN1)/(D+eD1)

    // max-norm of the cross-multiplied difference, scaled by the larger side;
    // exact equality test when both sides are exact
    static double diff_norm(const RationalFunction& f, const RationalFunction& g);
    static bool equal_exact(const RationalFunction& f, const RationalFunction& g);

    std::string str() const;

private:
    void normalize();
    Polynomial num_, den_;
};

}  // namespace qdflow

#endif
