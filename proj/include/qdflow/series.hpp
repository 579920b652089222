#ifndef QDFLOW_SERIES_HPP
#define QDFLOW_SERIES_HPP

#include <vector>

#include "qdflow/poly.hpp"

namespace qdflow {

// Expansion site on the x-line together with a ramification degree.
//   finite:    x = center + s^r
//   infinity:  x = s^(-r)
// r = 1 for ordinary points, r = 2 at branch points of a square root.
struct ExpansionSite {
    bool at_infinity = false;
    Scalar center = Scalar(0L);
    int r = 1;

    static ExpansionSite finite(Scalar c, int r = 1) { return {false, std::move(c), r}; }
    static ExpansionSite infinity(int r = 1) { return {true, Scalar(0L), r}; }
    std::string str() const;
};

// Truncated Laurent series in the local parameter s.  Stored coefficients
// cover exponents [val, val + size - 1]; exponents above the stored window
// but not above trunc() are exactly zero; nothing is known beyond trunc().
// trunc() == kExact marks an exactly-known Laurent polynomial.
class LocalSeries {
public:
    static constexpr long kExact = 1L << 40;

    LocalSeries() : site_(), val_(1), trunc_(0) {}
    LocalSeries(ExpansionSite site, long val, std::vector<Scalar> coeffs, long trunc);

    static LocalSeries zero(ExpansionSite site, long trunc);
    static LocalSeries monomial(ExpansionSite site, long exp, Scalar c);

    const ExpansionSite& site() const { return site_; }
    long val() const { return val_; }                // lowest stored exponent
    long trunc() const { return trunc_; }
    bool exactly_known() const { return trunc_ == kExact; }
    bool is_zero() const { return c_.empty(); }
    size_t size() const { return c_.size(); }

    Scalar coeff(long exp) const;  // throws truncation_error above trunc
    Scalar residue() const { return coeff(-1); }
    long actual_val() const;  // lowest exponent with structurally nonzero coefficient

    LocalSeries operator-() const;
    LocalSeries operator+(const LocalSeries& o) const;
    LocalSeries operator-(const LocalSeries& o) const;
    LocalSeries operator*(const LocalSeries& o) const;
    LocalSeries operator*(const Scalar& c) const;
    LocalSeries operator/(const Scalar& c) const;

    LocalSeries shift(long k) const;      // multiply by s^k
    LocalSeries truncate(long t) const;   // forget coefficients above t

    // multiplicative inverse, carried through exponent out_trunc or as far as
    // the operand's truncation allows, whichever is smaller (check trunc())
    LocalSeries inverse(long out_trunc) const;

    // square root with even value-part valuation; the branch is fixed by the
    // scalar square root of the leading coefficient (exact mode may degrade).
    // rel_order bounds the relative order carried when the operand is exactly
    // known (such roots are generally infinite series); ignored when negative.
    LocalSeries sqrt(long rel_order = -1) const;

    LocalSeries derivative() const;  // d/ds

    // term-by-term antiderivative with zero integration constant; the s^-1
    // coefficient must vanish (|.| <= residue_tol * max|coeff| for floats)
    LocalSeries antiderivative(double residue_tol = 1e-9) const;

    // Zero out leading coefficients that are float roundoff relative to the
    // next stored coefficients, separately for the value and tangent parts.
    // Pole orders can drop at special parameter values and designed top-degree
    // cancellations (e.g. 4 Q0 Q2 - Q1^2) are exact only in exact arithmetic;
    // float evaluation leaves ~eps-size junk there, which must not decide the
    // valuation or feed residue pairings where it meets the fast-growing high
    // orders.  Exact nonzero coefficients are never touched.
    LocalSeries strip_leading_noise(double rel_tol = 1e-10) const;

    bool has_jet() const;
    LocalSeries value_part() const;
    LocalSeries tangent_part() const;

    double max_abs() const;
    std::string str() const;

private:
    void normalize();
    ExpansionSite site_;
    long val_;
    std::vector<Scalar> c_;
    long trunc_;
};

// Substitute the local parameter into a polynomial: exact Laurent polynomial.
LocalSeries substitute(const Polynomial& p, const ExpansionSite& site);

// Expand a rational function at a site, valid through exponent `order`.
LocalSeries puiseux_expand(const RationalFunction& f, const ExpansionSite& site, long order);

// Series of dx/ds at a site (exact Laurent monomial).
LocalSeries dx_factor(const ExpansionSite& site);

// A meromorphic one-form w(s) ds in the local parameter at a site.
struct LocalOneForm {
    LocalSeries w;  // coefficient of ds

    static LocalOneForm from_function(const RationalFunction& f, const ExpansionSite& site,
                                      long order);
    Scalar residue() const { return w.residue(); }
    // d^{-1} of the form: a LocalSeries with integration constant 0
    LocalSeries antiderivative(double residue_tol = 1e-9) const {
        return w.antiderivative(residue_tol);
    }
};

// Res( d^{-1}(a) * b ) — the bilinear pairing used by all residue formulas.
// `a` must have (numerically) vanishing residue.
Scalar pairing_residue(const LocalOneForm& a, const LocalOneForm& b, double residue_tol = 1e-9);

}  // namespace qdflow

#endif
