#include "qdflow/poly.hpp"

#include <algorithm>

namespace qdflow {

// ---------------------------------------------------------------------------
// Polynomial
// ---------------------------------------------------------------------------

Polynomial::Polynomial(Scalar c) {
    if (!c.is_zero()) c_.push_back(std::move(c));
}

Polynomial::Polynomial(std::vector<Scalar> coeffs) : c_(std::move(coeffs)) { trim(); }

void Polynomial::trim() {
    while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
}

Polynomial Polynomial::x() { return monomial(1, Scalar(1L)); }

Polynomial Polynomial::monomial(int k, Scalar c) {
    if (c.is_zero()) return Polynomial();
    std::vector<Scalar> v(static_cast<size_t>(k) + 1, Scalar(0L));
    v[static_cast<size_t>(k)] = std::move(c);
    return Polynomial(std::move(v));
}

Polynomial Polynomial::from_roots(const std::vector<Scalar>& roots) {
    Polynomial p(Scalar(1L));
    for (const Scalar& r : roots)
        p = p * Polynomial({-r, Scalar(1L)});
    return p;
}

Scalar Polynomial::coeff(int k) const {
    if (k < 0 || k > degree()) return Scalar(0L);
    return c_[static_cast<size_t>(k)];
}

Scalar Polynomial::leading() const {
    if (is_zero()) return Scalar(0L);
    return c_.back();
}

bool Polynomial::has_jet() const {
    for (const Scalar& c : c_)
        if (c.has_jet()) return true;
    return false;
}

Polynomial Polynomial::operator-() const {
    std::vector<Scalar> v;
    v.reserve(c_.size());
    for (const Scalar& c : c_) v.push_back(-c);
    return Polynomial(std::move(v));
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    std::vector<Scalar> v(std::max(c_.size(), o.c_.size()), Scalar(0L));
    for (size_t i = 0; i < c_.size(); ++i) v[i] = c_[i];
    for (size_t i = 0; i < o.c_.size(); ++i) v[i] += o.c_[i];
    return Polynomial(std::move(v));
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (-o); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
    if (is_zero() || o.is_zero()) return Polynomial();
    std::vector<Scalar> v(c_.size() + o.c_.size() - 1, Scalar(0L));
    for (size_t i = 0; i < c_.size(); ++i)
        for (size_t j = 0; j < o.c_.size(); ++j)
            v[i + j] += c_[i] * o.c_[j];
    return Polynomial(std::move(v));
}

Polynomial Polynomial::operator*(const Scalar& s) const {
    std::vector<Scalar> v;
    v.reserve(c_.size());
    for (const Scalar& c : c_) v.push_back(c * s);
    return Polynomial(std::move(v));
}

Polynomial Polynomial::operator/(const Scalar& s) const {
    std::vector<Scalar> v;
    v.reserve(c_.size());
    for (const Scalar& c : c_) v.push_back(c / s);
    return Polynomial(std::move(v));
}

Polynomial Polynomial::derivative() const {
    if (degree() < 1) return Polynomial();
    std::vector<Scalar> v;
    v.reserve(c_.size() - 1);
    for (size_t k = 1; k < c_.size(); ++k) v.push_back(c_[k] * Scalar(static_cast<long>(k)));
    return Polynomial(std::move(v));
}

Scalar Polynomial::eval(const Scalar& x) const {
    Scalar acc(0L);
    for (size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
    return acc;
}

Polynomial Polynomial::taylor_shift(const Scalar& c) const {
    if (is_zero()) return Polynomial();
    std::vector<Scalar> a = c_;
    int d = degree();
    for (int i = 0; i < d; ++i)
        for (int j = d - 1; j >= i; --j)
            a[static_cast<size_t>(j)] += c * a[static_cast<size_t>(j) + 1];
    return Polynomial(std::move(a));
}

Polynomial Polynomial::pow(int e) const {
    Polynomial acc(Scalar(1L)), base = *this;
    while (e > 0) {
        if (e & 1) acc = acc * base;
        base = base * base;
        e >>= 1;
    }
    return acc;
}

void Polynomial::divrem(const Polynomial& a, const Polynomial& b, Polynomial& q, Polynomial& r) {
    if (b.is_zero()) throw error("polynomial division by zero");
    if (b.leading().value_is_zero()) throw error("divrem: leading coefficient not invertible");
    std::vector<Scalar> rem = a.c_;
    int db = b.degree();
    int dq = a.degree() - db;
    if (dq < 0) {
        q = Polynomial();
        r = a;
        return;
    }
    std::vector<Scalar> quo(static_cast<size_t>(dq) + 1, Scalar(0L));
    Scalar lb = b.leading();
    for (int k = dq; k >= 0; --k) {
        Scalar f = rem[static_cast<size_t>(k + db)] / lb;
        quo[static_cast<size_t>(k)] = f;
        if (!f.is_zero())
            for (int j = 0; j <= db; ++j)
                rem[static_cast<size_t>(k + j)] -= f * b.c_[static_cast<size_t>(j)];
    }
    rem.resize(static_cast<size_t>(std::max(db, 0)));
    q = Polynomial(std::move(quo));
    r = Polynomial(std::move(rem));
}

Polynomial Polynomial::gcd(const Polynomial& a, const Polynomial& b) {
    if (a.has_jet() || b.has_jet()) throw error("gcd over jets is not defined");
    Polynomial f = a, g = b;
    auto monic = [](Polynomial& p) {
        if (!p.is_zero()) p = p / p.leading();
    };
    while (!g.is_zero()) {
        Polynomial q, r;
        divrem(f, g, q, r);
        f = std::move(g);
        g = std::move(r);
        monic(g);
    }
    monic(f);
    if (f.is_zero()) return Polynomial(Scalar(1L));
    return f;
}

Scalar Polynomial::resultant(const Polynomial& a, const Polynomial& b) {
    // euclidean PRS with the standard transition factors
    Polynomial f = a, g = b;
    if (f.is_zero() || g.is_zero()) return Scalar(0L);
    Scalar res(1L);
    while (g.degree() > 0) {
        Polynomial q, r;
        divrem(f, g, q, r);
        int df = f.degree(), dg = g.degree(), dr = r.degree();
        if ((df * dg) % 2 == 1) res = -res;
        res = res * g.leading().pow(df - (dr < 0 ? 0 : dr));
        if (r.is_zero()) return dr < 0 && dg > 0 ? Scalar(0L) : res;
        f = std::move(g);
        g = std::move(r);
    }
    // g is a nonzero constant
    return res * g.leading().pow(f.degree());
}

Scalar Polynomial::discriminant(const Polynomial& p) {
    int d = p.degree();
    if (d < 1) throw error("discriminant of a constant");
    Scalar r = resultant(p, p.derivative());
    Scalar s = (((static_cast<long>(d) * (d - 1)) / 2) % 2 == 1) ? Scalar(-1L) : Scalar(1L);
    return s * r / p.leading();
}

Polynomial Polynomial::value_part() const {
    std::vector<Scalar> v;
    v.reserve(c_.size());
    for (const Scalar& c : c_) v.push_back(c.value());
    return Polynomial(std::move(v));
}

Polynomial Polynomial::tangent_part() const {
    std::vector<Scalar> v;
    v.reserve(c_.size());
    for (const Scalar& c : c_) v.push_back(c.tangent());
    return Polynomial(std::move(v));
}

double Polynomial::max_abs() const {
    double m = 0;
    for (const Scalar& c : c_) m = std::max(m, c.abs());
    return m;
}

std::string Polynomial::str() const {
    if (is_zero()) return "0";
    std::string out;
    for (size_t k = c_.size(); k-- > 0;) {
        if (c_[k].is_zero()) continue;
        if (!out.empty()) out += " + ";
        out += "(" + c_[k].str() + ")";
        if (k == 1) out += "*x";
        else if (k > 1) out += "*x^" + std::to_string(k);
    }
    return out;
}

// ---------------------------------------------------------------------------
// RationalFunction
// ---------------------------------------------------------------------------

RationalFunction::RationalFunction(Polynomial num) : num_(std::move(num)), den_(Scalar(1L)) {}

RationalFunction::RationalFunction(Polynomial num, Polynomial den)
    : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw error("rational function with zero denominator");
    normalize();
}

RationalFunction RationalFunction::constant(Scalar c) { return RationalFunction(Polynomial(std::move(c))); }

RationalFunction RationalFunction::x() { return RationalFunction(Polynomial::x()); }

void RationalFunction::normalize() {
    if (num_.is_zero()) {
        den_ = Polynomial(Scalar(1L));
        return;
    }
    bool exact_plain = num_.leading().is_exact() && den_.leading().is_exact() &&
                       !num_.has_jet() && !den_.has_jet();
    if (exact_plain) {
        for (const Scalar& c : num_.coeffs()) exact_plain = exact_plain && c.is_exact();
        for (const Scalar& c : den_.coeffs()) exact_plain = exact_plain && c.is_exact();
    }
    if (exact_plain) {
        Polynomial g = Polynomial::gcd(num_, den_);
        if (g.degree() > 0) {
            Polynomial q, r;
            Polynomial::divrem(num_, g, q, r);
            num_ = q;
            Polynomial::divrem(den_, g, q, r);
            den_ = q;
        }
    }
    if (den_.leading().value_is_zero())
        throw error("rational function denominator with vanishing leading value");
    Scalar l = den_.leading();
    num_ = num_ / l;
    den_ = den_ / l;
}

RationalFunction RationalFunction::operator-() const {
    RationalFunction r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
}

RationalFunction RationalFunction::operator+(const RationalFunction& o) const {
    return RationalFunction(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

RationalFunction RationalFunction::operator-(const RationalFunction& o) const {
    return RationalFunction(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
}

RationalFunction RationalFunction::operator*(const RationalFunction& o) const {
    return RationalFunction(num_ * o.num_, den_ * o.den_);
}

RationalFunction RationalFunction::operator/(const RationalFunction& o) const {
    if (o.is_zero()) throw error("rational function division by zero");
    return RationalFunction(num_ * o.den_, den_ * o.num_);
}

RationalFunction RationalFunction::operator*(const Scalar& s) const {
    RationalFunction r;
    r.num_ = num_ * s;
    r.den_ = den_;
    return r;
}

RationalFunction RationalFunction::operator/(const Scalar& s) const {
    RationalFunction r;
    r.num_ = num_ / s;
    r.den_ = den_;
    return r;
}

RationalFunction RationalFunction::derivative() const {
    return RationalFunction(num_.derivative() * den_ - num_ * den_.derivative(), den_ * den_);
}

Scalar RationalFunction::eval(const Scalar& x) const {
    Scalar d = den_.eval(x);
    if (d.value_is_zero()) throw invalid_point_error("rational function evaluated at a pole");
    return num_.eval(x) / d;
}

RationalFunction RationalFunction::value_part() const {
    return RationalFunction(num_.value_part(), den_.value_part());
}

RationalFunction RationalFunction::tangent_part() const {
    Polynomial n0 = num_.value_part(), n1 = num_.tangent_part();
    Polynomial d0 = den_.value_part(), d1 = den_.tangent_part();
    return RationalFunction(n1 * d0 - n0 * d1, d0 * d0);
}

double RationalFunction::diff_norm(const RationalFunction& f, const RationalFunction& g) {
    Polynomial lhs = f.num_ * g.den_, rhs = g.num_ * f.den_;
    double scale = std::max({lhs.max_abs(), rhs.max_abs(), 1e-300});
    return (lhs - rhs).max_abs() / scale;
}

bool RationalFunction::equal_exact(const RationalFunction& f, const RationalFunction& g) {
    return (f.num_ * g.den_ - g.num_ * f.den_).is_zero();
}

std::string RationalFunction::str() const {
    if (is_polynomial()) return num_.str();
    return "(" + num_.str() + ") / (" + den_.str() + ")";
}

}  // namespace qdflow
