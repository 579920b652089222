#include "qdflow/scalar.hpp"

#include <quadmath.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace qdflow {

// ---------------------------------------------------------------------------
// Cplx128
// ---------------------------------------------------------------------------

Cplx128 Cplx128::operator/(const Cplx128& o) const {
    // Smith's algorithm to avoid overflow in the naive formula
    if (fabsq(o.re) >= fabsq(o.im)) {
        if (o.re == 0 && o.im == 0) throw error("complex division by zero");
        __float128 r = o.im / o.re;
        __float128 d = o.re + o.im * r;
        return {(re + im * r) / d, (im - re * r) / d};
    }
    __float128 r = o.re / o.im;
    __float128 d = o.im + o.re * r;
    return {(re * r + im) / d, (im * r - re) / d};
}

Cplx128 sqrt(const Cplx128& z) {
    if (z.re == 0 && z.im == 0) return {0, 0};
    __float128 m = hypotq(z.re, z.im);
    __float128 t = sqrtq((m + fabsq(z.re)) / 2);
    if (z.re >= 0) return {t, z.im / (2 * t)};
    __float128 u = fabsq(z.im) / (2 * t);
    return {u, z.im >= 0 ? t : -t};
}

double abs_f64(const Cplx128& z) {
    return static_cast<double>(hypotq(z.re, z.im));
}

// ---------------------------------------------------------------------------
// GaussianRational
// ---------------------------------------------------------------------------

GaussianRational GaussianRational::operator/(const GaussianRational& o) const {
    mpq_class n2 = o.re * o.re + o.im * o.im;
    if (n2 == 0) throw error("exact division by zero");
    return {mpq_class((re * o.re + im * o.im) / n2),
            mpq_class((im * o.re - re * o.im) / n2)};
}

namespace {

// exact square root of a nonnegative rational, if one exists
bool mpq_sqrt_exact(const mpq_class& x, mpq_class& out) {
    if (x < 0) return false;
    if (x == 0) { out = 0; return true; }
    const mpz_class& num = x.get_num();
    const mpz_class& den = x.get_den();
    if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t()))
        return false;
    mpz_class rn, rd;
    mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
    mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
    out = mpq_class(rn) / mpq_class(rd);
    return true;
}

std::string mpq_str(const mpq_class& q) { return q.get_str(); }

}  // namespace

bool GaussianRational::sqrt_exact(GaussianRational& out) const {
    if (im == 0) {
        mpq_class r;
        if (re >= 0) {
            if (!mpq_sqrt_exact(re, r)) return false;
            out = GaussianRational(r);
        } else {
            if (!mpq_sqrt_exact(mpq_class(-re), r)) return false;
            out = GaussianRational(mpq_class(0), r);
        }
        return true;
    }
    // sqrt(a+bi) = x+yi with x^2 = (a+|z|)/2, y = b/(2x); requires |z| rational
    mpq_class n2 = re * re + im * im, r, x;
    if (!mpq_sqrt_exact(n2, r)) return false;
    if (!mpq_sqrt_exact(mpq_class((re + r) / 2), x)) return false;
    if (x == 0) return false;  // only when im == 0, handled above
    mpq_class y = im / (2 * x);
    out = GaussianRational(x, y);  // principal branch: Re >= 0
    return true;
}

std::complex<double> GaussianRational::to_c64() const {
    return {mpq_get_d(re.get_mpq_t()), mpq_get_d(im.get_mpq_t())};
}

namespace {

__float128 f128_from_mpz(const mpz_class& z) {
    // accumulate limbs most-significant first; relative error ~2^-113
    int sign = mpz_sgn(z.get_mpz_t());
    if (sign == 0) return 0;
    size_t nl = mpz_size(z.get_mpz_t());
    __float128 acc = 0;
    const __float128 base = 18446744073709551616.0Q;  // 2^64
    for (size_t i = nl; i-- > 0;)
        acc = acc * base + static_cast<__float128>(mpz_getlimbn(z.get_mpz_t(), i));
    return sign < 0 ? -acc : acc;
}

__float128 f128_from_mpq(const mpq_class& q) {
    return f128_from_mpz(q.get_num()) / f128_from_mpz(q.get_den());
}

}  // namespace

Cplx128 GaussianRational::to_c128() const {
    return {f128_from_mpq(re), f128_from_mpq(im)};
}

std::string GaussianRational::str() const {
    if (im == 0) return mpq_str(re);
    std::string i_part = (im == 1) ? "i" : (im == -1) ? "-i" : mpq_str(im) + "i";
    if (re == 0) return i_part;
    if (im > 0 && i_part[0] != '-') return mpq_str(re) + "+" + i_part;
    return mpq_str(re) + i_part;
}

// ---------------------------------------------------------------------------
// context
// ---------------------------------------------------------------------------

void ScalarContext::note_degradation(const std::string& what) {
    if (!degraded) degradation_note = what;
    degraded = true;
}

ScalarContext& scalar_context() {
    thread_local ScalarContext ctx;
    return ctx;
}

ScalarContextGuard::ScalarContextGuard(NumKind float_kind) : saved_(scalar_context()) {
    scalar_context() = ScalarContext{};
    scalar_context().float_kind = float_kind;
}

ScalarContextGuard::~ScalarContextGuard() { scalar_context() = saved_; }

// ---------------------------------------------------------------------------
// Scalar
// ---------------------------------------------------------------------------

Scalar Scalar::exact(long num, long den) {
    if (den == 0) throw error("exact(): zero denominator");
    mpq_class q(num, den);
    q.canonicalize();
    return Scalar(GaussianRational(q));
}

Scalar Scalar::exact_i() { return Scalar(GaussianRational(mpq_class(0), mpq_class(1))); }

Scalar::Payload Scalar::payload_to_kind(const Payload& p, NumKind k) {
    NumKind pk = static_cast<NumKind>(p.index());
    if (pk == k) return p;
    switch (k) {
        case NumKind::F64:
            if (pk == NumKind::Exact) return std::get<GaussianRational>(p).to_c64();
            return std::get<Cplx128>(p).to_c64();
        case NumKind::F128:
            if (pk == NumKind::Exact) return std::get<GaussianRational>(p).to_c128();
            return Cplx128(std::get<std::complex<double>>(p));
        case NumKind::Exact:
            throw error("cannot promote float payload to exact");
    }
    throw error("unreachable");
}

namespace {
NumKind join_kind(NumKind a, NumKind b) {
    return static_cast<NumKind>(std::max(static_cast<int>(a), static_cast<int>(b)));
}
}  // namespace

#define QDFLOW_BINOP(NAME, OP)                                                          \
    Scalar::Payload Scalar::NAME(const Payload& a, const Payload& b) {                  \
        NumKind k = join_kind(static_cast<NumKind>(a.index()),                          \
                              static_cast<NumKind>(b.index()));                         \
        Payload pa = payload_to_kind(a, k), pb = payload_to_kind(b, k);                 \
        switch (k) {                                                                    \
            case NumKind::Exact:                                                        \
                return std::get<GaussianRational>(pa) OP std::get<GaussianRational>(pb);\
            case NumKind::F64:                                                          \
                return std::get<std::complex<double>>(pa)                               \
                    OP std::get<std::complex<double>>(pb);                              \
            case NumKind::F128:                                                         \
                return std::get<Cplx128>(pa) OP std::get<Cplx128>(pb);                  \
        }                                                                               \
        throw error("unreachable");                                                     \
    }

QDFLOW_BINOP(add_p, +)
QDFLOW_BINOP(sub_p, -)
QDFLOW_BINOP(mul_p, *)
QDFLOW_BINOP(div_p, /)
#undef QDFLOW_BINOP

Scalar::Payload Scalar::neg_p(const Payload& a) {
    switch (static_cast<NumKind>(a.index())) {
        case NumKind::Exact: return -std::get<GaussianRational>(a);
        case NumKind::F64: return -std::get<std::complex<double>>(a);
        case NumKind::F128: return -std::get<Cplx128>(a);
    }
    throw error("unreachable");
}

bool Scalar::zero_p(const Payload& a) {
    switch (static_cast<NumKind>(a.index())) {
        case NumKind::Exact: return std::get<GaussianRational>(a).is_zero();
        case NumKind::F64: return std::get<std::complex<double>>(a) == std::complex<double>(0);
        case NumKind::F128: return std::get<Cplx128>(a).is_zero();
    }
    throw error("unreachable");
}

Scalar::Payload Scalar::sqrt_p(const Payload& a) {
    switch (static_cast<NumKind>(a.index())) {
        case NumKind::Exact: {
            GaussianRational out;
            if (std::get<GaussianRational>(a).sqrt_exact(out)) return out;
            // transparent degradation to the context float carrier
            scalar_context().note_degradation(
                "sqrt of non-square exact value " + std::get<GaussianRational>(a).str());
            NumKind fk = scalar_context().float_kind;
            if (fk == NumKind::F128)
                return qdflow::sqrt(std::get<GaussianRational>(a).to_c128());
            return std::sqrt(std::get<GaussianRational>(a).to_c64());
        }
        case NumKind::F64: return std::sqrt(std::get<std::complex<double>>(a));
        case NumKind::F128: return qdflow::sqrt(std::get<Cplx128>(a));
    }
    throw error("unreachable");
}

Scalar Scalar::tangent() const {
    if (t_) return Scalar(*t_);
    // zero of the value's kind
    return Scalar(payload_to_kind(Payload(GaussianRational()), kind()) , std::nullopt);
}

Scalar Scalar::with_tangent(const Scalar& t) const {
    if (t.has_jet()) throw error("jet tangent may not itself carry a jet");
    return Scalar(v_, t.v_);
}

bool Scalar::is_zero() const { return zero_p(v_) && (!t_ || zero_p(*t_)); }
bool Scalar::value_is_zero() const { return zero_p(v_); }

bool Scalar::is_finite() const {
    auto fin = [](const Payload& p) {
        switch (static_cast<NumKind>(p.index())) {
            case NumKind::Exact: return true;
            case NumKind::F64: {
                auto z = std::get<std::complex<double>>(p);
                return std::isfinite(z.real()) && std::isfinite(z.imag());
            }
            case NumKind::F128: {
                auto z = std::get<Cplx128>(p);
                return finiteq(z.re) != 0 && finiteq(z.im) != 0;
            }
        }
        return false;
    };
    return fin(v_) && (!t_ || fin(*t_));
}

bool Scalar::operator==(const Scalar& o) const {
    if (v_.index() != o.v_.index()) return false;
    auto eq = [](const Payload& a, const Payload& b) {
        switch (static_cast<NumKind>(a.index())) {
            case NumKind::Exact:
                return std::get<GaussianRational>(a) == std::get<GaussianRational>(b);
            case NumKind::F64:
                return std::get<std::complex<double>>(a) == std::get<std::complex<double>>(b);
            case NumKind::F128: {
                auto x = std::get<Cplx128>(a), y = std::get<Cplx128>(b);
                return x.re == y.re && x.im == y.im;
            }
        }
        return false;
    };
    if (!eq(v_, o.v_)) return false;
    bool jz = !t_ || zero_p(*t_), ojz = !o.t_ || zero_p(*o.t_);
    if (jz && ojz) return true;
    if (jz != ojz) return false;
    return t_->index() == o.t_->index() && eq(*t_, *o.t_);
}

Scalar Scalar::operator-() const {
    return Scalar(neg_p(v_), t_ ? std::optional<Payload>(neg_p(*t_)) : std::nullopt);
}

Scalar Scalar::operator+(const Scalar& o) const {
    std::optional<Payload> t;
    if (t_ || o.t_) {
        if (t_ && o.t_) t = add_p(*t_, *o.t_);
        else t = t_ ? *t_ : *o.t_;
    }
    return Scalar(add_p(v_, o.v_), std::move(t));
}

Scalar Scalar::operator-(const Scalar& o) const {
    std::optional<Payload> t;
    if (t_ || o.t_) {
        if (t_ && o.t_) t = sub_p(*t_, *o.t_);
        else if (t_) t = *t_;
        else t = neg_p(*o.t_);
    }
    return Scalar(sub_p(v_, o.v_), std::move(t));
}

Scalar Scalar::operator*(const Scalar& o) const {
    std::optional<Payload> t;
    if (t_ || o.t_) {
        if (t_ && o.t_) t = add_p(mul_p(*t_, o.v_), mul_p(v_, *o.t_));
        else if (t_) t = mul_p(*t_, o.v_);
        else t = mul_p(v_, *o.t_);
    }
    return Scalar(mul_p(v_, o.v_), std::move(t));
}

Scalar Scalar::operator/(const Scalar& o) const {
    Payload q = div_p(v_, o.v_);
    std::optional<Payload> t;
    if (t_ || o.t_) {
        // (a/b)' = (a' - (a/b) b') / b
        Payload num = t_ ? *t_ : payload_to_kind(Payload(GaussianRational()), kind());
        if (o.t_) num = sub_p(num, mul_p(q, *o.t_));
        t = div_p(num, o.v_);
    }
    return Scalar(std::move(q), std::move(t));
}

Scalar Scalar::inv() const { return Scalar(1L) / *this; }

Scalar Scalar::pow(long e) const {
    if (e < 0) return inv().pow(-e);
    Scalar acc(1L), base = *this;
    while (e > 0) {
        if (e & 1) acc = acc * base;
        base = base * base;
        e >>= 1;
    }
    return acc;
}

Scalar Scalar::sqrt() const {
    Payload s = sqrt_p(v_);
    std::optional<Payload> t;
    if (t_) {
        if (zero_p(s)) throw error("jet sqrt at zero value");
        Payload two = payload_to_kind(Payload(GaussianRational(2)), static_cast<NumKind>(s.index()));
        t = div_p(*t_, mul_p(two, s));
    }
    return Scalar(std::move(s), std::move(t));
}

double Scalar::abs() const {
    switch (kind()) {
        case NumKind::Exact: return std::abs(exact_value().to_c64());
        case NumKind::F64: return std::abs(std::get<std::complex<double>>(v_));
        case NumKind::F128: return abs_f64(std::get<Cplx128>(v_));
    }
    throw error("unreachable");
}

std::complex<double> Scalar::to_c64() const {
    switch (kind()) {
        case NumKind::Exact: return exact_value().to_c64();
        case NumKind::F64: return std::get<std::complex<double>>(v_);
        case NumKind::F128: return std::get<Cplx128>(v_).to_c64();
    }
    throw error("unreachable");
}

Cplx128 Scalar::to_c128() const {
    switch (kind()) {
        case NumKind::Exact: return exact_value().to_c128();
        case NumKind::F64: return Cplx128(std::get<std::complex<double>>(v_));
        case NumKind::F128: return std::get<Cplx128>(v_);
    }
    throw error("unreachable");
}

Scalar Scalar::to_kind(NumKind k) const {
    return Scalar(payload_to_kind(v_, k),
                  t_ ? std::optional<Payload>(payload_to_kind(*t_, k)) : std::nullopt);
}

// ---------------------------------------------------------------------------
// parsing / printing
// ---------------------------------------------------------------------------

namespace {

// parse a nonnegative rational or decimal literal starting at s[pos]
mpq_class parse_unsigned_number(const std::string& s, size_t& pos) {
    size_t start = pos;
    std::string digits;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) digits += s[pos++];
    if (pos < s.size() && s[pos] == '/') {
        // rational n/d
        ++pos;
        std::string den;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) den += s[pos++];
        if (digits.empty() || den.empty()) throw parse_error("bad rational at '" + s.substr(start) + "'");
        mpq_class q{mpz_class(digits, 10), mpz_class(den, 10)};
        q.canonicalize();
        return q;
    }
    std::string frac;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) frac += s[pos++];
    }
    if (digits.empty() && frac.empty()) throw parse_error("expected number at '" + s.substr(start) + "'");
    long exp10 = 0;
    if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
        ++pos;
        bool neg = false;
        if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) neg = (s[pos++] == '-');
        std::string e;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) e += s[pos++];
        if (e.empty()) throw parse_error("bad exponent in '" + s + "'");
        exp10 = std::stol(e);
        if (neg) exp10 = -exp10;
    }
    mpz_class mant((digits.empty() ? std::string("0") : digits) + frac, 10);
    long shift = exp10 - static_cast<long>(frac.size());
    mpq_class q(mant);
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(shift)));
    if (shift >= 0) q *= mpq_class(p10);
    else q /= mpq_class(p10);
    q.canonicalize();
    return q;
}

}  // namespace

Scalar Scalar::parse(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw parse_error("empty number literal");

    mpq_class re = 0, im = 0;
    size_t pos = 0;
    bool first = true;
    while (pos < s.size()) {
        int sign = 1;
        if (s[pos] == '+' || s[pos] == '-') {
            sign = (s[pos] == '-') ? -1 : 1;
            ++pos;
        } else if (!first) {
            throw parse_error("malformed number '" + text + "'");
        }
        mpq_class mag;
        bool imag = false;
        if (pos < s.size() && (s[pos] == 'i' || s[pos] == 'I')) {
            mag = 1;
            imag = true;
            ++pos;
        } else {
            mag = parse_unsigned_number(s, pos);
            if (pos < s.size() && (s[pos] == 'i' || s[pos] == 'I')) {
                imag = true;
                ++pos;
            }
        }
        if (sign < 0) mag = -mag;
        if (imag) im += mag;
        else re += mag;
        first = false;
    }
    return Scalar(GaussianRational(re, im));
}

std::string format_residual(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string Scalar::str() const {
    switch (kind()) {
        case NumKind::Exact: return exact_value().str();
        case NumKind::F64:
        case NumKind::F128: {
            std::complex<double> z = to_c64();
            if (z.imag() == 0) return format_residual(z.real());
            std::string i_part = format_residual(z.imag()) + "i";
            if (z.real() == 0) return i_part;
            if (z.imag() >= 0) return format_residual(z.real()) + "+" + i_part;
            return format_residual(z.real()) + i_part;
        }
    }
    throw error("unreachable");
}

}  // namespace qdflow
