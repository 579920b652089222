#ifndef QDFLOW_SCALAR_HPP
#define QDFLOW_SCALAR_HPP

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include <gmpxx.h>

namespace qdflow {

// ---------------------------------------------------------------------------
// error taxonomy
// ---------------------------------------------------------------------------

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// malformed input (config strings, number literals)
struct parse_error : error { using error::error; };
// a point violating the standing assumptions (coincident poles, p = 0, ...)
struct invalid_point_error : error { using error::error; };
// a genericity condition failed (non-simple zeros, vanishing determinant, ...)
struct degeneracy_error : error { using error::error; };
// a floating-point verification could not reach the requested accuracy
struct precision_error : error { using error::error; };
// a local series was not carried to sufficient order for the requested datum
struct truncation_error : error { using error::error; };
// antiderivative requested for a series with nonzero residue
struct antiderivative_error : error { using error::error; };

// ---------------------------------------------------------------------------
// quad-precision complex carrier (extended float mode)
// ---------------------------------------------------------------------------

struct Cplx128 {
    __float128 re = 0, im = 0;

    Cplx128() = default;
    Cplx128(__float128 r, __float128 i) : re(r), im(i) {}
    explicit Cplx128(double r) : re(r), im(0) {}
    explicit Cplx128(std::complex<double> z) : re(z.real()), im(z.imag()) {}

    Cplx128 operator-() const { return {-re, -im}; }
    Cplx128 operator+(const Cplx128& o) const { return {re + o.re, im + o.im}; }
    Cplx128 operator-(const Cplx128& o) const { return {re - o.re, im - o.im}; }
    Cplx128 operator*(const Cplx128& o) const {
        return {re * o.re - im * o.im, re * o.im + im * o.re};
    }
    Cplx128 operator/(const Cplx128& o) const;

    bool is_zero() const { return re == 0 && im == 0; }
    std::complex<double> to_c64() const {
        return {static_cast<double>(re), static_cast<double>(im)};
    }
};

Cplx128 sqrt(const Cplx128& z);
double abs_f64(const Cplx128& z);

// ---------------------------------------------------------------------------
// exact complex rationals  a + b*i,  a,b in Q
// ---------------------------------------------------------------------------

class GaussianRational {
public:
    mpq_class re, im;

    GaussianRational() : re(0), im(0) {}
    GaussianRational(long n) : re(n), im(0) {}
    GaussianRational(const mpq_class& r) : re(r), im(0) {}
    GaussianRational(const mpq_class& r, const mpq_class& i) : re(r), im(i) {}

    bool is_zero() const { return re == 0 && im == 0; }
    bool is_real() const { return im == 0; }
    bool operator==(const GaussianRational& o) const { return re == o.re && im == o.im; }

    GaussianRational operator-() const { return {mpq_class(-re), mpq_class(-im)}; }
    GaussianRational operator+(const GaussianRational& o) const {
        return {mpq_class(re + o.re), mpq_class(im + o.im)};
    }
    GaussianRational operator-(const GaussianRational& o) const {
        return {mpq_class(re - o.re), mpq_class(im - o.im)};
    }
    GaussianRational operator*(const GaussianRational& o) const {
        return {mpq_class(re * o.re - im * o.im), mpq_class(re * o.im + im * o.re)};
    }
    GaussianRational operator/(const GaussianRational& o) const;

    // exact square root in Q(i); returns false when none exists
    bool sqrt_exact(GaussianRational& out) const;

    std::complex<double> to_c64() const;
    Cplx128 to_c128() const;
    std::string str() const;
};

// ---------------------------------------------------------------------------
// runtime-tagged scalar with optional first-order jet
// ---------------------------------------------------------------------------

enum class NumKind : std::uint8_t { Exact = 0, F64 = 1, F128 = 2 };

// Per-thread evaluation context.  Exact square roots that do not exist in
// Q(i) degrade the computation to floating point; the event is recorded here
// so callers can report the provenance of their results.
struct ScalarContext {
    bool degraded = false;
    std::string degradation_note;
    NumKind float_kind = NumKind::F64;  // degradation target / float literal kind

    void note_degradation(const std::string& what);
};

ScalarContext& scalar_context();

// RAII guard: fresh degradation state, chosen float carrier
class ScalarContextGuard {
public:
    explicit ScalarContextGuard(NumKind float_kind = NumKind::F64);
    ~ScalarContextGuard();
    ScalarContextGuard(const ScalarContextGuard&) = delete;

private:
    ScalarContext saved_;
};

class Scalar {
public:
    using Payload = std::variant<GaussianRational, std::complex<double>, Cplx128>;

    Scalar() : v_(GaussianRational()) {}
    Scalar(long n) : v_(GaussianRational(n)) {}
    Scalar(const GaussianRational& g) : v_(g) {}
    Scalar(std::complex<double> z) : v_(z) {}
    Scalar(const Cplx128& z) : v_(z) {}

    static Scalar exact(long num, long den = 1);
    static Scalar exact_i();                      // the exact imaginary unit
    static Scalar parse(const std::string& text); // "3/4", "1.5e-2", "2+3i", "i", ...

    NumKind kind() const { return static_cast<NumKind>(v_.index()); }
    bool is_exact() const { return kind() == NumKind::Exact; }
    bool has_jet() const { return t_.has_value(); }

    // value/tangent views (tangent of a jet-free scalar is 0)
    Scalar value() const { return Scalar(v_); }
    Scalar tangent() const;
    Scalar with_tangent(const Scalar& t) const;

    const GaussianRational& exact_value() const { return std::get<GaussianRational>(v_); }

    bool is_zero() const;        // value and tangent both exactly zero
    bool value_is_zero() const;  // value part exactly zero
    bool is_finite() const;
    bool operator==(const Scalar& o) const;  // exact structural equality

    Scalar operator-() const;
    Scalar operator+(const Scalar& o) const;
    Scalar operator-(const Scalar& o) const;
    Scalar operator*(const Scalar& o) const;
    Scalar operator/(const Scalar& o) const;
    Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
    Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
    Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
    Scalar& operator/=(const Scalar& o) { return *this = *this / o; }

    Scalar inv() const;
    Scalar pow(long e) const;

    // principal square root; exact mode degrades to float (context flag) when
    // the root does not exist in Q(i)
    Scalar sqrt() const;

    double abs() const;  // |value| as double
    std::complex<double> to_c64() const;
    Cplx128 to_c128() const;
    Scalar to_kind(NumKind k) const;  // value+tangent converted (no exactification)

    std::string str() const;  // exact: canonical rational; float: 17 sig digits

private:
    explicit Scalar(Payload v) : v_(std::move(v)) {}
    Scalar(Payload v, std::optional<Payload> t) : v_(std::move(v)), t_(std::move(t)) {}

    static Payload payload_to_kind(const Payload& p, NumKind k);
    static Payload add_p(const Payload& a, const Payload& b);
    static Payload sub_p(const Payload& a, const Payload& b);
    static Payload mul_p(const Payload& a, const Payload& b);
    static Payload div_p(const Payload& a, const Payload& b);
    static Payload neg_p(const Payload& a);
    static Payload sqrt_p(const Payload& a);
    static bool zero_p(const Payload& a);

    Payload v_;
    std::optional<Payload> t_;
};

inline Scalar operator+(long a, const Scalar& b) { return Scalar(a) + b; }
inline Scalar operator-(long a, const Scalar& b) { return Scalar(a) - b; }
inline Scalar operator*(long a, const Scalar& b) { return Scalar(a) * b; }
inline Scalar operator/(long a, const Scalar& b) { return Scalar(a) / b; }

// 17-significant-digit decimal rendering used in machine-readable reports
std::string format_residual(double x);

}  // namespace qdflow

#endif
