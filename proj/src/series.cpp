#include "qdflow/series.hpp"

#include <algorithm>

namespace qdflow {

namespace {
long sat_add(long a, long b) {
    if (a >= LocalSeries::kExact || b >= LocalSeries::kExact) return LocalSeries::kExact;
    return a + b;
}

// Reassemble a jet series from separately computed value and tangent parts.
LocalSeries join_jet(const LocalSeries& vs, const LocalSeries& ts) {
    long tr = std::min(vs.trunc(), ts.trunc());
    if (vs.is_zero() && ts.is_zero()) return LocalSeries::zero(vs.site(), tr);
    long v = std::min(vs.is_zero() ? ts.val() : vs.val(), ts.is_zero() ? vs.val() : ts.val());
    long top = std::max(vs.val() + static_cast<long>(vs.size()),
                        ts.val() + static_cast<long>(ts.size())) - 1;
    long hi = std::min(tr, top);
    std::vector<Scalar> out;
    for (long e = v; e <= hi; ++e)
        out.push_back(vs.coeff(e).with_tangent(ts.coeff(e).value()));
    return LocalSeries(vs.site(), v, std::move(out), tr);
}
}  // namespace

std::string ExpansionSite::str() const {
    std::string base = at_infinity ? "x=inf" : ("x=" + center.str());
    return base + " (r=" + std::to_string(r) + ")";
}

LocalSeries::LocalSeries(ExpansionSite site, long val, std::vector<Scalar> coeffs, long trunc)
    : site_(std::move(site)), val_(val), c_(std::move(coeffs)), trunc_(trunc) {
    if (trunc_ != kExact && val_ + static_cast<long>(c_.size()) - 1 > trunc_)
        c_.resize(static_cast<size_t>(trunc_ - val_ + 1 > 0 ? trunc_ - val_ + 1 : 0));
    normalize();
}

void LocalSeries::normalize() {
    size_t lead = 0;
    while (lead < c_.size() && c_[lead].is_zero()) ++lead;
    if (lead > 0) {
        c_.erase(c_.begin(), c_.begin() + static_cast<long>(lead));
        val_ += static_cast<long>(lead);
    }
    while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
    if (c_.empty()) val_ = (trunc_ == kExact ? 1 : trunc_ + 1);
}

LocalSeries LocalSeries::zero(ExpansionSite site, long trunc) {
    return LocalSeries(std::move(site), trunc == kExact ? 1 : trunc + 1, {}, trunc);
}

LocalSeries LocalSeries::monomial(ExpansionSite site, long exp, Scalar c) {
    return LocalSeries(std::move(site), exp, {std::move(c)}, kExact);
}

Scalar LocalSeries::coeff(long exp) const {
    if (trunc_ != kExact && exp > trunc_)
        throw truncation_error("coefficient at s^" + std::to_string(exp) +
                               " beyond truncation " + std::to_string(trunc_));
    long k = exp - val_;
    if (k < 0 || k >= static_cast<long>(c_.size())) return Scalar(0L);
    return c_[static_cast<size_t>(k)];
}

long LocalSeries::actual_val() const {
    for (size_t k = 0; k < c_.size(); ++k)
        if (!c_[k].is_zero()) return val_ + static_cast<long>(k);
    return trunc_ == kExact ? kExact : trunc_ + 1;
}

LocalSeries LocalSeries::operator-() const {
    std::vector<Scalar> v;
    v.reserve(c_.size());
    for (const Scalar& c : c_) v.push_back(-c);
    return LocalSeries(site_, val_, std::move(v), trunc_);
}

LocalSeries LocalSeries::operator+(const LocalSeries& o) const {
    long t = std::min(trunc_, o.trunc_);
    long v = std::min(is_zero() ? o.val_ : val_, o.is_zero() ? val_ : o.val_);
    if (is_zero() && o.is_zero()) return zero(site_, t);
    long hi = std::max(val_ + static_cast<long>(c_.size()), o.val_ + static_cast<long>(o.c_.size())) - 1;
    hi = std::min(hi, t == kExact ? hi : t);
    if (hi < v) return zero(site_, t);
    std::vector<Scalar> out(static_cast<size_t>(hi - v + 1), Scalar(0L));
    for (size_t k = 0; k < c_.size(); ++k) {
        long e = val_ + static_cast<long>(k);
        if (e <= hi) out[static_cast<size_t>(e - v)] += c_[k];
    }
    for (size_t k = 0; k < o.c_.size(); ++k) {
        long e = o.val_ + static_cast<long>(k);
        if (e <= hi) out[static_cast<size_t>(e - v)] += o.c_[k];
    }
    return LocalSeries(site_, v, std::move(out), t);
}

LocalSeries LocalSeries::operator-(const LocalSeries& o) const { return *this + (-o); }

LocalSeries LocalSeries::operator*(const LocalSeries& o) const {
    long t = std::min(sat_add(trunc_, o.val_), sat_add(o.trunc_, val_));
    if (is_zero() || o.is_zero()) return zero(site_, t);
    long v = val_ + o.val_;
    long hi = (t == kExact) ? v + static_cast<long>(c_.size() + o.c_.size()) - 2 : t;
    if (hi < v) return zero(site_, t);
    std::vector<Scalar> out(static_cast<size_t>(hi - v + 1), Scalar(0L));
    for (size_t i = 0; i < c_.size(); ++i) {
        if (c_[i].is_zero()) continue;
        for (size_t j = 0; j < o.c_.size(); ++j) {
            long e = val_ + static_cast<long>(i) + o.val_ + static_cast<long>(j);
            if (e > hi) break;
            out[static_cast<size_t>(e - v)] += c_[i] * o.c_[j];
        }
    }
    return LocalSeries(site_, v, std::move(out), t);
}

LocalSeries LocalSeries::operator*(const Scalar& c) const {
    std::vector<Scalar> v;
    v.reserve(c_.size());
    for (const Scalar& x : c_) v.push_back(x * c);
    return LocalSeries(site_, val_, std::move(v), trunc_);
}

LocalSeries LocalSeries::operator/(const Scalar& c) const {
    std::vector<Scalar> v;
    v.reserve(c_.size());
    for (const Scalar& x : c_) v.push_back(x / c);
    return LocalSeries(site_, val_, std::move(v), trunc_);
}

LocalSeries LocalSeries::shift(long k) const {
    return LocalSeries(site_, val_ + k, c_, sat_add(trunc_, k));
}

LocalSeries LocalSeries::truncate(long t) const {
    if (t >= trunc_) return *this;
    std::vector<Scalar> v = c_;
    long keep = t - val_ + 1;
    if (keep < 0) keep = 0;
    if (static_cast<long>(v.size()) > keep) v.resize(static_cast<size_t>(keep));
    return LocalSeries(site_, val_, std::move(v), t);
}

LocalSeries LocalSeries::inverse(long out_trunc) const {
    if (is_zero()) throw error("inverse of zero series");
    if (has_jet()) {
        // 1/(A + eB) = 1/A - e B/A^2
        LocalSeries a = value_part(), b = tangent_part();
        if (b.is_zero()) return join_jet(a.inverse(out_trunc), LocalSeries::zero(site_, out_trunc));
        // the tangent product ia*ia*b reaches out_trunc when ia is carried to
        // out_trunc + val(a) - val(b)
        long req = std::max(out_trunc, out_trunc + a.val() - b.val());
        LocalSeries ia = a.inverse(req);
        LocalSeries t = -(ia * ia * b);
        return join_jet(ia.truncate(std::min(out_trunc, ia.trunc())),
                        t.truncate(std::min(out_trunc, t.trunc())));
    }
    if (c_[0].value_is_zero()) throw error("inverse: leading coefficient is zero");
    long rel_avail = (trunc_ == kExact) ? kExact : trunc_ - val_;
    long rel = std::min(out_trunc + val_, rel_avail);  // inverse has valuation -val_
    long real_trunc = std::min(out_trunc, rel_avail - val_);
    if (rel < 0) return zero(site_, real_trunc);
    size_t len = static_cast<size_t>(rel) + 1;
    Scalar c0 = c_[0];
    std::vector<Scalar> u(len, Scalar(0L));
    u[0] = Scalar(1L);
    for (size_t n = 1; n < len; ++n) {
        Scalar acc(0L);
        for (size_t j = 1; j <= n && j < c_.size(); ++j)
            acc += (c_[j] / c0) * u[n - j];
        u[n] = -acc;
    }
    for (Scalar& x : u) x = x / c0;
    return LocalSeries(site_, -val_, std::move(u), real_trunc);
}

LocalSeries LocalSeries::sqrt(long rel_order) const {
    if (is_zero()) throw error("sqrt of zero series");
    if (has_jet()) {
        // sqrt(A + eB) = sqrt(A) + e B/(2 sqrt(A))
        LocalSeries a = value_part(), b = tangent_part();
        LocalSeries sa = a.sqrt(rel_order);
        if (b.is_zero()) return join_jet(sa, LocalSeries::zero(site_, sa.trunc()));
        long cap;
        if (sa.trunc() != kExact)
            cap = sa.trunc() - 2 * sa.val();  // deepest inverse the root supports
        else if (b.trunc() != kExact)
            cap = b.trunc() - 2 * sa.val() - b.val() + 8;
        else
            cap = static_cast<long>(sa.size() + b.size()) + 16 - 2 * sa.val();
        LocalSeries t = b * (sa * Scalar(2L)).inverse(cap);
        return join_jet(sa, t);
    }
    if (val_ % 2 != 0) throw error("sqrt of series with odd valuation");
    if (c_[0].value_is_zero()) throw error("sqrt: leading coefficient is zero");
    long rel = (trunc_ == kExact) ? (rel_order >= 0 ? rel_order : static_cast<long>(c_.size()) + 16)
                                  : trunc_ - val_;
    Scalar c0 = c_[0];
    Scalar w = c0.sqrt();
    // b = sqrt(1 + sum a_k s^k), b_n = (a_n - sum_{j=1}^{n-1} b_j b_{n-j}) / 2
    size_t len = static_cast<size_t>(rel) + 1;
    std::vector<Scalar> b(len, Scalar(0L));
    b[0] = Scalar(1L);
    for (size_t n = 1; n < len; ++n) {
        Scalar acc = (n < c_.size()) ? c_[n] / c0 : Scalar(0L);
        for (size_t j = 1; j < n; ++j) acc -= b[j] * b[n - j];
        b[n] = acc / Scalar(2L);
    }
    for (Scalar& x : b) x = x * w;
    long out_trunc = (trunc_ == kExact) ? val_ / 2 + rel : trunc_ - val_ / 2;
    return LocalSeries(site_, val_ / 2, std::move(b), out_trunc);
}

LocalSeries LocalSeries::derivative() const {
    if (is_zero()) return zero(site_, trunc_ == kExact ? kExact : trunc_ - 1);
    std::vector<Scalar> out;
    out.reserve(c_.size());
    for (size_t k = 0; k < c_.size(); ++k) {
        long e = val_ + static_cast<long>(k);
        out.push_back(c_[k] * Scalar(e));
    }
    return LocalSeries(site_, val_ - 1, std::move(out),
                       trunc_ == kExact ? kExact : trunc_ - 1);
}

LocalSeries LocalSeries::antiderivative(double residue_tol) const {
    if (trunc_ != kExact && trunc_ < -1)
        throw truncation_error("antiderivative: series not known through s^-1");
    Scalar res = coeff(-1);
    if (!res.is_zero()) {
        bool ok = !res.is_exact() && res.abs() <= residue_tol * std::max(max_abs(), 1e-300);
        if (!ok)
            throw antiderivative_error("antiderivative of a form with nonzero residue " +
                                       res.str());
    }
    std::vector<Scalar> out;
    out.reserve(c_.size());
    long v = val_;
    for (size_t k = 0; k < c_.size(); ++k) {
        long e = val_ + static_cast<long>(k);
        if (e == -1) {
            out.push_back(Scalar(0L));
            continue;
        }
        out.push_back(c_[k] / Scalar(e + 1));
    }
    return LocalSeries(site_, v + 1, std::move(out),
                       trunc_ == kExact ? kExact : trunc_ + 1);
}

LocalSeries LocalSeries::strip_leading_noise(double rel_tol) const {
    constexpr size_t kWindow = 8;
    std::vector<Scalar> v = c_;
    bool changed = false;
    // value and tangent components are scanned independently: a moving pole
    // legitimately puts tangent data below the value valuation, so one part
    // being genuine must not protect noise in the other.
    for (int part = 0; part < 2; ++part) {
        auto comp = [&](const Scalar& s) { return part == 0 ? s.value() : s.tangent(); };
        for (size_t k = 0; k < v.size(); ++k) {
            Scalar c = comp(v[k]);
            if (c.is_exact()) {
                if (c.is_zero()) continue;  // structural zero slot
                break;
            }
            if (c.abs() == 0.0) continue;
            double scale = 0.0;
            for (size_t j = k + 1; j < v.size() && j <= k + kWindow; ++j)
                scale = std::max(scale, comp(v[j]).abs());
            if (!(scale > 0.0) || c.abs() > rel_tol * scale) break;
            v[k] = (part == 0) ? v[k] - v[k].value() : v[k].value();
            changed = true;
        }
    }
    if (!changed) return *this;
    return LocalSeries(site_, val_, std::move(v), trunc_);
}

bool LocalSeries::has_jet() const {
    for (const Scalar& c : c_)
        if (c.has_jet()) return true;
    return false;
}

LocalSeries LocalSeries::value_part() const {
    std::vector<Scalar> v;
    v.reserve(c_.size());
    for (const Scalar& c : c_) v.push_back(c.value());
    return LocalSeries(site_, val_, std::move(v), trunc_);
}

LocalSeries LocalSeries::tangent_part() const {
    std::vector<Scalar> v;
    v.reserve(c_.size());
    for (const Scalar& c : c_) v.push_back(c.tangent());
    return LocalSeries(site_, val_, std::move(v), trunc_);
}

double LocalSeries::max_abs() const {
    double m = 0;
    for (const Scalar& c : c_) m = std::max(m, c.abs());
    return m;
}

std::string LocalSeries::str() const {
    std::string out = "[" + site_.str() + "]";
    if (is_zero()) out += " 0";
    for (size_t k = 0; k < c_.size(); ++k) {
        if (c_[k].is_zero()) continue;
        out += " + (" + c_[k].str() + ") s^" + std::to_string(val_ + static_cast<long>(k));
    }
    if (trunc_ != kExact) out += " + O(s^" + std::to_string(trunc_ + 1) + ")";
    return out;
}

// ---------------------------------------------------------------------------
// substitution and expansion
// ---------------------------------------------------------------------------

LocalSeries substitute(const Polynomial& p, const ExpansionSite& site) {
    if (p.is_zero()) return LocalSeries::zero(site, LocalSeries::kExact);
    if (site.at_infinity) {
        // P(s^-r): coefficient of x^k becomes s^{-rk}
        int d = p.degree();
        std::vector<Scalar> out(static_cast<size_t>(d) * site.r + 1, Scalar(0L));
        for (int k = 0; k <= d; ++k)
            out[static_cast<size_t>((d - k) * site.r)] = p.coeff(k);
        return LocalSeries(site, -static_cast<long>(d) * site.r, std::move(out),
                           LocalSeries::kExact);
    }
    Polynomial shifted = p.taylor_shift(site.center);  // P(center + u)
    if (site.r == 1)
        return LocalSeries(site, 0, shifted.coeffs(), LocalSeries::kExact);
    std::vector<Scalar> out(static_cast<size_t>(shifted.degree()) * site.r + 1, Scalar(0L));
    for (int k = 0; k <= shifted.degree(); ++k)
        out[static_cast<size_t>(k * site.r)] = shifted.coeff(k);
    return LocalSeries(site, 0, std::move(out), LocalSeries::kExact);
}

LocalSeries puiseux_expand(const RationalFunction& f, const ExpansionSite& site, long order) {
    if (f.is_zero()) return LocalSeries::zero(site, order);
    // Float evaluation of the substituted polynomials leaves roundoff junk in
    // slots that cancel structurally (taylor_shift at an irrational center,
    // top-degree cancellations in the numerator).  The valuations fed to the
    // inverse must come from the genuine coefficients.
    LocalSeries n = substitute(f.num(), site).strip_leading_noise();
    LocalSeries d = substitute(f.den(), site).strip_leading_noise();
    LocalSeries id = d.inverse(order - std::min(n.val(), 0L) + std::max(0L, -d.val()) + 4);
    return (n * id).truncate(order);
}

LocalSeries dx_factor(const ExpansionSite& site) {
    if (!site.at_infinity) {
        if (site.r == 1) return LocalSeries::monomial(site, 0, Scalar(1L));
        return LocalSeries::monomial(site, 1, Scalar(2L));
    }
    if (site.r == 1) return LocalSeries::monomial(site, -2, Scalar(-1L));
    return LocalSeries::monomial(site, -3, Scalar(-2L));
}

LocalOneForm LocalOneForm::from_function(const RationalFunction& f, const ExpansionSite& site,
                                         long order) {
    LocalSeries fac = dx_factor(site);
    // expand f deep enough that multiplying by s^{val(fac)} still reaches `order`
    LocalSeries fs = puiseux_expand(f, site, order - fac.val());
    return LocalOneForm{fs * fac};
}

Scalar pairing_residue(const LocalOneForm& a, const LocalOneForm& b, double residue_tol) {
    LocalSeries inv = a.antiderivative(residue_tol);
    return (inv * b.w).residue();
}

}  // namespace qdflow
