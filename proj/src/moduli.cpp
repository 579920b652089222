#include "qdflow/moduli.hpp"

#include <algorithm>
#include <random>

namespace qdflow {

// ---------------------------------------------------------------------------
// PoleOrders
// ---------------------------------------------------------------------------

PoleOrders PoleOrders::from_orders(const std::vector<int>& odd_orders) {
    if (odd_orders.empty()) throw invalid_point_error("no pole orders given");
    PoleOrders o;
    for (size_t k = 0; k < odd_orders.size(); ++k) {
        int ord = odd_orders[k];
        if (ord < 1 || ord % 2 == 0)
            throw invalid_point_error("pole orders must be odd and positive, got " +
                                      std::to_string(ord));
        if (k == 0)
            o.m_inf = (ord + 1) / 2;
        else
            o.m_fin.push_back((ord + 1) / 2);
    }
    o.validate();
    return o;
}

int PoleOrders::n() const {
    int s = m_inf - 3;
    for (int m : m_fin) s += m;
    return s;
}

void PoleOrders::validate() const {
    if (m_inf < 3)
        throw invalid_point_error("pole order at infinity must be at least 5 (m_inf >= 3)");
    for (int m : m_fin)
        if (m < 1) throw invalid_point_error("finite pole orders must be at least 1");
    if (n() < 1)
        throw invalid_point_error("configuration has n = " + std::to_string(n()) +
                                  "; need n >= 1 (the single order-5 pole case is excluded)");
}

std::string PoleOrders::str() const {
    std::string s = "{" + std::to_string(2 * m_inf - 1);
    for (int m : m_fin) s += "," + std::to_string(2 * m - 1);
    return s + "}";
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

namespace {

bool scalars_equal_value(const Scalar& a, const Scalar& b, double tol) {
    Scalar d = a.value() - b.value();
    if (d.is_exact()) return d.is_zero();
    double scale = std::max({a.abs(), b.abs(), 1.0});
    return d.abs() <= tol * scale;
}

bool scalar_nonzero(const Scalar& s, double tol, double scale = 1.0) {
    if (s.value().is_exact()) return !s.value_is_zero();
    return s.abs() > tol * std::max(scale, 1.0);
}

}  // namespace

void validate_point(const PoleOrders& orders, const ModuliPoint& pt, double tol) {
    orders.validate();
    if (pt.a_inf.size() != static_cast<size_t>(orders.a_inf_count()))
        throw invalid_point_error("a_inf has " + std::to_string(pt.a_inf.size()) +
                                  " entries; expected " + std::to_string(orders.a_inf_count()));
    if (pt.poles.size() != orders.num_poles())
        throw invalid_point_error("finite pole data count mismatch");
    for (size_t a = 0; a < pt.poles.size(); ++a) {
        if (pt.poles[a].a.size() != static_cast<size_t>(orders.a_fin_count(a)))
            throw invalid_point_error("Laurent data at pole " + std::to_string(a) +
                                      " has wrong length");
        if (!scalar_nonzero(pt.poles[a].a.back(), tol))
            throw invalid_point_error("leading Laurent coefficient vanishes at pole " +
                                      std::to_string(a) + " (pole order would drop)");
        for (size_t b = 0; b < a; ++b)
            if (scalars_equal_value(pt.poles[a].w, pt.poles[b].w, tol))
                throw invalid_point_error("coincident poles w_" + std::to_string(b) + " = w_" +
                                          std::to_string(a));
    }
    // simple zeros of Q0, none at a pole
    Polynomial p0 = clearing_polynomial_base(orders, pt);
    Scalar disc = Polynomial::discriminant(p0);
    double scale = std::pow(std::max(1.0, p0.max_abs()), std::max(1, 2 * p0.degree() - 2));
    if (!scalar_nonzero(disc, tol, scale))
        throw degeneracy_error("Q0 has a repeated zero (base discriminant vanishes)");
    for (const auto& pole : pt.poles)
        if (!scalar_nonzero(p0.eval(pole.w), tol, p0.max_abs()))
            throw degeneracy_error("zero of Q0 collides with a pole");
}

void validate_extended(const PoleOrders& orders, const ExtendedPoint& pt, double tol) {
    validate_point(orders, pt.base, tol);
    size_t n = static_cast<size_t>(orders.n());
    if (pt.q.size() != n || pt.v.size() != n || pt.eps.size() != n)
        throw invalid_point_error("extended point needs q, v, eps of length n");
    for (int e : pt.eps)
        if (e != 1 && e != -1) throw invalid_point_error("eps entries must be +1 or -1");
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < i; ++j)
            if (scalars_equal_value(pt.q[i], pt.q[j], tol))
                throw invalid_point_error("coincident apparent singularities q_" +
                                          std::to_string(j) + " = q_" + std::to_string(i));
        for (const auto& pole : pt.base.poles)
            if (scalars_equal_value(pt.q[i], pole.w, tol))
                throw invalid_point_error("q_" + std::to_string(i) + " collides with a pole");
    }
    RationalFunction q0 = build_Q0(orders, pt.base);
    for (size_t i = 0; i < n; ++i)
        if (!scalar_nonzero(q0.eval(pt.q[i]), tol))
            throw invalid_point_error("Q0 vanishes at q_" + std::to_string(i) +
                                      " (branch point collision)");
}

// ---------------------------------------------------------------------------
// CoordinateLayout
// ---------------------------------------------------------------------------

CoordinateLayout::CoordinateLayout(const PoleOrders& orders) : n_(orders.n()) {
    for (int i = 0; i < orders.a_inf_count(); ++i) {
        if (i <= orders.m_inf - 4) low_.push_back(static_cast<int>(slots_.size()));
        slots_.push_back({0, -1, i});
    }
    for (size_t a = 0; a < orders.num_poles(); ++a) {
        slots_.push_back({1, static_cast<int>(a), 0});
        for (int i = 1; i <= orders.a_fin_count(a); ++i) {
            if (i <= orders.m_fin[a]) low_.push_back(static_cast<int>(slots_.size()));
            slots_.push_back({2, static_cast<int>(a), i});
        }
    }
    base_dim_ = static_cast<int>(slots_.size());
    for (int I = 0; I < n_; ++I) slots_.push_back({3, -1, I});
    for (int I = 0; I < n_; ++I) slots_.push_back({4, -1, I});
}

int CoordinateLayout::a_inf_index(int i) const {
    for (size_t k = 0; k < slots_.size(); ++k)
        if (slots_[k].kind == 0 && slots_[k].i == i) return static_cast<int>(k);
    throw invalid_point_error("no coordinate a_inf[" + std::to_string(i) + "]");
}

int CoordinateLayout::w_index(int alpha) const {
    for (size_t k = 0; k < slots_.size(); ++k)
        if (slots_[k].kind == 1 && slots_[k].alpha == alpha) return static_cast<int>(k);
    throw invalid_point_error("no coordinate w[" + std::to_string(alpha) + "]");
}

int CoordinateLayout::a_fin_index(int alpha, int i) const {
    for (size_t k = 0; k < slots_.size(); ++k)
        if (slots_[k].kind == 2 && slots_[k].alpha == alpha && slots_[k].i == i)
            return static_cast<int>(k);
    throw invalid_point_error("no coordinate a[" + std::to_string(alpha) + "][" +
                              std::to_string(i) + "]");
}

std::string CoordinateLayout::name(int k) const {
    const Slot& s = slots_.at(static_cast<size_t>(k));
    switch (s.kind) {
        case 0: return "a_inf[" + std::to_string(s.i) + "]";
        case 1: return "w[" + std::to_string(s.alpha) + "]";
        case 2: return "a[" + std::to_string(s.alpha) + "][" + std::to_string(s.i) + "]";
        case 3: return "q[" + std::to_string(s.i) + "]";
        default: return "v[" + std::to_string(s.i) + "]";
    }
}

Scalar CoordinateLayout::get(const ExtendedPoint& pt, int k) const {
    const Slot& s = slots_.at(static_cast<size_t>(k));
    switch (s.kind) {
        case 0: return pt.base.a_inf[static_cast<size_t>(s.i)];
        case 1: return pt.base.poles[static_cast<size_t>(s.alpha)].w;
        case 2: return pt.base.poles[static_cast<size_t>(s.alpha)].a[static_cast<size_t>(s.i - 1)];
        case 3: return pt.q[static_cast<size_t>(s.i)];
        default: return pt.v[static_cast<size_t>(s.i)];
    }
}

void CoordinateLayout::set(ExtendedPoint& pt, int k, const Scalar& val) const {
    const Slot& s = slots_.at(static_cast<size_t>(k));
    switch (s.kind) {
        case 0: pt.base.a_inf[static_cast<size_t>(s.i)] = val; break;
        case 1: pt.base.poles[static_cast<size_t>(s.alpha)].w = val; break;
        case 2: pt.base.poles[static_cast<size_t>(s.alpha)].a[static_cast<size_t>(s.i - 1)] = val; break;
        case 3: pt.q[static_cast<size_t>(s.i)] = val; break;
        default: pt.v[static_cast<size_t>(s.i)] = val; break;
    }
}

ExtendedPoint CoordinateLayout::seed_jet(const ExtendedPoint& pt, int k) const {
    ExtendedPoint out = pt;
    for (int j = 0; j < total_dim(); ++j)
        set(out, j, get(pt, j).with_tangent(j == k ? Scalar(1L) : Scalar(0L)));
    return out;
}

ExtendedPoint CoordinateLayout::seed_tangent(const ExtendedPoint& pt,
                                             const std::vector<Scalar>& dir) const {
    if (dir.size() != static_cast<size_t>(total_dim()))
        throw error("tangent direction has wrong dimension");
    ExtendedPoint out = pt;
    for (int j = 0; j < total_dim(); ++j)
        set(out, j, get(pt, j).with_tangent(dir[static_cast<size_t>(j)]));
    return out;
}

std::vector<Scalar> CoordinateLayout::read_tangent(const ExtendedPoint& pt) const {
    std::vector<Scalar> out;
    out.reserve(static_cast<size_t>(total_dim()));
    for (int j = 0; j < total_dim(); ++j) out.push_back(get(pt, j).tangent());
    return out;
}

// ---------------------------------------------------------------------------
// potentials
// ---------------------------------------------------------------------------

namespace {

// prod over finite poles of (x - w_beta)^{e(beta)}
Polynomial pole_product(const ModuliPoint& pt, const std::vector<int>& exps) {
    std::vector<Scalar> roots;
    for (size_t a = 0; a < pt.poles.size(); ++a)
        for (int k = 0; k < exps[a]; ++k) roots.push_back(pt.poles[a].w);
    return Polynomial::from_roots(roots);
}

Polynomial poly_part_Q0(const PoleOrders& orders, const ModuliPoint& pt) {
    Polynomial p = Polynomial::monomial(2 * orders.m_inf - 5, Scalar(1L));
    for (int i = 0; i < orders.a_inf_count(); ++i)
        p = p + Polynomial::monomial(i, pt.a_inf[static_cast<size_t>(i)]);
    return p;
}

}  // namespace

Polynomial clearing_polynomial_base(const PoleOrders& orders, const ModuliPoint& pt) {
    size_t np = orders.num_poles();
    std::vector<int> full(np);
    for (size_t a = 0; a < np; ++a) full[a] = 2 * orders.m_fin[a] - 1;
    Polynomial w_all = pole_product(pt, full);
    Polynomial num = poly_part_Q0(orders, pt) * w_all;
    for (size_t a = 0; a < np; ++a) {
        for (int i = 1; i <= orders.a_fin_count(a); ++i) {
            std::vector<int> exps = full;
            exps[a] = full[a] - i;
            num = num + pole_product(pt, exps) * pt.a_fin(a, i);
        }
    }
    return num;
}

RationalFunction build_Q0(const PoleOrders& orders, const ModuliPoint& pt) {
    std::vector<int> full(orders.num_poles());
    for (size_t a = 0; a < full.size(); ++a) full[a] = 2 * orders.m_fin[a] - 1;
    return RationalFunction(clearing_polynomial_base(orders, pt), pole_product(pt, full));
}

Polynomial pole_poly_F(const PoleOrders& orders, const ModuliPoint& pt) {
    std::vector<int> exps(orders.num_poles());
    for (size_t a = 0; a < exps.size(); ++a) exps[a] = orders.m_fin[a];
    return pole_product(pt, exps);
}

Scalar compute_p(const PoleOrders& orders, const ExtendedPoint& pt, size_t I) {
    RationalFunction q0 = build_Q0(orders, pt.base);
    Scalar val = q0.eval(pt.q[I]);
    if (val.value_is_zero())
        throw invalid_point_error("Q0(q_" + std::to_string(I) + ") = 0: branch point collision");
    Scalar root = val.sqrt();
    return pt.eps[I] == 1 ? root : -root;
}

std::vector<Scalar> compute_p_all(const PoleOrders& orders, const ExtendedPoint& pt) {
    std::vector<Scalar> p;
    RationalFunction q0 = build_Q0(orders, pt.base);
    for (size_t I = 0; I < pt.q.size(); ++I) {
        Scalar val = q0.eval(pt.q[I]);
        if (val.value_is_zero())
            throw invalid_point_error("Q0(q_" + std::to_string(I) + ") = 0: branch point collision");
        Scalar root = val.sqrt();
        p.push_back(pt.eps[I] == 1 ? root : -root);
    }
    return p;
}

Scalar compute_u(const PoleOrders& orders, const ExtendedPoint& pt, size_t I, const Scalar& hbar) {
    return compute_p(orders, pt, I) / hbar + pt.v[I];
}

namespace {

// Lagrange numerator: sum_I node_I * F(q_I) * prod_{J != I} (x - q_J)/(q_I - q_J)
Polynomial lagrange_numerator(const std::vector<Scalar>& q, const Polynomial& F,
                              const std::vector<Scalar>& node) {
    size_t n = q.size();
    Polynomial num;
    for (size_t I = 0; I < n; ++I) {
        std::vector<Scalar> roots;
        Scalar denom(1L);
        for (size_t J = 0; J < n; ++J) {
            if (J == I) continue;
            roots.push_back(q[J]);
            denom *= q[I] - q[J];
        }
        num = num + Polynomial::from_roots(roots) * (node[I] * F.eval(q[I]) / denom);
    }
    return num;
}

std::vector<Scalar> r_nodes(const ExtendedPoint& pt, const std::vector<Scalar>& p) {
    size_t n = pt.q.size();
    std::vector<Scalar> node;
    for (size_t I = 0; I < n; ++I) {
        Scalar s = 2 * p[I] * pt.v[I];
        for (size_t K = 0; K < n; ++K)
            if (K != I) s -= p[K] / (pt.q[I] - pt.q[K]);
        node.push_back(s);
    }
    return node;
}

std::vector<Scalar> s_nodes(const ExtendedPoint& pt) {
    size_t n = pt.q.size();
    std::vector<Scalar> node;
    for (size_t I = 0; I < n; ++I) {
        Scalar s = pt.v[I] * pt.v[I];
        for (size_t K = 0; K < n; ++K) {
            if (K == I) continue;
            Scalar d = pt.q[I] - pt.q[K];
            s -= Scalar::exact(3, 4) / (d * d);
            s -= pt.v[K] / d;
        }
        node.push_back(s);
    }
    return node;
}

// numerator of Q1 over den = prod(x - q_I) * F
Polynomial q1_numerator(const PoleOrders& orders, const ExtendedPoint& pt,
                        const std::vector<Scalar>& p, const Polynomial& F) {
    size_t n = pt.q.size();
    Polynomial num;
    for (size_t I = 0; I < n; ++I) {
        std::vector<Scalar> roots;
        for (size_t J = 0; J < n; ++J)
            if (J != I) roots.push_back(pt.q[J]);
        num = num + Polynomial::from_roots(roots) * p[I] * F;
    }
    num = num + lagrange_numerator(pt.q, F, r_nodes(pt, p)) * Polynomial::from_roots(pt.q);
    (void)orders;
    return num;
}

// numerator of Q2 over den = prod(x - q_I)^2 * F
Polynomial q2_numerator(const PoleOrders& orders, const ExtendedPoint& pt, const Polynomial& F) {
    size_t n = pt.q.size();
    Polynomial num;
    for (size_t I = 0; I < n; ++I) {
        std::vector<Scalar> rsq;
        for (size_t J = 0; J < n; ++J)
            if (J != I) { rsq.push_back(pt.q[J]); rsq.push_back(pt.q[J]); }
        Polynomial base = Polynomial::from_roots(rsq);
        Polynomial lin = Polynomial::from_roots({pt.q[I]});
        num = num + base * F * Scalar::exact(3, 4);
        num = num + base * lin * F * pt.v[I];
    }
    Polynomial gq = Polynomial::from_roots(pt.q);
    num = num + lagrange_numerator(pt.q, F, s_nodes(pt)) * gq * gq;
    (void)orders;
    return num;
}

}  // namespace

RationalFunction build_R(const PoleOrders& orders, const ExtendedPoint& pt) {
    Polynomial F = pole_poly_F(orders, pt.base);
    std::vector<Scalar> p = compute_p_all(orders, pt);
    return RationalFunction(lagrange_numerator(pt.q, F, r_nodes(pt, p)), F);
}

RationalFunction build_S(const PoleOrders& orders, const ExtendedPoint& pt) {
    Polynomial F = pole_poly_F(orders, pt.base);
    return RationalFunction(lagrange_numerator(pt.q, F, s_nodes(pt)), F);
}

RationalFunction build_Q1(const PoleOrders& orders, const ExtendedPoint& pt) {
    Polynomial F = pole_poly_F(orders, pt.base);
    std::vector<Scalar> p = compute_p_all(orders, pt);
    return RationalFunction(q1_numerator(orders, pt, p, F), Polynomial::from_roots(pt.q) * F);
}

RationalFunction build_Q2(const PoleOrders& orders, const ExtendedPoint& pt) {
    Polynomial F = pole_poly_F(orders, pt.base);
    Polynomial gq = Polynomial::from_roots(pt.q);
    return RationalFunction(q2_numerator(orders, pt, F), gq * gq * F);
}

PotentialTriple build_potentials(const PoleOrders& orders, const ExtendedPoint& pt) {
    return {build_Q0(orders, pt.base), build_Q1(orders, pt), build_Q2(orders, pt)};
}

RationalFunction assemble_Q(const PotentialTriple& t, const Scalar& hbar) {
    if (hbar.is_zero()) throw invalid_point_error("hbar must be nonzero");
    return t.Q0 / (hbar * hbar) + t.Q1 / hbar + t.Q2;
}

ApparentSingularityReport verify_apparent_singularity(const RationalFunction& Q,
                                                      const Scalar& q, const Scalar& u) {
    LocalSeries ls = puiseux_expand(Q, ExpansionSite::finite(q), 2);
    ApparentSingularityReport r{ls.coeff(-2) - Scalar::exact(3, 4), ls.coeff(-1) - u,
                                ls.coeff(0) - u * u, 0.0};
    r.max_residual = std::max({r.dev2.abs(), r.dev1.abs(), r.dev0.abs()});
    return r;
}

// ---------------------------------------------------------------------------
// local expansions of y
// ---------------------------------------------------------------------------

CurveBranch expand_y(const RationalFunction& q_of_x, const ExpansionSite& site, long order,
                     std::optional<Scalar> branch_sqrt) {
    LocalSeries s = puiseux_expand(q_of_x, site, 2 * order + 4);
    LocalSeries sval = s.value_part();
    if (sval.is_zero()) throw invalid_point_error("y^2 vanishes identically at expansion site");
    long v = sval.val();
    if (v % 2 != 0)
        throw degeneracy_error("odd valuation " + std::to_string(v) +
                               " of y^2 at site " + site.str() + " (branch point)");
    Scalar c0 = s.coeff(v);
    LocalSeries monic = s / c0;
    LocalSeries y = monic.sqrt(std::max(0L, order - v / 2) + 4);
    std::optional<Scalar> root;
    if (branch_sqrt) {
        Scalar sq = (*branch_sqrt) * (*branch_sqrt);
        Scalar d = sq.value() - c0.value();
        bool match = d.is_exact() ? d.is_zero()
                                  : d.abs() <= 1e-9 * std::max(c0.abs(), 1.0);
        if (!match)
            throw invalid_point_error("branch value does not square to the leading coefficient");
        Scalar r = c0.sqrt();
        if (!(r.value() == branch_sqrt->value())) {
            if (r.value().is_exact() && (-r).value() == branch_sqrt->value()) r = -r;
            else if (!r.value().is_exact() &&
                     ((-r).value() - branch_sqrt->value()).abs() < (r.value() - branch_sqrt->value()).abs())
                r = -r;
        }
        root = r;
    }
    return {c0, root, y};
}

bool NormalizedForm::scale_exact() const {
    return half_power % 2 == 0 || sqrt_c0.has_value();
}

Scalar NormalizedForm::scale() const {
    if (half_power % 2 == 0) return c0.pow(half_power / 2);
    if (sqrt_c0) return sqrt_c0->pow(half_power);
    return c0.sqrt().pow(half_power);
}

Scalar normalized_pairing(const NormalizedForm& a, const NormalizedForm& b, double residue_tol) {
    long total = a.half_power + b.half_power;
    Scalar scale;
    if (total % 2 == 0)
        scale = a.c0.pow(total / 2);
    else if (a.sqrt_c0)
        scale = a.sqrt_c0->pow(total);
    else if (b.sqrt_c0)
        scale = b.sqrt_c0->pow(total);
    else
        scale = a.c0.sqrt().pow(total);
    LocalSeries inv = a.body.antiderivative(residue_tol);
    return (inv * b.body).residue() * scale;
}

NormalizedForm tangent_form(const NormalizedForm& f) {
    LocalSeries body = f.body.tangent_part() +
                       f.body.value_part() *
                           (Scalar(f.half_power) * f.c0.tangent() / (2 * f.c0.value()));
    std::optional<Scalar> root;
    if (f.sqrt_c0) root = f.sqrt_c0->value();
    return {body, f.c0.value(), f.half_power, root};
}

NormalizedForm sigma_form(const RationalFunction& Q1, const CurveBranch& b,
                          const ExpansionSite& site, long order) {
    LocalSeries fac = dx_factor(site);
    LocalSeries f = puiseux_expand(Q1, site, order + 8);
    LocalSeries iy = b.y_norm.inverse(order + 8);
    LocalSeries body = ((f * iy * fac) / Scalar(2L)).truncate(order);
    return {body, b.c0, -1, b.sqrt_c0};
}

NormalizedForm tau_form(const PotentialTriple& t, const CurveBranch& b,
                        const ExpansionSite& site, long order) {
    RationalFunction num = t.Q0 * t.Q2 * Scalar(4L) - t.Q1 * t.Q1;
    LocalSeries fac = dx_factor(site);
    LocalSeries f = puiseux_expand(num, site, order + 8);
    LocalSeries y3 = b.y_norm * b.y_norm * b.y_norm;
    LocalSeries iy3 = y3.inverse(order + 8);
    LocalSeries body = ((f * iy3 * fac) / Scalar(8L)).truncate(order);
    return {body, b.c0, -3, b.sqrt_c0};
}

NormalizedForm psi_form(const CurveBranch& b, const ExpansionSite& site, long order) {
    LocalSeries body = (b.y_norm * dx_factor(site)).truncate(order);
    return {body, b.c0, 1, b.sqrt_c0};
}

// ---------------------------------------------------------------------------
// genericity and curve bookkeeping
// ---------------------------------------------------------------------------

Polynomial clearing_polynomial(const PoleOrders& orders, const ExtendedPoint& pt,
                               const Scalar& hbar) {
    if (hbar.is_zero()) throw invalid_point_error("hbar must be nonzero");
    Polynomial F = pole_poly_F(orders, pt.base);
    std::vector<Scalar> p = compute_p_all(orders, pt);
    Polynomial gq = Polynomial::from_roots(pt.q);
    std::vector<int> fg(orders.num_poles());
    for (size_t a = 0; a < fg.size(); ++a) fg[a] = orders.m_fin[a] - 1;
    Polynomial f_over_g = pole_product(pt.base, fg);

    Polynomial n0 = clearing_polynomial_base(orders, pt.base);
    Polynomial n1 = q1_numerator(orders, pt, p, F);
    Polynomial n2 = q2_numerator(orders, pt, F);
    return n0 * gq * gq + n1 * gq * f_over_g * hbar + n2 * f_over_g * (hbar * hbar);
}

GenericityResult genericity_check(const PoleOrders& orders, const ExtendedPoint& pt,
                                  const Scalar& hbar, double tol) {
    Polynomial sp = clearing_polynomial(orders, pt, hbar);
    GenericityResult r;
    r.degree = sp.degree();
    r.expected_degree = 4 * orders.n() + 1 - static_cast<int>(orders.num_poles());
    r.discriminant = Polynomial::discriminant(sp);
    double scale = std::pow(std::max(1.0, sp.max_abs()), std::max(1, 2 * sp.degree() - 2));
    r.simple_zeros = (r.degree == r.expected_degree) && scalar_nonzero(r.discriminant, tol, scale);
    if (r.simple_zeros) {
        // a zero of Q colliding with a pole would be invisible to the cleared
        // discriminant, so probe the pole locations directly
        for (const auto& pole : pt.base.poles)
            if (!scalar_nonzero(sp.eval(pole.w), tol, sp.max_abs()))
                r.simple_zeros = false;
        for (const Scalar& q : pt.q)
            if (!scalar_nonzero(sp.eval(q), tol, sp.max_abs()))
                r.simple_zeros = false;
    }
    return r;
}

CurveStats curve_stats(const PoleOrders& orders, const ExtendedPoint& pt, const Scalar& hbar) {
    GenericityResult g = genericity_check(orders, pt, hbar);
    if (!g.simple_zeros)
        throw degeneracy_error("curve_stats requires simple zeros (genericity failed)");
    int odd_poles = static_cast<int>(orders.num_poles()) + 1;
    CurveStats s;
    s.branch_points_sigma = g.degree + odd_poles;
    s.genus_sigma = s.branch_points_sigma / 2 - 1;
    Polynomial p0 = clearing_polynomial_base(orders, pt.base);
    s.branch_points_sigma0 = p0.degree() + odd_poles;
    s.genus_sigma0 = s.branch_points_sigma0 / 2 - 1;
    if (s.genus_sigma != 2 * orders.n() || s.genus_sigma0 != orders.n())
        throw degeneracy_error("genus bookkeeping mismatch: got (" +
                               std::to_string(s.genus_sigma) + ", " +
                               std::to_string(s.genus_sigma0) + "), expected (" +
                               std::to_string(2 * orders.n()) + ", " +
                               std::to_string(orders.n()) + ")");
    return s;
}

// ---------------------------------------------------------------------------
// derivatives of p and the independence matrix
// ---------------------------------------------------------------------------

Scalar dp_da_inf(const ExtendedPoint& pt, const std::vector<Scalar>& p, size_t I, int i) {
    return pt.q[I].pow(i) / (2 * p[I]);
}

Scalar dp_da_fin(const ExtendedPoint& pt, const std::vector<Scalar>& p, size_t I,
                 size_t alpha, int i) {
    return (pt.q[I] - pt.base.poles[alpha].w).pow(-i) / (2 * p[I]);
}

Matrix independence_matrix(const PoleOrders& orders, const ExtendedPoint& pt) {
    size_t n = static_cast<size_t>(orders.n());
    Matrix m(n, n);
    for (size_t I = 0; I < n; ++I) {
        size_t col = 0;
        for (int i = 0; i <= orders.m_inf - 4; ++i)
            m.at(I, col++) = pt.q[I].pow(i);
        for (size_t a = 0; a < orders.num_poles(); ++a)
            for (int i = 1; i <= orders.m_fin[a]; ++i)
                m.at(I, col++) = (pt.q[I] - pt.base.poles[a].w).pow(-i);
    }
    return m;
}

// ---------------------------------------------------------------------------
// deterministic random points
// ---------------------------------------------------------------------------

namespace {

class RationalSampler {
public:
    RationalSampler(unsigned long seed, long max_num, long max_den)
        : rng_(seed), max_num_(max_num), max_den_(max_den) {}

    long rand_int(long lo, long hi) {  // inclusive, deterministic across platforms
        return lo + static_cast<long>(rng_() % static_cast<unsigned long>(hi - lo + 1));
    }

    mpq_class rational() {
        mpq_class q(rand_int(-max_num_, max_num_), rand_int(1, max_den_));
        q.canonicalize();
        return q;
    }

    mpq_class nonzero_rational() {
        for (;;) {
            mpq_class q = rational();
            if (q != 0) return q;
        }
    }

    Scalar gaussian() {  // complex with probability ~1/2
        mpq_class re = rational();
        if (rng_() % 2 == 0) return Scalar(GaussianRational(re));
        return Scalar(GaussianRational(re, rational()));
    }

    Scalar nonzero_gaussian() {
        for (;;) {
            Scalar s = gaussian();
            if (!s.is_zero()) return s;
        }
    }

    bool coin() { return rng_() % 2 == 0; }

private:
    std::mt19937_64 rng_;
    long max_num_, max_den_;
};

}  // namespace

ExtendedPoint random_point(const PoleOrders& orders, const SampleConfig& cfg) {
    orders.validate();
    RationalSampler rs(cfg.seed, cfg.max_numerator, cfg.max_denominator);
    size_t n = static_cast<size_t>(orders.n());
    const CoordinateLayout layout(orders);

    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
        ExtendedPoint pt;
        pt.base.a_inf.assign(static_cast<size_t>(orders.a_inf_count()), Scalar(0L));
        // high-index infinity coefficients drawn freely; low-index solved later
        for (int i = 0; i < orders.a_inf_count(); ++i)
            if (!cfg.exact_eligible || i > orders.m_inf - 4)
                pt.base.a_inf[static_cast<size_t>(i)] = rs.gaussian();

        bool bad = false;
        for (size_t a = 0; a < orders.num_poles(); ++a) {
            FinitePoleData pd;
            pd.w = rs.gaussian();
            for (size_t b = 0; b < a && !bad; ++b)
                if (pd.w == pt.base.poles[b].w) bad = true;
            pd.a.assign(static_cast<size_t>(orders.a_fin_count(a)), Scalar(0L));
            for (int i = 1; i <= orders.a_fin_count(a); ++i)
                if (!cfg.exact_eligible || i > orders.m_fin[a])
                    pd.a[static_cast<size_t>(i - 1)] =
                        (i == orders.a_fin_count(a)) ? rs.nonzero_gaussian() : rs.gaussian();
            pt.base.poles.push_back(std::move(pd));
        }
        if (bad) continue;

        for (size_t I = 0; I < n; ++I) {
            Scalar q = rs.gaussian();
            for (size_t J = 0; J < I && !bad; ++J)
                if (q == pt.q[J]) bad = true;
            for (const auto& pole : pt.base.poles)
                if (q == pole.w) bad = true;
            pt.q.push_back(q);
            pt.v.push_back(rs.gaussian());
            pt.eps.push_back(rs.coin() ? 1 : -1);
        }
        if (bad) continue;

        if (cfg.exact_eligible) {
            // pick the p_I, then solve the n low-index Laurent coefficients so
            // that Q0(q_I) = p_I^2 in Q(i)
            std::vector<Scalar> p_target;
            for (size_t I = 0; I < n; ++I) p_target.push_back(rs.nonzero_gaussian());

            Matrix nm = independence_matrix(orders, pt);
            std::vector<Scalar> rhs;
            RationalFunction q0_high = build_Q0(orders, pt.base);  // low entries still zero
            for (size_t I = 0; I < n; ++I)
                rhs.push_back(p_target[I] * p_target[I] - q0_high.eval(pt.q[I]));
            std::vector<Scalar> low;
            try {
                low = nm.solve(rhs);
            } catch (const degeneracy_error&) {
                continue;
            }
            const auto& idx = layout.low_index_coords();
            for (size_t k = 0; k < idx.size(); ++k) layout.set(pt, idx[k], low[k]);

            // align eps with the principal root so compute_p returns p_target
            bool mismatch = false;
            for (size_t I = 0; I < n; ++I) {
                Scalar principal = (p_target[I] * p_target[I]).sqrt();
                if (principal == p_target[I])
                    pt.eps[I] = 1;
                else if (-principal == p_target[I])
                    pt.eps[I] = -1;
                else
                    mismatch = true;  // root not exact; cannot happen for rationals
            }
            if (mismatch) continue;
        } else {
            for (int i = 0; i <= orders.m_inf - 4 && i < orders.a_inf_count(); ++i)
                pt.base.a_inf[static_cast<size_t>(i)] = rs.gaussian();
            for (size_t a = 0; a < orders.num_poles(); ++a)
                for (int i = 1; i <= orders.m_fin[a]; ++i)
                    pt.base.poles[a].a[static_cast<size_t>(i - 1)] =
                        (i == orders.a_fin_count(a)) ? rs.nonzero_gaussian() : rs.gaussian();
        }

        try {
            validate_extended(orders, pt);
        } catch (const error&) {
            continue;
        }
        return pt;
    }
    throw degeneracy_error("failed to sample a valid point after " +
                           std::to_string(cfg.max_attempts) + " attempts");
}

}  // namespace qdflow
