#include "qdflow/pvi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace qdflow {

namespace {

using cd = std::complex<double>;

Scalar half() { return Scalar::exact(1, 2); }

bool near_zero(const Scalar& s, double tol) {
    return s.value_is_zero() || (!s.is_exact() && s.abs() < tol);
}

bool all_zero_exact(const Matrix& m) {
    for (size_t j = 0; j < m.rows(); ++j)
        for (size_t k = 0; k < m.cols(); ++k)
            if (!m.at(j, k).is_zero()) return false;
    return true;
}

// Q0 from the base coordinates alone (jets on a and w pass through).
RationalFunction base_Q0(const Scalar& a, const Scalar& w) {
    RationalFunction t0(Polynomial(a * (w - Scalar(1L))),
                        Polynomial::from_roots({Scalar(0L)}));
    RationalFunction t1(Polynomial(a * w), Polynomial::from_roots({Scalar(1L)}));
    RationalFunction tw(Polynomial(a), Polynomial::from_roots({w}));
    return t0 - t1 + tw;
}

// R = [-p x^2 + p(1+w-q) x + 2pq^2 - pq(1+w) + 2pvq(q-1)(q-w)] / (x(x-1)(x-w)),
// the part of Q1 with poles at 0, 1, w only; R(q) = 2pv.
RationalFunction corr_R(const Scalar& w, const Scalar& q, const Scalar& v,
                        const Scalar& p) {
    Scalar one(1L), two(2L);
    Scalar r0 = two * p * q * q - p * q * (one + w) + two * p * v * q * (q - one) * (q - w);
    Scalar r1 = p * (one + w - q);
    return RationalFunction(Polynomial(std::vector<Scalar>{r0, r1, -p}),
                            Polynomial::from_roots({Scalar(0L), one, w}));
}

// S = [-v x^2 + (v(1+w-q) - 3/4) x + v^2 q(q-1)(q-w) + q(v(2q-w-1) + 3/4)]
//     / (x(x-1)(x-w)), the part of Q2 with poles at 0, 1, w only; S(q) = v^2.
RationalFunction corr_S(const Scalar& w, const Scalar& q, const Scalar& v) {
    Scalar one(1L), two(2L);
    Scalar tq = Scalar::exact(3, 4);
    Scalar s0 = v * v * q * (q - one) * (q - w) + q * (v * (two * q - w - one) + tq);
    Scalar s1 = v * (one + w - q) - tq;
    return RationalFunction(Polynomial(std::vector<Scalar>{s0, s1, -v}),
                            Polynomial::from_roots({Scalar(0L), one, w}));
}

PviPoint seeded(const PviPoint& pt, const std::vector<Scalar>& tangent) {
    return PviPoint{pt.a.with_tangent(tangent[0]), pt.w.with_tangent(tangent[1]),
                    pt.q.with_tangent(tangent[2]), pt.v.with_tangent(tangent[3]), pt.eps};
}

NormalizedForm psi_tangent_at(const RationalFunction& q_jet, const ExpansionSite& site,
                              long order) {
    CurveBranch b = expand_y(q_jet, site, order);
    return tangent_form(psi_form(b, site, order));
}

}  // namespace

void pvi_validate(const PviPoint& pt, double tol) {
    if (pt.eps != 1 && pt.eps != -1)
        throw invalid_point_error("pvi: branch sign must be +1 or -1");
    if (near_zero(pt.a, tol) || near_zero(pt.w, tol) || near_zero(pt.w - Scalar(1L), tol))
        throw invalid_point_error("pvi: a w (w-1) = 0 is outside the moduli space");
    for (const Scalar& bad : {pt.q, pt.q - Scalar(1L), pt.q - pt.w})
        if (near_zero(bad, tol))
            throw invalid_point_error("pvi: apparent singularity q collides with a pole");
    Scalar q0q = base_Q0(pt.a.value(), pt.w.value()).eval(pt.q.value());
    if (near_zero(q0q, tol * tol))
        throw degeneracy_error("pvi: Q0(q) = 0, apparent singularity at a turning point");
}

Scalar pvi_p(const PviPoint& pt) {
    Scalar root = base_Q0(pt.a, pt.w).eval(pt.q).sqrt();
    return pt.eps == 1 ? root : -root;
}

PviPotentials pvi_potentials(const PviPoint& pt) {
    pvi_validate(pt);
    PviPotentials out;
    out.p = pvi_p(pt);
    out.Q0 = base_Q0(pt.a, pt.w);
    RationalFunction r = corr_R(pt.w, pt.q, pt.v, out.p);
    RationalFunction s = corr_S(pt.w, pt.q, pt.v);
    out.Q1 = RationalFunction(Polynomial(out.p), Polynomial::from_roots({pt.q})) + r;
    out.Q2 =
        RationalFunction(Polynomial(Scalar::exact(3, 4)), Polynomial::from_roots({pt.q, pt.q})) +
        RationalFunction(Polynomial(pt.v), Polynomial::from_roots({pt.q})) + s;

    // normalization identities of the correction terms
    Scalar dr = r.eval(pt.q) - Scalar(2L) * out.p * pt.v;
    Scalar ds = s.eval(pt.q) - pt.v * pt.v;
    double scale = std::max({1.0, out.p.abs(), pt.v.abs(), pt.q.abs()});
    if (dr.abs() > 1e-9 * scale * scale || ds.abs() > 1e-9 * scale * scale)
        throw error("pvi: correction-term normalization failed");
    return out;
}

RationalFunction pvi_assemble_Q(const PviPotentials& t, const Scalar& hbar) {
    Scalar hinv = hbar.inv();
    return t.Q0 * (hinv * hinv) + t.Q1 * hinv + t.Q2;
}

PviFlows pvi_flows(const PviPoint& pt) {
    pvi_validate(pt);
    return pvi_flows(pt, pvi_p(pt));
}

PviFlows pvi_flows(const PviPoint& pt, const Scalar& p) {
    const Scalar &a = pt.a, &w = pt.w, &q = pt.q, &v = pt.v;
    Scalar one(1L), two(2L);
    Scalar aw = w * (w - one) / (w - q);  // the gauge A(x) evaluated at x = w
    Scalar kappa = two * v * q * (q - one) + two * q - one;
    Scalar dpda = ((w - one) / q - w / (q - one) + (q - w).inv()) / (two * p);
    Scalar dpdw = a * (q.inv() - (q - one).inv() + (q - w).pow(-2)) / (two * p);

    Scalar rp = corr_R(w, q, v, p).derivative().eval(q);
    Scalar sp = corr_S(w, q, v).derivative().eval(q);
    Scalar q0p = base_Q0(a, w).derivative().eval(q);

    Scalar qq1 = q * (q - one);
    Scalar dv_bracket = qq1 * rp - p - q0p * kappa / (two * p) - aw * dpdw;

    PviFlows fl;
    fl.w_flow.u_part = {Scalar(0L), one, kappa / aw, (qq1 * sp - v) / aw};
    fl.w_flow.v_part = {Scalar(0L), Scalar(0L), two * p * qq1 / aw, dv_bracket / aw};
    fl.w_flow.gauge = RationalFunction(Polynomial::from_roots({Scalar(0L), one}),
                                       Polynomial::from_roots({q}));
    fl.a_flow.u_part = {one, Scalar(0L), Scalar(0L), Scalar(0L)};
    fl.a_flow.v_part = {Scalar(0L), Scalar(0L), Scalar(0L), -dpda};
    return fl;
}

RationalFunction pvi_directional_derivative_Q(const PviPoint& pt, const Scalar& hbar,
                                              const std::vector<Scalar>& tangent) {
    PviPoint jp = seeded(pt, tangent);
    return pvi_assemble_Q(pvi_potentials(jp), hbar).tangent_part();
}

FlatnessReport pvi_flatness_residual(const PviPoint& pt, const Scalar& hbar,
                                     const FlowField& flow) {
    RationalFunction lhs =
        pvi_directional_derivative_Q(pt, hbar, flow.at(hbar)) * Scalar(-2L);
    RationalFunction rhs;
    if (flow.gauge) {
        RationalFunction q = pvi_assemble_Q(pvi_potentials(pt), hbar);
        const RationalFunction& a = *flow.gauge;
        RationalFunction ap = a.derivative();
        rhs = ap.derivative().derivative() - q * ap * Scalar(4L) -
              q.derivative() * a * Scalar(2L);
    }
    FlatnessReport rep;
    if (RationalFunction::equal_exact(lhs, rhs)) {
        rep.exact_zero = true;
        rep.residual = 0.0;
    } else {
        rep.exact_zero = false;
        rep.residual = RationalFunction::diff_norm(lhs, rhs);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// two-form and metric
// ---------------------------------------------------------------------------

PviBaseFormReport pvi_base_form(const PviPoint& pt) {
    pvi_validate(pt);
    std::vector<ExpansionSite> sites = {
        ExpansionSite::finite(Scalar(0L), 2), ExpansionSite::finite(Scalar(1L), 2),
        ExpansionSite::finite(pt.w.value(), 2), ExpansionSite::infinity(2)};

    std::vector<RationalFunction> q0j = {base_Q0(pt.a.with_tangent(Scalar(1L)), pt.w),
                                         base_Q0(pt.a, pt.w.with_tangent(Scalar(1L)))};

    PviBaseFormReport rep{Matrix(2, 2), 0.0, true};
    for (size_t s = 0; s < sites.size(); ++s) {
        long ord = 32;
        for (int attempt = 0;; ++attempt) {
            try {
                NormalizedForm fa = psi_tangent_at(q0j[0], sites[s], ord);
                NormalizedForm fw = psi_tangent_at(q0j[1], sites[s], ord);
                Scalar val = normalized_pairing(fa, fw);
                rep.omega.at(0, 1) = rep.omega.at(0, 1) + val;
                rep.omega.at(1, 0) = rep.omega.at(1, 0) - val;
                if (s != 2) rep.fixed_pole_max = std::max(rep.fixed_pole_max, val.abs());
                if (!val.is_exact()) rep.exact = false;
                break;
            } catch (const truncation_error&) {
                if (attempt >= 2) throw;
                ord *= 2;
            }
        }
    }
    return rep;
}

QuaternionFrame pvi_frame(const PviPoint& pt) {
    PviFlows fl = pvi_flows(pt);
    return frame_from_generators({fl.w_flow, fl.a_flow});
}

PviPartsReport pvi_parts(const PviPoint& pt) {
    PviFlows fl = pvi_flows(pt);

    Matrix p(4, 4);
    for (size_t r = 0; r < 4; ++r) {
        p.at(r, 0) = fl.w_flow.u_part[r];
        p.at(r, 1) = fl.a_flow.u_part[r];
        p.at(r, 2) = fl.w_flow.v_part[r];
        p.at(r, 3) = fl.a_flow.v_part[r];
    }
    Matrix pinv = p.inverse();
    Matrix pit = pinv.transpose();

    // Unit-scale solution of the kernel conditions in the frame-dual basis
    // (order U_1, U_2, V_1, V_2): the minus part lives on U^1 ^ U^2, the plus
    // part on V^1 ^ V^2, and the mid part is pinned against both; one common
    // factor remains free.
    Scalar one(1L);
    Matrix mm(4, 4), md(4, 4), mp(4, 4);
    mm.at(0, 1) = one;
    mm.at(1, 0) = -one;
    md.at(1, 2) = one;
    md.at(2, 1) = -one;
    md.at(0, 3) = -one;
    md.at(3, 0) = one;
    mp.at(2, 3) = one;
    mp.at(3, 2) = -one;

    PviPartsReport rep;
    Matrix minus1 = pit * mm * pinv;
    Matrix mid1 = pit * md * pinv;
    Matrix plus1 = pit * mp * pinv;

    // pin: Omega_- = (1/2) dw /\ da, i.e. entry (w, a) = 1/2
    if (minus1.at(1, 0).value_is_zero())
        throw degeneracy_error("pvi: frame two-form degenerate on the base");
    rep.scale = half() / minus1.at(1, 0);
    rep.parts.minus = minus1 * rep.scale;
    rep.parts.mid = mid1 * rep.scale;
    rep.parts.plus = plus1 * rep.scale;

    Matrix target(4, 4);
    target.at(1, 0) = half();
    target.at(0, 1) = -half();
    Matrix dev = rep.parts.minus - target;
    rep.pin_residual = dev.max_abs();
    rep.exact = all_zero_exact(dev);
    return rep;
}

Matrix pvi_metric(const PviPoint& pt) {
    pvi_validate(pt);
    return pvi_metric(pt, pvi_p(pt));
}

Matrix pvi_metric(const PviPoint& pt, const Scalar& p) {
    const Scalar &a = pt.a, &w = pt.w, &q = pt.q, &v = pt.v;
    Scalar one(1L), two(2L);
    Scalar aw = w * (w - one) / (w - q);
    Scalar kappa = two * v * q * (q - one) + two * q - one;
    Scalar dpda = ((w - one) / q - w / (q - one) + (q - w).inv()) / (two * p);
    Scalar dpdw = a * (q.inv() - (q - one).inv() + (q - w).pow(-2)) / (two * p);

    Scalar rp = corr_R(w, q, v, p).derivative().eval(q);
    Scalar sp = corr_S(w, q, v).derivative().eval(q);
    Scalar q0p = base_Q0(a, w).derivative().eval(q);

    Scalar qq1 = q * (q - one);
    Scalar dv_bracket = qq1 * rp - p - q0p * kappa / (two * p) - aw * dpdw;
    Scalar ipa = dpda.inv();

    Matrix g(4, 4);
    Scalar g_aw = half() * kappa / (two * p * qq1);
    Scalar g_aq = -half() * aw / (two * p * qq1);
    Scalar g_wv = -half() * ipa;
    Scalar g_ww = ipa * ((qq1 * sp - v) / aw - kappa * dv_bracket / (two * p * qq1 * aw));
    Scalar g_wq = half() * ipa * dv_bracket / (two * p * qq1);
    g.at(0, 1) = g_aw;
    g.at(1, 0) = g_aw;
    g.at(0, 2) = g_aq;
    g.at(2, 0) = g_aq;
    g.at(1, 3) = g_wv;
    g.at(3, 1) = g_wv;
    g.at(1, 1) = g_ww;
    g.at(1, 2) = g_wq;
    g.at(2, 1) = g_wq;
    return g;
}

PviMetricReport pvi_metric_check(const PviPoint& pt) {
    QuaternionFrame fr = pvi_frame(pt);
    PviPartsReport parts = pvi_parts(pt);
    Matrix omega_i = parts.parts.mid * (-Scalar::exact_i());

    PviMetricReport rep;
    rep.g_display = pvi_metric(pt);
    rep.g_frame = assemble_metric(fr, omega_i);
    Matrix dev = rep.g_frame - rep.g_display;
    rep.match = dev.max_abs() / std::max(1.0, rep.g_frame.max_abs());
    rep.exact_match = all_zero_exact(dev);
    rep.frame_worst = frame_relations(fr).max_residual;
    rep.det_g = rep.g_frame.det();
    rep.euler_null = Scalar(4L) * pt.a * pt.a * rep.g_frame.at(0, 0);
    return rep;
}

// ---------------------------------------------------------------------------
// Painleve VI
// ---------------------------------------------------------------------------

Scalar pvi_rhs(const Scalar& qp, const Scalar& q, const Scalar& w) {
    Scalar one(1L);
    Scalar h = half();
    Scalar sum1 = q.inv() + (q - one).inv() + (q - w).inv();
    Scalar sum2 = w.inv() + (w - one).inv() + (q - w).inv();
    Scalar tail = one - w / (q * q) + (w - one) / ((q - one) * (q - one));
    Scalar pre = q * (q - one) * (q - w) / (w * w * (w - one) * (w - one));
    return h * sum1 * qp * qp - sum2 * qp + h * pre * tail;
}

Scalar pvi_equation_residual(const PviPoint& pt, const Scalar& hbar) {
    std::vector<Scalar> tang = pvi_flows(pt).w_flow.at(hbar);
    PviPoint jp = seeded(pt, tang);
    Scalar qdot_jet = pvi_flows(jp, pvi_p(jp)).w_flow.at(hbar)[2];
    return qdot_jet.tangent() - pvi_rhs(qdot_jet.value(), pt.q.value(), pt.w.value());
}

Scalar pvi_curve_residual(const Scalar& q, const Scalar& qp, const Scalar& qpp,
                          const Scalar& w) {
    return qpp - pvi_rhs(qp, q, w);
}

std::vector<PviBranchResidual> pvi_algebraic_check(const Scalar& w) {
    if (w.value_is_zero() || (w - Scalar(1L)).value_is_zero())
        throw invalid_point_error("pvi: algebraic branches need w outside {0, 1}");

    // branches of f(q, w) = 0 with the second implicit derivative from
    //   f_q q' + f_w = 0,   f_q q'' + f_qq q'^2 + 2 f_qw q' + f_ww = 0
    // (f_ww = 0 for all three factors).
    struct Factor {
        std::string name;
        std::vector<Scalar> roots;
        std::function<Scalar(const Scalar&)> fq, fw;
        Scalar fqq, fqw;
    };
    Scalar one(1L), two(2L);
    Scalar rw = w.sqrt();
    Scalar r1 = (one - w).sqrt();
    Scalar rq = (w * w + w).sqrt();

    std::vector<Factor> factors;
    factors.push_back({"q^2 - w",
                       {rw, -rw},
                       [&](const Scalar& q) { return two * q; },
                       [&](const Scalar&) { return Scalar(-1L); },
                       two,
                       Scalar(0L)});
    factors.push_back({"q^2 - 2q + w",
                       {one + r1, one - r1},
                       [&](const Scalar& q) { return two * q - two; },
                       [&](const Scalar&) { return Scalar(1L); },
                       two,
                       Scalar(0L)});
    factors.push_back({"q^2 - 2qw - w",
                       {w + rq, w - rq},
                       [&](const Scalar& q) { return two * q - two * w; },
                       [&](const Scalar& q) { return -two * q - one; },
                       two,
                       Scalar(-2L)});

    std::vector<PviBranchResidual> out;
    for (const Factor& f : factors)
        for (const Scalar& q : f.roots) {
            PviBranchResidual br;
            br.factor = f.name;
            br.q = q;
            Scalar fq = f.fq(q);
            if (near_zero(fq, 1e-12)) {
                br.skipped = true;
                br.residual = Scalar(0L);
                out.push_back(br);
                continue;
            }
            br.skipped = false;
            Scalar qp = -f.fw(q) / fq;
            Scalar qpp = -(two * f.fqw * qp + f.fqq * qp * qp) / fq;
            br.residual = pvi_curve_residual(q, qp, qpp, w);
            out.push_back(br);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Killing vector
// ---------------------------------------------------------------------------

PviKillingReport pvi_killing_check(const PviPoint& pt, double step) {
    pvi_validate(pt);
    Scalar one(1L), two(2L);
    Scalar p = pvi_p(pt);
    Scalar comp =
        pt.a * pt.w * (pt.w - one) / (two * p * pt.q * (pt.q - one) * (pt.q - pt.w));

    PviKillingReport rep;
    rep.component = comp;

    // K(Q1) = Q0 as rational functions in x (only Q1's v-dependence moves)
    PviPoint jp = pt;
    jp.v = pt.v.with_tangent(comp.value());
    PviPotentials pots = pvi_potentials(jp);
    RationalFunction dq1 = pots.Q1.tangent_part();
    RationalFunction q0 = pots.Q0.value_part();
    if (RationalFunction::equal_exact(dq1, q0)) {
        rep.exact = true;
        rep.dq1_residual = 0.0;
    } else {
        rep.exact = false;
        rep.dq1_residual = RationalFunction::diff_norm(dq1, q0);
    }

    // Lie derivative of the metric along K = comp * d_v by central
    // differences: (L_K g)_jk = K^v d_v g_jk + g_jv d_k K^v + g_vk d_j K^v,
    // with p continued to the root nearest the center value on the stencil.
    std::vector<cd> x0 = {pt.a.to_c64(), pt.w.to_c64(), pt.q.to_c64(), pt.v.to_c64()};
    cd p_ref = p.to_c64();
    auto p_at = [&](const PviPoint& px) {
        cd root = base_Q0(px.a, px.w).eval(px.q).sqrt().to_c64();
        return (std::abs(root - p_ref) <= std::abs(root + p_ref)) ? root : -root;
    };
    auto make_point = [](const std::vector<cd>& x) {
        return PviPoint{Scalar(x[0]), Scalar(x[1]), Scalar(x[2]), Scalar(x[3]), 1};
    };
    auto g_at = [&](const std::vector<cd>& x) {
        PviPoint px = make_point(x);
        return pvi_metric(px, Scalar(p_at(px)));
    };
    auto comp_at = [&](const std::vector<cd>& x) {
        PviPoint px = make_point(x);
        return (px.a * px.w * (px.w - one) /
                (two * Scalar(p_at(px)) * px.q * (px.q - one) * (px.q - px.w)))
            .to_c64();
    };

    Matrix g0 = g_at(x0);
    Scalar inv2h(cd(1.0 / (2.0 * step), 0.0));
    std::vector<Matrix> dg;
    std::vector<cd> dcomp(4);
    for (size_t l = 0; l < 4; ++l) {
        std::vector<cd> xp = x0, xm = x0;
        xp[l] += step;
        xm[l] -= step;
        dg.push_back((g_at(xp) - g_at(xm)) * inv2h);
        dcomp[l] = (comp_at(xp) - comp_at(xm)) / (2.0 * step);
    }

    double worst = 0.0;
    cd kv = comp.to_c64();
    for (size_t j = 0; j < 4; ++j)
        for (size_t k = 0; k < 4; ++k) {
            cd lie = kv * dg[3].at(j, k).to_c64() + g0.at(j, 3).to_c64() * dcomp[k] +
                     g0.at(3, k).to_c64() * dcomp[j];
            worst = std::max(worst, std::abs(lie));
        }
    rep.lie_residual = worst / std::max(1.0, g0.max_abs() * std::max(1.0, std::abs(kv)));
    return rep;
}

// ---------------------------------------------------------------------------
// trajectory integration
// ---------------------------------------------------------------------------

namespace {

struct RhsEval {
    cd dq, dv, p;
};

class PviRhs {
public:
    PviRhs(cd a, cd hbar, double singular_radius)
        : a_(a), hbar_(hbar), radius_(singular_radius) {}

    RhsEval operator()(double w, cd q, cd v, cd p_ref) const {
        if (std::abs(q) < radius_ || std::abs(q - cd(1.0)) < radius_ ||
            std::abs(q - cd(w)) < radius_)
            throw degeneracy_error("pvi: trajectory within the singular radius of a pole");
        PviPoint pt{Scalar(a_), Scalar(cd(w)), Scalar(q), Scalar(v), 1};
        cd root = base_Q0(pt.a, pt.w).eval(pt.q).sqrt().to_c64();
        cd p = (std::abs(root - p_ref) <= std::abs(root + p_ref)) ? root : -root;
        if (std::abs(p) < radius_)
            throw degeneracy_error(
                "pvi: trajectory within the singular radius of a turning point");
        std::vector<Scalar> t = pvi_flows(pt, Scalar(p)).w_flow.at(Scalar(hbar_));
        return RhsEval{t[2].to_c64(), t[3].to_c64(), p};
    }

private:
    cd a_, hbar_;
    double radius_;
};

}  // namespace

PviTrajectory pvi_integrate(const PviPoint& pt, const Scalar& hbar, double w_end,
                            const PviIntegrateOptions& opt) {
    pvi_validate(pt);
    if (std::abs(std::imag(pt.w.to_c64())) > 1e-12)
        throw invalid_point_error("pvi: integration path must start at real w");
    double w0 = std::real(pt.w.to_c64());
    if (w_end == w0) throw invalid_point_error("pvi: empty integration interval");

    PviRhs rhs(pt.a.to_c64(), hbar.to_c64(), opt.singular_radius);
    cd q = pt.q.to_c64(), v = pt.v.to_c64();
    cd p_ref = pvi_p(pt).to_c64();

    // Dormand-Prince 5(4) tableau
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600,
                        e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640,
                        e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    PviTrajectory traj;
    int n_out = std::max(8, opt.dense);
    double h_out = (w_end - w0) / n_out;
    double dir = h_out > 0 ? 1.0 : -1.0;

    traj.w.reserve(static_cast<size_t>(n_out) + 1);
    traj.w.push_back(w0);
    traj.q.push_back(q);
    traj.v.push_back(v);
    traj.p.push_back(p_ref);

    long attempts = 0;
    double h = h_out;
    for (int seg = 0; seg < n_out; ++seg) {
        double w = w0 + seg * h_out;
        double w_next = (seg + 1 == n_out) ? w_end : w0 + (seg + 1) * h_out;
        while (dir * (w_next - w) > 1e-14 * std::max(1.0, std::abs(w_next))) {
            if (++attempts > opt.max_steps)
                throw precision_error("pvi: integration exceeded the step budget");
            h = dir * std::min(std::abs(h), std::abs(w_next - w));

            RhsEval k1 = rhs(w, q, v, p_ref);
            RhsEval k2 = rhs(w + c2 * h, q + h * a21 * k1.dq, v + h * a21 * k1.dv, k1.p);
            RhsEval k3 = rhs(w + c3 * h, q + h * (a31 * k1.dq + a32 * k2.dq),
                             v + h * (a31 * k1.dv + a32 * k2.dv), k1.p);
            RhsEval k4 = rhs(w + c4 * h, q + h * (a41 * k1.dq + a42 * k2.dq + a43 * k3.dq),
                             v + h * (a41 * k1.dv + a42 * k2.dv + a43 * k3.dv), k1.p);
            RhsEval k5 = rhs(w + c5 * h,
                             q + h * (a51 * k1.dq + a52 * k2.dq + a53 * k3.dq + a54 * k4.dq),
                             v + h * (a51 * k1.dv + a52 * k2.dv + a53 * k3.dv + a54 * k4.dv),
                             k1.p);
            RhsEval k6 =
                rhs(w + h,
                    q + h * (a61 * k1.dq + a62 * k2.dq + a63 * k3.dq + a64 * k4.dq +
                             a65 * k5.dq),
                    v + h * (a61 * k1.dv + a62 * k2.dv + a63 * k3.dv + a64 * k4.dv +
                             a65 * k5.dv),
                    k1.p);
            cd q5 = q + h * (b1 * k1.dq + b3 * k3.dq + b4 * k4.dq + b5 * k5.dq + b6 * k6.dq);
            cd v5 = v + h * (b1 * k1.dv + b3 * k3.dv + b4 * k4.dv + b5 * k5.dv + b6 * k6.dv);
            RhsEval k7 = rhs(w + h, q5, v5, k1.p);

            cd eq = h * (e1 * k1.dq + e3 * k3.dq + e4 * k4.dq + e5 * k5.dq + e6 * k6.dq +
                         e7 * k7.dq);
            cd ev = h * (e1 * k1.dv + e3 * k3.dv + e4 * k4.dv + e5 * k5.dv + e6 * k6.dv +
                         e7 * k7.dv);
            double err = std::max(std::abs(eq) / (opt.abs_tol + opt.rel_tol * std::abs(q5)),
                                  std::abs(ev) / (opt.abs_tol + opt.rel_tol * std::abs(v5)));

            // branch-continuation cap: the root may move by less than half
            if (std::abs(k7.p - p_ref) > 0.5 * std::abs(p_ref)) {
                traj.rejected++;
                h *= 0.5;
                continue;
            }
            if (err > 1.0) {
                traj.rejected++;
                h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
                continue;
            }
            traj.steps++;
            w += h;
            q = q5;
            v = v5;
            p_ref = k7.p;
            h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-16), -0.2)));
        }
        traj.w.push_back(w_next);
        traj.q.push_back(q);
        traj.v.push_back(v);
        traj.p.push_back(p_ref);
    }

    // Painleve residual on the dense grid: 5-point finite differences of the
    // stored q against the closed-form right-hand side.
    for (size_t k = 2; k + 2 < traj.q.size(); ++k) {
        cd qm2 = traj.q[k - 2], qm1 = traj.q[k - 1], q0 = traj.q[k], qp1 = traj.q[k + 1],
           qp2 = traj.q[k + 2];
        cd d1 = (-qp2 + 8.0 * qp1 - 8.0 * qm1 + qm2) / (12.0 * h_out);
        cd d2 = (-qp2 + 16.0 * qp1 - 30.0 * q0 + 16.0 * qm1 - qm2) / (12.0 * h_out * h_out);
        Scalar res = pvi_curve_residual(Scalar(q0), Scalar(d1), Scalar(d2),
                                        Scalar(cd(traj.w[k], 0.0)));
        traj.max_pvi_residual = std::max(traj.max_pvi_residual, res.abs());
    }
    return traj;
}

}  // namespace qdflow
