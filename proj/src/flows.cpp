#include "qdflow/flows.hpp"

namespace qdflow {

namespace {

// Laurent-matching coefficients for the moving high-index pole coefficients.
// At infinity:
//   T_i(x) = (2i - 2m + 7) x^(2m-7-i) + sum_{k=i+2}^{2m-7} (2i - k + 2) a_k x^(k-i-2)
// where the first term comes from the fixed monic leading power x^(2m-5).
Scalar t_inf(const PoleOrders& orders, const ModuliPoint& mp, int i, const Scalar& x) {
    const long m = orders.m_inf;
    Scalar out = Scalar(2L * i - 2 * m + 7) * x.pow(2 * m - 7 - i);
    for (int k = i + 2; k <= 2 * m - 7; ++k)
        out = out + Scalar(2L * i - k + 2) * mp.a_inf[static_cast<size_t>(k)] *
                        x.pow(k - i - 2);
    return out;
}

// At a finite pole (x = distance q_I - w_alpha):
//   T_i(x) = sum_{k=i}^{2m_a-1} (2i - k - 2) a_k / x^(k-i+2)
Scalar t_fin(const PoleOrders& orders, const ModuliPoint& mp, size_t alpha, int i,
             const Scalar& x) {
    Scalar out(0L);
    for (int k = i; k <= 2 * orders.m_fin[alpha] - 1; ++k)
        out = out + Scalar(2L * i - k - 2) * mp.a_fin(alpha, k) * x.pow(-(k - i + 2));
    return out;
}

}  // namespace

std::vector<Scalar> FlowField::at(const Scalar& hbar) const {
    Scalar hinv = hbar.inv();
    std::vector<Scalar> out(u_part.size(), Scalar(0L));
    for (size_t k = 0; k < u_part.size(); ++k) out[k] = u_part[k] + v_part[k] * hinv;
    return out;
}

RationalFunction q0_dot(const PoleOrders& orders, const ExtendedPoint& pt,
                        const std::vector<Scalar>& tangent) {
    CoordinateLayout layout(orders);
    ExtendedPoint jp = layout.seed_tangent(pt, tangent);
    return build_Q0(orders, jp.base).tangent_part();
}

std::vector<FlowField> isopotential_flows(const PoleOrders& orders,
                                          const ExtendedPoint& pt) {
    CoordinateLayout layout(orders);
    const int dim = layout.total_dim();
    const size_t n = pt.q.size();
    std::vector<FlowField> out;
    for (int slot : layout.low_index_coords()) {
        FlowField f;
        f.u_part.assign(static_cast<size_t>(dim), Scalar(0L));
        f.v_part.assign(static_cast<size_t>(dim), Scalar(0L));
        f.u_part[static_cast<size_t>(slot)] = Scalar(1L);
        ExtendedPoint jp = layout.seed_jet(pt, slot);
        for (size_t I = 0; I < n; ++I) {
            Scalar pj = compute_p(orders, jp, I);
            f.v_part[static_cast<size_t>(layout.v_index(static_cast<int>(I)))] =
                -pj.tangent();
        }
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<FlowField> main_flows(const PoleOrders& orders, const ExtendedPoint& pt) {
    CoordinateLayout layout(orders);
    const size_t n = pt.q.size();
    const size_t dim = static_cast<size_t>(layout.total_dim());
    std::vector<Scalar> p = compute_p_all(orders, pt);
    RationalFunction q0p = build_Q0(orders, pt.base).derivative();
    RationalFunction rp = build_R(orders, pt).derivative();
    RationalFunction sp = build_S(orders, pt).derivative();

    std::vector<FlowField> out;
    for (size_t I = 0; I < n; ++I) {
        FlowField f;
        f.u_part.assign(dim, Scalar(0L));
        f.v_part.assign(dim, Scalar(0L));
        const Scalar& qI = pt.q[I];

        f.u_part[static_cast<size_t>(layout.q_index(static_cast<int>(I)))] =
            Scalar(-2L) * pt.v[I];
        f.v_part[static_cast<size_t>(layout.q_index(static_cast<int>(I)))] =
            Scalar(-2L) * p[I];
        for (size_t K = 0; K < n; ++K) {
            if (K == I) continue;
            f.u_part[static_cast<size_t>(layout.q_index(static_cast<int>(K)))] =
                -(pt.q[K] - qI).inv();
        }
        for (size_t a = 0; a < orders.num_poles(); ++a)
            f.u_part[static_cast<size_t>(layout.w_index(static_cast<int>(a)))] =
                (qI - pt.base.poles[a].w).inv();
        for (int i = orders.m_inf - 3; i <= 2 * orders.m_inf - 7; ++i)
            f.u_part[static_cast<size_t>(layout.a_inf_index(i))] =
                t_inf(orders, pt.base, i, qI);
        for (size_t a = 0; a < orders.num_poles(); ++a)
            for (int i = orders.m_fin[a] + 1; i <= 2 * orders.m_fin[a] - 1; ++i)
                f.u_part[static_cast<size_t>(layout.a_fin_index(static_cast<int>(a), i))] =
                    t_fin(orders, pt.base, a, i, qI - pt.base.poles[a].w);

        // motion of Q0 at fixed x induced by the base components above
        RationalFunction qdot0 = q0_dot(orders, pt, f.u_part);

        for (size_t K = 0; K < n; ++K) {
            if (K == I) {
                Scalar acc_u = -sp.eval(qI);
                Scalar acc_v = -rp.eval(qI) + q0p.eval(qI) * pt.v[I] / p[I] -
                               qdot0.eval(qI) / (Scalar(2L) * p[I]);
                for (size_t J = 0; J < n; ++J) {
                    if (J == I) continue;
                    Scalar d = qI - pt.q[J];
                    acc_u = acc_u + Scalar::exact(3, 2) * d.pow(-3) + pt.v[J] * d.pow(-2);
                    acc_v = acc_v + p[J] * d.pow(-2);
                }
                f.u_part[static_cast<size_t>(layout.v_index(static_cast<int>(I)))] = acc_u;
                f.v_part[static_cast<size_t>(layout.v_index(static_cast<int>(I)))] = acc_v;
            } else {
                Scalar d = pt.q[K] - qI;
                f.u_part[static_cast<size_t>(layout.v_index(static_cast<int>(K)))] =
                    Scalar::exact(3, 2) * d.pow(-3) - pt.v[K] * d.pow(-2);
                f.v_part[static_cast<size_t>(layout.v_index(static_cast<int>(K)))] =
                    q0p.eval(pt.q[K]) / (Scalar(2L) * p[K] * d) - p[K] * d.pow(-2) -
                    qdot0.eval(pt.q[K]) / (Scalar(2L) * p[K]);
            }
        }

        f.gauge = RationalFunction(Polynomial(Scalar(1L)),
                                   Polynomial(std::vector<Scalar>{-qI, Scalar(1L)}));
        out.push_back(std::move(f));
    }
    return out;
}

RationalFunction directional_derivative_Q(const PoleOrders& orders,
                                          const ExtendedPoint& pt, const Scalar& hbar,
                                          const std::vector<Scalar>& tangent) {
    CoordinateLayout layout(orders);
    ExtendedPoint jp = layout.seed_tangent(pt, tangent);
    PotentialTriple t = build_potentials(orders, jp);
    return assemble_Q(t, hbar).tangent_part();
}

FlatnessReport flatness_residual(const PoleOrders& orders, const ExtendedPoint& pt,
                                 const Scalar& hbar, const FlowField& flow) {
    RationalFunction lhs =
        directional_derivative_Q(orders, pt, hbar, flow.at(hbar)) * Scalar(-2L);
    RationalFunction rhs;  // zero when there is no gauge function
    if (flow.gauge) {
        RationalFunction q = assemble_Q(build_potentials(orders, pt), hbar);
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

Matrix frame_matrix(const PoleOrders& orders, const ExtendedPoint& pt) {
    CoordinateLayout layout(orders);
    const size_t dim = static_cast<size_t>(layout.total_dim());
    std::vector<FlowField> mains = main_flows(orders, pt);
    std::vector<FlowField> isos = isopotential_flows(orders, pt);
    Matrix m(dim, dim);
    size_t col = 0;
    auto put = [&](const std::vector<Scalar>& v) {
        for (size_t r = 0; r < dim; ++r) m.at(r, col) = v[r];
        ++col;
    };
    for (const FlowField& f : mains) put(f.u_part);
    for (const FlowField& f : mains) put(f.v_part);
    for (const FlowField& f : isos) put(f.u_part);
    for (const FlowField& f : isos) put(f.v_part);
    return m;
}

IndependenceReport independence_report(const PoleOrders& orders, const ExtendedPoint& pt,
                                       double tol) {
    IndependenceReport rep;
    Matrix frame = frame_matrix(orders, pt);
    rep.rank = static_cast<long>(frame.rank(tol));
    rep.expected_rank = 4L * orders.n();
    rep.det_n = independence_matrix(orders, pt).det();
    return rep;
}

}  // namespace qdflow
