#include "qdflow/metric.hpp"

#include <algorithm>
#include <cmath>

#include "qdflow/flows.hpp"

namespace qdflow {

namespace {

Scalar imag_unit() { return Scalar(GaussianRational(mpq_class(0), mpq_class(1))); }

bool all_zero_exact(const Matrix& m) {
    for (size_t j = 0; j < m.rows(); ++j)
        for (size_t k = 0; k < m.cols(); ++k)
            if (!m.at(j, k).is_zero()) return false;
    return true;
}

double vec_max_abs(const std::vector<Scalar>& v) {
    double m = 0.0;
    for (const Scalar& s : v) m = std::max(m, s.abs());
    return m;
}

}  // namespace

QuaternionFrame frame_from_generators(const std::vector<FlowField>& gens) {
    size_t half = gens.size();
    size_t dim = 2 * half;
    QuaternionFrame fr;
    Matrix p(dim, dim);
    for (size_t a = 0; a < half; ++a) {
        fr.u_basis.push_back(gens[a].u_part);
        fr.v_basis.push_back(gens[a].v_part);
        for (size_t r = 0; r < dim; ++r) {
            p.at(r, a) = gens[a].u_part[r];
            p.at(r, half + a) = gens[a].v_part[r];
        }
    }
    Matrix pinv = p.inverse();  // degeneracy_error when the frame fails to span

    // Eigenbasis block actions: I is -i on the U's and +i on the V's;
    // J swaps U_a -> V_a -> -U_a; K = IJ sends U_a -> i V_a, V_a -> i U_a.
    Scalar i = imag_unit();
    Matrix di(dim, dim), dj(dim, dim), dk(dim, dim);
    for (size_t a = 0; a < half; ++a) {
        di.at(a, a) = -i;
        di.at(half + a, half + a) = i;
        dj.at(half + a, a) = Scalar(1L);
        dj.at(a, half + a) = Scalar(-1L);
        dk.at(half + a, a) = i;
        dk.at(a, half + a) = i;
    }
    fr.I = p * di * pinv;
    fr.J = p * dj * pinv;
    fr.K = p * dk * pinv;
    return fr;
}

QuaternionFrame build_frame(const PoleOrders& orders, const ExtendedPoint& pt) {
    std::vector<FlowField> gens = main_flows(orders, pt);
    std::vector<FlowField> iso = isopotential_flows(orders, pt);
    gens.insert(gens.end(), iso.begin(), iso.end());
    return frame_from_generators(gens);
}

FrameReport frame_relations(const QuaternionFrame& fr) {
    size_t dim = fr.I.rows();
    Matrix id = Matrix::identity(dim);
    Scalar i = imag_unit();

    std::vector<Matrix> rels = {fr.I * fr.I + id, fr.J * fr.J + id, fr.K * fr.K + id,
                                fr.I * fr.J * fr.K + id};
    double op = std::max({1.0, fr.I.max_abs(), fr.J.max_abs(), fr.K.max_abs()});
    FrameReport rep;
    rep.exact_zero = true;
    for (const Matrix& r : rels) {
        rep.max_residual = std::max(rep.max_residual, r.max_abs() / (op * op));
        if (!all_zero_exact(r)) rep.exact_zero = false;
    }
    for (size_t a = 0; a < fr.u_basis.size(); ++a) {
        const std::vector<Scalar>& u = fr.u_basis[a];
        const std::vector<Scalar>& v = fr.v_basis[a];
        std::vector<Scalar> ju = fr.J.apply(u), ku = fr.K.apply(u);
        std::vector<Scalar> jv = fr.J.apply(v), kv = fr.K.apply(v);
        double scale = std::max({1.0, vec_max_abs(u), vec_max_abs(v)}) * op;
        for (size_t r = 0; r < dim; ++r) {
            // J U_a = V_a, K U_a = i V_a, (J - iK)/2: U_a -> V_a -> 0
            Scalar c1 = ju[r] - v[r];
            Scalar c2 = ku[r] - i * v[r];
            Scalar c3 = (jv[r] - i * kv[r]) / Scalar(2L);
            for (const Scalar& c : {c1, c2, c3}) {
                rep.max_residual = std::max(rep.max_residual, c.abs() / scale);
                if (!c.is_zero()) rep.exact_zero = false;
            }
        }
    }
    return rep;
}

Matrix assemble_metric(const QuaternionFrame& fr, const Matrix& omega_I) {
    return fr.I.transpose() * omega_I * Scalar(-1L);
}

Matrix metric_at(const PoleOrders& orders, const ExtendedPoint& pt) {
    TwoFormParts parts = omega_parts_residue(orders, pt);
    Matrix omega_I = parts.mid * (-imag_unit());
    return assemble_metric(build_frame(orders, pt), omega_I);
}

double MetricReport::worst() const {
    return std::max({symmetry, hermiticity, annihilator_minus, annihilator_plus, jk_assembly,
                     kernel_minus, kernel_plus});
}

MetricReport metric_identities(const PoleOrders& orders, const ExtendedPoint& pt) {
    TwoFormParts parts = omega_parts_residue(orders, pt);
    QuaternionFrame fr = build_frame(orders, pt);
    Scalar i = imag_unit();
    Matrix omega_I = parts.mid * (-i);
    Matrix g = assemble_metric(fr, omega_I);

    MetricReport rep;
    rep.det_g = g.det();
    double gs = std::max(1.0, g.max_abs());
    double op = std::max({1.0, fr.I.max_abs(), fr.J.max_abs(), fr.K.max_abs()});
    double fs = std::max({1.0, parts.minus.max_abs(), omega_I.max_abs(), parts.plus.max_abs()});

    Matrix sym = g - g.transpose();
    rep.symmetry = sym.max_abs() / gs;
    bool exact = all_zero_exact(sym);

    for (const Matrix* a : {&fr.I, &fr.J, &fr.K}) {
        Matrix herm = a->transpose() * g * (*a) - g;
        rep.hermiticity = std::max(rep.hermiticity, herm.max_abs() / (gs * op * op));
        exact = exact && all_zero_exact(herm);
    }

    // -(Om_- + Om_+)(J.,.) = g and (Om_- - Om_+)(K.,.) = i g.  With this
    // quaternion convention (K U_a = i V_a, forced by I J K = -Id) the K
    // identity carries the factor i: both follow from the forward relations
    // Om_-+Om_+ = g(J.,.) and Om_--Om_+ = -i g(K.,.).
    Matrix ja = g + fr.J.transpose() * (parts.minus + parts.plus);
    Matrix ka = fr.K.transpose() * (parts.minus - parts.plus) - g * i;
    rep.jk_assembly = std::max(ja.max_abs(), ka.max_abs()) / (std::max(gs, fs) * op);
    exact = exact && all_zero_exact(ja) && all_zero_exact(ka);

    Matrix minus_t = parts.minus.transpose();
    Matrix plus_t = parts.plus.transpose();
    Matrix omega_I_t = omega_I.transpose();
    for (size_t a = 0; a < fr.u_basis.size(); ++a) {
        const std::vector<Scalar>& u = fr.u_basis[a];
        const std::vector<Scalar>& v = fr.v_basis[a];
        double vs = std::max({1.0, vec_max_abs(u), vec_max_abs(v)}) * fs;
        std::vector<Scalar> am = minus_t.apply(u), am2 = omega_I_t.apply(v);
        std::vector<Scalar> ap = plus_t.apply(v), ap2 = omega_I_t.apply(u);
        std::vector<Scalar> km = parts.minus.apply(v), kp = parts.plus.apply(u);
        for (size_t r = 0; r < am.size(); ++r) {
            Scalar c1 = am[r] + i * am2[r];  // Omega_-(U_a,.) + i Omega_I(V_a,.)
            Scalar c2 = ap[r] + i * ap2[r];  // Omega_+(V_a,.) + i Omega_I(U_a,.)
            rep.annihilator_minus = std::max(rep.annihilator_minus, c1.abs() / vs);
            rep.annihilator_plus = std::max(rep.annihilator_plus, c2.abs() / vs);
            rep.kernel_minus = std::max(rep.kernel_minus, km[r].abs() / vs);
            rep.kernel_plus = std::max(rep.kernel_plus, kp[r].abs() / vs);
            exact = exact && c1.is_zero() && c2.is_zero() && km[r].is_zero() && kp[r].is_zero();
        }
    }
    rep.exact_zero = exact;
    return rep;
}

Matrix ricci_numeric(const MetricField& g_of_x, const std::vector<std::complex<double>>& base,
                     double step) {
    using cd = std::complex<double>;
    size_t d = base.size();
    Scalar inv2h(cd(1.0 / (2.0 * step), 0.0));

    // Gamma^i_{jk} at x, as a vector over i of matrices over (j,k)
    auto christoffel = [&](const std::vector<cd>& x) {
        Matrix ginv = g_of_x(x).inverse();
        std::vector<Matrix> dg;
        dg.reserve(d);
        for (size_t l = 0; l < d; ++l) {
            std::vector<cd> xp = x, xm = x;
            xp[l] += step;
            xm[l] -= step;
            dg.push_back((g_of_x(xp) - g_of_x(xm)) * inv2h);
        }
        std::vector<Matrix> gam(d, Matrix(d, d));
        for (size_t ii = 0; ii < d; ++ii)
            for (size_t j = 0; j < d; ++j)
                for (size_t k = 0; k < d; ++k) {
                    Scalar s(0L);
                    for (size_t l = 0; l < d; ++l)
                        s = s + ginv.at(ii, l) *
                                    (dg[j].at(l, k) + dg[k].at(l, j) - dg[l].at(j, k));
                    gam[ii].at(j, k) = s / Scalar(2L);
                }
        return gam;
    };

    std::vector<Matrix> gam0 = christoffel(base);
    // dgam[l][i](j,k) = partial_l Gamma^i_{jk}
    std::vector<std::vector<Matrix>> dgam;
    dgam.reserve(d);
    for (size_t l = 0; l < d; ++l) {
        std::vector<cd> xp = base, xm = base;
        xp[l] += step;
        xm[l] -= step;
        std::vector<Matrix> gp = christoffel(xp), gm = christoffel(xm);
        std::vector<Matrix> row;
        row.reserve(d);
        for (size_t ii = 0; ii < d; ++ii) row.push_back((gp[ii] - gm[ii]) * inv2h);
        dgam.push_back(std::move(row));
    }

    // R_jk = d_i Gamma^i_jk - d_j Gamma^i_ik + Gamma^i_il Gamma^l_jk
    //        - Gamma^i_jl Gamma^l_ik
    Matrix ric(d, d);
    for (size_t j = 0; j < d; ++j)
        for (size_t k = 0; k < d; ++k) {
            Scalar s(0L);
            for (size_t ii = 0; ii < d; ++ii) {
                s = s + dgam[ii][ii].at(j, k) - dgam[j][ii].at(ii, k);
                for (size_t l = 0; l < d; ++l)
                    s = s + gam0[ii].at(ii, l) * gam0[l].at(j, k) -
                        gam0[ii].at(j, l) * gam0[l].at(ii, k);
            }
            ric.at(j, k) = s;
        }
    return ric;
}

}  // namespace qdflow
