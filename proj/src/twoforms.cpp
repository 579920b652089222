#include "qdflow/twoforms.hpp"

#include <cmath>
#include <complex>

#include <quadmath.h>

namespace qdflow {

namespace {

// Default series order at a double-cover site whose function has the given
// pole order in x; generous so that pairings reach s^-1 with margin.
long r2_order(int pole_order_in_x) { return 4L * pole_order_in_x + 24; }
constexpr long kTurningOrder = 32;  // at the q_I sites (bounded pole orders)

// Per-coordinate jetted potentials Q(x) at hbar, one for each basis direction.
std::vector<RationalFunction> jetted_Q(const PoleOrders& orders, const ExtendedPoint& pt,
                                       const Scalar& hbar, const CoordinateLayout& layout) {
    std::vector<RationalFunction> qs;
    int dim = layout.total_dim();
    qs.reserve(static_cast<size_t>(dim));
    for (int j = 0; j < dim; ++j)
        qs.push_back(assemble_Q(build_potentials(orders, layout.seed_jet(pt, j)), hbar));
    return qs;
}

NormalizedForm psi_tangent_at(const RationalFunction& q_jet, const ExpansionSite& site,
                              long order) {
    CurveBranch b = expand_y(q_jet, site, order);
    return tangent_form(psi_form(b, site, order));
}

struct BlockId {
    int block;  // pole index, or -1 for the block at infinity
    int i;      // Laurent index with the convention a_{2m_alpha} := w_alpha
};

std::vector<BlockId> base_block_ids(const PoleOrders& orders) {
    std::vector<BlockId> ids;
    for (int i = 0; i < orders.a_inf_count(); ++i) ids.push_back({-1, i});
    for (size_t al = 0; al < orders.num_poles(); ++al) {
        ids.push_back({static_cast<int>(al), 2 * orders.m_fin[al]});
        for (int i = 1; i <= orders.a_fin_count(al); ++i)
            ids.push_back({static_cast<int>(al), i});
    }
    return ids;
}

}  // namespace

std::vector<SiteInfo> base_sites(const PoleOrders& orders, const ModuliPoint& pt) {
    std::vector<SiteInfo> sites;
    for (size_t al = 0; al < pt.poles.size(); ++al)
        sites.push_back({ExpansionSite::finite(pt.poles[al].w.value(), 2), 1,
                         r2_order(2 * orders.m_fin[al] - 1)});
    sites.push_back({ExpansionSite::infinity(2), 1, r2_order(2 * orders.m_inf - 5)});
    return sites;
}

std::vector<SiteInfo> full_sites(const PoleOrders& orders, const ExtendedPoint& pt) {
    std::vector<SiteInfo> sites = base_sites(orders, pt.base);
    for (const Scalar& q : pt.q)
        sites.push_back({ExpansionSite::finite(q.value(), 1), 2, kTurningOrder});
    return sites;
}

NormalizedForm direct_one_form(const PoleOrders& orders, const ExtendedPoint& pt,
                               const Scalar& hbar, const std::vector<Scalar>& tangent,
                               const ExpansionSite& site, long order) {
    CoordinateLayout layout(orders);
    ExtendedPoint jp = layout.seed_tangent(pt, tangent);
    RationalFunction q = assemble_Q(build_potentials(orders, jp), hbar);
    return psi_tangent_at(q, site, order);
}

Matrix omega_direct(const PoleOrders& orders, const ExtendedPoint& pt, const Scalar& hbar) {
    CoordinateLayout layout(orders);
    int dim = layout.total_dim();
    std::vector<RationalFunction> qs = jetted_Q(orders, pt, hbar, layout);
    Matrix m(static_cast<size_t>(dim), static_cast<size_t>(dim));
    for (const SiteInfo& si : full_sites(orders, pt)) {
        long ord = si.order;
        for (int attempt = 0;; ++attempt) {
            try {
                std::vector<NormalizedForm> f;
                f.reserve(static_cast<size_t>(dim));
                for (int j = 0; j < dim; ++j) f.push_back(psi_tangent_at(qs[j], si.site, ord));
                Scalar mult(static_cast<long>(si.multiplicity));
                for (int j = 0; j < dim; ++j)
                    for (int k = j + 1; k < dim; ++k) {
                        Scalar val = normalized_pairing(f[j], f[k]) * mult;
                        size_t ju = static_cast<size_t>(j), ku = static_cast<size_t>(k);
                        m.at(ju, ku) = m.at(ju, ku) + val;
                        m.at(ku, ju) = m.at(ku, ju) - val;
                    }
                break;
            } catch (const truncation_error&) {
                if (attempt >= 2) throw;
                ord *= 2;
            }
        }
    }
    return m;
}

TwoFormParts omega_parts_residue(const PoleOrders& orders, const ExtendedPoint& pt) {
    CoordinateLayout layout(orders);
    int dim = layout.total_dim();
    size_t du = static_cast<size_t>(dim);
    TwoFormParts parts{Matrix(du, du), Matrix(du, du), Matrix(du, du)};

    std::vector<PotentialTriple> ts;
    ts.reserve(du);
    for (int j = 0; j < dim; ++j)
        ts.push_back(build_potentials(orders, layout.seed_jet(pt, j)));

    for (const SiteInfo& si : base_sites(orders, pt.base)) {
        long ord = si.order;
        for (int attempt = 0;; ++attempt) {
            try {
                std::vector<NormalizedForm> psis, sigs, taus;
                psis.reserve(du);
                sigs.reserve(du);
                taus.reserve(du);
                for (int j = 0; j < dim; ++j) {
                    CurveBranch b = expand_y(ts[static_cast<size_t>(j)].Q0, si.site, ord);
                    psis.push_back(tangent_form(psi_form(b, si.site, ord)));
                    sigs.push_back(
                        tangent_form(sigma_form(ts[static_cast<size_t>(j)].Q1, b, si.site, ord)));
                    taus.push_back(
                        tangent_form(tau_form(ts[static_cast<size_t>(j)], b, si.site, ord)));
                }
                for (int j = 0; j < dim; ++j)
                    for (int k = j + 1; k < dim; ++k) {
                        size_t ju = static_cast<size_t>(j), ku = static_cast<size_t>(k);
                        Scalar mns = normalized_pairing(psis[ju], psis[ku]);
                        Scalar mid = normalized_pairing(psis[ju], sigs[ku]) +
                                     normalized_pairing(sigs[ju], psis[ku]);
                        Scalar pls = normalized_pairing(psis[ju], taus[ku]) +
                                     normalized_pairing(taus[ju], psis[ku]) +
                                     normalized_pairing(sigs[ju], sigs[ku]);
                        parts.minus.at(ju, ku) = parts.minus.at(ju, ku) + mns;
                        parts.minus.at(ku, ju) = parts.minus.at(ku, ju) - mns;
                        parts.mid.at(ju, ku) = parts.mid.at(ju, ku) + mid;
                        parts.mid.at(ku, ju) = parts.mid.at(ku, ju) - mid;
                        parts.plus.at(ju, ku) = parts.plus.at(ju, ku) + pls;
                        parts.plus.at(ku, ju) = parts.plus.at(ku, ju) - pls;
                    }
                break;
            } catch (const truncation_error&) {
                if (attempt >= 2) throw;
                ord *= 2;
            }
        }
    }

    // symbolic terms: sum_I dp_I /\ dq_I into mid, sum_I dv_I /\ dq_I into plus
    int n = orders.n();
    for (int I = 0; I < n; ++I) {
        size_t qi = static_cast<size_t>(layout.q_index(I));
        size_t vi = static_cast<size_t>(layout.v_index(I));
        for (int j = 0; j < dim; ++j) {
            Scalar g =
                compute_p(orders, layout.seed_jet(pt, j), static_cast<size_t>(I)).tangent();
            size_t ju = static_cast<size_t>(j);
            parts.mid.at(ju, qi) = parts.mid.at(ju, qi) + g;
            parts.mid.at(qi, ju) = parts.mid.at(qi, ju) - g;
        }
        parts.plus.at(vi, qi) = parts.plus.at(vi, qi) + Scalar(1L);
        parts.plus.at(qi, vi) = parts.plus.at(qi, vi) - Scalar(1L);
    }
    return parts;
}

DecomposeReport omega_decompose(const PoleOrders& orders, const ExtendedPoint& pt,
                                const std::vector<Scalar>& hbar_samples) {
    if (hbar_samples.size() < 5)
        throw invalid_point_error("omega_decompose needs at least 5 hbar samples");
    CoordinateLayout layout(orders);
    size_t dim = static_cast<size_t>(layout.total_dim());

    std::vector<Matrix> ms;
    ms.reserve(hbar_samples.size());
    for (const Scalar& h : hbar_samples) ms.push_back(omega_direct(orders, pt, h));

    DecomposeReport rep;
    rep.minus = Matrix(dim, dim);
    rep.mid = Matrix(dim, dim);
    rep.plus = Matrix(dim, dim);
    for (const Matrix& m : ms) rep.scale = std::max(rep.scale, m.max_abs());

    // powers hbar^-3 .. hbar^1 on the first five samples
    Matrix vand(5, 5);
    for (size_t s = 0; s < 5; ++s)
        for (long t = 0; t < 5; ++t) vand.at(s, static_cast<size_t>(t)) = hbar_samples[s].pow(t - 3);

    for (size_t j = 0; j < dim; ++j)
        for (size_t k = j + 1; k < dim; ++k) {
            std::vector<Scalar> rhs;
            rhs.reserve(5);
            for (size_t s = 0; s < 5; ++s) rhs.push_back(ms[s].at(j, k));
            std::vector<Scalar> c = vand.solve(rhs);
            rep.h3_max = std::max(rep.h3_max, c[0].abs());
            rep.h1_max = std::max(rep.h1_max, c[4].abs());
            rep.minus.at(j, k) = c[1];
            rep.minus.at(k, j) = -c[1];
            rep.mid.at(j, k) = c[2];
            rep.mid.at(k, j) = -c[2];
            rep.plus.at(j, k) = c[3];
            rep.plus.at(k, j) = -c[3];
            for (size_t s = 5; s < hbar_samples.size(); ++s) {
                Scalar pred(0L);
                for (long t = 0; t < 5; ++t)
                    pred = pred + c[static_cast<size_t>(t)] * hbar_samples[s].pow(t - 3);
                rep.fit_residual = std::max(rep.fit_residual, (pred - ms[s].at(j, k)).abs());
            }
        }
    return rep;
}

Matrix omega_M(const PoleOrders& orders, const ModuliPoint& pt) {
    CoordinateLayout layout(orders);
    int bdim = layout.base_dim();
    size_t bu = static_cast<size_t>(bdim);
    int n = orders.n();
    ExtendedPoint ext{pt, std::vector<Scalar>(static_cast<size_t>(n), Scalar(0L)),
                      std::vector<Scalar>(static_cast<size_t>(n), Scalar(0L)),
                      std::vector<int>(static_cast<size_t>(n), 1)};

    std::vector<RationalFunction> q0s;
    q0s.reserve(bu);
    for (int j = 0; j < bdim; ++j)
        q0s.push_back(build_Q0(orders, layout.seed_jet(ext, j).base));

    Matrix m(bu, bu);
    for (const SiteInfo& si : base_sites(orders, pt)) {
        long ord = si.order;
        for (int attempt = 0;; ++attempt) {
            try {
                std::vector<NormalizedForm> f;
                f.reserve(bu);
                for (int j = 0; j < bdim; ++j)
                    f.push_back(psi_tangent_at(q0s[static_cast<size_t>(j)], si.site, ord));
                for (size_t j = 0; j < bu; ++j)
                    for (size_t k = j + 1; k < bu; ++k) {
                        Scalar val = normalized_pairing(f[j], f[k]);
                        m.at(j, k) = m.at(j, k) + val;
                        m.at(k, j) = m.at(k, j) - val;
                    }
                break;
            } catch (const truncation_error&) {
                if (attempt >= 2) throw;
                ord *= 2;
            }
        }
    }
    return m;
}

OmegaPatternReport check_omega_pattern(const PoleOrders& orders, const Matrix& om, double tol) {
    std::vector<BlockId> ids = base_block_ids(orders);
    if (om.rows() != ids.size() || om.cols() != ids.size())
        throw invalid_point_error("pattern check: matrix size does not match the base layout");
    double scale = std::max(om.max_abs(), 1.0);
    OmegaPatternReport rep;
    rep.cross_block_zero = true;
    rep.triangular_zero = true;
    rep.antidiagonal_nonzero = true;
    for (size_t j = 0; j < ids.size(); ++j)
        for (size_t k = 0; k < ids.size(); ++k) {
            if (j == k) continue;
            double mag = om.at(j, k).abs();
            if (ids[j].block != ids[k].block) {
                if (mag > tol * scale) rep.cross_block_zero = false;
                continue;
            }
            int m = ids[j].block < 0 ? orders.m_inf : orders.m_fin[static_cast<size_t>(ids[j].block)];
            int sum = ids[j].i + ids[k].i;
            int cutoff = ids[j].block < 0 ? 2 * m - 8 : 2 * m;
            if (sum <= cutoff && mag > tol * scale) rep.triangular_zero = false;
            if (sum == cutoff + 1 && mag <= tol * scale) rep.antidiagonal_nonzero = false;
        }
    Scalar d = om.det();
    rep.invertible = d.abs() > tol * std::pow(scale, static_cast<double>(om.rows()));
    return rep;
}

KernelReport kernel_check(const PoleOrders& orders, const ExtendedPoint& pt,
                          const Scalar& hbar) {
    CoordinateLayout layout(orders);
    Matrix om = omega_direct(orders, pt, hbar);
    double scale = std::max(om.max_abs(), 1e-300);

    std::vector<FlowField> gens = main_flows(orders, pt);
    std::vector<FlowField> iso = isopotential_flows(orders, pt);
    gens.insert(gens.end(), iso.begin(), iso.end());

    KernelReport rep;
    rep.exact_zero = true;
    for (const FlowField& g : gens) {
        std::vector<Scalar> r = om.apply(g.at(hbar));
        for (const Scalar& c : r) {
            if (!c.is_zero()) rep.exact_zero = false;
            rep.max_residual = std::max(rep.max_residual, c.abs() / scale);
        }
    }
    rep.kernel_dim = static_cast<long>(om.rows() - om.rank());
    return rep;
}

namespace {
Matrix select_part(const TwoFormParts& p, PartSelector which) {
    switch (which) {
        case PartSelector::Minus: return p.minus;
        case PartSelector::Mid: return p.mid;
        default: return p.plus;
    }
}

// max of the cyclic finite-difference sums d w (e_j, e_k, e_l) over all
// coordinate triples, given the matrix-valued partial derivatives
double closure_from_partials(const std::vector<Matrix>& dm, double scale) {
    size_t dim = dm.size();
    double worst = 0.0;
    for (size_t j = 0; j < dim; ++j)
        for (size_t k = j + 1; k < dim; ++k)
            for (size_t l = k + 1; l < dim; ++l) {
                Scalar c = dm[j].at(k, l) - dm[k].at(j, l) + dm[l].at(j, k);
                worst = std::max(worst, c.abs() / scale);
            }
    return worst;
}
}  // namespace

double closure_check(const PoleOrders& orders, const ExtendedPoint& pt, PartSelector which,
                     double step) {
    CoordinateLayout layout(orders);
    size_t dim = static_cast<size_t>(layout.total_dim());
    ExtendedPoint fp = point_to_kind(orders, pt, NumKind::F64);
    double scale = std::max(select_part(omega_parts_residue(orders, fp), which).max_abs(), 1.0);

    std::vector<Matrix> dm;
    dm.reserve(dim);
    for (size_t j = 0; j < dim; ++j) {
        Scalar cj = layout.get(fp, static_cast<int>(j));
        double h = step * (1.0 + cj.abs());
        ExtendedPoint pp = fp, pm = fp;
        layout.set(pp, static_cast<int>(j), cj + Scalar(std::complex<double>(h, 0.0)));
        layout.set(pm, static_cast<int>(j), cj - Scalar(std::complex<double>(h, 0.0)));
        Matrix diff = select_part(omega_parts_residue(orders, pp), which) -
                      select_part(omega_parts_residue(orders, pm), which);
        dm.push_back(diff * Scalar(std::complex<double>(1.0 / (2.0 * h), 0.0)));
    }
    return closure_from_partials(dm, scale);
}

double closure_check_base(const PoleOrders& orders, const ModuliPoint& pt, double step) {
    CoordinateLayout layout(orders);
    size_t bdim = static_cast<size_t>(layout.base_dim());
    int n = orders.n();
    ExtendedPoint ext{pt, std::vector<Scalar>(static_cast<size_t>(n), Scalar(0L)),
                      std::vector<Scalar>(static_cast<size_t>(n), Scalar(0L)),
                      std::vector<int>(static_cast<size_t>(n), 1)};
    ExtendedPoint fp = point_to_kind(orders, ext, NumKind::F64);
    double scale = std::max(omega_M(orders, fp.base).max_abs(), 1.0);

    std::vector<Matrix> dm;
    dm.reserve(bdim);
    for (size_t j = 0; j < bdim; ++j) {
        Scalar cj = layout.get(fp, static_cast<int>(j));
        double h = step * (1.0 + cj.abs());
        ExtendedPoint pp = fp, pm = fp;
        layout.set(pp, static_cast<int>(j), cj + Scalar(std::complex<double>(h, 0.0)));
        layout.set(pm, static_cast<int>(j), cj - Scalar(std::complex<double>(h, 0.0)));
        Matrix diff = omega_M(orders, pp.base) - omega_M(orders, pm.base);
        dm.push_back(diff * Scalar(std::complex<double>(1.0 / (2.0 * h), 0.0)));
    }
    return closure_from_partials(dm, scale);
}

std::vector<Scalar> coordinate_weights(const PoleOrders& orders) {
    CoordinateLayout layout(orders);
    long den = 2L * orders.m_inf - 3;
    auto frac = [&](long num) { return Scalar(GaussianRational(mpq_class(num, den))); };
    std::vector<Scalar> w;
    w.reserve(static_cast<size_t>(layout.total_dim()));
    for (int i = 0; i < orders.a_inf_count(); ++i) w.push_back(frac(4L * orders.m_inf - 10 - 2 * i));
    for (size_t al = 0; al < orders.num_poles(); ++al) {
        w.push_back(frac(2));  // w_alpha
        for (int i = 1; i <= orders.a_fin_count(al); ++i)
            w.push_back(frac(4L * orders.m_inf - 10 + 2 * i));
    }
    for (int I = 0; I < orders.n(); ++I) w.push_back(frac(2));   // q_I
    for (int I = 0; I < orders.n(); ++I) w.push_back(frac(-2));  // v_I
    return w;
}

HomothetyReport homothety_check(const PoleOrders& orders, const ExtendedPoint& pt,
                                double lambda) {
    CoordinateLayout layout(orders);
    int dim = layout.total_dim();
    std::vector<Scalar> weights = coordinate_weights(orders);
    // The scaled coordinates pick up irrational factors lambda^{p/q}, so the
    // whole comparison runs on the quad float carrier: the residue pairings
    // combine coefficients spanning many orders of magnitude and double
    // precision can lose most digits of the scale-invariant entries.
    ExtendedPoint fp = point_to_kind(orders, pt, NumKind::F128);
    ExtendedPoint sp = fp;
    std::vector<__float128> wq(static_cast<size_t>(dim));
    for (int j = 0; j < dim; ++j) {
        const GaussianRational& w = weights[static_cast<size_t>(j)].exact_value();
        wq[static_cast<size_t>(j)] = static_cast<__float128>(w.re.get_num().get_d()) /
                                     static_cast<__float128>(w.re.get_den().get_d());
        Cplx128 f(powq(static_cast<__float128>(lambda), wq[static_cast<size_t>(j)]), 0);
        layout.set(sp, j, layout.get(fp, j) * Scalar(f));
    }
    TwoFormParts a = omega_parts_residue(orders, fp);
    TwoFormParts b = omega_parts_residue(orders, sp);

    auto part_residual = [&](const Matrix& ma, const Matrix& mb, int power) {
        Cplx128 lp(powq(static_cast<__float128>(lambda), static_cast<__float128>(power)), 0);
        double scale = std::max(ma.max_abs() * std::pow(lambda, power), 1e-300);
        double worst = 0.0;
        for (size_t j = 0; j < static_cast<size_t>(dim); ++j)
            for (size_t k = 0; k < static_cast<size_t>(dim); ++k) {
                Cplx128 lw(powq(static_cast<__float128>(lambda), wq[j] + wq[k]), 0);
                Scalar diff = mb.at(j, k) * Scalar(lw) - ma.at(j, k) * Scalar(lp);
                worst = std::max(worst, diff.abs() / scale);
            }
        return worst;
    };
    HomothetyReport rep;
    rep.res_minus = part_residual(a.minus, b.minus, 2);
    rep.res_mid = part_residual(a.mid, b.mid, 1);
    rep.res_plus = part_residual(a.plus, b.plus, 0);
    return rep;
}

FlatnessReport euler_identity(const PoleOrders& orders, const ExtendedPoint& pt,
                              const Scalar& hbar) {
    CoordinateLayout layout(orders);
    int dim = layout.total_dim();
    std::vector<Scalar> weights = coordinate_weights(orders);
    std::vector<Scalar> tan(static_cast<size_t>(dim));
    for (int j = 0; j < dim; ++j)
        tan[static_cast<size_t>(j)] = weights[static_cast<size_t>(j)] * layout.get(pt, j);

    RationalFunction eq = directional_derivative_Q(orders, pt, hbar, tan);
    PotentialTriple t = build_potentials(orders, pt);
    RationalFunction q = assemble_Q(t, hbar);
    Scalar c(GaussianRational(mpq_class(2, 2L * orders.m_inf - 3)));
    if (!hbar.is_exact()) c = c.to_kind(hbar.kind());

    RationalFunction x_qprime = q.derivative() * RationalFunction::x();
    RationalFunction h_dh = t.Q0 * (Scalar(-2L) * hbar.pow(-2)) + t.Q1 * (-hbar.inv());
    RationalFunction lhs = eq + x_qprime * c + h_dh;
    RationalFunction rhs = q * (Scalar(-2L) * c);

    FlatnessReport rep;
    rep.exact_zero = RationalFunction::equal_exact(lhs, rhs);
    rep.residual = rep.exact_zero ? 0.0 : RationalFunction::diff_norm(lhs, rhs);
    return rep;
}

Scalar contour_oracle(const PoleOrders& orders, const ExtendedPoint& pt, const Scalar& hbar,
                      const std::vector<Scalar>& u, const std::vector<Scalar>& v,
                      const ExpansionSite& site, double radius, int nodes) {
    using cd = std::complex<double>;
    // Assemble in the arithmetic of the incoming point and recenter the
    // numerators and denominators at a finite site before floating.  Horner
    // on the raw coefficients cancels catastrophically where the denominator
    // vanishes to high order (at radius 0.04 around a q_I the evaluation
    // keeps only ~5 digits), and the lost digits stall the N-refinement.
    RationalFunction q = assemble_Q(build_potentials(orders, pt), hbar);
    RationalFunction du = directional_derivative_Q(orders, pt, hbar, u);
    RationalFunction dv = directional_derivative_Q(orders, pt, hbar, v);

    struct FloatRat {
        std::vector<cd> num, den;
        cd eval(const cd& t) const {
            cd n(0, 0), d(0, 0);
            for (size_t k = num.size(); k-- > 0;) n = n * t + num[k];
            for (size_t k = den.size(); k-- > 0;) d = d * t + den[k];
            return n / d;
        }
    };
    auto lowered = [&](const RationalFunction& f) {
        auto coeffs = [&](const Polynomial& p) {
            Polynomial sh = site.at_infinity ? p : p.taylor_shift(site.center);
            std::vector<cd> out;
            out.reserve(sh.coeffs().size());
            for (const Scalar& s : sh.coeffs()) out.push_back(s.to_c64());
            return out;
        };
        return FloatRat{coeffs(f.num()), coeffs(f.den())};
    };
    FloatRat qf = lowered(q), duf = lowered(du), dvf = lowered(dv);

    auto run = [&](int N) -> cd {
        const double two_pi = 6.283185307179586476925286766559;
        size_t nu = static_cast<size_t>(N);
        // samples of the theta-integrands a = U(Psi) ds/dtheta, b = V(Psi) ds/dtheta
        std::vector<cd> a(nu), b(nu);
        cd y_prev(0, 0);
        for (int k = 0; k < N; ++k) {
            double th = two_pi * static_cast<double>(k) / static_cast<double>(N);
            cd s = radius * std::exp(cd(0, th));
            cd t, dxds;  // t: argument of the recentred rational data
            if (site.at_infinity && site.r == 2) {
                t = 1.0 / (s * s);
                dxds = -2.0 / (s * s * s);
            } else if (site.at_infinity) {
                t = 1.0 / s;
                dxds = -1.0 / (s * s);
            } else if (site.r == 2) {
                t = s * s;
                dxds = 2.0 * s;
            } else {
                t = s;
                dxds = 1.0;
            }
            cd qv = qf.eval(t);
            cd y = std::sqrt(qv);
            if (k > 0 && std::abs(y + y_prev) < std::abs(y - y_prev)) y = -y;
            y_prev = y;
            cd dsdth = cd(0, 1) * s;
            a[static_cast<size_t>(k)] = duf.eval(t) / (2.0 * y) * dxds * dsdth;
            b[static_cast<size_t>(k)] = dvf.eval(t) / (2.0 * y) * dxds * dsdth;
        }
        // Fourier coefficients over theta; the antiderivative divides mode j
        // by ij, and the closed pairing integral contracts opposite modes:
        //   (1/2 pi i) closed-int d^{-1}(U Psi) V(Psi) ds = -sum_{j!=0} a_j b_{-j} / j
        int half = N / 2 - 1;
        std::vector<cd> ah(2 * static_cast<size_t>(half) + 1), bh(2 * static_cast<size_t>(half) + 1);
        for (int j = -half; j <= half; ++j) {
            cd sa(0, 0), sb(0, 0);
            for (int k = 0; k < N; ++k) {
                double ph = -two_pi * static_cast<double>(j) * static_cast<double>(k) /
                            static_cast<double>(N);
                cd w = std::exp(cd(0, ph));
                sa += a[static_cast<size_t>(k)] * w;
                sb += b[static_cast<size_t>(k)] * w;
            }
            ah[static_cast<size_t>(j + half)] = sa / static_cast<double>(N);
            bh[static_cast<size_t>(j + half)] = sb / static_cast<double>(N);
        }
        cd total(0, 0);
        for (int j = -half; j <= half; ++j) {
            if (j == 0) continue;
            total -= ah[static_cast<size_t>(j + half)] * bh[static_cast<size_t>(-j + half)] /
                     static_cast<double>(j);
        }
        return total;
    };

    cd first = run(nodes);
    cd second = run(2 * nodes);
    if (std::abs(first - second) > 1e-8 * std::max(1.0, std::abs(second)))
        throw precision_error("contour quadrature did not converge between node counts");
    return Scalar(second);
}

ExtendedPoint point_to_kind(const PoleOrders& orders, const ExtendedPoint& pt, NumKind k) {
    CoordinateLayout layout(orders);
    ExtendedPoint out = pt;
    for (int j = 0; j < layout.total_dim(); ++j)
        layout.set(out, j, layout.get(pt, j).to_kind(k));
    return out;
}

}  // namespace qdflow
