#ifndef QDFLOW_MODULI_HPP
#define QDFLOW_MODULI_HPP

#include <optional>
#include <string>
#include <vector>

#include "qdflow/linalg.hpp"
#include "qdflow/poly.hpp"
#include "qdflow/series.hpp"

namespace qdflow {

// ---------------------------------------------------------------------------
// pole structure
// ---------------------------------------------------------------------------

// Pole half-orders of the quadratic differential: order 2m_inf-1 at infinity,
// 2m_fin[alpha]-1 at the finite pole w_alpha.  All pole orders are odd.
struct PoleOrders {
    int m_inf = 0;
    std::vector<int> m_fin;

    // Build from the list of odd pole orders, infinity first: {7,1} etc.
    static PoleOrders from_orders(const std::vector<int>& odd_orders);

    int n() const;  // m_inf - 3 + sum m_fin
    int dim_m() const { return 2 * n(); }
    size_t num_poles() const { return m_fin.size(); }
    int a_inf_count() const { return 2 * m_inf - 6; }  // indices 0 .. 2m_inf-7
    int a_fin_count(size_t alpha) const { return 2 * m_fin[alpha] - 1; }  // 1 .. 2m-1

    void validate() const;  // throws invalid_point_error on structural violations
    std::string str() const;
};

// ---------------------------------------------------------------------------
// points
// ---------------------------------------------------------------------------

struct FinitePoleData {
    Scalar w;
    std::vector<Scalar> a;  // a[k] stores the Laurent coefficient a_{k+1}
};

struct ModuliPoint {
    std::vector<Scalar> a_inf;        // a_inf[i] multiplies x^i
    std::vector<FinitePoleData> poles;

    Scalar a_fin(size_t alpha, int i) const { return poles[alpha].a[static_cast<size_t>(i - 1)]; }
};

struct ExtendedPoint {
    ModuliPoint base;
    std::vector<Scalar> q;
    std::vector<Scalar> v;
    std::vector<int> eps;  // branch signs, +1 or -1
};

// Structural and genericity invariants; throw invalid_point_error or
// degeneracy_error with a description of the violated condition.
void validate_point(const PoleOrders& orders, const ModuliPoint& pt, double tol = 1e-10);
void validate_extended(const PoleOrders& orders, const ExtendedPoint& pt, double tol = 1e-10);

// ---------------------------------------------------------------------------
// canonical coordinate order on X:
//   base (2n):  a^(inf)_0 .. a^(inf)_{2m_inf-7},
//               then per pole alpha: w_alpha, a^(alpha)_1 .. a^(alpha)_{2m_alpha-1}
//   fibre (2n): q_1 .. q_n, v_1 .. v_n
// ---------------------------------------------------------------------------

class CoordinateLayout {
public:
    explicit CoordinateLayout(const PoleOrders& orders);

    int base_dim() const { return base_dim_; }
    int total_dim() const { return base_dim_ + 2 * n_; }
    int q_index(int I) const { return base_dim_ + I; }
    int v_index(int I) const { return base_dim_ + n_ + I; }
    int a_inf_index(int i) const;             // slot of a^(inf)_i
    int w_index(int alpha) const;             // slot of w_alpha
    int a_fin_index(int alpha, int i) const;  // slot of a^(alpha)_i, i >= 1

    std::string name(int k) const;
    Scalar get(const ExtendedPoint& pt, int k) const;
    void set(ExtendedPoint& pt, int k, const Scalar& val) const;

    // copy of pt whose k-th coordinate carries unit tangent (all others zero)
    ExtendedPoint seed_jet(const ExtendedPoint& pt, int k) const;
    // copy of pt with tangents dir[k] installed on every coordinate
    ExtendedPoint seed_tangent(const ExtendedPoint& pt, const std::vector<Scalar>& dir) const;
    // read the tangent components of a jet-carrying point back into a vector
    std::vector<Scalar> read_tangent(const ExtendedPoint& pt) const;

    // indices (into the full layout) of the low-index Laurent coordinates
    // a^(inf)_i, i <= m_inf-4 and a^(alpha)_i, i <= m_alpha: exactly n of them
    const std::vector<int>& low_index_coords() const { return low_; }

private:
    struct Slot { int kind; int alpha; int i; };  // kind: 0=a_inf, 1=w, 2=a_fin, 3=q, 4=v
    std::vector<Slot> slots_;
    std::vector<int> low_;
    int base_dim_;
    int n_;
};

// ---------------------------------------------------------------------------
// potentials
// ---------------------------------------------------------------------------

struct PotentialTriple {
    RationalFunction Q0, Q1, Q2;
};

RationalFunction build_Q0(const PoleOrders& orders, const ModuliPoint& pt);

// F(x) = prod (x - w_alpha)^{m_alpha}
Polynomial pole_poly_F(const PoleOrders& orders, const ModuliPoint& pt);

// p_I = eps_I * sqrt(Q0(q_I)); exact when Q0(q_I) is a perfect square in Q(i)
Scalar compute_p(const PoleOrders& orders, const ExtendedPoint& pt, size_t I);
std::vector<Scalar> compute_p_all(const PoleOrders& orders, const ExtendedPoint& pt);

// u_I = p_I/hbar + v_I
Scalar compute_u(const PoleOrders& orders, const ExtendedPoint& pt, size_t I, const Scalar& hbar);

// interpolation parts of Q1 and Q2 (Lagrange over the nodes q_I, divided by F)
RationalFunction build_R(const PoleOrders& orders, const ExtendedPoint& pt);
RationalFunction build_S(const PoleOrders& orders, const ExtendedPoint& pt);

RationalFunction build_Q1(const PoleOrders& orders, const ExtendedPoint& pt);
RationalFunction build_Q2(const PoleOrders& orders, const ExtendedPoint& pt);
PotentialTriple build_potentials(const PoleOrders& orders, const ExtendedPoint& pt);

RationalFunction assemble_Q(const PotentialTriple& t, const Scalar& hbar);

// Laurent data of Q at an apparent singularity: orders -2, -1, 0 must read
// (3/4, u, u^2).  Deviations are returned exactly as computed.
struct ApparentSingularityReport {
    Scalar dev2, dev1, dev0;  // coefficient minus expected value
    double max_residual;      // max |dev|
};
ApparentSingularityReport verify_apparent_singularity(const RationalFunction& Q,
                                                      const Scalar& q, const Scalar& u);

// ---------------------------------------------------------------------------
// local expansions of y with exact normalization
// ---------------------------------------------------------------------------
//
// At the sites used here the leading coefficient c0 of the local expansion of
// y^2 is generally not a perfect square, so y itself is kept factored as
// y = sqrt(c0) * y_norm with y_norm monic (leading coefficient exactly 1).
// Residue pairings always combine two forms at the same site, so the sqrt(c0)
// factors recombine into integer powers of c0 and exactness is preserved.

struct CurveBranch {
    Scalar c0;                       // leading coefficient of the y^2 expansion
    std::optional<Scalar> sqrt_c0;   // pinned exact branch value (e.g. +p_I over q_I)
    LocalSeries y_norm;              // monic local expansion of y/sqrt(c0)
};

// Expand y = sqrt(q_of_x) at the site to order `order` in the local parameter.
// branch_sqrt, when given, pins sqrt(c0) exactly (its square must match c0).
CurveBranch expand_y(const RationalFunction& q_of_x, const ExpansionSite& site, long order,
                     std::optional<Scalar> branch_sqrt = {});

// A local one-form carried as body * c0^(half_power/2).
struct NormalizedForm {
    LocalSeries body;   // includes the dx factor of the site
    Scalar c0;
    long half_power = 0;
    std::optional<Scalar> sqrt_c0;

    bool scale_exact() const;
    Scalar scale() const;           // c0^(half_power/2); may degrade to float
    LocalSeries materialized() const { return body * scale(); }
    Scalar residue() const { return body.residue() * scale(); }
};

// Res(d^{-1}(a) * b) with the normalization scales combined exactly whenever
// half powers sum to an even integer or branch roots are pinned.
Scalar normalized_pairing(const NormalizedForm& a, const NormalizedForm& b,
                          double residue_tol = 1e-9);

// Derivative of a jet-carrying normalized form along its jet direction,
// refactored over the value normalization (h = half_power):
//   d/de [c0(e)^(h/2) B(e)] = c0^(h/2) (B' + (h/2) B c0'/c0)
// The result is jet-free with the same half power over c0's value part.
NormalizedForm tangent_form(const NormalizedForm& f);

// sigma = Q1 dx / (2 y0), tau = (4 Q0 Q2 - Q1^2) dx / (8 y0^3), psi = y0 dx;
// each expanded at the site of the given branch to order `order`.
NormalizedForm sigma_form(const RationalFunction& Q1, const CurveBranch& b,
                          const ExpansionSite& site, long order);
NormalizedForm tau_form(const PotentialTriple& t, const CurveBranch& b,
                        const ExpansionSite& site, long order);
NormalizedForm psi_form(const CurveBranch& b, const ExpansionSite& site, long order);

// ---------------------------------------------------------------------------
// genericity and curve bookkeeping
// ---------------------------------------------------------------------------

// P(x) = hbar^2 * prod (x-q_I)^2 * prod (x-w_alpha)^{2m_alpha-1} * Q(x),
// assembled term by term so it is a polynomial in every scalar mode.
Polynomial clearing_polynomial(const PoleOrders& orders, const ExtendedPoint& pt,
                               const Scalar& hbar);

// numerator of Q0 over prod (x-w_alpha)^{2m_alpha-1}
Polynomial clearing_polynomial_base(const PoleOrders& orders, const ModuliPoint& pt);

struct GenericityResult {
    bool simple_zeros;
    Scalar discriminant;
    int degree;           // actual degree of the clearing polynomial
    int expected_degree;  // 4n + 1 - #finite poles
};
GenericityResult genericity_check(const PoleOrders& orders, const ExtendedPoint& pt,
                                  const Scalar& hbar, double tol = 1e-10);

struct CurveStats {
    int branch_points_sigma;   // simple zeros of Q plus odd-order poles
    int genus_sigma;           // branch/2 - 1
    int branch_points_sigma0;
    int genus_sigma0;
};
CurveStats curve_stats(const PoleOrders& orders, const ExtendedPoint& pt, const Scalar& hbar);

// ---------------------------------------------------------------------------
// derivatives of p and the independence matrix
// ---------------------------------------------------------------------------

// dp_I/da^(inf)_i = q_I^i / (2 p_I);  dp_I/da^(alpha)_i = (q_I-w_alpha)^{-i} / (2 p_I)
Scalar dp_da_inf(const ExtendedPoint& pt, const std::vector<Scalar>& p, size_t I, int i);
Scalar dp_da_fin(const ExtendedPoint& pt, const std::vector<Scalar>& p, size_t I,
                 size_t alpha, int i);

// n x n matrix with rows I and the low-index coordinates as columns:
// entry = 2 p_I dp_I/da = q_I^i (infinity) or (q_I - w_alpha)^{-i} (finite)
Matrix independence_matrix(const PoleOrders& orders, const ExtendedPoint& pt);

// ---------------------------------------------------------------------------
// deterministic random points
// ---------------------------------------------------------------------------

struct SampleConfig {
    unsigned long seed = 1;
    long max_numerator = 6;   // magnitude bound for drawn numerators
    long max_denominator = 4;
    bool exact_eligible = true;  // solve low-index coefficients so Q0(q_I) = p_I^2 in Q(i)
    int max_attempts = 500;
};

// Rejection-sampled valid point, deterministic under the seed.  With
// exact_eligible the low-index Laurent coefficients are solved (via the
// independence matrix) so every p_I is a preselected nonzero rational and the
// whole point admits exact arithmetic.
ExtendedPoint random_point(const PoleOrders& orders, const SampleConfig& cfg);

}  // namespace qdflow

#endif
