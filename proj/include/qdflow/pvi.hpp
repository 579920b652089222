#ifndef QDFLOW_PVI_HPP
#define QDFLOW_PVI_HPP

// Four-simple-pole potentials on the sphere, poles pinned at 0, 1, infinity
// with one movable pole w.  The base has coordinates (a, w); the extended
// space adds a single apparent singularity (q, v), so the total space is
// four dimensional with coordinate order (a, w, q, v) throughout.
//
// The isomonodromic flow in w projects to Painleve VI with parameters
// (1,1,1,1).  This module builds the potentials, the two flow generators,
// the explicit 4x4 metric together with its frame-based cross-check, a
// trajectory integrator with the Painleve residual, the algebraic solution
// branches, and the Killing vector of the metric.

#include <complex>
#include <string>
#include <vector>

#include "qdflow/flows.hpp"
#include "qdflow/linalg.hpp"
#include "qdflow/metric.hpp"
#include "qdflow/moduli.hpp"
#include "qdflow/twoforms.hpp"

namespace qdflow {

struct PviPoint {
    Scalar a, w, q, v;
    int eps = 1;  // branch sign in p = eps * sqrt(Q0(q))
};

// Structural invariants: a w (w-1) != 0, q outside {0, 1, w}, Q0(q) != 0.
void pvi_validate(const PviPoint& pt, double tol = 1e-10);

// p = eps * sqrt(Q0(q)); jets installed on (a, w, q) pass through the root.
Scalar pvi_p(const PviPoint& pt);

struct PviPotentials {
    RationalFunction Q0, Q1, Q2;
    Scalar p;
};

// Q0 = a(w-1)/x - a w/(x-1) + a/(x-w),
// Q1 = p/(x-q) + R,  Q2 = 3/(4(x-q)^2) + v/(x-q) + S,
// where R and S are the correction terms with simple poles at 0, 1, w only,
// normalized so that R(q) = 2pv, S(q) = v^2 and q is an apparent singularity
// of the assembled potential Q0/hbar^2 + Q1/hbar + Q2.
PviPotentials pvi_potentials(const PviPoint& pt);

RationalFunction pvi_assemble_Q(const PviPotentials& t, const Scalar& hbar);

struct PviFlows {
    FlowField w_flow;  // isomonodromic flow in w; gauge A = x(x-1)/(x-q)
    FlowField a_flow;  // d/da - (1/hbar)(dp/da) d/dv; preserves Q, no gauge
};

// The two generators at the point; the w flow needs A(w) = w(w-1)/(w-q) != 0
// (degeneracy_error otherwise).  The overload taking p uses the supplied
// branch value instead of pvi_p: trajectory integration continues p by
// proximity rather than by a fixed sign convention.
PviFlows pvi_flows(const PviPoint& pt);
PviFlows pvi_flows(const PviPoint& pt, const Scalar& p);

// d/dt of the assembled potential at fixed x along a tangent in the
// (a, w, q, v) basis; p is slaved to the moving point through the root.
RationalFunction pvi_directional_derivative_Q(const PviPoint& pt, const Scalar& hbar,
                                              const std::vector<Scalar>& tangent);

// Residual of -2 dQ/dt = A''' - 4 Q A' - 2 Q' A for the given flow (the
// gauge A taken from the flow; absent gauge means dQ/dt must vanish).
FlatnessReport pvi_flatness_residual(const PviPoint& pt, const Scalar& hbar,
                                     const FlowField& flow);

// ---------------------------------------------------------------------------
// two-form and metric
// ---------------------------------------------------------------------------

// Base 2-form on (a, w) by residue pairing of the tangent one-forms of
// y0 dx over the poles; the movable pole carries the whole pairing and the
// expected value is omega(d_w, d_a) = 1/2.
struct PviBaseFormReport {
    Matrix omega;           // 2x2 in the (a, w) basis
    double fixed_pole_max;  // largest contribution from the pinned poles
    bool exact;
};
PviBaseFormReport pvi_base_form(const PviPoint& pt);

// Quaternionic frame of the two generators (w flow first, then a flow).
QuaternionFrame pvi_frame(const PviPoint& pt);

// The hbar^-2, hbar^-1, hbar^0 parts of the closed 2-form.  The kernel
// conditions against the two generators determine all three parts up to one
// overall scale, which is pinned by Omega_- = (1/2) dw /\ da; mid stores
// i * Omega_I as in the general machinery.
struct PviPartsReport {
    TwoFormParts parts;   // in the (a, w, q, v) basis
    Scalar scale;         // factor applied to the unit-scale frame solution
    double pin_residual;  // deviation of the scaled minus part from the pin
    bool exact;
};
PviPartsReport pvi_parts(const PviPoint& pt);

// Explicit closed-form metric in the basis (d_a, d_w, d_q, d_v), reading the
// symmetrized products as a . b = (a x b + b x a)/2.
Matrix pvi_metric(const PviPoint& pt);

// Same metric with the branch value supplied explicitly (for continuation
// along paths where the sign convention of the square root must be tracked).
Matrix pvi_metric(const PviPoint& pt, const Scalar& p);

struct PviMetricReport {
    Matrix g_display;    // closed form
    Matrix g_frame;      // -Omega_I(I ., .) from pvi_frame / pvi_parts
    double match;        // scaled max deviation between the two constructions
    bool exact_match;
    double frame_worst;  // worst quaternion-relation residual
    Scalar det_g;
    Scalar euler_null;   // g(E, E) for the Euler field E = 2a d_a
};
PviMetricReport pvi_metric_check(const PviPoint& pt);

// ---------------------------------------------------------------------------
// Painleve VI
// ---------------------------------------------------------------------------

// RHS of the Painleve VI equation with parameters (1,1,1,1), so that
// trajectories of the w flow satisfy q'' = pvi_rhs(q', q, w).
Scalar pvi_rhs(const Scalar& qp, const Scalar& q, const Scalar& w);

// q'' - pvi_rhs(q', q, w) with q' and q'' evaluated from the w flow by
// first-order jets: exact at exact states, so the residual tests the
// closed-form reduction of the flow to Painleve VI at the given state.
Scalar pvi_equation_residual(const PviPoint& pt, const Scalar& hbar);

struct PviIntegrateOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int dense = 1024;              // uniform output intervals for the residual scan
    double singular_radius = 1e-3;  // halt distance to q in {0, 1, w} or Q0(q) = 0
    long max_steps = 200000;
};

struct PviTrajectory {
    std::vector<double> w;               // dense output grid
    std::vector<std::complex<double>> q, v, p;
    double max_pvi_residual = 0.0;       // finite-difference residual on the grid
    long steps = 0;                      // accepted Runge-Kutta steps
    long rejected = 0;
};

// Integrate the w flow from pt.w to w_end (real path) with an embedded
// Runge-Kutta pair; a stays constant, p is continued to the nearest square
// root of Q0(q) with steps capped so |dp| < |p|/2.  The Painleve residual
// |q'' - rhs| is evaluated on the dense grid by high-order finite
// differences of the stored trajectory.
PviTrajectory pvi_integrate(const PviPoint& pt, const Scalar& hbar, double w_end,
                            const PviIntegrateOptions& opt = {});

// ---------------------------------------------------------------------------
// algebraic solutions and the Killing vector
// ---------------------------------------------------------------------------

// Painleve residual for an explicitly given 2-jet (q, q', q'') at w.
Scalar pvi_curve_residual(const Scalar& q, const Scalar& qp, const Scalar& qpp,
                          const Scalar& w);

struct PviBranchResidual {
    std::string factor;  // defining polynomial of the branch
    Scalar q;            // branch value at w
    Scalar residual;     // Painleve residual via implicit differentiation
    bool skipped;        // branch point (f_q = 0): no residual available
};

// All branches of (q^2 - w)(q^2 - 2q + w)(q^2 - 2qw - w) = 0 over the given
// w, each with the Painleve residual from implicit differentiation of its
// defining factor.
std::vector<PviBranchResidual> pvi_algebraic_check(const Scalar& w);

struct PviKillingReport {
    bool exact;           // K(Q1) - Q0 structurally zero
    double dq1_residual;  // coefficientwise deviation otherwise
    double lie_residual;  // finite-difference Lie derivative of the metric
    Scalar component;     // the d_v component of K at the point
};

// K = [a w (w-1) / (2 p q (q-1) (q-w))] d_v: checks K(Q1) = Q0 as rational
// functions and the vanishing of the Lie derivative of the metric along K.
PviKillingReport pvi_killing_check(const PviPoint& pt, double step = 1e-5);

}  // namespace qdflow

#endif
