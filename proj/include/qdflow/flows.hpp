#ifndef QDFLOW_FLOWS_HPP
#define QDFLOW_FLOWS_HPP

// Flow generators on the extended space of potentials.
//
// Two families of vector fields are built here, each stored as a pair of
// tangent vectors (U, V) in the canonical coordinate order of
// CoordinateLayout; the generator at a given hbar is L = U + V/hbar.
//
//   * Isopotential flows, one per low-index Laurent coordinate a:
//         L_a = d/da - (1/hbar) sum_I (dp_I/da) d/dv_I,
//     which preserve the assembled potential Q(x) identically.
//   * Main flows, one per apparent singularity q_I, which move every
//     coordinate at once so that the potential changes according to
//         -2 dQ/dt = A''' - 4 Q A' - 2 Q' A
//     with gauge function A = 1/(x - q_I).  The residual of that identity,
//     after clearing denominators, is the central correctness check.

#include <optional>
#include <vector>

#include "qdflow/linalg.hpp"
#include "qdflow/moduli.hpp"

namespace qdflow {

struct FlowField {
    std::vector<Scalar> u_part;              // hbar^0 tangent components
    std::vector<Scalar> v_part;              // hbar^{-1} tangent components
    std::optional<RationalFunction> gauge;   // A, present for main flows

    // combined tangent U + V/hbar
    std::vector<Scalar> at(const Scalar& hbar) const;
};

// Time derivative of Q0 at fixed x along a tangent vector (canonical order;
// only the base components contribute).
RationalFunction q0_dot(const PoleOrders& orders, const ExtendedPoint& pt,
                        const std::vector<Scalar>& tangent);

// The n isopotential flows, in the order of layout.low_index_coords().
std::vector<FlowField> isopotential_flows(const PoleOrders& orders,
                                          const ExtendedPoint& pt);

// The n main flows, indexed by apparent singularity.
std::vector<FlowField> main_flows(const PoleOrders& orders, const ExtendedPoint& pt);

// Derivative of the assembled potential Q along a tangent, holding x fixed.
// Computed by seeding first-order jets on every coordinate.
RationalFunction directional_derivative_Q(const PoleOrders& orders,
                                          const ExtendedPoint& pt, const Scalar& hbar,
                                          const std::vector<Scalar>& tangent);

// Residual of -2 dQ/dt = A''' - 4 Q A' - 2 Q' A for the given flow at the
// given hbar.  Denominators are cleared and the two sides compared as
// polynomials; `exact_zero` reports a structural zero (exact mode), while
// `residual` is the relative coefficient deviation otherwise.
struct FlatnessReport {
    bool exact_zero = false;
    double residual = 0.0;
};
FlatnessReport flatness_residual(const PoleOrders& orders, const ExtendedPoint& pt,
                                 const Scalar& hbar, const FlowField& flow);

// Frame diagnostics: the 4n vectors {U_I, V_I} from the main flows together
// with {U_a, V_a} from the isopotential flows must span TX, and the
// independence matrix must be invertible.
struct IndependenceReport {
    long rank = 0;       // rank of the 4n x 4n frame matrix
    long expected_rank = 0;
    Scalar det_n;        // determinant of the independence matrix
};
IndependenceReport independence_report(const PoleOrders& orders, const ExtendedPoint& pt,
                                       double tol = 1e-10);

// Columns of the frame matrix used by independence_report, in the order
// U_1..U_n, V_1..V_n, U_a (low-index order), V_a: enough to rebuild the
// hyperkahler frame downstream.
Matrix frame_matrix(const PoleOrders& orders, const ExtendedPoint& pt);

}  // namespace qdflow

#endif
