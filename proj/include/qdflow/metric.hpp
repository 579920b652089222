#ifndef QDFLOW_METRIC_HPP
#define QDFLOW_METRIC_HPP

// Quaternionic frame and complex hyper-Kahler metric.
//
// The 2n flow generators L_a = U_a + V_a/hbar (main flows first, then
// isopotential flows, each family in its canonical order) trivialise TX by
// {U_a, V_a}.  The canonical quaternionic structure is fixed by
//   J(U_a) = V_a,  K(U_a) = i V_a
// and the quaternion relations; span{U_a} and span{V_a} are the -i and +i
// eigenspaces of I.  The metric is
//   g = -Omega_I(I ., .),
// symmetric, nondegenerate and hermitian for I, J, K.  It is stored, like
// the 2-form matrices, in units of 2 pi i; every identity asserted here is
// homogeneous in that unit.
//
// Conventions: endomorphisms act on coordinate tangent vectors from the
// left; bilinear forms pair as B(u, v) = u^T B v.

#include <complex>
#include <functional>
#include <vector>

#include "qdflow/flows.hpp"
#include "qdflow/twoforms.hpp"

namespace qdflow {

struct QuaternionFrame {
    std::vector<std::vector<Scalar>> u_basis, v_basis;  // 2n tangent vectors each
    Matrix I, J, K;                                     // 4n x 4n endomorphisms
};

// Frame from an explicit generator list (u/v parts already in some
// coordinate basis); throws degeneracy_error when {U_a, V_a} fails to span.
QuaternionFrame frame_from_generators(const std::vector<FlowField>& gens);

// Frame from the flow generators at an extended point; throws
// degeneracy_error when {U_a, V_a} fails to span the tangent space.
QuaternionFrame build_frame(const PoleOrders& orders, const ExtendedPoint& pt);

// Worst residual of I^2 = J^2 = K^2 = IJK = -Id, of the defining actions
// J U_a = V_a and K U_a = i V_a, and of (J - iK)/2 mapping U_a -> V_a -> 0.
struct FrameReport {
    double max_residual = 0.0;
    bool exact_zero = false;  // every relation structurally zero (exact mode)
};
FrameReport frame_relations(const QuaternionFrame& fr);

// g = -Omega_I(I ., .).  Callers derive Omega_I = -i * mid from
// omega_parts_residue (the mid part stores i * Omega_I).
Matrix assemble_metric(const QuaternionFrame& fr, const Matrix& omega_I);

// Parts + frame + metric at a point, with every defining identity checked.
// Residuals are normalized by the magnitudes of the operands involved.
struct MetricReport {
    double symmetry = 0.0;           // g - g^T
    double hermiticity = 0.0;        // worst over I, J, K of A^T g A - g
    double annihilator_minus = 0.0;  // Omega_-(U_a,.) + i Omega_I(V_a,.)
    double annihilator_plus = 0.0;   // Omega_+(V_a,.) + i Omega_I(U_a,.)
    double jk_assembly = 0.0;  // -(Om_-+Om_+)(J.,.) = g, (Om_--Om_+)(K.,.) = i g
    double kernel_minus = 0.0;       // Omega_- V_a = 0
    double kernel_plus = 0.0;        // Omega_+ U_a = 0
    bool exact_zero = false;         // all of the above structurally zero
    Scalar det_g;                    // nondegeneracy witness
    double worst() const;
};
MetricReport metric_identities(const PoleOrders& orders, const ExtendedPoint& pt);

// The metric matrix alone (same pipeline, no checks).
Matrix metric_at(const PoleOrders& orders, const ExtendedPoint& pt);

// Ricci tensor of a holomorphic metric field by nested central differences:
// Christoffel symbols from first differences of g, Ricci from first
// differences of the Christoffels (both with the same step, so the scheme is
// second order in the step).  Float mode only.
using MetricField = std::function<Matrix(const std::vector<std::complex<double>>&)>;
Matrix ricci_numeric(const MetricField& g_of_x,
                     const std::vector<std::complex<double>>& base, double step);

}  // namespace qdflow

#endif
