#ifndef QDFLOW_TWOFORMS_HPP
#define QDFLOW_TWOFORMS_HPP

// Residue-based 2-forms on the extended space X, their hbar-decomposition,
// the base 2-form on the space of potentials M, and an independent contour
// integration oracle for the residue engine.
//
// Matrix convention: every 2-form matrix produced here is stored in units of
// 2*pi*i — entries are the residue sums themselves, without the transcendental
// prefactor, so exact arithmetic stays exact.  All asserted identities are
// either homogeneous in the prefactor or stated in the same units.
//
// Sites: the full curve y^2 = Q has branch points over each w_alpha and over
// infinity (odd pole orders) and a pair of simple poles of y over each q_I.
// Residue sums over the q_I pair are computed on the monic sheet and doubled
// (the integrand of the pairing is invariant under the sheet swap).  The base
// curve y0^2 = Q0 contributes only the w_alpha and infinity sites.

#include <vector>

#include "qdflow/flows.hpp"
#include "qdflow/linalg.hpp"
#include "qdflow/moduli.hpp"

namespace qdflow {

// An expansion site together with its residue multiplicity and the default
// series order used there.
struct SiteInfo {
    ExpansionSite site;
    int multiplicity;  // 2 for the q_I pair, 1 elsewhere
    long order;
};

// w_alpha and infinity on the base curve y0^2 = Q0
std::vector<SiteInfo> base_sites(const PoleOrders& orders, const ModuliPoint& pt);
// w_alpha, infinity and the q_I (doubled) on the full curve y^2 = Q
std::vector<SiteInfo> full_sites(const PoleOrders& orders, const ExtendedPoint& pt);

// U(Psi) at a site: the fixed-x derivative of y dx along the tangent vector,
// as a normalized local one-form.  Its residue vanishes (the residues of
// y dx are constants on X); the antiderivative in the pairings relies on it.
NormalizedForm direct_one_form(const PoleOrders& orders, const ExtendedPoint& pt,
                               const Scalar& hbar, const std::vector<Scalar>& tangent,
                               const ExpansionSite& site, long order);

// Omega(e_j, e_k) = sum over sites of mult * Res(d^{-1} e_j(Psi) * e_k(Psi)),
// a 4n x 4n antisymmetric matrix over the canonical coordinates.
Matrix omega_direct(const PoleOrders& orders, const ExtendedPoint& pt, const Scalar& hbar);

// The three hbar-independent parts, computed from the base-curve forms
// psi, sigma, tau plus the symbolic dp/\dq and dv/\dq terms:
//   minus = Omega_-      (psi/psi residues; the pullback of the base form)
//   mid   = i * Omega_I  (dp/\dq + psi/sigma cross residues)
//   plus  = Omega_+      (dv/\dq + psi/tau cross + sigma/sigma residues)
// so that omega_direct(hbar) = minus/hbar^2 + mid/hbar + plus.  The
// sigma/sigma residues are not always zero: sigma is holomorphic at the
// branch sites, but its derivative along a direction that moves the pole
// data at w_alpha acquires a double pole there.
struct TwoFormParts {
    Matrix minus, mid, plus;
};
TwoFormParts omega_parts_residue(const PoleOrders& orders, const ExtendedPoint& pt);

// Fit omega_direct(hbar) entrywise against {hbar^-3, ..., hbar^1} over >= 5
// distinct samples.  The hbar^-3 and hbar^1 coefficients must vanish; extra
// samples beyond the first five are used as a consistency check.
struct DecomposeReport {
    Matrix minus, mid, plus;
    double h3_max = 0.0;        // magnitude of the largest hbar^-3 coefficient
    double h1_max = 0.0;        // magnitude of the largest hbar^1 coefficient
    double fit_residual = 0.0;  // worst deviation on the extra samples
    double scale = 0.0;         // largest sampled entry magnitude
};
DecomposeReport omega_decompose(const PoleOrders& orders, const ExtendedPoint& pt,
                                const std::vector<Scalar>& hbar_samples);

// The 2-form on M over the base coordinates (2n x 2n, canonical base order).
Matrix omega_M(const PoleOrders& orders, const ModuliPoint& pt);

// Structure of omega_M with the convention a_{2m_alpha} := w_alpha: entries
// couple only within a pole block, vanish for i+j <= 2m_alpha (at infinity:
// for i+j <= 2m_inf-8), are nonzero on the first antidiagonal, and the whole
// matrix is invertible.
struct OmegaPatternReport {
    bool cross_block_zero = false;
    bool triangular_zero = false;
    bool antidiagonal_nonzero = false;
    bool invertible = false;
    bool ok() const {
        return cross_block_zero && triangular_zero && antidiagonal_nonzero && invertible;
    }
};
OmegaPatternReport check_omega_pattern(const PoleOrders& orders, const Matrix& om,
                                       double tol = 1e-10);

// Omega annihilates all 2n flow generators; the kernel has dimension 2n.
struct KernelReport {
    double max_residual = 0.0;  // max |Omega L| / ||Omega||
    long kernel_dim = 0;
    bool exact_zero = false;  // every Omega L component structurally zero
};
KernelReport kernel_check(const PoleOrders& orders, const ExtendedPoint& pt,
                          const Scalar& hbar);

// Max component of d(part) via central finite differences (float mode).
enum class PartSelector { Minus, Mid, Plus };
double closure_check(const PoleOrders& orders, const ExtendedPoint& pt, PartSelector which,
                     double step = 1e-5);
// Same for the base form on M.
double closure_check_base(const PoleOrders& orders, const ModuliPoint& pt,
                          double step = 1e-5);

// Homothety weights of the canonical coordinates (rational).
std::vector<Scalar> coordinate_weights(const PoleOrders& orders);

// Scaling each coordinate by lambda^weight multiplies the parts by lambda^2,
// lambda, 1 respectively; returns the relative entrywise residuals.
struct HomothetyReport {
    double res_minus = 0.0, res_mid = 0.0, res_plus = 0.0;
};
HomothetyReport homothety_check(const PoleOrders& orders, const ExtendedPoint& pt,
                                double lambda);

// Residual of (E + c x d/dx + hbar d/dhbar) Q = -2c Q with c = 2/(2m_inf-3)
// and E the weighted Euler field.
FlatnessReport euler_identity(const PoleOrders& orders, const ExtendedPoint& pt,
                              const Scalar& hbar);

// (1/2pi i) contour integral of d^{-1}U(Psi) V(Psi) over |s| = radius in the
// local parameter: equally spaced samples with branch continuity tracking,
// Fourier modes contracted against the antiderivative weight 1/ij.  Rational
// data are recentred at the site before floating (evaluation near a high
// order pole cancels catastrophically otherwise); the node count is doubled
// once and the two results must agree.
Scalar contour_oracle(const PoleOrders& orders, const ExtendedPoint& pt, const Scalar& hbar,
                      const std::vector<Scalar>& u, const std::vector<Scalar>& v,
                      const ExpansionSite& site, double radius, int nodes = 256);

// Point with every coordinate converted to the given scalar kind.
ExtendedPoint point_to_kind(const PoleOrders& orders, const ExtendedPoint& pt, NumKind k);

}  // namespace qdflow

#endif
