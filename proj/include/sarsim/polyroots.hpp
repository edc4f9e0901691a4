#pragma once

#include <complex>
#include <vector>

#include "sarsim/rng.hpp"

namespace sarsim {

/// Poles of a lag polynomial, closed under complex conjugation.
struct PoleSet {
    std::vector<std::complex<double>> poles;
    double radius_bound = 0.0;
};

enum class LagConvention { ar, ma };

/// Coefficients c_1..c_n of 1 - sum c_i L^i (ar) or 1 + sum c_i L^i (ma).
struct LagPolynomial {
    std::vector<double> coefficients;
    LagConvention convention = LagConvention::ar;

    std::size_t order() const noexcept { return coefficients.size(); }
};

namespace poly {

/// Draws floor(order/2) conjugate pairs with radius U(0, r) and angle U(0, pi),
/// plus one real pole U(-r, r) when order is odd.
PoleSet sample_pole_set(Stream& s, int order, double radius_max);

/// Expands prod(1 - pole_i L) into the requested convention.
/// Throws ParameterError when the poles are not conjugate-closed.
LagPolynomial expand(const PoleSet& poles, LagConvention convention);

/// Roots (poles) of the monic polynomial z^n - c_1 z^{n-1} - ... - c_n, found
/// as eigenvalues of its companion matrix.
std::vector<std::complex<double>> companion_roots(const LagPolynomial& poly);

/// True iff every companion eigenvalue has modulus <= bound + 1e-9.
bool verify_stability(const LagPolynomial& poly, double bound);

}  // namespace poly
}  // namespace sarsim
