#include "sarsim/polyroots.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "sarsim/errors.hpp"

namespace sarsim::poly {

namespace {

double conj_tolerance(const std::complex<double>& z) { return 1e-12 * std::max(1.0, std::abs(z)); }

// Multiplies `acc` (coefficients of 1, L, L^2, ...) by the given real factor.
void multiply_into(std::vector<double>& acc, std::initializer_list<double> factor) {
    std::vector<double> out(acc.size() + factor.size() - 1, 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) {
        std::size_t j = 0;
        for (const double f : factor) out[i + j++] += acc[i] * f;
    }
    acc = std::move(out);
}

}  // namespace

PoleSet sample_pole_set(Stream& s, int order, double radius_max) {
    if (order < 0) throw ParameterError("sample_pole_set: order must be non-negative");
    if (!(radius_max > 0.0 && radius_max < 1.0)) {
        throw ParameterError("sample_pole_set: radius_max must lie in (0, 1)");
    }
    PoleSet set;
    set.radius_bound = radius_max;
    set.poles.reserve(static_cast<std::size_t>(order));
    for (int pair = 0; pair < order / 2; ++pair) {
        const double radius = rng::uniform(s, 0.0, radius_max);
        const double angle = rng::uniform(s, 0.0, std::numbers::pi);
        const auto pole = std::polar(radius, angle);
        set.poles.push_back(pole);
        set.poles.push_back(std::conj(pole));
    }
    if (order % 2 == 1) set.poles.emplace_back(rng::uniform(s, -radius_max, radius_max), 0.0);
    return set;
}

LagPolynomial expand(const PoleSet& poles, LagConvention convention) {
    // Build from real linear and quadratic factors so the coefficients are
    // real by construction; pairing doubles as the conjugate-closure check.
    std::vector<double> acc{1.0};
    std::vector<std::complex<double>> upper, lower;
    for (const auto& p : poles.poles) {
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) {
            throw ParameterError("expand: non-finite pole");
        }
        if (std::abs(p.imag()) <= conj_tolerance(p)) {
            multiply_into(acc, {1.0, -p.real()});
        } else if (p.imag() > 0.0) {
            upper.push_back(p);
        } else {
            lower.push_back(p);
        }
    }
    if (upper.size() != lower.size()) throw ParameterError("expand: pole set is not conjugate-closed");
    for (const auto& p : upper) {
        auto best = lower.end();
        double best_gap = 0.0;
        for (auto it = lower.begin(); it != lower.end(); ++it) {
            const double gap = std::abs(*it - std::conj(p));
            if (best == lower.end() || gap < best_gap) {
                best = it;
                best_gap = gap;
            }
        }
        if (best_gap > conj_tolerance(p)) throw ParameterError("expand: pole set is not conjugate-closed");
        lower.erase(best);
        multiply_into(acc, {1.0, -2.0 * p.real(), std::norm(p)});
    }

    LagPolynomial out;
    out.convention = convention;
    out.coefficients.assign(acc.begin() + 1, acc.end());
    if (convention == LagConvention::ar) {
        for (double& c : out.coefficients) c = -c;
    }
    return out;
}

std::vector<std::complex<double>> companion_roots(const LagPolynomial& poly) {
    const auto n = static_cast<Eigen::Index>(poly.order());
    if (n == 0) return {};
    const double sign = poly.convention == LagConvention::ar ? 1.0 : -1.0;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) companion(0, j) = sign * poly.coefficients[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success) throw ParameterError("companion_roots: eigen decomposition failed");
    const auto& values = solver.eigenvalues();
    return {values.data(), values.data() + values.size()};
}

bool verify_stability(const LagPolynomial& poly, double bound) {
    for (const double c : poly.coefficients) {
        if (!std::isfinite(c)) return false;
    }
    const auto roots = companion_roots(poly);
    return std::all_of(roots.begin(), roots.end(),
                       [bound](const auto& z) { return std::abs(z) <= bound + 1e-9; });
}

}  // namespace sarsim::poly
