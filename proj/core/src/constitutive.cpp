#include "hydrostore/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hydrostore/errors.hpp"

namespace hydrostore {

namespace {

constexpr std::size_t kMaxListedViolations = 16;

double atan_family(double r, int order) {
    switch (order) {
        case 0: return std::atan(r);
        case 1: return 1.0 / (1.0 + r * r);
        case 2: {
            const double q = 1.0 + r * r;
            return -2.0 * r / (q * q);
        }
        default: throw DomainError("h_eval: order must be 0, 1 or 2");
    }
}

double tanh_family(double r, int order) {
    const double t = std::tanh(r);
    const double sech2 = 1.0 - t * t;
    switch (order) {
        case 0: return t;
        case 1: return sech2;
        case 2: return -2.0 * t * sech2;
        default: throw DomainError("h_eval: order must be 0, 1 or 2");
    }
}

}  // namespace

std::string_view to_string(HFamily family) {
    switch (family) {
        case HFamily::Atan: return "atan";
        case HFamily::Tanh: return "tanh";
    }
    return "unknown";
}

HFamily parse_h_family(std::string_view name) {
    if (name == "atan") return HFamily::Atan;
    if (name == "tanh") return HFamily::Tanh;
    throw ValidationError("unknown h.family '" + std::string(name) + "' (expected atan or tanh)");
}

void validate(const HSpec& spec) {
    if (!std::isfinite(spec.scale) || spec.scale < 0.0)
        throw DomainError("h.scale must be finite and >= 0");
    if (!std::isfinite(spec.c_h) || !(spec.c_h > 1.0)) throw DomainError("h.c_h must be > 1");
}

double h_eval(double r, int order, const HSpec& spec) {
    if (spec.scale == 0.0) {
        if (order < 0 || order > 2) throw DomainError("h_eval: order must be 0, 1 or 2");
        return 0.0;
    }
    switch (spec.family) {
        case HFamily::Atan: return spec.scale * atan_family(r, order);
        case HFamily::Tanh: return spec.scale * tanh_family(r, order);
    }
    return 0.0;
}

HCertificate verify_h_bounds(const HSpec& spec, int samples) {
    validate(spec);
    if (samples < 1000) throw DomainError("verify_h_bounds: need at least 1000 samples");

    std::vector<double> rs;
    rs.reserve(static_cast<std::size_t>(samples) + 1);
    rs.push_back(0.0);
    const int per_sign = samples / 2;
    const double lo = -8.0;
    const double hi = 8.0;
    for (int k = 0; k < per_sign; ++k) {
        const double r = std::pow(10.0, lo + (hi - lo) * k / (per_sign - 1));
        rs.push_back(r);
        rs.push_back(-r);
    }

    constexpr int kSSamples = 11;
    HCertificate cert;
    cert.min_jacobian = std::numeric_limits<double>::infinity();
    cert.max_jacobian = -std::numeric_limits<double>::infinity();

    const double c = spec.c_h;
    for (double r : rs) {
        const double h0 = h_eval(r, 0, spec);
        const double h1 = h_eval(r, 1, spec);
        const double h2 = h_eval(r, 2, spec);
        cert.sup_h = std::max(cert.sup_h, std::abs(h0));
        cert.sup_dh = std::max(cert.sup_dh, std::abs(h1));
        cert.sup_d2h = std::max(cert.sup_d2h, std::abs(h2));
        cert.sup_r_dh = std::max(cert.sup_r_dh, std::abs(r * h1));
        cert.sup_abs_r_d2h = std::max(cert.sup_abs_r_d2h, std::abs(r * h2));
        for (int k = 0; k < kSSamples; ++k) {
            const double s = static_cast<double>(k) / (kSSamples - 1);
            const double jac = 1.0 + r * h2 * s;
            cert.min_jacobian = std::min(cert.min_jacobian, jac);
            cert.max_jacobian = std::max(cert.max_jacobian, jac);
            if (jac < 1.0 / c || jac > c) {
                ++cert.violation_count;
                if (cert.violations.size() < kMaxListedViolations)
                    cert.violations.push_back({r, s, jac});
            }
        }
    }

    const double total = cert.sup_h + cert.sup_dh + cert.sup_d2h + cert.sup_r_dh;
    if (total > c) {
        ++cert.violation_count;
        if (cert.violations.size() < kMaxListedViolations)
            cert.violations.push_back({std::numeric_limits<double>::quiet_NaN(),
                                       std::numeric_limits<double>::quiet_NaN(), total});
    }
    cert.pass = cert.violation_count == 0;
    return cert;
}

double psi(double theta, double chi, const HSpec& spec) {
    if (!(chi >= 0.0 && chi <= 1.0)) throw DomainError("psi: chi must lie in [0,1]");
    return theta - chi * (h_eval(theta, 0, spec) - theta * h_eval(theta, 1, spec));
}

double psi_dtheta(double theta, double chi, const HSpec& spec) {
    return 1.0 + chi * theta * h_eval(theta, 2, spec);
}

double psi_dchi(double theta, const HSpec& spec) {
    return -(h_eval(theta, 0, spec) - theta * h_eval(theta, 1, spec));
}

double psi_inverse(double e, double chi, const HSpec& spec, double tol, int max_iterations) {
    if (!(chi >= 0.0 && chi <= 1.0)) throw DomainError("psi_inverse: chi must lie in [0,1]");
    if (!(tol > 0.0)) throw DomainError("psi_inverse: tol must be > 0");
    if (!std::isfinite(e)) throw DomainError("psi_inverse: e must be finite");

    auto residual = [&](double theta) { return psi(theta, chi, spec) - e; };

    // psi(., chi) is increasing, so expand a bracket around theta = e until the sign flips.
    double step = std::max(1.0, std::abs(e));
    double lo = e - step;
    double hi = e + step;
    int expansions = 0;
    while (residual(lo) > 0.0) {
        lo -= step;
        step *= 2.0;
        if (++expansions > 200) throw ConvergenceError("psi_inverse: no lower bracket");
    }
    step = std::max(1.0, std::abs(e));
    while (residual(hi) < 0.0) {
        hi += step;
        step *= 2.0;
        if (++expansions > 400) throw ConvergenceError("psi_inverse: no upper bracket");
    }

    double theta = e;
    for (int it = 0; it < max_iterations; ++it) {
        const double f = residual(theta);
        if (std::abs(f) <= tol) return theta;
        if (f > 0.0)
            hi = theta;
        else
            lo = theta;
        if (std::nextafter(lo, hi) >= hi) return std::abs(residual(lo)) < std::abs(residual(hi)) ? lo : hi;

        double next = theta - f / psi_dtheta(theta, chi, spec);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        theta = next;
    }
    throw ConvergenceError("psi_inverse: iteration budget exhausted (is the h certificate violated?)");
}

double ExtendedReal::value() const {
    if (!finite_) throw DomainError("ExtendedReal: value() of +infinity");
    return value_;
}

ExtendedReal hatbeta(double r) {
    if (!(r >= 0.0 && r <= 1.0)) return ExtendedReal::infinity();
    return ExtendedReal::finite((1.0 + r) * std::log1p(r) - r);
}

BetaValue split_beta(double chi, double xi) {
    if (!(chi >= 0.0 && chi <= 1.0)) throw DomainError("split_beta: chi must lie in [0,1]");
    return {chi, xi, xi - std::log1p(chi)};
}

double beta_residual(double chi, double xi) {
    const double box = std::max({0.0, -chi, chi - 1.0});
    const double clamped = std::clamp(chi, 0.0, 1.0);
    const double omega = xi - std::log1p(clamped);
    double cone = 0.0;
    if (clamped <= 0.0)
        cone = std::max(omega, 0.0);
    else if (clamped >= 1.0)
        cone = std::max(-omega, 0.0);
    else
        cone = std::abs(omega);
    return std::max(box, cone);
}

}  // namespace hydrostore
