#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hydrostore {

/// Admissible coupling functions h. Only families with analytic bounds are offered.
enum class HFamily {
    Atan,  ///< h(r) = a * atan(r)
    Tanh,  ///< h(r) = a * tanh(r)
};

std::string_view to_string(HFamily family);
HFamily parse_h_family(std::string_view name);

/// Coupling function h together with the constant c_h that is claimed to bound it.
///
/// For the default (atan, a = 1) the suprema are sup|r h''(r)| = 1/2 and
/// sup|r h'(r)| = 1/2, so c_h = 4 leaves a comfortable margin.
struct HSpec {
    HFamily family = HFamily::Atan;
    double scale = 1.0;
    double c_h = 4.0;
};

/// Throws DomainError unless scale is finite and >= 0 and c_h > 1.
void validate(const HSpec& spec);

/// h(r), h'(r) or h''(r) for order 0, 1, 2.
double h_eval(double r, int order, const HSpec& spec);

struct HViolation {
    double r;
    double s;
    double value;  ///< offending 1 + r h''(r) s, or the bound-(12) total
};

/// Result of sampling the bounds of h; a failed certificate is data, not an exception.
struct HCertificate {
    bool pass = false;
    double sup_h = 0.0;
    double sup_dh = 0.0;
    double sup_d2h = 0.0;
    double sup_r_dh = 0.0;
    double sup_abs_r_d2h = 0.0;
    double min_jacobian = 0.0;  ///< min over samples of 1 + r h''(r) s
    double max_jacobian = 0.0;
    long violation_count = 0;
    std::vector<HViolation> violations;  ///< first few offending samples
};

/// Samples r over +-[1e-8, 1e8] (log spaced, plus r = 0) and s over [0,1] and checks
/// ||h||_{W^{2,inf}} + sup|r h'| <= c_h and 1/c_h <= 1 + r h''(r) s <= c_h.
HCertificate verify_h_bounds(const HSpec& spec, int samples);

/// e = psi(theta, chi) = theta - chi (h(theta) - theta h'(theta)).
double psi(double theta, double chi, const HSpec& spec);

/// Partial derivative of psi in theta: 1 + chi theta h''(theta).
double psi_dtheta(double theta, double chi, const HSpec& spec);

/// Partial derivative of psi in chi: -(h(theta) - theta h'(theta)).
double psi_dchi(double theta, const HSpec& spec);

/// Inverts psi in its first argument by Newton's method safeguarded with bisection.
/// Returns theta with |psi(theta, chi) - e| <= tol, or the closest double when the
/// bracket collapses below machine resolution first.
double psi_inverse(double e, double chi, const HSpec& spec, double tol = 1e-12,
                   int max_iterations = 100);

/// Value on the extended real half-line [0, +inf]. The infinite value carries no
/// number and value() refuses to hand one out.
class ExtendedReal {
public:
    static ExtendedReal finite(double v) { return ExtendedReal(v, true); }
    static ExtendedReal infinity() { return ExtendedReal(0.0, false); }

    bool is_finite() const noexcept { return finite_; }
    double value() const;

    friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
        return a.finite_ == b.finite_ && (!a.finite_ || a.value_ == b.value_);
    }

private:
    ExtendedReal(double v, bool f) : value_(v), finite_(f) {}
    double value_;
    bool finite_;
};

/// Primitive of log(1+s) on [0,1], +inf elsewhere.
ExtendedReal hatbeta(double r);

/// Decomposition xi = multiplier + log(1 + chi) of a selection of beta(chi).
struct BetaValue {
    double chi;
    double xi;
    double multiplier;
};

/// Throws DomainError when chi is outside [0,1].
BetaValue split_beta(double chi, double xi);

/// 0 iff xi lies in beta(chi); otherwise max of the distance of chi to [0,1] and the
/// distance of the multiplier to the normal cone of [0,1] at chi.
double beta_residual(double chi, double xi);

}  // namespace hydrostore
