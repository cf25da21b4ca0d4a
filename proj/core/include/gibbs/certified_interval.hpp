#pragma once

#include <cstddef>
#include <optional>
#include <string>

namespace gibbs {

enum class Hierarchy { Dlr, Mc };
/// RawLp: simplex on the full LP. Reduced: DLR boundary enumeration.
/// PolicyIteration: MC LP solved as its average-reward control problem.
enum class Method { Auto, RawLp, Reduced, PolicyIteration };

std::string to_string(Hierarchy h);
std::string to_string(Method m);

/// [lower, upper] is guaranteed to contain mu(f).
struct CertifiedInterval {
    double lower = 0.0;
    double upper = 0.0;
    Hierarchy hierarchy = Hierarchy::Dlr;
    Method method = Method::Reduced;
    std::size_t lambda_size = 0;
    std::size_t boundary_size = 0;
    std::optional<std::size_t> dist;  ///< dist(B, Lambda^c); empty when Lambda^c is empty
    double residual = 0.0;            ///< worst primal residual of the underlying solve
    double residual_widening = 0.0;   ///< already applied to lower/upper when strict
    double solver_gap = 0.0;          ///< slack between certified and attained values (MC)
    std::size_t iterations = 0;

    double width() const noexcept { return upper - lower; }
    double midpoint() const noexcept { return 0.5 * (lower + upper); }
    bool contains(double v, double slack = 0.0) const noexcept { return lower - slack <= v && v <= upper + slack; }
};

}  // namespace gibbs
