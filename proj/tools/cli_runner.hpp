#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gibbs/certified_interval.hpp"
#include "gibbs/lp_solver.hpp"
#include "gibbs/observable.hpp"
#include "gibbs/spin_model.hpp"

namespace gibbs::cli {

enum class Which { Dlr, Mc, Both };

struct BoundSettings {
    Which which = Which::Both;
    Method method = Method::Auto;
    bool strict = false;
    LpOptions lp{};
};

/// One (radius, hierarchy) cell of a sweep. A failed cell keeps its region
/// stats, NaN values and the error text.
struct SweepRow {
    std::size_t r = 0;
    std::optional<std::size_t> dist;
    std::size_t lambda_size = 0;
    std::size_t boundary_size = 0;
    Hierarchy hierarchy = Hierarchy::Dlr;
    double p_min = 0.0;
    double p_max = 0.0;
    double width = 0.0;
    double residual = 0.0;
    double wall_ms = 0.0;
    std::string error;
};

inline constexpr const char* kCsvHeader = "r,dist,lambda_size,boundary_size,hierarchy,p_min,p_max,width,residual,wall_ms";

/// Interval of one hierarchy on the ball of radius r around supp(f).
CertifiedInterval bound_at_radius(const SpinSystem& sys, const Observable& f, Hierarchy h, std::size_t r,
                                  const BoundSettings& s);

/// Rows ordered by radius, then DLR before MC, regardless of `parallel`.
std::vector<SweepRow> sweep(const SpinSystem& sys, const Observable& f, std::size_t r_min, std::size_t r_max,
                            const BoundSettings& s, bool parallel);

void write_csv(const std::vector<SweepRow>& rows, std::ostream& os);

/// Least-squares slope of log(width) against dist over the usable rows of one
/// hierarchy; nullopt with fewer than two usable rows.
std::optional<double> fitted_log_width_slope(const std::vector<SweepRow>& rows, Hierarchy h);

/// Full command line (without the program name). Returns the exit code:
/// 0 ok, 1 input error, 2 guard violation, 3 solver failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace gibbs::cli
