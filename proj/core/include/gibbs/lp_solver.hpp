#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace gibbs {

enum class Sense { Min, Max };

struct LpTerm {
    std::size_t col;
    double value;
};

/// min / max c.x subject to A x = b, x >= 0.
///
/// Rows are kept as coefficient lists; the solver densifies after presolve.
class LpProblem {
public:
    LpProblem() = default;
    LpProblem(std::size_t num_vars, Sense sense);

    std::size_t num_vars() const noexcept { return objective_.size(); }
    std::size_t num_rows() const noexcept { return rows_.size(); }
    Sense sense() const noexcept { return sense_; }
    void set_sense(Sense s) noexcept { sense_ = s; }

    std::vector<double>& objective() noexcept { return objective_; }
    const std::vector<double>& objective() const noexcept { return objective_; }

    /// Duplicate columns within a row are summed.
    void add_row(std::vector<LpTerm> terms, double rhs);
    const std::vector<LpTerm>& row(std::size_t i) const { return rows_[i]; }
    double rhs(std::size_t i) const { return rhs_[i]; }

    /// Throws InputError on out-of-range columns or non-finite data.
    void validate() const;

    /// max_i |(A x)_i - b_i| and max(0, -min_j x_j).
    double primal_residual(const std::vector<double>& x) const;
    double objective_value(const std::vector<double>& x) const;

private:
    std::vector<double> objective_;
    std::vector<std::vector<LpTerm>> rows_;
    std::vector<double> rhs_;
    Sense sense_ = Sense::Min;
};

double bound_violation(const std::vector<double>& x);

enum class LpStatus { Optimal, Infeasible, Unbounded };
std::string to_string(LpStatus s);

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;
    std::vector<double> point;
    double primal_residual = 0.0;
    double bound_violation = 0.0;
    std::size_t iterations = 0;
    std::size_t reduced_rows = 0;  ///< size of the problem handed to the simplex
    std::size_t reduced_cols = 0;
};

struct LpOptions {
    double feas_tol = 1e-8;
    double opt_tol = 1e-10;
    double pivot_tol = 1e-11;
    std::size_t iteration_factor = 50;  ///< cap = factor * (rows + cols)
    bool aggregate_doubletons = true;
    std::size_t max_dense_entries = 16'000'000;
};

struct Preprocessed {
    LpProblem problem;
    std::vector<std::size_t> row_origin;  ///< surviving row -> row of the input
    bool infeasible = false;
    std::size_t zero_rows = 0;
    std::size_t duplicate_rows = 0;
};

/// Drops zero and duplicate rows and scales each row to unit max |a_ij|.
/// A zero row with nonzero right-hand side sets `infeasible`.
Preprocessed preprocess(const LpProblem& p);

/// Two-phase primal simplex. OPTIMAL answers are re-verified on `p` itself;
/// a point that misses feas_tol raises SolverError, as does the iteration cap.
LpSolution solve(const LpProblem& p, const LpOptions& opts = {});
LpSolution solve(const LpProblem& p, double feas_tol);

/// Fixed-format MPS dump (OBJSENSE section for maximisation).
void write_mps(const LpProblem& p, std::ostream& os, const std::string& name = "GIBBS");

}  // namespace gibbs
