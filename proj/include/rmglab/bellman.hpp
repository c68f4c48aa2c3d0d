#pragma once

#include <cstddef>
#include <vector>

#include "rmglab/game.hpp"
#include "rmglab/parallel.hpp"

namespace rmglab {

/// Shared inner product, strict left-to-right accumulation. Every code path that
/// must agree bitwise on a plain expectation (sigma = 0 reductions) uses this.
inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
    return acc;
}

/// Entrywise clipping: entries above alpha are replaced by alpha.
value_vector clip(const value_vector& v, double alpha);

/// Exact inner minimum of P.V over the total-variation ball of radius sigma
/// around p0, computed via the concave piecewise-linear dual in the clipping
/// level alpha. The maximizer search over the breakpoints {v(s)} is exact.
/// sigma = 0 returns dot(p0, v) exactly.
double tv_support_value(const prob_row& p0, const value_vector& v, double sigma);

struct inner_min_result {
    double value = 0.0;      // the inner minimum (dual route)
    double alpha_star = 0.0; // maximizing clipping level
    prob_row worst_kernel;   // minimizing kernel (greedy route)
};

/// Worst-case kernel: up to sigma of mass is removed from states in decreasing
/// value order (equal values donate highest index first) and added to the
/// lowest-index minimum-value state. Constant v moves no mass and returns p0.
/// The value field is computed by the dual, so value vs worst_kernel.v is a
/// genuine two-route consistency invariant.
inner_min_result tv_worst_case_kernel(const prob_row& p0, const value_vector& v, double sigma);

/// Independent brute-force oracle for the same inner minimum: greedy mass
/// transport in sorted value order, optimal for this polytope. Shares no code
/// with the dual path; the dual-vs-oracle comparison is a primary acceptance check.
double lp_inner_min_oracle(const prob_row& p0, const value_vector& v, double sigma);

/// Batched dual evaluation, one value per row. The parallel kernel and the serial
/// reference produce bitwise-identical output.
std::vector<double> batch_tv_support(const std::vector<prob_row>& rows, const value_vector& v,
                                     double sigma, exec policy = exec::parallel);

/// One-step robust backup for agent i at step h against the other agents' step
/// rows: entry (s, a_i) = expected reward + inner minimum of the expected kernel
/// row against v_next under radius sigma_i. Entries lie in [0, H-h] + [0,1].
std::vector<std::vector<double>> robust_backup(const robust_markov_game& game, int i, int h,
                                               const value_vector& v_next,
                                               const policy_step& others,
                                               exec policy = exec::parallel);

} // namespace rmglab
