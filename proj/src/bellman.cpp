#include "rmglab/bellman.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "rmglab/errors.hpp"

namespace rmglab {

namespace {

void check_pair(const prob_row& p0, const value_vector& v) {
    if (p0.empty() || v.empty())
        throw rmg_error(error_kind::empty_vector, "inner minimization over empty vectors");
    if (p0.size() != v.size())
        throw rmg_error(error_kind::dimension_mismatch, "kernel row and value vector disagree");
}

struct dual_point {
    double value;
    double alpha;
};

// Maximizes f(alpha) = p0.clip(v, alpha) - sigma*(alpha - min v) over the
// breakpoints {v(s)}; f is concave piecewise linear with exactly these kinks,
// and min v, max v are themselves breakpoints, so the scan is exact.
dual_point dual_max(const prob_row& p0, const value_vector& v, double sigma) {
    const std::size_t S = v.size();
    double vmin = v[0], vmax = v[0];
    for (double x : v) {
        vmin = std::min(vmin, x);
        vmax = std::max(vmax, x);
    }
    if (sigma == 0.0 || vmin == vmax) return {dot(p0, v), vmax};

    double best = -std::numeric_limits<double>::infinity();
    double best_alpha = vmin;
    for (std::size_t j = 0; j < S; ++j) {
        const double alpha = v[j];
        double acc = 0.0;
        for (std::size_t s = 0; s < S; ++s) acc += p0[s] * (v[s] > alpha ? alpha : v[s]);
        const double f = acc - sigma * (alpha - vmin);
        if (f > best) {
            best = f;
            best_alpha = alpha;
        }
    }
    return {best, best_alpha};
}

} // namespace

value_vector clip(const value_vector& v, double alpha) {
    value_vector out(v.size());
    for (std::size_t s = 0; s < v.size(); ++s) out[s] = v[s] > alpha ? alpha : v[s];
    return out;
}

double tv_support_value(const prob_row& p0, const value_vector& v, double sigma) {
    check_pair(p0, v);
    return dual_max(p0, v, sigma).value;
}

inner_min_result tv_worst_case_kernel(const prob_row& p0, const value_vector& v, double sigma) {
    check_pair(p0, v);
    const std::size_t S = v.size();
    const dual_point dual = dual_max(p0, v, sigma);

    inner_min_result result;
    result.value = dual.value;
    result.alpha_star = dual.alpha;

    double vmin = v[0], vmax = v[0];
    for (double x : v) {
        vmin = std::min(vmin, x);
        vmax = std::max(vmax, x);
    }
    if (sigma == 0.0 || vmin == vmax) {
        result.worst_kernel = p0;
        return result;
    }

    // Receiver: lowest-index state attaining min v.
    std::size_t receiver = 0;
    while (v[receiver] != vmin) ++receiver;

    // Donors in decreasing value order; equal values donate highest index first.
    std::vector<std::size_t> order(S);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (v[a] != v[b]) return v[a] > v[b];
        return a > b;
    });

    prob_row kernel = p0;
    double budget = std::min(sigma, 1.0 - p0[receiver]);
    double moved = 0.0;
    for (std::size_t idx : order) {
        if (budget <= 0.0) break;
        if (idx == receiver) continue;
        const double take = std::min(kernel[idx], budget);
        kernel[idx] -= take;
        budget -= take;
        moved += take;
    }
    kernel[receiver] += moved;
    result.worst_kernel = std::move(kernel);
    return result;
}

double lp_inner_min_oracle(const prob_row& p0, const value_vector& v, double sigma) {
    check_pair(p0, v);
    const std::size_t S = v.size();

    // Sorted index order, ascending value (ties by index).
    std::vector<std::size_t> asc(S);
    std::iota(asc.begin(), asc.end(), 0);
    std::sort(asc.begin(), asc.end(), [&](std::size_t a, std::size_t b) {
        if (v[a] != v[b]) return v[a] < v[b];
        return a < b;
    });

    prob_row p = p0;
    const double eps = std::min(sigma, 1.0 - p0[asc[0]]);
    p[asc[0]] += eps;
    double remaining = eps;
    for (std::size_t pos = S; remaining > 0.0 && pos-- > 1;) {
        const double take = std::min(remaining, p[asc[pos]]);
        p[asc[pos]] -= take;
        remaining -= take;
    }
    return dot(p, v);
}

std::vector<double> batch_tv_support(const std::vector<prob_row>& rows, const value_vector& v,
                                     double sigma, exec policy) {
    std::vector<double> out(rows.size());
    if (policy == exec::serial) {
        for (std::size_t j = 0; j < rows.size(); ++j) out[j] = tv_support_value(rows[j], v, sigma);
        return out;
    }
    const long long count = static_cast<long long>(rows.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (long long j = 0; j < count; ++j) out[j] = tv_support_value(rows[j], v, sigma);
    return out;
}

std::vector<std::vector<double>> robust_backup(const robust_markov_game& game, int i, int h,
                                               const value_vector& v_next,
                                               const policy_step& others, exec policy) {
    const int S = game.S;
    const int A = game.actions[i];
    const double sigma = game.radii[i];
    std::vector<std::vector<double>> table(S, std::vector<double>(A, 0.0));

    auto cell = [&](int s, int a) {
        std::vector<prob_row> other_rows(game.n);
        for (int j = 0; j < game.n; ++j)
            if (j != i) other_rows[j] = others.rows[j][s];
        const prob_row row = expected_kernel_row(game, h, s, i, a, other_rows);
        table[s][a] = expected_reward(game, h, s, i, a, other_rows) +
                      tv_support_value(row, v_next, sigma);
    };

    if (policy == exec::serial) {
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) cell(s, a);
        return table;
    }
    const long long cells = static_cast<long long>(S) * A;
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (long long c = 0; c < cells; ++c) cell(static_cast<int>(c / A), static_cast<int>(c % A));
    return table;
}

} // namespace rmglab
