#pragma once

namespace rmglab::tol {

// Input validation: probability rows must sum to 1 this tightly; no silent renormalization.
inline constexpr double simplex = 1e-12;

// Derived kernel rows (convex combinations of valid rows) must sum to 1 this tightly.
inline constexpr double kernel_row_sum = 1e-10;

// All value-space comparisons (dual vs primal, recursions vs oracles, span bounds).
// Values live in [0, H] with desk-scale H, so an absolute tolerance suffices.
inline constexpr double value = 1e-9;

// Schedule identities (alpha_1 = 1, sum of mixture weights = 1, product formula).
inline constexpr double schedule = 1e-12;

// Slack allowed on the total-variation constraint of a constructed worst-case kernel.
inline constexpr double tv_slack = 1e-10;

} // namespace rmglab::tol
