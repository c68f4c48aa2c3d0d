#pragma once

#include <vector>

namespace rmglab {

/// Rescaled linear learning rates and the induced mixture weights.
/// alpha_k = c_alpha log K / (k - 1 + c_alpha log K), so alpha_1 = 1 exactly;
/// alpha_k^K = alpha_k * prod_{j>k} (1 - alpha_j), which sums to 1 over k;
/// eta_{k+1} = sqrt(log K / (alpha_k H)). Natural logarithms throughout.
struct schedule {
    int K = 0;
    int H = 0;
    double c_alpha = 24.0;
    std::vector<double> alpha;   // alpha[k-1] = alpha_k,   k = 1..K
    std::vector<double> alpha_K; // alpha_K[k-1] = alpha_k^K
    std::vector<double> eta;     // eta[k-1] = eta_{k+1},   k = 1..K

    /// FTRL rate applied after iteration k (that is, eta_{k+1}).
    double eta_after(int k) const { return eta[k - 1]; }
};

/// Throws invalid_config unless K >= 1, H >= 1, c_alpha >= 24. K = 1 degrades
/// gracefully: alpha = [1], weights = [1], eta_2 = 0 (log 1 = 0).
schedule build_schedule(int K, int H, double c_alpha);

/// Mixture-weight profile alpha_i^k for i = 1..k at an intermediate iteration k,
/// from the first k entries of the alpha array.
std::vector<double> alpha_weights(const std::vector<double>& alpha, int k);

} // namespace rmglab
