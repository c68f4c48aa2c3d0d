#include "rmglab/schedule.hpp"

#include <cmath>

#include "rmglab/errors.hpp"

namespace rmglab {

schedule build_schedule(int K, int H, double c_alpha) {
    if (K < 1) throw rmg_error(error_kind::invalid_config, "schedule needs K >= 1");
    if (H < 1) throw rmg_error(error_kind::invalid_config, "schedule needs H >= 1");
    if (!(c_alpha >= 24.0))
        throw rmg_error(error_kind::invalid_config, "schedule needs c_alpha >= 24");

    schedule sch;
    sch.K = K;
    sch.H = H;
    sch.c_alpha = c_alpha;
    sch.alpha.resize(K);
    sch.alpha_K.resize(K);
    sch.eta.resize(K);

    const double scaled_log = c_alpha * std::log(static_cast<double>(K));
    sch.alpha[0] = 1.0; // k = 1 gives scaled_log / (0 + scaled_log); pinned exact
    for (int k = 2; k <= K; ++k) sch.alpha[k - 1] = scaled_log / (k - 1 + scaled_log);

    sch.alpha_K = alpha_weights(sch.alpha, K);

    const double log_K = std::log(static_cast<double>(K));
    for (int k = 1; k <= K; ++k) sch.eta[k - 1] = std::sqrt(log_K / (sch.alpha[k - 1] * H));
    return sch;
}

std::vector<double> alpha_weights(const std::vector<double>& alpha, int k) {
    std::vector<double> weights(k);
    double tail = 1.0; // prod_{j > i} (1 - alpha_j), built backward
    for (int i = k; i >= 1; --i) {
        weights[i - 1] = alpha[i - 1] * tail;
        tail *= 1.0 - alpha[i - 1];
    }
    return weights;
}

} // namespace rmglab
