#pragma once

#include <string>

#include "rmglab/game.hpp"

namespace rmglab {

/// Game documents are UTF-8 JSON with keys n, H, S, actions, radii,
/// transitions[h][s][jointAction][s'], rewards[i][h][s][jointAction].
/// Round-trips are lossless: doubles are emitted in shortest-round-trip form.
std::string serialize_game(const robust_markov_game& game);

/// Parses and validates a game document. Structural problems (bad JSON, missing
/// keys, wrong types) raise parse_error with a 1-based line number; value
/// problems (bad rows, rewards, radii) raise the validate_game errors.
robust_markov_game deserialize_game(const std::string& text);

/// Mixture documents: keys n, H, S, actions, K, weights[h][k],
/// policies[h][k][i][s][a]. Deserialization validates all simplex rows.
std::string serialize_mixture(const policy_mixture& mixture);
policy_mixture deserialize_mixture(const std::string& text);

/// Single product policy documents: keys n, H, S, actions, policy[i][h][s][a].
std::string serialize_policy(const product_policy& policy, const std::vector<int>& actions,
                             int S);
product_policy deserialize_policy(const std::string& text);

/// File helpers; read failures raise parse_error, write failures raise
/// std::runtime_error.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

inline robust_markov_game read_game_file(const std::string& path) {
    return deserialize_game(read_text_file(path));
}
inline void write_game_file(const std::string& path, const robust_markov_game& game) {
    write_text_file(path, serialize_game(game));
}
inline policy_mixture read_mixture_file(const std::string& path) {
    return deserialize_mixture(read_text_file(path));
}
inline void write_mixture_file(const std::string& path, const policy_mixture& mixture) {
    write_text_file(path, serialize_mixture(mixture));
}

} // namespace rmglab
