#include "rmglab/game_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rmglab/errors.hpp"

namespace rmglab {

namespace {

using nlohmann::json;

int line_of_byte(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t p = 0; p < byte && p < text.size(); ++p)
        if (text[p] == '\n') ++line;
    return line;
}

json parse_document(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw rmg_error(error_kind::parse_error, "line " + std::to_string(line_of_byte(text, e.byte)) +
                                                     ": " + e.what());
    }
}

// Structural extraction; any missing key or type mismatch is a parse error.
template <typename T>
T field(const json& doc, const char* key) {
    if (!doc.contains(key))
        throw rmg_error(error_kind::parse_error, std::string("missing key \"") + key + "\"");
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw rmg_error(error_kind::parse_error, std::string("bad value for key \"") + key +
                                                     "\": " + e.what());
    }
}

} // namespace

std::string serialize_game(const robust_markov_game& game) {
    json doc;
    doc["n"] = game.n;
    doc["H"] = game.H;
    doc["S"] = game.S;
    doc["actions"] = game.actions;
    doc["radii"] = game.radii;
    doc["transitions"] = game.kernel;
    doc["rewards"] = game.rewards;
    return doc.dump(1) + "\n";
}

robust_markov_game deserialize_game(const std::string& text) {
    json doc = parse_document(text);
    robust_markov_game game;
    game.n = field<int>(doc, "n");
    game.H = field<int>(doc, "H");
    game.S = field<int>(doc, "S");
    game.actions = field<std::vector<int>>(doc, "actions");
    game.radii = field<std::vector<double>>(doc, "radii");
    game.kernel = field<decltype(game.kernel)>(doc, "transitions");
    game.rewards = field<decltype(game.rewards)>(doc, "rewards");
    validate_game(game);
    return game;
}

std::string serialize_mixture(const policy_mixture& mixture) {
    json doc;
    doc["n"] = mixture.n;
    doc["H"] = mixture.H;
    doc["S"] = mixture.S;
    doc["actions"] = mixture.actions;
    doc["K"] = mixture.K;
    doc["weights"] = mixture.weights;
    json policies = json::array();
    for (int h = 0; h < mixture.H; ++h) {
        json per_k = json::array();
        for (int k = 0; k < mixture.K; ++k) per_k.push_back(mixture.steps[h][k].rows);
        policies.push_back(std::move(per_k));
    }
    doc["policies"] = policies;
    return doc.dump() + "\n";
}

policy_mixture deserialize_mixture(const std::string& text) {
    json doc = parse_document(text);
    policy_mixture mixture;
    mixture.n = field<int>(doc, "n");
    mixture.H = field<int>(doc, "H");
    mixture.S = field<int>(doc, "S");
    mixture.actions = field<std::vector<int>>(doc, "actions");
    mixture.K = field<int>(doc, "K");
    mixture.weights = field<std::vector<std::vector<double>>>(doc, "weights");
    auto policies = field<std::vector<std::vector<std::vector<std::vector<prob_row>>>>>(
        doc, "policies");
    if (static_cast<int>(policies.size()) != mixture.H)
        throw rmg_error(error_kind::parse_error, "policies array has wrong step count");
    mixture.steps.assign(mixture.H, {});
    for (int h = 0; h < mixture.H; ++h) {
        if (static_cast<int>(policies[h].size()) != mixture.K)
            throw rmg_error(error_kind::parse_error, "policies array has wrong slice count");
        mixture.steps[h].assign(mixture.K, {});
        for (int k = 0; k < mixture.K; ++k) mixture.steps[h][k].rows = policies[h][k];
    }

    validate_mixture(mixture);
    return mixture;
}

std::string serialize_policy(const product_policy& policy, const std::vector<int>& actions,
                             int S) {
    json doc;
    doc["n"] = static_cast<int>(policy.rows.size());
    doc["H"] = policy.rows.empty() ? 0 : static_cast<int>(policy.rows[0].size());
    doc["S"] = S;
    doc["actions"] = actions;
    doc["policy"] = policy.rows;
    return doc.dump(1) + "\n";
}

product_policy deserialize_policy(const std::string& text) {
    json doc = parse_document(text);
    product_policy policy;
    policy.rows = field<decltype(policy.rows)>(doc, "policy");
    const int n = field<int>(doc, "n");
    const int H = field<int>(doc, "H");
    const int S = field<int>(doc, "S");
    const auto actions = field<std::vector<int>>(doc, "actions");
    if (static_cast<int>(policy.rows.size()) != n)
        throw rmg_error(error_kind::parse_error, "policy array has wrong agent count");
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(policy.rows[i].size()) != H)
            throw rmg_error(error_kind::parse_error, "policy array has wrong step count");
        for (int h = 0; h < H; ++h) {
            if (static_cast<int>(policy.rows[i][h].size()) != S)
                throw rmg_error(error_kind::parse_error, "policy array has wrong state count");
            for (int s = 0; s < S; ++s)
                if (static_cast<int>(policy.rows[i][h][s].size()) != actions[i])
                    throw rmg_error(error_kind::parse_error, "policy row length != A_i");
        }
    }
    return policy;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw rmg_error(error_kind::parse_error, "cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace rmglab
