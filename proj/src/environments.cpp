#include "pmevi/environments.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace pmevi {

TabularMDP river_swim(std::size_t n) {
    if (n < 2) throw InvalidInput("river_swim needs at least 2 states");
    std::vector<Vector> rows;
    Vector rewards;
    for (std::size_t s = 0; s < n; ++s) {
        Vector left(n, 0.0);
        left[s == 0 ? 0 : s - 1] = 1.0;
        rows.push_back(left);
        rewards.push_back(s == 0 ? 0.05 : 0.0);

        Vector right(n, 0.0);
        if (s == 0) {
            right[0] = 0.6;
            right[1] = 0.4;
        } else if (s == n - 1) {
            right[s - 1] = 0.05;
            right[s] = 0.95;
        } else {
            right[s - 1] = 0.05;
            right[s] = 0.6;
            right[s + 1] = 0.35;
        }
        rows.push_back(right);
        rewards.push_back(s == n - 1 ? 0.95 : 0.0);
    }
    return TabularMDP(std::vector<std::size_t>(n, 2), std::move(rows), std::move(rewards),
                      RewardLaw::Bernoulli);
}

TabularMDP random_mdp(std::size_t n_states, std::size_t n_actions, std::uint64_t seed,
                      double min_entry) {
    if (n_states == 0 || n_actions == 0) throw InvalidInput("random_mdp: empty sizes");
    const double S = static_cast<double>(n_states);
    if (!(min_entry > 0.0) || min_entry * S > 1.0 + 1e-15)
        throw InvalidInput("random_mdp: min_entry must lie in (0, 1/S]");
    Rng rng(seed);
    const double free_mass = std::max(0.0, 1.0 - S * min_entry);
    std::vector<Vector> rows;
    Vector rewards;
    for (std::size_t x = 0; x < n_states * n_actions; ++x) {
        Vector w(n_states);
        double total = 0.0;
        for (auto& wi : w) {
            wi = rng.exponential();
            total += wi;
        }
        Vector row(n_states);
        double sum = 0.0;
        for (std::size_t j = 0; j < n_states; ++j) {
            row[j] = min_entry + free_mass * (w[j] / total);
            sum += row[j];
        }
        for (auto& p : row) p /= sum;
        rows.push_back(std::move(row));
        rewards.push_back(rng.uniform());
    }
    return TabularMDP(std::vector<std::size_t>(n_states, n_actions), std::move(rows),
                      std::move(rewards), RewardLaw::Bernoulli);
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    return parts;
}

std::uint64_t parse_unsigned(const std::string& text, const std::string& name) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw InvalidInput("bad environment name '" + name + "'");
    return value;
}

} // namespace

TabularMDP make_environment(const std::string& name) {
    const auto parts = split(name, ':');
    if (parts.size() == 2 && parts[0] == "riverswim")
        return river_swim(parse_unsigned(parts[1], name));
    if (parts.size() == 4 && parts[0] == "random") {
        const auto S = parse_unsigned(parts[1], name);
        const auto A = parse_unsigned(parts[2], name);
        const auto seed = parse_unsigned(parts[3], name);
        if (S == 0) throw InvalidInput("bad environment name '" + name + "'");
        return random_mdp(S, A, seed, 1.0 / (4.0 * static_cast<double>(S)));
    }
    throw InvalidInput("unknown environment '" + name + "'");
}

bool is_communicating(const TabularMDP& mdp) {
    const std::size_t S = mdp.n_states();
    std::vector<std::vector<bool>> reach(S, std::vector<bool>(S, false));
    for (std::size_t s = 0; s < S; ++s) {
        reach[s][s] = true;
        for (std::size_t a = 0; a < mdp.n_actions(s); ++a) {
            auto row = mdp.kernel(s, a);
            for (std::size_t j = 0; j < S; ++j)
                if (row[j] > 0.0) reach[s][j] = true;
        }
    }
    for (std::size_t k = 0; k < S; ++k)
        for (std::size_t i = 0; i < S; ++i)
            if (reach[i][k])
                for (std::size_t j = 0; j < S; ++j)
                    if (reach[k][j]) reach[i][j] = true;
    for (std::size_t i = 0; i < S; ++i)
        for (std::size_t j = 0; j < S; ++j)
            if (!reach[i][j]) return false;
    return true;
}

} // namespace pmevi
