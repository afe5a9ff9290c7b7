#pragma once

#include "pmevi/mdp.hpp"

#include <cstdint>
#include <string>

namespace pmevi {

inline constexpr std::size_t kLeft = 0;
inline constexpr std::size_t kRight = 1;

/// n-state river-swim, states ordered left to right (index 0 is the
/// left bank). Actions: kLeft, kRight. Bernoulli rewards, 0.05 for LEFT at
/// the left bank and 0.95 for RIGHT at the right bank, zero elsewhere.
TabularMDP river_swim(std::size_t n);

/// Random communicating MDP. Kernel rows are min_entry + (1 - S*min_entry)
/// times a flat-Dirichlet draw, so every entry is at least min_entry;
/// mean rewards are uniform in [0,1). Deterministic per seed (see Rng).
TabularMDP random_mdp(std::size_t n_states, std::size_t n_actions, std::uint64_t seed,
                      double min_entry);

/// Environment by name: "riverswim:<n>" or "random:<S>:<A>:<seed>".
/// Random instances use min_entry = 1/(4S).
TabularMDP make_environment(const std::string& name);

/// True when every state reaches every other state under some policy.
bool is_communicating(const TabularMDP& mdp);

} // namespace pmevi
