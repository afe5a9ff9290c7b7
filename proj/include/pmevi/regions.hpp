#pragma once

#include "pmevi/mdp.hpp"

#include <iosfwd>
#include <span>
#include <string_view>

namespace pmevi {

/// Confidence region families for a reward or a kernel:
///   C1  Weissman / Azuma L1 ball
///   C2  per-coordinate empirical Bernstein box
///   C3  empirical likelihood (KL) ball
///   C4  trivial region (whole simplex or [0,1])
enum class RegionFamily { C1, C2, C3, C4 };

std::string_view to_string(RegionFamily family);
RegionFamily parse_region_family(std::string_view text);

/// Visit statistics of a learning run.
class CountsTable {
public:
    CountsTable() = default;
    explicit CountsTable(PairLayout layout);

    void record(std::size_t s, std::size_t a, double reward, std::size_t next_state);

    const PairLayout& layout() const { return layout_; }
    std::size_t n_states() const { return layout_.n_states(); }
    std::size_t time() const { return time_; }
    std::size_t visits(std::size_t pair) const { return visits_[pair]; }
    std::size_t visits(std::size_t s, std::size_t a) const { return visits_[layout_.pair(s, a)]; }
    std::size_t transitions(std::size_t pair, std::size_t next) const {
        return transitions_[pair * n_states() + next];
    }
    double reward_sum(std::size_t pair) const { return reward_sum_[pair]; }

    /// Empirical next-state law; the uniform law for an unvisited pair.
    Vector empirical_kernel(std::size_t pair) const;
    /// Empirical mean reward; 0 for an unvisited pair.
    double empirical_reward(std::size_t pair) const;

    void write(std::ostream& out) const;
    static CountsTable read(std::istream& in);

    bool operator==(const CountsTable&) const = default;

private:
    PairLayout layout_;
    std::vector<std::size_t> visits_;
    std::vector<std::size_t> transitions_;
    Vector reward_sum_;
    std::size_t time_ = 0;
};

struct RegionSpec {
    RegionFamily reward_family = RegionFamily::C1;
    RegionFamily kernel_family = RegionFamily::C1;
    double delta = 0.05;
    std::size_t horizon = 1;

    void validate() const;
};

/// Result of max_{q in P(s,a)} q.u.
struct InnerMax {
    double value = 0.0;
    Vector maximizer;
    /// Set when a C2 box could not be repaired onto the simplex.
    bool fallback = false;
};

/// Per-pair region parameters. Only the fields of the pair's family are used.
struct PairRegion {
    std::size_t visits = 0;
    double reward_hat = 0.0;
    double reward_lo = 0.0;
    double reward_hi = 1.0;
    bool trivial_kernel = true;
    double l1_radius = kInf;   // C1: ||q - p_hat||_1 <= l1_radius
    Vector box_lo, box_hi;     // C2: box_lo <= q <= box_hi
    double kl_radius = kInf;   // C3: KL(p_hat || q) <= kl_radius
};

/// (s,a)-rectangular model region built from a frozen CountsTable.
class RegionTable {
public:
    const PairLayout& layout() const { return layout_; }
    std::size_t n_states() const { return layout_.n_states(); }
    RegionFamily kernel_family() const { return kernel_family_; }
    RegionFamily reward_family() const { return reward_family_; }

    const PairRegion& pair_region(std::size_t pair) const { return pairs_[pair]; }
    std::span<const double> empirical_kernel(std::size_t pair) const {
        return {p_hat_.data() + pair * n_states(), n_states()};
    }
    double empirical_reward(std::size_t pair) const { return pairs_[pair].reward_hat; }

    double reward_upper(std::size_t s, std::size_t a) const {
        return pairs_[layout_.pair(s, a)].reward_hi;
    }
    double reward_lower(std::size_t s, std::size_t a) const {
        return pairs_[layout_.pair(s, a)].reward_lo;
    }

    InnerMax kernel_inner_max(std::size_t s, std::size_t a, std::span<const double> u) const;

    /// Membership with a 1e-12 tolerance on the defining inequality.
    bool contains_kernel(std::size_t s, std::size_t a, std::span<const double> q) const;
    bool contains_reward(std::size_t s, std::size_t a, double r) const;

    friend RegionTable build_regions(const CountsTable& counts, const RegionSpec& spec);

    /// Degenerate C1 regions of radius zero centred on a known model: the
    /// extended operator then reduces to the model's Bellman operator.
    static RegionTable point_model(const TabularMDP& mdp);

    /// Same centres as `base` with every C1 kernel radius replaced.
    RegionTable with_l1_radius(double radius) const;

private:
    PairLayout layout_;
    RegionFamily kernel_family_ = RegionFamily::C4;
    RegionFamily reward_family_ = RegionFamily::C4;
    std::vector<PairRegion> pairs_;
    Vector p_hat_;
};

RegionTable build_regions(const CountsTable& counts, const RegionSpec& spec);

// Building blocks, exposed for tests and diagnostics.

/// KL divergence between Bernoulli(p) and Bernoulli(q).
double bernoulli_kl(double p, double q);

/// KL(p || q) of two distributions; +inf if q misses mass of p.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// max q.u over ||q - p_hat||_1 <= radius on the simplex.
InnerMax l1_inner_max(std::span<const double> p_hat, std::span<const double> u, double radius);

/// max q.u over the box [lo, hi] intersected with the simplex.
InnerMax box_inner_max(std::span<const double> lo, std::span<const double> hi,
                       std::span<const double> u);

/// max q.u over KL(p_hat || q) <= radius, by bisection on the dual variable.
InnerMax kl_inner_max(std::span<const double> p_hat, std::span<const double> u, double radius);

/// Euclidean projection onto the probability simplex.
Vector project_to_simplex(std::span<const double> v);

} // namespace pmevi
