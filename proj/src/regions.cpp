#include "pmevi/regions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace pmevi {

namespace {

constexpr double kMembershipTol = 1e-12;
constexpr double kBisectionRelTol = 1e-10;
constexpr int kBisectionMaxIter = 200;

// Indices ordered by decreasing u, ties by increasing index.
std::vector<std::size_t> descending_order(std::span<const double> u) {
    std::vector<std::size_t> order(u.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return u[i] > u[j]; });
    return order;
}

double dot_span(std::span<const double> p, std::span<const double> u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += p[i] * u[i];
    return acc;
}

InnerMax point_mass_max(std::span<const double> u) {
    const auto best = static_cast<std::size_t>(
        std::distance(u.begin(), std::max_element(u.begin(), u.end())));
    InnerMax out;
    out.maximizer.assign(u.size(), 0.0);
    out.maximizer[best] = 1.0;
    out.value = u[best];
    return out;
}

InnerMax centre(std::span<const double> p_hat, std::span<const double> u) {
    InnerMax out;
    out.maximizer.assign(p_hat.begin(), p_hat.end());
    out.value = dot_span(p_hat, u);
    return out;
}

// Largest r in [r_hat, 1] with n * kl(r_hat, r) <= threshold (feasible side).
double kl_upper_root(double r_hat, double radius) {
    if (r_hat >= 1.0) return 1.0;
    if (bernoulli_kl(r_hat, 1.0) <= radius) return 1.0;
    double lo = r_hat, hi = 1.0;
    for (int it = 0; it < kBisectionMaxIter && hi - lo > kBisectionRelTol * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (bernoulli_kl(r_hat, mid) <= radius) lo = mid;
        else hi = mid;
    }
    return lo;
}

double kl_lower_root(double r_hat, double radius) {
    if (r_hat <= 0.0) return 0.0;
    if (bernoulli_kl(r_hat, 0.0) <= radius) return 0.0;
    double lo = 0.0, hi = r_hat;
    for (int it = 0; it < kBisectionMaxIter && hi - lo > kBisectionRelTol * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (bernoulli_kl(r_hat, mid) <= radius) hi = mid;
        else lo = mid;
    }
    return hi;
}

} // namespace

std::string_view to_string(RegionFamily family) {
    switch (family) {
    case RegionFamily::C1: return "C1";
    case RegionFamily::C2: return "C2";
    case RegionFamily::C3: return "C3";
    case RegionFamily::C4: return "C4";
    }
    return "?";
}

RegionFamily parse_region_family(std::string_view text) {
    if (text == "C1" || text == "c1" || text == "weissman") return RegionFamily::C1;
    if (text == "C2" || text == "c2" || text == "bernstein") return RegionFamily::C2;
    if (text == "C3" || text == "c3" || text == "kl") return RegionFamily::C3;
    if (text == "C4" || text == "c4" || text == "trivial") return RegionFamily::C4;
    throw InvalidInput("unknown region family '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// CountsTable

CountsTable::CountsTable(PairLayout layout)
    : layout_(std::move(layout)), visits_(layout_.n_pairs(), 0),
      transitions_(layout_.n_pairs() * layout_.n_states(), 0),
      reward_sum_(layout_.n_pairs(), 0.0) {}

void CountsTable::record(std::size_t s, std::size_t a, double reward, std::size_t next_state) {
    if (s >= n_states() || a >= layout_.n_actions(s) || next_state >= n_states())
        throw InvalidInput("CountsTable::record: pair out of range");
    if (!(reward >= 0.0 && reward <= 1.0)) throw InvalidInput("reward outside [0,1]");
    const std::size_t x = layout_.pair(s, a);
    ++visits_[x];
    ++transitions_[x * n_states() + next_state];
    reward_sum_[x] += reward;
    ++time_;
}

Vector CountsTable::empirical_kernel(std::size_t pair) const {
    const std::size_t S = n_states();
    Vector p(S, 1.0 / static_cast<double>(S));
    const std::size_t n = visits_[pair];
    if (n == 0) return p;
    for (std::size_t j = 0; j < S; ++j)
        p[j] = static_cast<double>(transitions_[pair * S + j]) / static_cast<double>(n);
    return p;
}

double CountsTable::empirical_reward(std::size_t pair) const {
    const std::size_t n = visits_[pair];
    return n == 0 ? 0.0 : reward_sum_[pair] / static_cast<double>(n);
}

void CountsTable::write(std::ostream& out) const {
    out << "pmevi-counts 1\n";
    out << "states " << n_states() << "\n";
    out << "actions";
    for (std::size_t a : layout_.actions_per_state()) out << ' ' << a;
    out << "\n";
    out << "time " << time_ << "\n";
    out << "# state action visits reward_sum transitions[0..S)\n";
    char buf[32];
    for (std::size_t s = 0; s < n_states(); ++s) {
        for (std::size_t a = 0; a < layout_.n_actions(s); ++a) {
            const std::size_t x = layout_.pair(s, a);
            std::snprintf(buf, sizeof buf, "%.17g", reward_sum_[x]);
            out << s << ' ' << a << ' ' << visits_[x] << ' ' << buf;
            for (std::size_t j = 0; j < n_states(); ++j) out << ' ' << transitions(x, j);
            out << "\n";
        }
    }
}

CountsTable CountsTable::read(std::istream& in) {
    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != "pmevi-counts" || version != 1)
        throw InvalidInput("counts text: bad header");
    std::size_t S = 0;
    if (!(in >> word >> S) || word != "states" || S == 0)
        throw InvalidInput("counts text: bad state count");
    if (!(in >> word) || word != "actions") throw InvalidInput("counts text: expected actions");
    std::vector<std::size_t> actions(S);
    for (auto& a : actions)
        if (!(in >> a)) throw InvalidInput("counts text: bad action counts");
    CountsTable table{PairLayout(actions)};
    if (!(in >> word >> table.time_) || word != "time") throw InvalidInput("counts text: bad time");
    std::string line;
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::size_t s = 0, a = 0;
        if (!(ls >> s >> a)) continue;
        if (s >= S || a >= actions[s]) throw InvalidInput("counts text: pair out of range");
        const std::size_t x = table.layout_.pair(s, a);
        ls >> table.visits_[x] >> table.reward_sum_[x];
        std::size_t total = 0;
        for (std::size_t j = 0; j < S; ++j) {
            if (!(ls >> table.transitions_[x * S + j]))
                throw InvalidInput("counts text: short transition row");
            total += table.transitions_[x * S + j];
        }
        if (total != table.visits_[x]) throw InvalidInput("counts text: transitions != visits");
        ++seen;
    }
    if (seen != table.layout_.n_pairs()) throw InvalidInput("counts text: missing rows");
    return table;
}

void RegionSpec::validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("delta must lie in (0,1)");
    if (horizon < 1) throw InvalidInput("horizon must be >= 1");
}

// ---------------------------------------------------------------------------
// Elementary divergences and inner maximizations

double bernoulli_kl(double p, double q) {
    double out = 0.0;
    if (p > 0.0) {
        if (q <= 0.0) return kInf;
        out += p * std::log(p / q);
    }
    if (p < 1.0) {
        if (q >= 1.0) return kInf;
        out += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    }
    return std::max(out, 0.0);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    double out = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return kInf;
        out += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(out, 0.0);
}

InnerMax l1_inner_max(std::span<const double> p_hat, std::span<const double> u, double radius) {
    if (!(radius > 0.0)) return centre(p_hat, u);
    const auto order = descending_order(u);
    InnerMax out;
    out.maximizer.assign(p_hat.begin(), p_hat.end());
    Vector& p = out.maximizer;
    const std::size_t best = order.front();
    p[best] = std::min(1.0, p_hat[best] + 0.5 * radius);
    double excess = std::accumulate(p.begin(), p.end(), 0.0) - 1.0;
    for (std::size_t k = order.size(); k-- > 1 && excess > 0.0;) {
        const std::size_t j = order[k];
        const double removed = std::min(p[j], excess);
        p[j] -= removed;
        excess -= removed;
    }
    out.value = dot_span(p, u);
    return out;
}

Vector project_to_simplex(std::span<const double> v) {
    Vector sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0, theta = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        cumulative += sorted[k];
        const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (sorted[k] - t > 0.0) theta = t;
    }
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(0.0, v[i] - theta);
    return out;
}

InnerMax box_inner_max(std::span<const double> lo, std::span<const double> hi,
                       std::span<const double> u) {
    const double low_mass = std::accumulate(lo.begin(), lo.end(), 0.0);
    const double high_mass = std::accumulate(hi.begin(), hi.end(), 0.0);
    InnerMax out;
    if (low_mass > 1.0 + kMembershipTol || high_mass < 1.0 - kMembershipTol) {
        Vector mid(lo.size());
        for (std::size_t i = 0; i < lo.size(); ++i) mid[i] = 0.5 * (lo[i] + hi[i]);
        out.maximizer = project_to_simplex(mid);
        out.value = dot_span(out.maximizer, u);
        out.fallback = true;
        return out;
    }
    out.maximizer.assign(lo.begin(), lo.end());
    double remaining = 1.0 - low_mass;
    for (std::size_t j : descending_order(u)) {
        if (remaining <= 0.0) break;
        const double add = std::min(hi[j] - lo[j], remaining);
        out.maximizer[j] += add;
        remaining -= add;
    }
    out.value = dot_span(out.maximizer, u);
    return out;
}

InnerMax kl_inner_max(std::span<const double> p_hat, std::span<const double> u, double radius) {
    const std::size_t S = p_hat.size();
    if (!(radius > 0.0)) return centre(p_hat, u);
    if (std::isinf(radius)) return point_mass_max(u);

    std::vector<std::size_t> support;
    double top = -kInf;
    for (std::size_t i = 0; i < S; ++i)
        if (p_hat[i] > 0.0) {
            support.push_back(i);
            top = std::max(top, u[i]);
        }
    std::size_t outside = S;
    for (std::size_t i = 0; i < S; ++i)
        if (p_hat[i] <= 0.0 && (outside == S || u[i] > u[outside])) outside = i;
    const bool outside_better = outside < S && u[outside] > top;

    // For nu = top + x, the tilted law q_i ∝ p_hat_i / (nu - u_i) has
    // KL(p_hat || q) = f(x) = sum p_hat_i log(nu - u_i) + log sum p_hat_i / (nu - u_i),
    // decreasing from +inf (x -> 0) to 0 (x -> inf).
    auto log_terms = [&](double x, double& s1, double& s2) {
        s1 = 0.0;
        s2 = 0.0;
        for (std::size_t i : support) {
            const double d = (top - u[i]) + x;
            s1 += p_hat[i] * std::log(d);
            s2 += p_hat[i] / d;
        }
    };
    auto f = [&](double x) {
        double s1, s2;
        log_terms(x, s1, s2);
        return s1 + std::log(s2);
    };
    auto tilted = [&](double x, double inside_mass) {
        double s1, s2;
        log_terms(x, s1, s2);
        Vector q(S, 0.0);
        for (std::size_t i : support)
            q[i] = inside_mass * (p_hat[i] / ((top - u[i]) + x)) / s2;
        return q;
    };

    double spread = 0.0;
    for (std::size_t i : support) spread = std::max(spread, top - u[i]);

    InnerMax out;
    if (spread <= 0.0) {
        // u constant on the support: the centre already attains top.
        out.maximizer.assign(p_hat.begin(), p_hat.end());
        if (outside_better) {
            const double moved = -std::expm1(-radius);
            for (auto& q : out.maximizer) q *= (1.0 - moved);
            out.maximizer[outside] = moved;
        }
        out.value = dot_span(out.maximizer, u);
        return out;
    }

    if (outside_better) {
        const double x_out = u[outside] - top;
        double s1, s2;
        log_terms(x_out, s1, s2);
        if (s1 + std::log(s2) <= radius) {
            const double inside_mass = std::exp(s1 + std::log(s2) - radius);
            out.maximizer = tilted(x_out, inside_mass);
            out.maximizer[outside] = 1.0 - inside_mass;
            out.value = dot_span(out.maximizer, u);
            return out;
        }
    }

    double hi = spread;
    while (f(hi) > radius) hi *= 2.0;
    double lo = hi;
    while (lo > 1e-300 && f(lo) <= radius) lo *= 0.5;
    for (int it = 0; it < kBisectionMaxIter && hi - lo > kBisectionRelTol * hi; ++it) {
        const double mid = std::sqrt(lo * hi) > lo ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        if (f(mid) <= radius) hi = mid;
        else lo = mid;
    }
    out.maximizer = tilted(hi, 1.0);
    out.value = dot_span(out.maximizer, u);
    return out;
}

// ---------------------------------------------------------------------------
// RegionTable

RegionTable build_regions(const CountsTable& counts, const RegionSpec& spec) {
    spec.validate();
    RegionTable table;
    table.layout_ = counts.layout();
    table.kernel_family_ = spec.kernel_family;
    table.reward_family_ = spec.reward_family;
    const std::size_t S = counts.n_states();
    const double SA = static_cast<double>(counts.layout().n_pairs());
    const double dim_p = static_cast<double>(S);
    const double T = static_cast<double>(spec.horizon);
    const double delta = spec.delta;

    table.pairs_.resize(counts.layout().n_pairs());
    table.p_hat_.reserve(counts.layout().n_pairs() * S);
    for (std::size_t x = 0; x < counts.layout().n_pairs(); ++x) {
        PairRegion& region = table.pairs_[x];
        const Vector p_hat = counts.empirical_kernel(x);
        table.p_hat_.insert(table.p_hat_.end(), p_hat.begin(), p_hat.end());
        region.visits = counts.visits(x);
        region.reward_hat = counts.empirical_reward(x);
        if (region.visits == 0) continue;  // defaults are the trivial region

        const double N = static_cast<double>(region.visits);
        const double r_hat = region.reward_hat;

        switch (spec.reward_family) {
        case RegionFamily::C1: {
            // ||(r,1-r) - (r_hat,1-r_hat)||_1 = 2|r - r_hat|, dim(r) = 2
            const double half = 0.5 * std::sqrt(2.0 * std::log(2.0 * SA * (1.0 + N) / delta) / N);
            region.reward_lo = std::max(0.0, r_hat - half);
            region.reward_hi = std::min(1.0, r_hat + half);
            break;
        }
        case RegionFamily::C2: {
            const double L = std::log(2.0 * 2.0 * SA * T / delta);
            const double bonus = std::sqrt(2.0 * r_hat * (1.0 - r_hat) * L / N) + 3.0 * L / N;
            region.reward_lo = std::max(0.0, r_hat - bonus);
            region.reward_hi = std::min(1.0, r_hat + bonus);
            break;
        }
        case RegionFamily::C3: {
            const double radius =
                (std::log(2.0 * SA / delta) + std::log(std::exp(1.0) * (1.0 + N))) / N;
            region.reward_lo = kl_lower_root(r_hat, radius);
            region.reward_hi = kl_upper_root(r_hat, radius);
            break;
        }
        case RegionFamily::C4: break;
        }

        region.trivial_kernel = spec.kernel_family == RegionFamily::C4;
        switch (spec.kernel_family) {
        case RegionFamily::C1:
            region.l1_radius = std::sqrt(dim_p * std::log(2.0 * SA * (1.0 + N) / delta) / N);
            break;
        case RegionFamily::C2: {
            const double L = std::log(2.0 * dim_p * SA * T / delta);
            region.box_lo.resize(S);
            region.box_hi.resize(S);
            for (std::size_t j = 0; j < S; ++j) {
                const double q = p_hat[j];
                const double bonus = std::sqrt(2.0 * q * (1.0 - q) * L / N) + 3.0 * L / N;
                region.box_lo[j] = std::max(0.0, q - bonus);
                region.box_hi[j] = std::min(1.0, q + bonus);
            }
            break;
        }
        case RegionFamily::C3: {
            double threshold = std::log(2.0 * SA / delta);
            if (S > 1) {
                const double d1 = dim_p - 1.0;
                threshold += d1 * std::log(std::exp(1.0) * (1.0 + N / d1));
            }
            region.kl_radius = threshold / N;
            break;
        }
        case RegionFamily::C4: break;
        }
    }
    return table;
}

RegionTable RegionTable::point_model(const TabularMDP& mdp) {
    RegionTable table;
    table.layout_ = mdp.layout();
    table.kernel_family_ = RegionFamily::C1;
    table.reward_family_ = RegionFamily::C1;
    table.pairs_.resize(mdp.n_pairs());
    for (std::size_t x = 0; x < mdp.n_pairs(); ++x) {
        auto row = mdp.kernel_row(x);
        table.p_hat_.insert(table.p_hat_.end(), row.begin(), row.end());
        PairRegion& region = table.pairs_[x];
        region.visits = 1;
        region.reward_hat = region.reward_lo = region.reward_hi = mdp.mean_reward(x);
        region.trivial_kernel = false;
        region.l1_radius = 0.0;
    }
    return table;
}

RegionTable RegionTable::with_l1_radius(double radius) const {
    RegionTable out = *this;
    out.kernel_family_ = RegionFamily::C1;
    for (auto& region : out.pairs_) {
        region.trivial_kernel = false;
        region.l1_radius = radius;
    }
    return out;
}

InnerMax RegionTable::kernel_inner_max(std::size_t s, std::size_t a,
                                       std::span<const double> u) const {
    if (u.size() != n_states()) throw InvalidInput("kernel_inner_max: dimension mismatch");
    const std::size_t x = layout_.pair(s, a);
    const PairRegion& region = pairs_[x];
    if (region.visits == 0 || region.trivial_kernel) return point_mass_max(u);
    const auto p_hat = empirical_kernel(x);
    switch (kernel_family_) {
    case RegionFamily::C1: return l1_inner_max(p_hat, u, region.l1_radius);
    case RegionFamily::C2: return box_inner_max(region.box_lo, region.box_hi, u);
    case RegionFamily::C3: return kl_inner_max(p_hat, u, region.kl_radius);
    case RegionFamily::C4: break;
    }
    return point_mass_max(u);
}

bool RegionTable::contains_kernel(std::size_t s, std::size_t a, std::span<const double> q) const {
    if (q.size() != n_states()) return false;
    double total = 0.0;
    for (double v : q) {
        if (v < -kMembershipTol) return false;
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) return false;
    const std::size_t x = layout_.pair(s, a);
    const PairRegion& region = pairs_[x];
    if (region.visits == 0 || region.trivial_kernel) return true;
    const auto p_hat = empirical_kernel(x);
    switch (kernel_family_) {
    case RegionFamily::C1: {
        double l1 = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) l1 += std::abs(q[j] - p_hat[j]);
        return l1 <= region.l1_radius + kMembershipTol;
    }
    case RegionFamily::C2:
        for (std::size_t j = 0; j < q.size(); ++j)
            if (q[j] < region.box_lo[j] - kMembershipTol || q[j] > region.box_hi[j] + kMembershipTol)
                return false;
        return true;
    case RegionFamily::C3: return kl_divergence(p_hat, q) <= region.kl_radius + kMembershipTol;
    case RegionFamily::C4: return true;
    }
    return true;
}

bool RegionTable::contains_reward(std::size_t s, std::size_t a, double r) const {
    const PairRegion& region = pairs_[layout_.pair(s, a)];
    return r >= region.reward_lo - kMembershipTol && r <= region.reward_hi + kMembershipTol;
}

} // namespace pmevi
