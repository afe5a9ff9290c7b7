#include "pmevi/bias_region.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace pmevi {

// ---------------------------------------------------------------------------
// CommuteTracker

CommuteTracker::CommuteTracker(std::size_t n_states, std::size_t initial_state)
    : n_(n_states), pairs_(n_states * n_states) {
    if (initial_state >= n_states) throw InvalidInput("CommuteTracker: initial state out of range");
    visit(initial_state);
}

void CommuteTracker::visit(std::size_t x) {
    // x is the awaited endpoint of (x, y) when an even number of taus has
    // been seen, and of (y, x) when the count is odd.
    auto advance = [&](PairState& p) {
        if (p.taus > 0) {
            const double sign = (p.taus - 1) % 2 == 0 ? 1.0 : -1.0;
            p.signed_steps += sign * static_cast<double>(time_ - p.open_time);
            p.signed_rewards += sign * (cumulative_ - p.open_cumulative);
        }
        ++p.taus;
        p.open_time = time_;
        p.open_cumulative = cumulative_;
    };
    for (std::size_t y = 0; y < n_; ++y) {
        if (y == x) continue;
        PairState& forward = pairs_[x * n_ + y];
        if (forward.taus % 2 == 0) advance(forward);
        PairState& backward = pairs_[y * n_ + x];
        if (backward.taus % 2 == 1) advance(backward);
    }
}

void CommuteTracker::update(double reward, std::size_t next_state) {
    if (next_state >= n_) throw InvalidInput("CommuteTracker: state out of range");
    cumulative_ += reward;
    ++time_;
    visit(next_state);
}

double CommuteTracker::empirical_gain() const {
    return time_ == 0 ? 0.0 : cumulative_ / static_cast<double>(time_);
}

std::size_t CommuteTracker::commutes(std::size_t s, std::size_t s2) const {
    if (s == s2) return 0;
    const std::size_t taus = at(s, s2).taus;
    return taus == 0 ? 0 : taus - 1;
}

double CommuteTracker::bias_difference(std::size_t s, std::size_t s2) const {
    return bias_difference(s, s2, empirical_gain());
}

double CommuteTracker::bias_difference(std::size_t s, std::size_t s2, double gain) const {
    const std::size_t n = commutes(s, s2);
    if (n == 0) throw NoEstimate("pair never commuted");
    const PairState& p = at(s, s2);
    // Windows s -> s' accumulate h(s') - h(s) in (g - R); the odd windows
    // come back. Negate to estimate h(s) - h(s').
    return (p.signed_rewards - gain * p.signed_steps) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// BiasConstraintSet

BiasConstraintSet::BiasConstraintSet(std::size_t n_states)
    : n_(n_states), upper_(n_states * n_states, kInf), sources_(n_states * n_states, 0),
      estimate_(n_states * n_states, 0.0), error_(n_states * n_states, kInf),
      commutes_(n_states * n_states, 0) {
    for (std::size_t s = 0; s < n_; ++s) {
        upper_[s * n_ + s] = 0.0;
        error_[s * n_ + s] = 0.0;
    }
}

BiasConstraintSet BiasConstraintSet::chain_prior(std::size_t n_states, double c) {
    BiasConstraintSet out(n_states);
    for (std::size_t s = 0; s + 1 < n_states; ++s) out.tighten(s, s + 1, -c, kFromPrior);
    return out;
}

BiasConstraintSet BiasConstraintSet::span_ball(std::size_t n_states, double c0) {
    BiasConstraintSet out(n_states);
    out.c0_ = c0;
    for (std::size_t s = 0; s < n_states; ++s)
        for (std::size_t s2 = 0; s2 < n_states; ++s2)
            if (s != s2) out.tighten(s, s2, c0, kFromSpan);
    return out;
}

void BiasConstraintSet::tighten(std::size_t s, std::size_t s2, double value, std::uint8_t source) {
    if (s == s2) return;
    double& u = upper_[s * n_ + s2];
    if (value < u) {
        u = value;
        sources_[s * n_ + s2] = source;
    } else if (value == u && value < kInf) {
        sources_[s * n_ + s2] |= source;
    }
}

void BiasConstraintSet::set_window(std::size_t s, std::size_t s2, double c, double d,
                                   std::size_t n) {
    estimate_[s * n_ + s2] = c;
    error_[s * n_ + s2] = d;
    commutes_[s * n_ + s2] = n;
}

BiasConstraintSet BiasConstraintSet::windows_only() const {
    BiasConstraintSet out = *this;
    for (std::size_t s = 0; s < n_; ++s)
        for (std::size_t s2 = 0; s2 < n_; ++s2)
            if (s != s2) {
                out.upper_[s * n_ + s2] = kInf;
                out.sources_[s * n_ + s2] = 0;
            }
    return out;
}

bool BiasConstraintSet::contains(std::span<const double> h, double tol) const {
    if (h.size() != n_) return false;
    for (std::size_t s = 0; s < n_; ++s)
        for (std::size_t s2 = 0; s2 < n_; ++s2)
            if (s != s2 && h[s] - h[s2] > upper(s, s2) + tol) return false;
    return true;
}

void BiasConstraintSet::dump(std::ostream& out) const {
    char buf[64];
    out << "bias-constraints " << n_ << " c0 ";
    std::snprintf(buf, sizeof buf, "%.17g", c0_);
    out << buf << "\n";
    out << "# U(s,s') with provenance P=prior S=span W=window R=reverse window\n";
    for (std::size_t s = 0; s < n_; ++s) {
        for (std::size_t s2 = 0; s2 < n_; ++s2) {
            const std::uint8_t f = sources(s, s2);
            std::snprintf(buf, sizeof buf, "%.17g", upper(s, s2));
            std::string tag;
            if (f & kFromPrior) tag += 'P';
            if (f & kFromSpan) tag += 'S';
            if (f & kFromWindow) tag += 'W';
            if (f & kFromReverseWindow) tag += 'R';
            if (tag.empty()) tag = "-";
            out << (s2 ? " " : "") << buf << ':' << tag;
        }
        out << "\n";
    }
    out << "# windows c(s,s') +- d(s,s') [N]\n";
    for (std::size_t s = 0; s < n_; ++s)
        for (std::size_t s2 = 0; s2 < n_; ++s2)
            if (has_estimate(s, s2)) {
                std::snprintf(buf, sizeof buf, "%.10g %.10g", estimate(s, s2), error(s, s2));
                out << s << ' ' << s2 << ' ' << buf << " [" << commutes(s, s2) << "]\n";
            }
}

// ---------------------------------------------------------------------------
// Estimation and merging

double window_half_width(double c0, double ell, double b0, std::size_t commutes) {
    return (3.0 * c0 + (1.0 + c0) * (1.0 + ell) + 2.0 * b0) / static_cast<double>(commutes);
}

BiasConstraintSet bias_estimation(const CommuteTracker& tracker, double optimistic_gain,
                                  double delta, std::size_t horizon) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("delta must lie in (0,1)");
    const std::size_t S = tracker.n_states();
    const double T = static_cast<double>(horizon);
    const double ell = std::sqrt(8.0 * T * std::log(2.0 / delta));
    const double c0 = std::pow(T, 0.2);
    const double b0 = std::max(
        0.0, static_cast<double>(tracker.time()) * optimistic_gain - tracker.cumulative_reward());

    BiasConstraintSet out(S);
    out.set_c0(c0);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t s2 = 0; s2 < S; ++s2) {
            const std::size_t n = tracker.commutes(s, s2);
            if (n == 0) continue;
            out.set_window(s, s2, tracker.bias_difference(s, s2), window_half_width(c0, ell, b0, n), n);
        }
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t s2 = 0; s2 < S; ++s2) {
            if (s == s2 || !out.has_estimate(s, s2)) continue;
            const double c = out.estimate(s, s2), d = out.error(s, s2);
            out.tighten(s, s2, c + d, kFromWindow);
            out.tighten(s2, s, d - c, kFromReverseWindow);
        }
    return out;
}

BiasConstraintSet merge_constraints(const BiasConstraintSet& prior, double c0,
                                    const BiasConstraintSet& windows) {
    const std::size_t S = windows.n_states();
    if (prior.n_states() != S) throw InvalidInput("merge_constraints: dimension mismatch");
    BiasConstraintSet out = windows.windows_only();
    out.set_c0(c0);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t s2 = 0; s2 < S; ++s2) {
            if (s == s2) continue;
            out.tighten(s, s2, prior.upper(s, s2), kFromPrior);
            out.tighten(s, s2, c0, kFromSpan);
            if (windows.has_estimate(s, s2))
                out.tighten(s, s2, windows.estimate(s, s2) + windows.error(s, s2), kFromWindow);
            if (windows.has_estimate(s2, s))
                out.tighten(s, s2, windows.error(s2, s) - windows.estimate(s2, s),
                            kFromReverseWindow);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Projection

BiasProjection::BiasProjection(const BiasConstraintSet& constraints)
    : n_(constraints.n_states()), dist_(n_ * n_, kInf) {
    for (std::size_t a = 0; a < n_; ++a)
        for (std::size_t b = 0; b < n_; ++b) {
            dist_[a * n_ + b] = a == b ? std::min(0.0, constraints.upper(a, b))
                                       : constraints.upper(a, b);
            if (a != b && dist_[a * n_ + b] < kInf) identity_ = false;
        }
    for (std::size_t k = 0; k < n_; ++k)
        for (std::size_t i = 0; i < n_; ++i) {
            const double dik = dist_[i * n_ + k];
            if (dik == kInf) continue;
            for (std::size_t j = 0; j < n_; ++j) {
                const double alt = dik + dist_[k * n_ + j];
                if (alt < dist_[i * n_ + j]) dist_[i * n_ + j] = alt;
            }
        }
    for (std::size_t i = 0; i < n_; ++i)
        if (dist_[i * n_ + i] < -1e-12) feasible_ = false;
}

Vector BiasProjection::apply(std::span<const double> u) const {
    if (u.size() != n_) throw InvalidInput("BiasProjection: dimension mismatch");
    if (!feasible_) throw InfeasibleConstraints("bias constraints have a negative cycle");
    Vector out(u.begin(), u.end());
    if (identity_) return out;
    for (std::size_t s = 0; s < n_; ++s) {
        double best = u[s];
        for (std::size_t s2 = 0; s2 < n_; ++s2) {
            if (s2 == s) continue;
            best = std::min(best, u[s2] + dist_[s * n_ + s2]);
        }
        out[s] = best;
    }
    return out;
}

bool feasible(const BiasConstraintSet& constraints) {
    return BiasProjection(constraints).feasible();
}

Vector project(const BiasConstraintSet& constraints, std::span<const double> u) {
    return BiasProjection(constraints).apply(u);
}

// ---------------------------------------------------------------------------
// Mitigation

double variance(std::span<const double> q, std::span<const double> u) {
    if (q.size() != u.size()) throw InvalidInput("variance: dimension mismatch");
    double mean = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) mean += q[i] * u[i];
    double out = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) out += q[i] * (u[i] - mean) * (u[i] - mean);
    return out;
}

double empirical_bernstein_beta(std::span<const double> p_hat, std::span<const double> u,
                                std::size_t visits, double delta, std::size_t horizon) {
    const double log_term = std::log(3.0 * static_cast<double>(horizon) / delta);
    const double n = std::max<double>(1.0, static_cast<double>(visits));
    return std::sqrt(2.0 * variance(p_hat, u) * log_term / n) + 3.0 * span(u) * log_term / n;
}

MitigationVector variance_approx(const BiasConstraintSet& constraints, const CountsTable& counts,
                                 double delta, std::size_t horizon, VarianceErrorTerm term) {
    const std::size_t S = constraints.n_states();
    if (counts.n_states() != S) throw InvalidInput("variance_approx: dimension mismatch");
    const double c0 = constraints.c0();
    const double T = static_cast<double>(horizon);
    const double SA = static_cast<double>(counts.layout().n_pairs());

    Vector reference(S, 0.0);
    for (std::size_t s = 0; s < S; ++s)
        if (s != 0 && constraints.has_estimate(s, 0)) reference[s] = constraints.estimate(s, 0);
    const Vector h0 = project(constraints, reference);

    MitigationVector out{Vector(counts.layout().n_pairs(), kInf)};
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < counts.layout().n_actions(s); ++a) {
            const std::size_t x = counts.layout().pair(s, a);
            const std::size_t n = counts.visits(x);
            if (n == 0) continue;
            const double rho = std::log(SA * T / delta) / static_cast<double>(n);
            const Vector p_hat = counts.empirical_kernel(x);
            double cross = 0.0;
            for (std::size_t s2 = 0; s2 < S; ++s2) {
                if (p_hat[s2] <= 0.0 || s2 == s) continue;
                double w;
                if (term == VarianceErrorTerm::Error) w = constraints.error(s2, s);
                else w = constraints.has_estimate(s2, s) ? constraints.estimate(s2, s) : kInf;
                cross += p_hat[s2] * w;
            }
            const double var = std::max(0.0, variance(p_hat, h0) + 8.0 * c0 * cross);
            out.beta[x] = std::sqrt(2.0 * var * rho) + 3.0 * c0 * rho;
        }
    }
    return out;
}

} // namespace pmevi
