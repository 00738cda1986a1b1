#pragma once
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sgmc/candidate.hpp>

namespace sgmc {

/// Extended reals are plain doubles; +-infinity are the IEEE sentinels.
inline constexpr double pos_inf = std::numeric_limits<double>::infinity();
inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

/**
 * sup{ t : k t <= c }:
 * c / k for k > 0, -inf for k == 0 and c < 0, +inf otherwise.
 */
inline double f_tmax(double k, double c)
{
    if (k > 0) return c / k;
    if (k == 0 && c < 0) return neg_inf;
    return pos_inf;
}

/// Straight line (b(t), lambda(t)) = (b0 + delta_b t, lambda0 + delta_lambda t).
struct ParameterLine
{
    vector_t b0;
    double lambda0 = 1.0;
    vector_t delta_b;
    double delta_lambda = 0.0;

    ParameterLine() = default;

    ParameterLine(vector_t b0_, double lambda0_, vector_t delta_b_, double delta_lambda_)
        : b0(std::move(b0_)), lambda0(lambda0_), delta_b(std::move(delta_b_)), delta_lambda(delta_lambda_)
    {
        if (b0.size() != delta_b.size()) throw input_error("line: b0 and delta_b lengths differ");
        if (delta_b.lpNorm<Eigen::Infinity>() == 0.0 && delta_lambda == 0.0) {
            throw input_error("line: velocity (delta_b, delta_lambda) must be nonzero");
        }
    }

    vector_t b_at(double t) const { return b0 + delta_b * t; }
    double lambda_at(double t) const { return lambda0 + delta_lambda * t; }

    /// Same geometric line traversed backwards: point(t) of the result is point(-t) here.
    ParameterLine reversed() const { return ParameterLine(b0, lambda0, -delta_b, -delta_lambda); }

    /// Re-anchored copy whose t = 0 is this line's t = t0.
    ParameterLine shifted(double t0) const { return ParameterLine(b_at(t0), lambda_at(t0), delta_b, delta_lambda); }

    /// Magnitude used to scale round-off floors.
    double scale() const
    {
        return 1.0 + std::max({b0.lpNorm<Eigen::Infinity>(), std::abs(lambda0),
                               delta_b.lpNorm<Eigen::Infinity>(), std::abs(delta_lambda)});
    }
};

/**
 * Candidate map restricted to a line:
 *   w(t) = q - p t,   b(t) - D C w(t) = v + u t.
 */
struct LineRestrictedPiece
{
    vector_t p;
    vector_t q;
    vector_t u;
    vector_t v;

    extended_vector_t w_at(double t) const { return q - p * t; }
};

inline LineRestrictedPiece restrict_to_line(const ModelMatrices& mm, const CandidatePiece& piece, const ParameterLine& line)
{
    if (!piece.compatible) {
        throw incompatible_indicator("indicator " + piece.s.to_string() + " is incompatible");
    }
    if (line.b0.size() != 2 * mm.m()) throw input_error("line: b0 must have length 2m");
    const index_t n2 = 2 * mm.n();
    LineRestrictedPiece out;
    out.p = vector_t::Zero(n2);
    out.q = vector_t::Zero(n2);
    out.u = line.delta_b;
    out.v = line.b0;
    if (piece.E.empty()) return out;

    const index_t cols = line.b0.size() + 1;
    vector_t velocity(cols), origin(cols);
    velocity << line.delta_b, line.delta_lambda;
    origin << line.b0, line.lambda0;
    const vector_t pE = -(piece.R * velocity);
    const vector_t qE = piece.R * origin;
    vector_t Cp = vector_t::Zero(2 * mm.m());
    vector_t Cq = vector_t::Zero(2 * mm.m());
    for (size_t k = 0; k < piece.E.size(); ++k) {
        const auto i = piece.E[k];
        const auto kk = static_cast<index_t>(k);
        out.p[i] = pE[kk];
        out.q[i] = qE[kk];
        Cp += mm.C.col(i) * pE[kk];
        Cq += mm.C.col(i) * qE[kk];
    }
    out.u += mm.apply_D(Cp);
    out.v -= mm.apply_D(Cq);
    return out;
}

inline LineRestrictedPiece restrict_to_line(const ModelMatrices& mm, const Indicator& s, const ParameterLine& line)
{
    return restrict_to_line(mm, candidate_slope(mm, s), line);
}

/// Per-constraint exit times of one zone along a line.
struct ZoneExitTimes
{
    std::map<index_t, double> t_a;   // sign constraints, i in E
    std::map<index_t, double> t_b;   // correlation bounds, i off E
    double t_c = pos_inf;            // lambda(t) > 0
    double t_sup = pos_inf;
};

namespace detail {

/// Round-off floor: coefficients this small relative to the line scale are exact zeros.
inline constexpr double exit_coefficient_floor = 1e-13;

inline double floored(double value, double scale)
{
    return std::abs(value) <= exit_coefficient_floor * scale ? 0.0 : value;
}

/// sup{t : lambda0 + delta_lambda t > 0}; a constant-lambda line is unrestricted iff lambda0 > 0.
inline double lambda_positive_exit(double lambda0, double delta_lambda)
{
    if (delta_lambda == 0.0) return lambda0 > 0 ? pos_inf : neg_inf;
    return f_tmax(-delta_lambda, lambda0);
}

} // namespace detail

inline ZoneExitTimes zone_exit_times(
    const ModelMatrices& mm,
    const CandidatePiece& piece,
    const ParameterLine& line,
    const LineRestrictedPiece& restricted
)
{
    ZoneExitTimes out;
    const double scale = line.scale() * (1.0 + mm.C.lpNorm<Eigen::Infinity>());
    const auto floor = [&](double v) { return detail::floored(v, scale); };

    for (const auto i : piece.E) {
        const int si = piece.s[i];
        out.t_a[i] = f_tmax(floor(si * restricted.p[i]), floor(si * restricted.q[i]));
    }
    const vector_t Ctu = mm.C.transpose() * restricted.u;
    const vector_t Ctv = mm.C.transpose() * restricted.v;
    for (index_t i = 0; i < 2 * mm.n(); ++i) {
        if (piece.s[i] != 0) continue;
        const double upper = f_tmax(floor(-Ctu[i] - line.delta_lambda), floor(line.lambda0 + Ctv[i]));
        const double lower = f_tmax(floor(Ctu[i] - line.delta_lambda), floor(line.lambda0 - Ctv[i]));
        out.t_b[i] = std::min(upper, lower);
    }
    out.t_c = detail::lambda_positive_exit(line.lambda0, line.delta_lambda);

    out.t_sup = out.t_c;
    for (const auto& [i, t] : out.t_a) out.t_sup = std::min(out.t_sup, t);
    for (const auto& [i, t] : out.t_b) out.t_sup = std::min(out.t_sup, t);
    return out;
}

inline ZoneExitTimes zone_exit_times(const ModelMatrices& mm, const CandidatePiece& piece, const ParameterLine& line)
{
    return zone_exit_times(mm, piece, line, restrict_to_line(mm, piece, line));
}

inline ZoneExitTimes zone_exit_times(const ModelMatrices& mm, const Indicator& s, const ParameterLine& line)
{
    return zone_exit_times(mm, candidate_slope(mm, s), line);
}

/// inf of the zone's time interval: the exit time of the reversed line, negated.
inline double zone_entry_time(const ModelMatrices& mm, const CandidatePiece& piece, const ParameterLine& line)
{
    return -zone_exit_times(mm, piece, line.reversed()).t_sup;
}

inline double zone_entry_time(const ModelMatrices& mm, const Indicator& s, const ParameterLine& line)
{
    return zone_entry_time(mm, candidate_slope(mm, s), line);
}

/// Closed-form intersection of a candidate zone with a line.
struct ZoneInterval
{
    double entry = neg_inf;
    double exit = pos_inf;
    /// The computed endpoints are certified only when entry < exit.
    bool degenerate() const { return !(entry < exit); }
};

inline ZoneInterval zone_interval(const ModelMatrices& mm, const CandidatePiece& piece, const ParameterLine& line)
{
    return {zone_entry_time(mm, piece, line), zone_exit_times(mm, piece, line).t_sup};
}

} // namespace sgmc
