#include "scpdock/continuation.hpp"

#include <cmath>
#include <string>

namespace scpdock {

void HomotopyParams::validate() const
{
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw std::invalid_argument("homotopy precision must lie in (0, 1)");
    }
    if (!(delta1 > 0.0 && delta1 < delta0)) {
        throw std::invalid_argument("homotopy smoothness must satisfy 0 < delta1 < delta0");
    }
    if (n_updates < 2) {
        throw std::invalid_argument("homotopy update count must be at least 2");
    }
    if (!(beta_worse < 0.0 && beta_trig > 0.0)) {
        throw std::invalid_argument("homotopy thresholds must satisfy beta_worse < 0 < beta_trig");
    }
}

double delta_at(double alpha, const HomotopyParams& params)
{
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("homotopy fraction alpha must lie in [0, 1], got " + std::to_string(alpha));
    }
    return std::pow(params.gamma(), alpha) * params.delta0;
}

double homotopy_value(double alpha, const HomotopyParams& params)
{
    return std::log(1.0 / params.epsilon - 1.0) / delta_at(alpha, params);
}

std::vector<double> beta_schedule(const HomotopyParams& params)
{
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(params.n_updates));
    for (int L = 0; L < params.n_updates; ++L) {
        out.push_back(homotopy_value(static_cast<double>(L) / (params.n_updates - 1), params));
    }
    return out;
}

double update_rule(ContinuationState& state, const HomotopyParams& params)
{
    if (state.updates >= params.n_updates) {
        throw NoUpdateError("homotopy parameter already reached its final value");
    }
    state.beta = homotopy_value(static_cast<double>(state.updates) / (params.n_updates - 1), params);
    ++state.updates;
    return state.beta;
}

double relative_decrease(const std::vector<double>& costs)
{
    if (costs.size() < 2) {
        throw std::invalid_argument("relative decrease needs two recorded costs");
    }
    const double prev = costs[costs.size() - 2];
    const double last = costs.back();
    if (std::abs(prev) < 1e-12) {
        return 0.0;
    }
    return (prev - last) / std::abs(prev);
}

bool update_decision(const ContinuationState& state, const HomotopyParams& params)
{
    if (state.updates >= params.n_updates) {
        return false;
    }
    const double r = relative_decrease(state.cost_history);
    return r >= params.beta_worse && r <= params.beta_trig;
}

}  // namespace scpdock
