#pragma once

#include <stdexcept>
#include <vector>

namespace scpdock {

struct HomotopyParams {
    double epsilon = 0.01;
    double delta0 = 10.0;
    double delta1 = 0.01;
    int n_updates = 10;
    double beta_worse = -1e-3;
    double beta_trig = 0.1;

    double gamma() const { return delta1 / delta0; }
    void validate() const;
};

class NoUpdateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

double delta_at(double alpha, const HomotopyParams& params);
double homotopy_value(double alpha, const HomotopyParams& params);

/// The N_h sharpness values visited by the update rule, in order.
std::vector<double> beta_schedule(const HomotopyParams& params);

struct ContinuationState {
    int updates = 0;      // L
    int iteration = 0;    // PTR iteration counter
    double beta = 0.0;
    std::vector<double> cost_history;
};

/// Sets state.beta to the next schedule value and increments the update count.
double update_rule(ContinuationState& state, const HomotopyParams& params);

/// (J_prev - J_last) / |J_prev| over the last two recorded costs; zero when
/// |J_prev| < 1e-12.
double relative_decrease(const std::vector<double>& costs);

bool update_decision(const ContinuationState& state, const HomotopyParams& params);

}  // namespace scpdock
