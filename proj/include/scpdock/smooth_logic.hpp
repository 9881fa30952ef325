#pragma once

#include <Eigen/Dense>

namespace scpdock {

/// Elementwise g / g_max. Throws std::invalid_argument when g_max <= 0.
Eigen::VectorXd normalize(const Eigen::VectorXd& g, double g_max);

/// Log-sum-exp with sharpness beta, evaluated with max subtraction.
double softmax(const Eigen::VectorXd& g_hat, double beta);

/// Softmax weights exp(beta g_i) / sum exp(beta g_j); these are the partials
/// of softmax with respect to each component.
Eigen::VectorXd softmax_weights(const Eigen::VectorXd& g_hat, double beta);

/// Logistic function 1 - 1 / (1 + exp(beta w)).
double sigmoid(double w, double beta);

/// 1 - sigmoid(w, beta), computed without cancellation.
double sigmoid_complement(double w, double beta);

struct SmoothOrGate {
    double g_max = 1.0;
    Eigen::VectorXd g_c;  // anchor predicate, raw units
    double beta = 1.0;

    int size() const { return static_cast<int>(g_c.size()); }
    /// Throws std::invalid_argument when g_max or beta is not positive or no
    /// anchor component is positive.
    void validate() const;
    /// 1 - sigmoid(softmax(g_c / g_max)).
    double shift() const;
};

struct GateEval {
    double value = 0.0;
    Eigen::VectorXd grad;  // d value / d g, raw predicate units
};

GateEval or_gate(const Eigen::VectorXd& g, const SmoothOrGate& gate);

/// sigmoid(softmax(normalize(g))) without the anchor shift.
double or_gate_unshifted(const Eigen::VectorXd& g, const SmoothOrGate& gate);

/// Single-predicate gate value with its first and second derivatives in the
/// raw predicate.
struct ScalarGateEval {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

ScalarGateEval or_gate_scalar(double g, double g_max, double g_c, double beta);

double rashs_and(const Eigen::VectorXd& g_hat, double beta);
double csc_and(const Eigen::VectorXd& g_hat, double beta);

/// (1 - r) f_if + r f_else. Throws std::invalid_argument on length mismatch.
Eigen::VectorXd smooth_implication(const Eigen::VectorXd& f_if, const Eigen::VectorXd& f_else, double r);

}  // namespace scpdock
