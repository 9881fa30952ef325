#include "scpdock/smooth_logic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scpdock {

namespace {

constexpr double kExpClamp = 700.0;

double clamped_exp(double a)
{
    return std::exp(std::clamp(a, -kExpClamp, kExpClamp));
}

}  // namespace

Eigen::VectorXd normalize(const Eigen::VectorXd& g, double g_max)
{
    if (!(g_max > 0.0)) {
        throw std::invalid_argument("predicate normalization g_max must be positive");
    }
    return g / g_max;
}

double softmax(const Eigen::VectorXd& g_hat, double beta)
{
    if (g_hat.size() == 0) {
        throw std::invalid_argument("softmax of an empty predicate vector");
    }
    if (g_hat.size() == 1) {
        return g_hat(0);
    }
    const double m = g_hat.maxCoeff();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < g_hat.size(); ++i) {
        sum += std::exp(beta * (g_hat(i) - m));
    }
    return m + std::log(sum) / beta;
}

Eigen::VectorXd softmax_weights(const Eigen::VectorXd& g_hat, double beta)
{
    const double m = g_hat.maxCoeff();
    Eigen::VectorXd w(g_hat.size());
    for (Eigen::Index i = 0; i < g_hat.size(); ++i) {
        w(i) = std::exp(beta * (g_hat(i) - m));
    }
    return w / w.sum();
}

double sigmoid(double w, double beta)
{
    return 1.0 / (1.0 + clamped_exp(-beta * w));
}

double sigmoid_complement(double w, double beta)
{
    return 1.0 / (1.0 + clamped_exp(beta * w));
}

void SmoothOrGate::validate() const
{
    if (!(g_max > 0.0)) {
        throw std::invalid_argument("gate g_max must be positive");
    }
    if (!(beta > 0.0)) {
        throw std::invalid_argument("gate beta must be positive");
    }
    if (g_c.size() == 0 || !(g_c.maxCoeff() > 0.0)) {
        throw std::invalid_argument("gate anchor needs at least one strictly positive predicate");
    }
}

double SmoothOrGate::shift() const
{
    return sigmoid_complement(softmax(normalize(g_c, g_max), beta), beta);
}

GateEval or_gate(const Eigen::VectorXd& g, const SmoothOrGate& gate)
{
    if (g.size() != gate.size()) {
        throw std::invalid_argument("predicate vector length does not match gate");
    }
    const Eigen::VectorXd g_hat = normalize(g, gate.g_max);
    const double s = softmax(g_hat, gate.beta);
    const double sig = sigmoid(s, gate.beta);
    const double dsig = gate.beta * sig * sigmoid_complement(s, gate.beta);
    GateEval out;
    out.value = sig + gate.shift();
    out.grad = (dsig / gate.g_max) * softmax_weights(g_hat, gate.beta);
    return out;
}

double or_gate_unshifted(const Eigen::VectorXd& g, const SmoothOrGate& gate)
{
    return sigmoid(softmax(normalize(g, gate.g_max), gate.beta), gate.beta);
}

ScalarGateEval or_gate_scalar(double g, double g_max, double g_c, double beta)
{
    if (!(g_max > 0.0) || !(beta > 0.0)) {
        throw std::invalid_argument("scalar gate needs positive g_max and beta");
    }
    const double w = g / g_max;
    const double s = sigmoid(w, beta);
    const double sc = sigmoid_complement(w, beta);
    const double shift = sigmoid_complement(g_c / g_max, beta);
    const double k = beta / g_max;
    ScalarGateEval out;
    out.value = s + shift;
    out.d1 = k * s * sc;
    out.d2 = k * k * s * sc * (sc - s);
    return out;
}

double rashs_and(const Eigen::VectorXd& g_hat, double beta)
{
    double prod = 1.0;
    for (Eigen::Index i = 0; i < g_hat.size(); ++i) {
        prod *= sigmoid_complement(g_hat(i), beta);
    }
    return prod;
}

double csc_and(const Eigen::VectorXd& g_hat, double beta)
{
    double prod = 1.0;
    for (Eigen::Index i = 0; i < g_hat.size(); ++i) {
        prod *= 0.5 * (1.0 - std::tanh(beta * g_hat(i)));
    }
    return prod;
}

Eigen::VectorXd smooth_implication(const Eigen::VectorXd& f_if, const Eigen::VectorXd& f_else, double r)
{
    if (f_if.size() != f_else.size()) {
        throw std::invalid_argument("implication branches differ in length");
    }
    return (1.0 - r) * f_if + r * f_else;
}

}  // namespace scpdock
