#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "qameta/tree.hpp"

namespace qameta {

struct LogisticParams {
    double l2_lambda = 1e-3;
    int epochs = 500;
    double learning_rate = 0.1;
};

/// Binary logistic regression over standardized inputs: p = sigmoid(w . (x - offset) / scale + b).
struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
    double l2_lambda = 0.0;
    std::vector<double> offset;
    std::vector<double> scale;

    /// Unit scaling and zero offset.
    static LogisticModel with_weights(std::vector<double> weights, double bias, double l2_lambda = 0.0);

    std::size_t width() const { return weights.size(); }
    double logit(std::span<const double> x) const;
    double predict_proba(std::span<const double> x) const;

    nlohmann::json to_json() const;
    static LogisticModel from_json(const nlohmann::json& j);

    friend bool operator==(const LogisticModel&, const LogisticModel&) = default;
};

double sigmoid(double z);

/// Mean negative log-likelihood plus (lambda / 2) * |w|^2; the bias is not penalized.
double logistic_objective(std::span<const double> weights, double bias, const Matrix& X, const std::vector<int>& y,
                          double l2_lambda);

/// Gradient of logistic_objective. Returns weight gradients followed by the bias gradient.
std::vector<double> logistic_gradient(std::span<const double> weights, double bias, const Matrix& X,
                                      const std::vector<int>& y, double l2_lambda);

inline constexpr double kSaturatedLogit = 40.0;

/// Full-batch gradient descent from zero weights on standardized copies of X.
/// A constant label has no finite optimum; it gets zero weights and a bias of
/// +/-kSaturatedLogit, for which sigmoid rounds to exactly 1 or 0.
LogisticModel fit_logistic(const Matrix& X, const std::vector<int>& y, const LogisticParams& params = {},
                           std::uint64_t seed = 0);

}  // namespace qameta
