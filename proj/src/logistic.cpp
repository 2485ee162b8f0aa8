#include "qameta/logistic.hpp"

#include <algorithm>

#include <cmath>

#include "qameta/error.hpp"

namespace qameta {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double dot(std::span<const double> w, const std::vector<double>& x, double bias) {
    double z = bias;
    for (std::size_t i = 0; i < w.size(); ++i) z += w[i] * x[i];
    return z;
}

void check(const Matrix& X, const std::vector<int>& y, std::size_t width) {
    if (X.empty()) throw ParamError("logistic: empty training data");
    if (X.size() != y.size()) throw ParamError("logistic: X and y differ in length");
    for (const auto& row : X) {
        if (row.size() != width) throw ParamError("logistic: inconsistent feature widths");
    }
    for (int label : y) {
        if (label != 0 && label != 1) throw ParamError("logistic: labels must be 0 or 1");
    }
}

}  // namespace

LogisticModel LogisticModel::with_weights(std::vector<double> weights, double bias, double l2_lambda) {
    LogisticModel m;
    m.offset.assign(weights.size(), 0.0);
    m.scale.assign(weights.size(), 1.0);
    m.weights = std::move(weights);
    m.bias = bias;
    m.l2_lambda = l2_lambda;
    return m;
}

double LogisticModel::logit(std::span<const double> x) const {
    if (x.size() != weights.size()) {
        throw ParamError("logistic input width " + std::to_string(x.size()) + " != " + std::to_string(weights.size()));
    }
    double z = bias;
    for (std::size_t i = 0; i < x.size(); ++i) z += weights[i] * (x[i] - offset[i]) / scale[i];
    return z;
}

double LogisticModel::predict_proba(std::span<const double> x) const { return sigmoid(logit(x)); }

nlohmann::json LogisticModel::to_json() const {
    return {{"weights", weights}, {"bias", bias}, {"l2_lambda", l2_lambda}, {"offset", offset}, {"scale", scale}};
}

LogisticModel LogisticModel::from_json(const nlohmann::json& j) {
    LogisticModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.l2_lambda = j.at("l2_lambda").get<double>();
    m.offset = j.at("offset").get<std::vector<double>>();
    m.scale = j.at("scale").get<std::vector<double>>();
    if (m.offset.size() != m.weights.size() || m.scale.size() != m.weights.size()) {
        throw DataError("logistic model arrays differ in length");
    }
    return m;
}

double logistic_objective(std::span<const double> weights, double bias, const Matrix& X, const std::vector<int>& y,
                          double l2_lambda) {
    check(X, y, weights.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double z = dot(weights, X[i], bias);
        loss += softplus(z) - (y[i] ? z : 0.0);
    }
    loss /= static_cast<double>(X.size());
    double reg = 0.0;
    for (double w : weights) reg += w * w;
    return loss + 0.5 * l2_lambda * reg;
}

std::vector<double> logistic_gradient(std::span<const double> weights, double bias, const Matrix& X,
                                      const std::vector<int>& y, double l2_lambda) {
    check(X, y, weights.size());
    std::vector<double> g(weights.size() + 1, 0.0);
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double r = sigmoid(dot(weights, X[i], bias)) - (y[i] ? 1.0 : 0.0);
        for (std::size_t k = 0; k < weights.size(); ++k) g[k] += r * X[i][k];
        g.back() += r;
    }
    const double inv_n = 1.0 / static_cast<double>(X.size());
    for (std::size_t k = 0; k < weights.size(); ++k) g[k] = g[k] * inv_n + l2_lambda * weights[k];
    g.back() *= inv_n;
    return g;
}

LogisticModel fit_logistic(const Matrix& X, const std::vector<int>& y, const LogisticParams& params,
                           std::uint64_t /*seed*/) {
    if (X.empty()) throw ParamError("logistic_fit: empty training data");
    if (params.l2_lambda < 0) throw ParamError("logistic_fit: l2_lambda must be non-negative");
    if (params.epochs < 0) throw ParamError("logistic_fit: epochs must be non-negative");
    if (!(params.learning_rate > 0)) throw ParamError("logistic_fit: learning_rate must be positive");
    const std::size_t width = X.front().size();
    check(X, y, width);

    LogisticModel m;
    m.l2_lambda = params.l2_lambda;
    m.offset.assign(width, 0.0);
    m.scale.assign(width, 1.0);
    const double n = static_cast<double>(X.size());
    for (std::size_t k = 0; k < width; ++k) {
        double mean = 0.0;
        for (const auto& row : X) mean += row[k];
        mean /= n;
        double var = 0.0;
        for (const auto& row : X) var += (row[k] - mean) * (row[k] - mean);
        const double sd = std::sqrt(var / n);
        m.offset[k] = mean;
        m.scale[k] = sd > 1e-12 ? sd : 1.0;
    }
    Matrix Z = X;
    for (auto& row : Z) {
        for (std::size_t k = 0; k < width; ++k) row[k] = (row[k] - m.offset[k]) / m.scale[k];
    }

    m.weights.assign(width, 0.0);
    m.bias = 0.0;
    if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); })) {
        m.bias = y.front() == 1 ? kSaturatedLogit : -kSaturatedLogit;
        return m;
    }
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        const auto g = logistic_gradient(m.weights, m.bias, Z, y, params.l2_lambda);
        for (std::size_t k = 0; k < width; ++k) m.weights[k] -= params.learning_rate * g[k];
        m.bias -= params.learning_rate * g.back();
    }
    return m;
}

}  // namespace qameta
