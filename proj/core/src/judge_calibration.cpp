// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "skillalign/errors.hpp"
#include "skillalign/hash.hpp"
#include "skillalign/judge.hpp"

namespace skillalign {

using nlohmann::json;

CalibrationModel CalibrationModel::fit(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 10)
        throw ValidationError("fit_calibration: need at least 10 pairs, got " + std::to_string(pairs.size()));

    const double n = static_cast<double>(pairs.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (const auto& [x, y] : pairs) {
        mean_x += x;
        mean_y += y;
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pairs) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if (sxx < 1e-12)
        throw ValidationError("fit_calibration: degenerate input (constant ensemble means)");

    CalibrationModel model;
    model.slope_ = sxy / sxx;
    model.intercept_ = mean_y - model.slope_ * mean_x;
    if (model.slope_ <= 0.0)
        throw ValidationError("fit_calibration: non-positive slope " + std::to_string(model.slope_) +
                              "; judge scores do not increase with human scores");

    // Quantile interpolation: match the i-th order statistic of the
    // regression outputs to the i-th order statistic of the human scores.
    // Tied regression outputs collapse into one knot at the mean of their
    // matched human scores, keeping the knot abscissae strictly increasing.
    std::vector<double> z(pairs.size()), y(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        z[i] = model.slope_ * pairs[i].first + model.intercept_;
        y[i] = pairs[i].second;
    }
    std::sort(z.begin(), z.end());
    std::sort(y.begin(), y.end());
    std::size_t i = 0;
    while (i < z.size()) {
        std::size_t j = i;
        double y_sum = 0.0;
        while (j < z.size() && z[j] == z[i]) {
            y_sum += y[j];
            ++j;
        }
        model.knots_.emplace_back(z[i], y_sum / static_cast<double>(j - i));
        i = j;
    }

    std::string payload;
    char buf[64];
    for (const auto& [px, py] : pairs) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g;", px, py);
        payload += buf;
    }
    model.fingerprint_ = "ols+qmap:n=" + std::to_string(pairs.size()) + ":" +
                         sha256_hex(payload).substr(0, 16);
    return model;
}

std::pair<double, int> CalibrationModel::apply(double ensemble_mean) const {
    double z = slope_ * ensemble_mean + intercept_;
    double continuous;
    if (knots_.empty()) {
        continuous = z;
    } else if (z <= knots_.front().first) {
        continuous = knots_.front().second - (knots_.front().first - z);
    } else if (z >= knots_.back().first) {
        continuous = knots_.back().second + (z - knots_.back().first);
    } else {
        auto upper = std::upper_bound(knots_.begin(), knots_.end(), z,
                                      [](double v, const auto& knot) { return v < knot.first; });
        const auto& [x1, y1] = *(upper - 1);
        const auto& [x2, y2] = *upper;
        double t = (z - x1) / (x2 - x1);
        continuous = y1 + t * (y2 - y1);
    }
    continuous = std::clamp(continuous, 1.0, 5.0);
    int rounded = static_cast<int>(std::floor(continuous + 0.5));  // half-up
    rounded = std::clamp(rounded, 1, 5);
    return {continuous, rounded};
}

void CalibrationModel::save(const std::string& path) const {
    json j;
    j["slope"] = slope_;
    j["intercept"] = intercept_;
    json knots = json::array();
    for (const auto& [x, y] : knots_) knots.push_back({x, y});
    j["knots"] = knots;
    j["fingerprint"] = fingerprint_;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open file for writing: " + path);
    out << j.dump(2) << '\n';
}

CalibrationModel CalibrationModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    json j;
    try {
        in >> j;
        CalibrationModel model;
        model.slope_ = j.at("slope").get<double>();
        model.intercept_ = j.at("intercept").get<double>();
        for (const auto& knot : j.at("knots"))
            model.knots_.emplace_back(knot.at(0).get<double>(), knot.at(1).get<double>());
        model.fingerprint_ = j.at("fingerprint").get<std::string>();
        for (std::size_t i = 1; i < model.knots_.size(); ++i)
            if (!(model.knots_[i - 1].first < model.knots_[i].first))
                throw ValidationError("calibration model " + path + ": knots not strictly increasing");
        return model;
    } catch (const json::exception& e) {
        throw ValidationError("calibration model " + path + ": " + e.what());
    }
}

ValidationReport validate_calibration(const std::vector<std::pair<double, double>>& pairs,
                                      double train_fraction, std::size_t folds, std::uint64_t seed) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw ValidationError("validate_calibration: train_fraction must be in (0,1)");
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    seeded_shuffle(order, seed);

    std::size_t n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(pairs.size())));
    std::size_t n_holdout = pairs.size() - n_train;
    if (folds < 2 || n_train < folds || n_train < 10 || n_holdout == 0)
        throw ValidationError("validate_calibration: insufficient data for " + std::to_string(folds) +
                              " folds with train_fraction " + std::to_string(train_fraction));

    auto subset = [&](std::size_t begin, std::size_t end, bool invert) {
        std::vector<std::pair<double, double>> out;
        for (std::size_t i = 0; i < n_train; ++i) {
            bool in_window = i >= begin && i < end;
            if (in_window != invert) out.push_back(pairs[order[i]]);
        }
        return out;
    };

    ValidationReport report;
    for (std::size_t f = 0; f < folds; ++f) {
        std::size_t begin = f * n_train / folds;
        std::size_t end = (f + 1) * n_train / folds;
        if (begin == end) continue;
        auto fold_train = subset(begin, end, true);
        auto fold_eval = subset(begin, end, false);
        CalibrationModel model = CalibrationModel::fit(fold_train);
        std::size_t hits = 0;
        for (const auto& [x, y] : fold_eval)
            if (model.apply(x).second == static_cast<int>(std::llround(y))) ++hits;
        report.fold_accuracy.push_back(static_cast<double>(hits) / static_cast<double>(fold_eval.size()));
    }
    double mean = 0.0;
    for (double a : report.fold_accuracy) mean += a;
    mean /= static_cast<double>(report.fold_accuracy.size());
    double var = 0.0;
    for (double a : report.fold_accuracy) var += (a - mean) * (a - mean);
    var /= static_cast<double>(report.fold_accuracy.size());
    report.fold_accuracy_mean = mean;
    report.fold_accuracy_stddev = std::sqrt(var);

    std::vector<std::pair<double, double>> train;
    train.reserve(n_train);
    for (std::size_t i = 0; i < n_train; ++i) train.push_back(pairs[order[i]]);
    CalibrationModel final_model = CalibrationModel::fit(train);

    std::vector<int> predicted, human;
    predicted.reserve(n_holdout);
    human.reserve(n_holdout);
    for (std::size_t i = n_train; i < pairs.size(); ++i) {
        const auto& [x, y] = pairs[order[i]];
        predicted.push_back(final_model.apply(x).second);
        human.push_back(static_cast<int>(std::llround(y)));
    }
    report.holdout = agreement_statistics(predicted, human);
    return report;
}

}  // namespace skillalign
