// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "skillalign/errors.hpp"
#include "skillalign/judge.hpp"

namespace skillalign {

namespace {

struct Contingency {
    std::vector<int> categories;                   // sorted observed values
    std::vector<std::vector<std::int64_t>> table;  // counts[a][b]
    std::vector<std::int64_t> row;                 // rater-a marginals
    std::vector<std::int64_t> col;                 // rater-b marginals
    std::int64_t n = 0;
};

Contingency build_contingency(const std::vector<int>& a, const std::vector<int>& b) {
    Contingency c;
    std::map<int, std::size_t> index;
    for (int v : a) index.emplace(v, 0);
    for (int v : b) index.emplace(v, 0);
    for (auto& [value, i] : index) {
        i = c.categories.size();
        c.categories.push_back(value);
    }
    std::size_t m = c.categories.size();
    c.table.assign(m, std::vector<std::int64_t>(m, 0));
    c.row.assign(m, 0);
    c.col.assign(m, 0);
    c.n = static_cast<std::int64_t>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::size_t ia = index[a[i]], ib = index[b[i]];
        ++c.table[ia][ib];
        ++c.row[ia];
        ++c.col[ib];
    }
    return c;
}

std::optional<double> cohen_kappa(const Contingency& c) {
    std::int64_t diag = 0, cross = 0;
    for (std::size_t i = 0; i < c.categories.size(); ++i) {
        diag += c.table[i][i];
        cross += c.row[i] * c.col[i];
    }
    // chance agreement of 1 leaves nothing to correct for
    if (cross == c.n * c.n) return std::nullopt;
    double po = static_cast<double>(diag) / static_cast<double>(c.n);
    double pe = static_cast<double>(cross) / static_cast<double>(c.n * c.n);
    return (po - pe) / (1.0 - pe);
}

std::optional<double> weighted_kappa_quadratic(const Contingency& c) {
    // kappa_w = 1 - sum(d_ij * o_ij) / sum(d_ij * e_ij), d_ij = (v_i - v_j)^2
    double observed = 0.0, expected = 0.0;
    for (std::size_t i = 0; i < c.categories.size(); ++i) {
        for (std::size_t j = 0; j < c.categories.size(); ++j) {
            double d = static_cast<double>(c.categories[i] - c.categories[j]);
            d *= d;
            observed += d * static_cast<double>(c.table[i][j]);
            expected += d * static_cast<double>(c.row[i]) * static_cast<double>(c.col[j]) /
                        static_cast<double>(c.n);
        }
    }
    if (expected == 0.0) return std::nullopt;
    return 1.0 - observed / expected;
}

std::optional<double> krippendorff_alpha_ordinal(const std::vector<int>& a, const std::vector<int>& b) {
    // Two raters, no missing values: every item contributes the ordered pairs
    // (a_i, b_i) and (b_i, a_i) to the coincidence matrix.
    std::map<int, std::size_t> index;
    for (int v : a) index.emplace(v, 0);
    for (int v : b) index.emplace(v, 0);
    std::vector<int> cats;
    for (auto& [value, i] : index) {
        i = cats.size();
        cats.push_back(value);
    }
    std::size_t m = cats.size();
    if (m < 2) return std::nullopt;

    std::vector<std::vector<double>> o(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        o[index[a[i]]][index[b[i]]] += 1.0;
        o[index[b[i]]][index[a[i]]] += 1.0;
    }
    std::vector<double> nc(m, 0.0);
    double n = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) nc[i] += o[i][j];
        n += nc[i];
    }
    // ordinal distance: cumulative marginal mass between the two categories
    auto delta2 = [&](std::size_t i, std::size_t j) {
        auto [lo, hi] = std::minmax(i, j);
        double sum = 0.0;
        for (std::size_t g = lo; g <= hi; ++g) sum += nc[g];
        sum -= (nc[lo] + nc[hi]) / 2.0;
        return sum * sum;
    };
    double d_observed = 0.0, d_expected = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j) continue;
            double d2 = delta2(i, j);
            d_observed += o[i][j] * d2;
            d_expected += nc[i] * nc[j] * d2;
        }
    }
    d_observed /= n;
    d_expected /= n * (n - 1.0);
    if (d_expected == 0.0) return std::nullopt;
    return 1.0 - d_observed / d_expected;
}

std::optional<double> icc_2_1(const std::vector<int>& a, const std::vector<int>& b) {
    // Two-way random effects, absolute agreement, single rater.
    const double n = static_cast<double>(a.size());
    const double k = 2.0;
    double grand = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) grand += a[i] + b[i];
    grand /= n * k;

    double col_a = 0.0, col_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        col_a += a[i];
        col_b += b[i];
    }
    col_a /= n;
    col_b /= n;

    double ss_rows = 0.0, ss_total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double row_mean = (a[i] + b[i]) / 2.0;
        ss_rows += (row_mean - grand) * (row_mean - grand);
        ss_total += (a[i] - grand) * (a[i] - grand) + (b[i] - grand) * (b[i] - grand);
    }
    ss_rows *= k;
    double ss_cols = n * ((col_a - grand) * (col_a - grand) + (col_b - grand) * (col_b - grand));
    double ss_err = ss_total - ss_rows - ss_cols;

    double ms_rows = ss_rows / (n - 1.0);
    double ms_cols = ss_cols / (k - 1.0);
    double ms_err = ss_err / ((n - 1.0) * (k - 1.0));

    double denom = ms_rows + (k - 1.0) * ms_err + (k / n) * (ms_cols - ms_err);
    if (std::abs(denom) < 1e-12) return std::nullopt;
    return (ms_rows - ms_err) / denom;
}

}  // namespace

AgreementReport agreement_statistics(const std::vector<int>& ratings_a, const std::vector<int>& ratings_b) {
    if (ratings_a.size() != ratings_b.size())
        throw ValidationError("agreement_statistics: length mismatch (" + std::to_string(ratings_a.size()) +
                              " vs " + std::to_string(ratings_b.size()) + ")");
    if (ratings_a.size() < 2)
        throw ValidationError("agreement_statistics: need at least 2 items");
    for (const auto* v : {&ratings_a, &ratings_b})
        for (int x : *v)
            if (x < 1 || x > 5)
                throw ValidationError("agreement_statistics: rating " + std::to_string(x) + " outside 1..5");

    AgreementReport report;
    report.n_items = ratings_a.size();
    std::size_t matches = 0;
    for (std::size_t i = 0; i < ratings_a.size(); ++i)
        if (ratings_a[i] == ratings_b[i]) ++matches;
    report.accuracy = static_cast<double>(matches) / static_cast<double>(ratings_a.size());

    Contingency c = build_contingency(ratings_a, ratings_b);
    report.cohen_kappa = cohen_kappa(c);
    report.weighted_kappa = weighted_kappa_quadratic(c);
    report.krippendorff_alpha = krippendorff_alpha_ordinal(ratings_a, ratings_b);
    report.icc = icc_2_1(ratings_a, ratings_b);
    return report;
}

}  // namespace skillalign
