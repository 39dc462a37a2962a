// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skillalign/judge.hpp"

namespace skillalign {

/// Calibrated per-rank scores for one run, extraction order preserved;
/// missing entries are skills that could not be scored.
using ScoreVector = std::vector<std::optional<int>>;

/// count(score >= threshold) / K. Missing entries stay in the denominator
/// and never reach the numerator.
double precision_at(const ScoreVector& scores, int threshold);

/// Arithmetic mean over the non-missing entries. Throws when all are missing.
double mean_score(const ScoreVector& scores);

/// Fraction of entries that are scored.
double coverage(const ScoreVector& scores);

/// Linear-gain NDCG: DCG = sum_i s_i / log2(i+1) over 1-based ranks with
/// missing entries contributing zero gain, IDCG over the descending sort.
/// Throws when all entries are missing.
double ndcg(const ScoreVector& scores);

enum class Averaging { Macro, Micro };

/// Aggregated metrics for one (strategy [, doc_type]) cell.
struct MetricRow {
    Strategy strategy;
    std::optional<DocType> doc_type;
    double precision5 = 0.0;
    double precision4 = 0.0;
    double mean = 0.0;
    double ndcg = 0.0;
    std::size_t n_runs = 0;
    double coverage = 0.0;
};

/// Rows in canonical column order: TF-IDF, BERT, then the zero-shot models,
/// then the RAG models (GPT, Llama, Claude, Gemini first; other model ids
/// alphabetical after).
struct ReportTable {
    std::vector<MetricRow> rows;
    bool grouped_by_doc_type = false;
    std::size_t k = 0;
    Averaging averaging = Averaging::Macro;
};

/// Per-run metrics averaged over each group (macro). Micro pools scored
/// slots across the group's runs for the precisions and mean; NDCG is
/// macro either way since rank positions do not pool. Requires a uniform K.
ReportTable aggregate(const std::vector<ScoredRecord>& records, bool group_by_doc_type,
                      Averaging averaging = Averaging::Macro);

enum class ReportFormat { Markdown, Csv, Plotdata };

ReportFormat report_format_from_string(std::string_view s);

std::string render_markdown(const ReportTable& table);
std::string render_csv(const ReportTable& table);
/// Grouped bar-chart series: one panel per document type, strategies on the
/// x axis, precision4 as the value. Requires a doc_type-grouped table.
std::string render_plotdata(const ReportTable& table);

std::string render_report(const ReportTable& table, ReportFormat format);

/// Inverse of render_csv; round-trips the exact table.
ReportTable parse_report_csv(const std::string& text);

/// Display label for a strategy column ("TF-IDF", "BERT", "RAG GPT", ...).
std::string strategy_display_label(const Strategy& strategy);

}  // namespace skillalign
