// SPDX-License-Identifier: Apache-2.0
#include "skillalign/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "skillalign/csv.hpp"
#include "skillalign/errors.hpp"

namespace skillalign {

using nlohmann::json;

double precision_at(const ScoreVector& scores, int threshold) {
    if (scores.empty()) throw ValidationError("precision_at: empty score list");
    std::size_t hits = 0;
    for (const auto& s : scores)
        if (s && *s >= threshold) ++hits;
    return static_cast<double>(hits) / static_cast<double>(scores.size());
}

double mean_score(const ScoreVector& scores) {
    double sum = 0.0;
    std::size_t counted = 0;
    for (const auto& s : scores) {
        if (!s) continue;
        sum += *s;
        ++counted;
    }
    if (counted == 0) throw ValidationError("mean_score: all entries missing");
    return sum / static_cast<double>(counted);
}

double coverage(const ScoreVector& scores) {
    if (scores.empty()) return 0.0;
    std::size_t counted = 0;
    for (const auto& s : scores)
        if (s) ++counted;
    return static_cast<double>(counted) / static_cast<double>(scores.size());
}

double ndcg(const ScoreVector& scores) {
    if (scores.empty()) throw ValidationError("ndcg: empty score list");
    bool any = std::any_of(scores.begin(), scores.end(), [](const auto& s) { return s.has_value(); });
    if (!any) throw ValidationError("ndcg: all entries missing");

    auto gain = [](const std::optional<int>& s) { return s ? static_cast<double>(*s) : 0.0; };
    double dcg = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i)
        dcg += gain(scores[i]) / std::log2(static_cast<double>(i) + 2.0);

    std::vector<double> ideal;
    ideal.reserve(scores.size());
    for (const auto& s : scores) ideal.push_back(gain(s));
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = 0.0;
    for (std::size_t i = 0; i < ideal.size(); ++i)
        idcg += ideal[i] / std::log2(static_cast<double>(i) + 2.0);
    return dcg / idcg;
}

namespace {

int strategy_order(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Tfidf: return 0;
        case StrategyKind::Embed: return 1;
        case StrategyKind::ZeroShot: return 2;
        case StrategyKind::Rag: return 3;
    }
    return 4;
}

// Canonical model column order within a strategy group.
int model_order(const std::string& model) {
    std::string lower;
    for (char c : model) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower.find("gpt") != std::string::npos) return 0;
    if (lower.find("llama") != std::string::npos) return 1;
    if (lower.find("claude") != std::string::npos) return 2;
    if (lower.find("gemini") != std::string::npos) return 3;
    return 4;
}

std::string pretty_model(const std::string& model) {
    switch (model_order(model)) {
        case 0: return "GPT";
        case 1: return "Llama";
        case 2: return "Claude";
        case 3: return "Gemini";
        default: return model;
    }
}

bool strategy_less(const Strategy& a, const Strategy& b) {
    if (strategy_order(a.kind) != strategy_order(b.kind))
        return strategy_order(a.kind) < strategy_order(b.kind);
    if (model_order(a.model) != model_order(b.model)) return model_order(a.model) < model_order(b.model);
    return a.model < b.model;
}

ScoreVector rounded_scores(const ScoredRecord& record) {
    ScoreVector out;
    out.reserve(record.entries.size());
    for (const auto& e : record.entries) out.push_back(e.rounded);
    return out;
}

}  // namespace

std::string strategy_display_label(const Strategy& strategy) {
    switch (strategy.kind) {
        case StrategyKind::Tfidf: return "TF-IDF";
        case StrategyKind::Embed: return "BERT";
        case StrategyKind::ZeroShot: return "ZERO-SHOT " + pretty_model(strategy.model);
        case StrategyKind::Rag: return "RAG " + pretty_model(strategy.model);
    }
    return "?";
}

ReportTable aggregate(const std::vector<ScoredRecord>& records, bool group_by_doc_type,
                      Averaging averaging) {
    if (records.empty()) throw ValidationError("aggregate: empty scored ledger");
    std::size_t k = records.front().k;
    for (const auto& r : records)
        if (r.k != k)
            throw ValidationError("aggregate: mixed K in scored ledger (" + std::to_string(k) + " vs " +
                                  std::to_string(r.k) + ")");

    struct GroupKey {
        Strategy strategy;
        std::optional<DocType> doc_type;
        bool operator<(const GroupKey& other) const {
            if (!(strategy == other.strategy)) return strategy_less(strategy, other.strategy);
            return doc_type < other.doc_type;
        }
    };
    std::map<GroupKey, std::vector<const ScoredRecord*>> groups;
    for (const auto& r : records) {
        GroupKey key{r.strategy, group_by_doc_type ? std::optional<DocType>(r.doc_type) : std::nullopt};
        groups[key].push_back(&r);
    }

    ReportTable table;
    table.grouped_by_doc_type = group_by_doc_type;
    table.k = k;
    table.averaging = averaging;
    for (const auto& [key, members] : groups) {
        MetricRow row;
        row.strategy = key.strategy;
        row.doc_type = key.doc_type;
        row.n_runs = members.size();

        if (averaging == Averaging::Macro) {
            double p5 = 0.0, p4 = 0.0, mean = 0.0, nd = 0.0, cov = 0.0;
            for (const auto* r : members) {
                ScoreVector scores = rounded_scores(*r);
                p5 += precision_at(scores, 5);
                p4 += precision_at(scores, 4);
                mean += mean_score(scores);
                nd += ndcg(scores);
                cov += coverage(scores);
            }
            double n = static_cast<double>(members.size());
            row.precision5 = p5 / n;
            row.precision4 = p4 / n;
            row.mean = mean / n;
            row.ndcg = nd / n;
            row.coverage = cov / n;
        } else {
            // pooled counts for the precisions and mean; ndcg stays per-run
            std::size_t slots = 0, scored = 0, ge5 = 0, ge4 = 0;
            double sum = 0.0, nd = 0.0;
            for (const auto* r : members) {
                ScoreVector scores = rounded_scores(*r);
                nd += ndcg(scores);
                for (const auto& s : scores) {
                    ++slots;
                    if (!s) continue;
                    ++scored;
                    sum += *s;
                    if (*s >= 5) ++ge5;
                    if (*s >= 4) ++ge4;
                }
            }
            if (scored == 0) throw ValidationError("aggregate: group has no scored skills");
            row.precision5 = static_cast<double>(ge5) / static_cast<double>(slots);
            row.precision4 = static_cast<double>(ge4) / static_cast<double>(slots);
            row.mean = sum / static_cast<double>(scored);
            row.ndcg = nd / static_cast<double>(members.size());
            row.coverage = static_cast<double>(scored) / static_cast<double>(slots);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

namespace {

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<Strategy> table_strategies(const ReportTable& table) {
    std::vector<Strategy> strategies;
    for (const auto& row : table.rows) {
        bool found = false;
        for (const auto& s : strategies)
            if (s == row.strategy) found = true;
        if (!found) strategies.push_back(row.strategy);
    }
    std::sort(strategies.begin(), strategies.end(), strategy_less);
    return strategies;
}

const MetricRow* find_row(const ReportTable& table, const Strategy& strategy,
                          const std::optional<DocType>& doc_type) {
    for (const auto& row : table.rows)
        if (row.strategy == strategy && row.doc_type == doc_type) return &row;
    return nullptr;
}

void render_markdown_section(std::ostringstream& out, const ReportTable& table,
                             const std::optional<DocType>& doc_type,
                             const std::vector<Strategy>& strategies) {
    out << "| Metric |";
    for (const auto& s : strategies) out << ' ' << strategy_display_label(s) << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < strategies.size(); ++i) out << "---|";
    out << '\n';

    struct MetricDef {
        const char* name;
        double MetricRow::* field;
    };
    const MetricDef metrics[] = {
        {"Precision5", &MetricRow::precision5},
        {"Precision4", &MetricRow::precision4},
        {"Mean", &MetricRow::mean},
        {"NDCG", &MetricRow::ndcg},
    };
    for (const auto& metric : metrics) {
        out << "| " << metric.name << " |";
        for (const auto& s : strategies) {
            const MetricRow* row = find_row(table, s, doc_type);
            out << ' ' << (row ? fmt3(row->*(metric.field)) : "-") << " |";
        }
        out << '\n';
    }
    out << "| n_runs |";
    for (const auto& s : strategies) {
        const MetricRow* row = find_row(table, s, doc_type);
        out << ' ' << (row ? std::to_string(row->n_runs) : "-") << " |";
    }
    out << "\n| Coverage |";
    for (const auto& s : strategies) {
        const MetricRow* row = find_row(table, s, doc_type);
        out << ' ' << (row ? fmt3(row->coverage) : "-") << " |";
    }
    out << '\n';
}

}  // namespace

std::string render_markdown(const ReportTable& table) {
    if (table.rows.empty()) throw ValidationError("render: empty report table");
    auto strategies = table_strategies(table);
    std::ostringstream out;
    out << "# Skill extraction performance (K=" << table.k << ", "
        << (table.averaging == Averaging::Macro ? "macro" : "micro") << "-averaged, linear NDCG gain)\n\n";
    if (!table.grouped_by_doc_type) {
        render_markdown_section(out, table, std::nullopt, strategies);
    } else {
        for (DocType t : {DocType::CatalogDescription, DocType::SyllabusDescription,
                          DocType::SyllabusOutcomes, DocType::SyllabusCombined}) {
            bool present = false;
            for (const auto& row : table.rows)
                if (row.doc_type == t) present = true;
            if (!present) continue;
            out << "## " << to_string(t) << "\n\n";
            render_markdown_section(out, table, t, strategies);
            out << '\n';
        }
    }
    return out.str();
}

std::string render_csv(const ReportTable& table) {
    if (table.rows.empty()) throw ValidationError("render: empty report table");
    std::ostringstream out;
    out << "#k=" << table.k << ",averaging=" << (table.averaging == Averaging::Macro ? "macro" : "micro")
        << ",grouped_by_doc_type=" << (table.grouped_by_doc_type ? "1" : "0") << ",ndcg_gain=linear\n";
    out << "strategy,model,doc_type,n_runs,coverage,precision5,precision4,mean,ndcg\n";
    for (const auto& row : table.rows) {
        out << csv_join({to_string(row.strategy.kind), row.strategy.model,
                         row.doc_type ? to_string(*row.doc_type) : "", std::to_string(row.n_runs),
                         fmt_full(row.coverage), fmt_full(row.precision5), fmt_full(row.precision4),
                         fmt_full(row.mean), fmt_full(row.ndcg)})
            << '\n';
    }
    return out.str();
}

ReportTable parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string meta;
    if (!std::getline(in, meta) || meta.rfind("#k=", 0) != 0)
        throw ValidationError("report csv: missing metadata line");
    ReportTable table;
    {
        std::string rest = meta.substr(1);
        std::istringstream ms(rest);
        std::string item;
        while (std::getline(ms, item, ',')) {
            auto eq = item.find('=');
            if (eq == std::string::npos) continue;
            std::string key = item.substr(0, eq), value = item.substr(eq + 1);
            if (key == "k") table.k = std::stoul(value);
            else if (key == "averaging") table.averaging = value == "micro" ? Averaging::Micro : Averaging::Macro;
            else if (key == "grouped_by_doc_type") table.grouped_by_doc_type = value == "1";
        }
    }
    auto rows = read_csv(in);
    if (rows.empty()) throw ValidationError("report csv: missing header");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& fields = rows[i].fields;
        if (fields.size() != 9) throw ValidationError("report csv: malformed row");
        MetricRow row;
        row.strategy.kind = strategy_kind_from_string(fields[0]);
        row.strategy.model = fields[1];
        if (!fields[2].empty()) row.doc_type = doc_type_from_string(fields[2]);
        row.n_runs = std::stoul(fields[3]);
        row.coverage = std::stod(fields[4]);
        row.precision5 = std::stod(fields[5]);
        row.precision4 = std::stod(fields[6]);
        row.mean = std::stod(fields[7]);
        row.ndcg = std::stod(fields[8]);
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string render_plotdata(const ReportTable& table) {
    if (table.rows.empty()) throw ValidationError("render: empty report table");
    if (!table.grouped_by_doc_type)
        throw ValidationError("plotdata requires a doc_type-grouped table");
    auto strategies = table_strategies(table);
    json panels = json::array();
    for (DocType t : {DocType::CatalogDescription, DocType::SyllabusDescription, DocType::SyllabusOutcomes,
                      DocType::SyllabusCombined}) {
        bool present = false;
        for (const auto& row : table.rows)
            if (row.doc_type == t) present = true;
        if (!present) continue;
        json series = json::array();
        for (const auto& s : strategies) {
            const MetricRow* row = find_row(table, s, t);
            if (!row) continue;
            series.push_back({{"strategy", strategy_display_label(s)}, {"value", row->precision4}});
        }
        panels.push_back({{"doc_type", to_string(t)}, {"series", series}});
    }
    json j;
    j["metric"] = "precision4";
    j["k"] = table.k;
    j["ndcg_gain"] = "linear";
    j["panels"] = panels;
    return j.dump(2) + "\n";
}

ReportFormat report_format_from_string(std::string_view s) {
    if (s == "markdown" || s == "md") return ReportFormat::Markdown;
    if (s == "csv") return ReportFormat::Csv;
    if (s == "plotdata") return ReportFormat::Plotdata;
    throw ValidationError("unknown report format '" + std::string(s) + "' (allowed: markdown, csv, plotdata)");
}

std::string render_report(const ReportTable& table, ReportFormat format) {
    switch (format) {
        case ReportFormat::Markdown: return render_markdown(table);
        case ReportFormat::Csv: return render_csv(table);
        case ReportFormat::Plotdata: return render_plotdata(table);
    }
    throw ValidationError("unknown report format");
}

}  // namespace skillalign
