#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "expframe/evaluation.hpp"
#include "expframe/tasks.hpp"

namespace expframe {

enum class Format { table, json, csv };

std::optional<Format> parse_format(std::string_view text);

/// Percentage with one decimal ("81.1"); kappa-style ratio with two ("0.75").
std::string percent(double fraction);
std::string ratio2(double value);

struct Table {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// Aligned text (first column left-aligned, the rest right-aligned) or CSV.
/// Tables are separated by a blank line; CSV titles become "# title" lines.
std::string render(std::span<const Table> tables, Format format);

nlohmann::ordered_json to_json(const PrfScore& s);
nlohmann::ordered_json to_json(const EvalReport& r);
nlohmann::ordered_json to_json(const AgreementResult& r);
nlohmann::ordered_json to_json(const AgreementReport& r);
nlohmann::ordered_json to_json(const CorpusStats& s);
nlohmann::ordered_json to_json(const ReportSummary& s);
nlohmann::ordered_json to_json(const CrossvalResult& r);

std::vector<Table> to_tables(const EvalReport& r, std::string_view title);
std::vector<Table> to_tables(const AgreementReport& r);
std::vector<Table> to_tables(const CorpusStats& s);
std::vector<Table> to_tables(const CrossvalResult& r);

}  // namespace expframe
