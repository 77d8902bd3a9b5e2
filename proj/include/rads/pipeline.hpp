#pragma once

#include "rads/completeness.hpp"
#include "rads/config.hpp"
#include "rads/ledger.hpp"
#include "rads/report.hpp"
#include "rads/rights_identifier.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rads {

/// Everything `report` needs. Directory layout of a market corpus:
///   policies/<app>.html|.htm|.txt   one policy per app
///   copies/<app>.<ext> or copies/<app>/*   data copies returned to DSARs
///   captures/<app>.csv              runtime capture logs
///   ledger.jsonl                    DSAR campaign ledger
struct PipelineOptions {
    std::string market_id = "market";
    std::filesystem::path policies_dir;
    std::filesystem::path copies_dir;
    std::filesystem::path captures_dir;
    std::filesystem::path ledger_path;
    std::optional<std::filesystem::path> translation_table;
    std::optional<std::filesystem::path> lexicon_path;
    std::optional<std::filesystem::path> descriptors_path;
    std::optional<std::filesystem::path> prompt_path;
    std::optional<std::filesystem::path> work_dir;  // intermediate artifacts, when set

    std::string classifier = "builtin";
    std::string llm;  // "mock:<file>" or "http"
    RetryPolicy retry;
    LlmLimits limits;
    int workers = 4;

    CompareOptions compare;
    Orientation orientation = Orientation::Auto;
    double missing_low = 0.4;
    double missing_high = 0.8;
    BucketBounds bounds;
    std::optional<Timestamp> horizon;  // defaults to the latest ledger timestamp
};

/// Reads the keys documented in the README; missing keys keep their defaults.
[[nodiscard]] PipelineOptions options_from_config(const Config& cfg);

struct PipelineOutput {
    ComplianceReport report;
    std::vector<RadsFinding> findings;             // sorted by app id
    std::vector<AppCompletenessResult> results;    // sorted by app id
};

[[nodiscard]] PipelineOutput run_pipeline(const PipelineOptions& opts);

/// Folds already-computed pieces into a report. A missing horizon defaults to
/// the latest timestamp recorded in the requests.
[[nodiscard]] ComplianceReport assemble_report(const std::string& market_id, const std::vector<RadsFinding>& findings,
                                               const std::vector<AccessRequest>& requests,
                                               const std::map<std::string, UiDepthRecord>& ui_depths,
                                               const std::vector<AppCompletenessResult>& results,
                                               std::optional<Timestamp> horizon = std::nullopt,
                                               const BucketBounds& bounds = {}, double missing_low = 0.4,
                                               double missing_high = 0.8);

/// Copy files for one app: `<dir>/<app>.<ext>` and everything under `<dir>/<app>/`.
[[nodiscard]] std::vector<std::filesystem::path> copy_files_for(const std::filesystem::path& dir,
                                                                const std::string& app_id);

/// Parses every copy file and unions the extractions. HTML/TXT/PDF files are
/// skipped with a note, since they are compared by hand.
[[nodiscard]] CategoryExtraction extract_copies(const std::vector<std::filesystem::path>& files,
                                                const DescriptorDictionary& dict, Orientation orientation,
                                                std::vector<std::string>& notes);

}  // namespace rads
