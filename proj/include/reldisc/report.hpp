#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reldisc/corpus.hpp"
#include "reldisc/embedding.hpp"
#include "reldisc/threshold.hpp"

namespace reldisc {

inline constexpr int kReportFormatVersion = 1;

std::string tool_version();

/// One configuration group: which slice of which corpus, the K used to build
/// S, and where to write the outputs.
struct RunConfig {
    std::filesystem::path corpus_path;
    std::optional<std::string> project;
    std::string category = "all";  // qa, ideas, all, or a raw category label
    std::size_t k = 5;
    ProviderConfig provider;
    std::filesystem::path output_path;  // report JSON; sibling files share its stem
    unsigned threads = 1;

    void validate() const;
    CorpusFilter filter() const;
};

/// The part of a RunConfig that is echoed into the report.
struct ConfigEcho {
    std::string corpus;
    std::optional<std::string> project;
    std::string category;  // canonical label
    std::size_t k = 0;
    std::string provider;
    std::size_t dim = 0;
    std::optional<std::string> endpoint;
    std::string output;

    bool operator==(const ConfigEcho&) const = default;
};

struct CorpusSummary {
    std::size_t loaded = 0;         // records in the corpus file
    std::size_t selected = 0;       // after the project/category filter
    std::size_t prepared = 0;       // after preprocessing
    std::size_t dropped_empty = 0;  // selected - prepared

    bool operator==(const CorpusSummary&) const = default;
};

struct CandidateReport {
    int format_version = kReportFormatVersion;
    std::string tool_version;
    std::string created_at;  // newest selected post, so reruns are byte-identical
    ConfigEcho config;
    CorpusSummary corpus_summary;
    ThresholdStats threshold_stats;
    std::string similarity_file;  // file name relative to the report
    std::vector<std::string> warnings;
    std::vector<CandidatePair> candidates;

    std::vector<PairKey> keys() const;
    bool operator==(const CandidateReport&) const = default;
};

/// Paths of everything a run writes, derived from the report path.
struct ArtifactPaths {
    std::filesystem::path report;
    std::filesystem::path similarity;  // <stem>.similarity.csv
    std::filesystem::path candidates;  // <stem>.candidates.csv
};
ArtifactPaths artifact_paths(const std::filesystem::path& report_path);

/// "%.4f"
std::string format_fixed4(double value);

/// Pretty-printed JSON with a trailing newline.
std::string to_json(const CandidateReport& report);
/// Structural problems in a report document; empty when it is valid.
std::vector<std::string> schema_errors(std::string_view json_text);
/// Throws ValidationError listing schema_errors when the document is invalid.
CandidateReport parse_report(std::string_view json_text);
CandidateReport load_report(const std::filesystem::path& path);
void save_report(const std::filesystem::path& path, const CandidateReport& report);

/// Spreadsheet form: ids, titles, 4-decimal similarity and urls.
std::string to_candidates_csv(const CandidateReport& report);

/// load, filter, prepare, embed, pairwise, build_s, local_threshold,
/// select_candidates; then writes the report, similarity and candidates
/// files. Failures carry the stage name in their message.
CandidateReport run(const RunConfig& config);

struct MatrixOutcome {
    RunConfig config;
    std::optional<CandidateReport> report;
    std::string error;  // empty on success
    int exit_code = 0;
};

/// Runs each config; configs sharing corpus, filter and provider share one
/// pairwise computation. A failing config does not stop the others.
/// Outcomes are in input order.
std::vector<MatrixOutcome> run_matrix(const std::vector<RunConfig>& configs);

/// JSON list of {corpus, project?, category?, k, provider?, dim?, endpoint?,
/// out, threads?}. Relative paths resolve against `base_dir`.
std::vector<RunConfig> parse_matrix_spec(std::string_view json_text, const std::filesystem::path& base_dir);
std::vector<RunConfig> load_matrix_spec(const std::filesystem::path& path);

}  // namespace reldisc
