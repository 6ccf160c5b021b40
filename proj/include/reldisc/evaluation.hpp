#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reldisc/error.hpp"
#include "reldisc/threshold.hpp"
#include "reldisc/timestamp.hpp"

namespace reldisc {

/// D: duplicate, R: related, N: not related. D and R are both true positives.
enum class Label { D, R, N };

char to_char(Label label);
/// Exactly "D", "R" or "N"; anything else is a ValidationError.
Label parse_label(std::string_view text);
inline bool is_true_positive(Label label) { return label != Label::N; }

struct Judgment {
    DiscussionId master_id = 0;
    DiscussionId target_id = 0;
    Label label = Label::N;
    std::optional<std::string> comment;
    std::string evaluator;
    Timestamp judged_at{};

    PairKey key() const { return {master_id, target_id}; }
    bool operator==(const Judgment&) const = default;
};

void validate(const Judgment& j);

/// A judgment names a pair that is not among the candidates.
class UnknownPairError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

inline constexpr std::string_view kJudgmentHeader = "master_id,target_id,label,evaluator,comment,judged_at";

std::vector<Judgment> read_judgments(std::istream& in);
/// A missing file is an IoError.
std::vector<Judgment> load_judgments(const std::filesystem::path& path);
void write_judgments(std::ostream& out, const std::vector<Judgment>& judgments);
/// Appends one row, writing the header first if the file is new or empty.
void append_judgment(const std::filesystem::path& path, const Judgment& j);

/// Each evaluator's current label per pair: the judgment with the latest
/// judged_at wins, and among equal timestamps the one appearing last.
std::map<PairKey, std::map<std::string, Label>> effective_labels(const std::vector<Judgment>& judgments);

/// Majority label of one pair's evaluators. True positive iff a strict
/// majority said D or R (then D if D outnumbers R, else R); otherwise N,
/// so ties go to N.
Label consensus(const std::vector<Label>& labels);

enum class Denominator { AllCandidates, JudgedOnly };

/// "all" / "judged"
std::string to_string(Denominator d);
Denominator parse_denominator(std::string_view text);

struct LabelCounts {
    std::size_t d = 0;
    std::size_t r = 0;
    std::size_t n = 0;

    void add(Label label);
    std::size_t total() const { return d + r + n; }
    bool operator==(const LabelCounts&) const = default;
};

struct PrecisionReport {
    Denominator denominator = Denominator::AllCandidates;
    std::size_t total_candidates = 0;
    std::size_t judged = 0;
    std::size_t unjudged = 0;
    std::size_t true_positives = 0;
    /// nullopt when the denominator is zero.
    std::optional<double> precision;
    LabelCounts consensus_counts;  // one per judged pair
    LabelCounts label_counts;      // every effective evaluator label

    /// Throws ValidationError if precision is undefined.
    double value() const;
    bool operator==(const PrecisionReport&) const = default;
};

/// true_positives / |R| (AllCandidates) or / judged pairs (JudgedOnly).
/// Throws UnknownPairError if a judgment names a pair outside `candidates`.
PrecisionReport precision(const std::vector<PairKey>& candidates, const std::vector<Judgment>& judgments,
                          Denominator denominator = Denominator::AllCandidates);

/// (p_o - p_e) / (1 - p_e) over {D, R, N}; 1 when p_e = 1 and the raters
/// agree everywhere. Throws ValidationError on empty or unequal input.
double cohen_kappa(const std::vector<Label>& a, const std::vector<Label>& b);

/// Unweighted mean. Throws ValidationError on empty input or an undefined
/// precision.
double mean_precision(const std::vector<PrecisionReport>& reports);
double mean_precision(const std::vector<double>& precisions);

/// Percentage truncated (not rounded) to two decimals: 31/34 -> "91.17".
std::string format_percent(double fraction);

/// Stable JSON rendering of a precision report; the evaluate command and
/// the metrics endpoint both print exactly this.
std::string metrics_json(const PrecisionReport& report);

}  // namespace reldisc
