#pragma once

#include "rads/policy_ingest.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rads {

/// Paragraph categories, in the order used for tie-breaking.
enum class CategoryLabel {
    FirstPartyCollectionUse,
    ThirdPartySharingCollection,
    UserAccessEditDeletion,
    DataRetention,
    DataSecurity,
    InternationalSpecificAudiences,
    DoNotTrack,
    PolicyChange,
    UserChoiceControl,
    IntroductoryGeneric,
    PracticeNotCovered,
    PrivacyContactInformation,
};

inline constexpr std::array<CategoryLabel, 12> all_category_labels{
    CategoryLabel::FirstPartyCollectionUse,   CategoryLabel::ThirdPartySharingCollection,
    CategoryLabel::UserAccessEditDeletion,    CategoryLabel::DataRetention,
    CategoryLabel::DataSecurity,              CategoryLabel::InternationalSpecificAudiences,
    CategoryLabel::DoNotTrack,                CategoryLabel::PolicyChange,
    CategoryLabel::UserChoiceControl,         CategoryLabel::IntroductoryGeneric,
    CategoryLabel::PracticeNotCovered,        CategoryLabel::PrivacyContactInformation,
};

[[nodiscard]] std::string_view to_string(CategoryLabel l);
/// Accepts enum names ("UserAccessEditDeletion") and listing names ("User Access, Edit and Deletion").
[[nodiscard]] std::optional<CategoryLabel> parse_category_label(std::string_view s);

struct ClassifiedParagraph {
    Paragraph paragraph;
    CategoryLabel label = CategoryLabel::IntroductoryGeneric;
    double score = 0.0;  // [0, 1]
};

enum class SelectionReason { UAED, AdjacentPCI };

[[nodiscard]] std::string_view to_string(SelectionReason r);

struct ExcerptMember {
    Paragraph paragraph;
    CategoryLabel label = CategoryLabel::UserAccessEditDeletion;
    SelectionReason reason = SelectionReason::UAED;
};

struct RadsExcerpt {
    std::string app_id;
    std::vector<ExcerptMember> members;
};

struct WeightedPhrase {
    std::string phrase;  // matched case-insensitively, on word boundaries
    double weight = 1.0;
};

using Lexicon = std::map<CategoryLabel, std::vector<WeightedPhrase>>;

/// JSON object: category -> [{"phrase": ..., "weight": ...}]. Throws DataError.
[[nodiscard]] Lexicon parse_lexicon(std::string_view json_text);
[[nodiscard]] const Lexicon& default_lexicon();

/// Weighted phrase hits per category.
[[nodiscard]] std::map<CategoryLabel, double> lexicon_hits(std::string_view text, const Lexicon& lexicon);

/// Highest weighted hit count wins; ties go to the earlier category;
/// no hits at all yields IntroductoryGeneric.
[[nodiscard]] CategoryLabel keyword_baseline_classify(const Paragraph& p, const Lexicon& lexicon);

/// Pluggable paragraph classifier.
class Classifier {
public:
    virtual ~Classifier() = default;
    /// Throws ExternalError naming the paragraph index when a backend fails.
    [[nodiscard]] virtual ClassifiedParagraph classify(const Paragraph& p) = 0;
};

class KeywordClassifier final : public Classifier {
public:
    explicit KeywordClassifier(Lexicon lexicon = default_lexicon());
    [[nodiscard]] ClassifiedParagraph classify(const Paragraph& p) override;

private:
    Lexicon lexicon_;
};

/// Long-lived child process: one paragraph per line on stdin, one
/// "<label>[<TAB><score>]" line back on stdout. Calls are serialized.
class ProcessClassifier final : public Classifier {
public:
    explicit ProcessClassifier(std::string command);
    ~ProcessClassifier() override;
    ProcessClassifier(const ProcessClassifier&) = delete;
    ProcessClassifier& operator=(const ProcessClassifier&) = delete;

    [[nodiscard]] ClassifiedParagraph classify(const Paragraph& p) override;

private:
    void start();
    void stop();

    std::string command_;
    std::mutex mutex_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
};

/// POSTs {"index", "text"} and expects {"label", "score"} back.
class HttpClassifier final : public Classifier {
public:
    explicit HttpClassifier(std::string url);
    [[nodiscard]] ClassifiedParagraph classify(const Paragraph& p) override;

private:
    std::string url_;
};

/// "builtin", "exec:<command>" or "http:<url>".
[[nodiscard]] std::unique_ptr<Classifier> make_classifier(const std::string& backend,
                                                          const Lexicon& lexicon = default_lexicon());

[[nodiscard]] ClassifiedParagraph classify_paragraph(const Paragraph& p, Classifier& classifier);

/// Keeps every UAED paragraph plus each PrivacyContactInformation paragraph whose
/// index is exactly one away from a UAED paragraph. Input must be ordered by index.
[[nodiscard]] RadsExcerpt extract_rads_paragraphs(const std::string& app_id,
                                                  const std::vector<ClassifiedParagraph>& classified);

/// Re-expresses an excerpt as classified paragraphs (for re-extraction).
[[nodiscard]] std::vector<ClassifiedParagraph> as_classified(const RadsExcerpt& excerpt);

[[nodiscard]] std::string excerpt_to_json(const RadsExcerpt& excerpt);
[[nodiscard]] RadsExcerpt excerpt_from_json(std::string_view text);

}  // namespace rads
