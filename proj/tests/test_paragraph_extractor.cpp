#include "support.hpp"

#include "rads/error.hpp"
#include "rads/paragraph_extractor.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace rads;

namespace {

Paragraph para(std::size_t index, std::string text) { return Paragraph{index, std::move(text), {}}; }

std::vector<ClassifiedParagraph> labelled(const std::vector<CategoryLabel>& labels) {
    std::vector<ClassifiedParagraph> out;
    for (std::size_t i = 0; i < labels.size(); ++i) out.push_back({para(i, "p" + std::to_string(i)), labels[i], 1.0});
    return out;
}

std::vector<std::pair<std::size_t, SelectionReason>> members(const RadsExcerpt& e) {
    std::vector<std::pair<std::size_t, SelectionReason>> out;
    for (const auto& m : e.members) out.emplace_back(m.paragraph.index, m.reason);
    return out;
}

CategoryLabel classify(const std::string& text) { return keyword_baseline_classify(para(0, text), default_lexicon()); }

constexpr auto UAED = CategoryLabel::UserAccessEditDeletion;
constexpr auto PCI = CategoryLabel::PrivacyContactInformation;
constexpr auto FPC = CategoryLabel::FirstPartyCollectionUse;

}  // namespace

TEST_SUITE("paragraph_extractor") {

TEST_CASE("builtin classifier examples") {
    CHECK(classify("You can access, edit or delete your personal information at any time.") == UAED);
    CHECK(classify("Contact our privacy team at privacy@example.com.") == PCI);
    CHECK(classify("Lorem ipsum.") == CategoryLabel::IntroductoryGeneric);
    CHECK(classify("You may request a copy of your data from us.") == UAED);
    CHECK(classify("Request a copy of your records or delete your account; our security team helps.") == UAED);
}

TEST_CASE("hit counts decide and ties go to the earlier category") {
    Lexicon lex{{FPC, {{"alpha", 1.0}}},
                {CategoryLabel::DataRetention, {{"beta", 1.0}}},
                {UAED, {{"gamma", 1.0}}}};
    CHECK(keyword_baseline_classify(para(0, "beta beta gamma"), lex) == CategoryLabel::DataRetention);
    CHECK(keyword_baseline_classify(para(0, "gamma beta"), lex) == UAED);
    CHECK(keyword_baseline_classify(para(0, "beta alpha"), lex) == FPC);
    CHECK(keyword_baseline_classify(para(0, "alphabet"), lex) == CategoryLabel::IntroductoryGeneric);
    CHECK_THROWS_AS((void)keyword_baseline_classify(para(0, "x"), Lexicon{}), UsageError);
}

TEST_CASE("weights scale hits") {
    Lexicon lex{{FPC, {{"alpha", 1.0}}}, {UAED, {{"gamma", 3.0}}}};
    CHECK(keyword_baseline_classify(para(0, "alpha alpha gamma"), lex) == UAED);
    const auto hits = lexicon_hits("alpha alpha gamma", lex);
    CHECK(hits.at(FPC) == doctest::Approx(2.0));
    CHECK(hits.at(UAED) == doctest::Approx(3.0));
}

TEST_CASE("classifier scores lie in [0, 1] and labels are total") {
    KeywordClassifier k;
    for (const auto* text : {"Lorem ipsum.", "We collect data and retain it; contact us.", "request access"}) {
        const auto c = k.classify(para(3, text));
        CHECK(c.score >= 0.0);
        CHECK(c.score <= 1.0);
        CHECK(c.paragraph.index == 3);
    }
}

TEST_CASE("adjacency rule examples") {
    using R = SelectionReason;
    CHECK(members(extract_rads_paragraphs("a", labelled({UAED, PCI, FPC}))) ==
          std::vector<std::pair<std::size_t, R>>{{0, R::UAED}, {1, R::AdjacentPCI}});
    CHECK(extract_rads_paragraphs("a", labelled({PCI, FPC, PCI})).members.empty());
    CHECK(members(extract_rads_paragraphs("a", labelled({PCI, UAED, PCI}))) ==
          std::vector<std::pair<std::size_t, R>>{{0, R::AdjacentPCI}, {1, R::UAED}, {2, R::AdjacentPCI}});
    CHECK(members(extract_rads_paragraphs("a", labelled({UAED, FPC, PCI}))) ==
          std::vector<std::pair<std::size_t, R>>{{0, R::UAED}});
}

TEST_CASE("extraction properties over random label sequences") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 2000; ++i) {
        std::vector<CategoryLabel> labels;
        for (auto n = rng() % 15; n > 0; --n) labels.push_back(all_category_labels[rng() % 4 == 0 ? 2 : rng() % 12]);
        const auto input = labelled(labels);
        const auto ex = extract_rads_paragraphs("a", input);

        std::set<std::size_t> uaed;
        for (std::size_t k = 0; k < labels.size(); ++k) {
            if (labels[k] == UAED) uaed.insert(k);
        }
        std::size_t prev = 0;
        bool first = true;
        for (const auto& m : ex.members) {
            const auto idx = m.paragraph.index;
            REQUIRE(idx < labels.size());
            REQUIRE(m.paragraph.text == input[idx].paragraph.text);
            REQUIRE((first || idx > prev));
            first = false;
            prev = idx;
            if (m.reason == SelectionReason::UAED) {
                REQUIRE(labels[idx] == UAED);
            } else {
                REQUIRE(labels[idx] == PCI);
                REQUIRE(((idx > 0 && uaed.count(idx - 1)) || uaed.count(idx + 1)));
            }
        }
        std::size_t expected = uaed.size();
        for (std::size_t k = 0; k < labels.size(); ++k) {
            if (labels[k] == PCI && ((k > 0 && uaed.count(k - 1)) || uaed.count(k + 1))) ++expected;
        }
        REQUIRE(ex.members.size() == expected);

        const auto again = extract_rads_paragraphs("a", as_classified(ex));
        REQUIRE(members(again) == members(ex));
    }
}

TEST_CASE("excerpt json round trip") {
    const auto ex = extract_rads_paragraphs("app7", labelled({FPC, UAED, PCI}));
    const auto back = excerpt_from_json(excerpt_to_json(ex));
    CHECK(back.app_id == "app7");
    CHECK(members(back) == members(ex));
    CHECK(back.members[1].paragraph.text == "p2");
}

TEST_CASE("category labels parse from both spellings") {
    for (auto l : all_category_labels) CHECK(parse_category_label(to_string(l)) == l);
    CHECK(parse_category_label("User Access, Edit and Deletion") == UAED);
    CHECK_FALSE(parse_category_label("Unknown").has_value());
}

TEST_CASE("lexicon files are validated") {
    CHECK_THROWS_AS((void)parse_lexicon("[]"), DataError);
    CHECK_THROWS_AS((void)parse_lexicon(R"({"categories": {"Nope": [{"phrase": "x"}]}})"), DataError);
    const auto lex = parse_lexicon(R"({"categories": {"DataSecurity": [{"phrase": "vault", "weight": 2}]}})");
    CHECK(keyword_baseline_classify(para(0, "a vault"), lex) == CategoryLabel::DataSecurity);
}

TEST_CASE("exec classifier talks to a long-lived process") {
    auto c = make_classifier(
        "exec:while read -r line; do case \"$line\" in *copy*) printf 'UserAccessEditDeletion\\t0.9\\n';; "
        "*) echo PrivacyContactInformation;; esac; done");
    const auto a = classify_paragraph(para(0, "request a copy"), *c);
    CHECK(a.label == UAED);
    CHECK(a.score == doctest::Approx(0.9));
    const auto b = classify_paragraph(para(1, "email us\nplease"), *c);
    CHECK(b.label == PCI);
    CHECK(b.score == doctest::Approx(1.0));
}

TEST_CASE("exec classifier failures name the paragraph") {
    auto dead = make_classifier("exec:exit 0");
    CHECK_THROWS_WITH_AS((void)classify_paragraph(para(4, "text"), *dead),
                         doctest::Contains("paragraph 4"), ExternalError);
    auto bad = make_classifier("exec:while read -r l; do echo NotALabel; done");
    CHECK_THROWS_WITH_AS((void)classify_paragraph(para(2, "text"), *bad), doctest::Contains("paragraph 2"),
                         ExternalError);
    CHECK_THROWS_AS((void)make_classifier("magic"), UsageError);
}

TEST_CASE("remote classifier that is down names the paragraph") {
    auto c = make_classifier("http:http://127.0.0.1:9/classify");
    CHECK_THROWS_WITH_AS((void)classify_paragraph(para(6, "text"), *c), doctest::Contains("paragraph 6"),
                         ExternalError);
}

}
