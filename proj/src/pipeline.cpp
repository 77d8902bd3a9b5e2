#include "rads/pipeline.hpp"

#include "rads/error.hpp"
#include "rads/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace rads {

namespace fs = std::filesystem;

PipelineOptions options_from_config(const Config& cfg) {
    PipelineOptions o;
    o.market_id = cfg.get_or("market_id", o.market_id);
    o.policies_dir = cfg.get_path("corpus.policies").value_or(fs::path{});
    o.copies_dir = cfg.get_path("corpus.copies").value_or(fs::path{});
    o.captures_dir = cfg.get_path("corpus.captures").value_or(fs::path{});
    o.ledger_path = cfg.get_path("corpus.ledger").value_or(fs::path{});
    o.work_dir = cfg.get_path("corpus.work_dir");
    o.lexicon_path = cfg.get_path("data.lexicon");
    o.descriptors_path = cfg.get_path("data.descriptors");
    o.prompt_path = cfg.get_path("data.prompt");
    o.translation_table = cfg.get_path("data.translation_table");

    o.classifier = cfg.get_or("classifier.backend", o.classifier);
    if (auto mode = cfg.get("llm.mode")) {
        // a replay file named in the config resolves against the config directory
        if (mode->rfind("mock:", 0) == 0) {
            fs::path p(mode->substr(5));
            if (p.is_relative() && !cfg.base_dir().empty()) p = cfg.base_dir() / p;
            *mode = "mock:" + p.lexically_normal().string();
        }
        o.llm = *mode;
    }
    if (auto v = cfg.get_int("llm.attempts")) o.retry.attempts = static_cast<int>(*v);
    if (auto v = cfg.get_int("llm.initial_backoff_ms")) o.retry.initial_backoff = std::chrono::milliseconds(*v);
    if (auto v = cfg.get_double("llm.backoff_multiplier")) o.retry.multiplier = *v;
    if (auto v = cfg.get_int("llm.max_in_flight")) o.limits.max_in_flight = static_cast<int>(*v);
    if (auto v = cfg.get_int("llm.min_interval_ms")) o.limits.min_interval = std::chrono::milliseconds(*v);
    if (auto v = cfg.get_int("pipeline.workers")) o.workers = static_cast<int>(std::max(1LL, *v));

    if (auto v = cfg.get("copy.orientation")) {
        const auto ori = parse_orientation(*v);
        if (!ori) throw UsageError("copy.orientation must be auto, a or b");
        o.orientation = *ori;
    }
    if (auto v = cfg.get_bool("compare.lenient_ip")) o.compare.lenient_ip = *v;
    if (auto v = cfg.get_int("compare.location_decimals")) o.compare.canonical.location_decimals = static_cast<int>(*v);
    if (auto v = cfg.get_double("missing_rate.low")) o.missing_low = *v;
    if (auto v = cfg.get_double("missing_rate.high")) o.missing_high = *v;
    if (auto v = cfg.get("feedback.horizon")) o.horizon = parse_timestamp(*v);
    if (auto v = cfg.get_int("feedback.one_day_hours")) o.bounds.one_day = std::chrono::hours(*v);
    if (auto v = cfg.get_int("feedback.three_days_hours")) o.bounds.three_days = std::chrono::hours(*v);
    if (auto v = cfg.get_int("feedback.seven_days_hours")) o.bounds.seven_days = std::chrono::hours(*v);
    return o;
}

ComplianceReport assemble_report(const std::string& market_id, const std::vector<RadsFinding>& findings,
                                 const std::vector<AccessRequest>& requests,
                                 const std::map<std::string, UiDepthRecord>& ui_depths,
                                 const std::vector<AppCompletenessResult>& results, std::optional<Timestamp> horizon,
                                 const BucketBounds& bounds, double missing_low, double missing_high) {
    ComplianceReport r;
    r.market_id = market_id;
    r.rads = aggregate_rads(findings);
    r.methods = aggregate_methods(findings);
    if (r.methods.denominator == 0) r.notes.push_back("no app declares an access right; method shares are undefined");
    r.authenticity = authenticity_summary(requests);

    if (!horizon) {
        for (const auto& q : requests) {
            auto latest = q.feedback_at ? std::max(q.opened_at, *q.feedback_at) : q.opened_at;
            if (!horizon || latest > *horizon) horizon = latest;
        }
    }
    r.feedback_horizon = horizon;
    r.feedback = feedback_histogram(requests, horizon.value_or(Timestamp{}), bounds);
    r.ui_depth = ui_depth_histogram(ui_depths);
    r.consistency = aggregate_consistency(results);
    r.missing_rate = missing_rate_histogram(results, missing_low, missing_high);
    for (const auto& res : results) {
        if (res.no_collection) r.notes.push_back(res.app_id + ": no collection observed");
    }
    for (const auto& f : findings) {
        if (f.rights_class == RightsClass::DCAR && f.methods.empty())
            r.notes.push_back(f.app_id + ": DCAR declared, methods: none declared");
    }
    return r;
}

std::vector<fs::path> copy_files_for(const fs::path& dir, const std::string& app_id) {
    std::vector<fs::path> out;
    if (dir.empty() || !fs::is_directory(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().stem() == app_id) out.push_back(e.path());
    }
    const auto sub = dir / app_id;
    if (fs::is_directory(sub)) {
        for (const auto& e : fs::recursive_directory_iterator(sub)) {
            if (e.is_regular_file()) out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

CategoryExtraction extract_copies(const std::vector<fs::path>& files, const DescriptorDictionary& dict,
                                  Orientation orientation, std::vector<std::string>& notes) {
    CategoryExtraction all;
    for (const auto& f : files) {
        const auto bytes = read_file(f);
        const auto format = detect_format(bytes, f.extension().string());
        if (needs_manual_assist(format)) {
            notes.push_back(f.filename().string() + ": " + std::string(to_string(format)) +
                            " copy needs manual comparison");
            continue;
        }
        try {
            merge_extraction(all, match_categories(parse_copy(bytes, format, {orientation, 0}), dict));
        } catch (const Error& e) {
            throw DataError(f.filename().string() + ": " + e.what());
        }
    }
    return all;
}

namespace {

std::vector<std::pair<std::string, fs::path>> list_by_stem(const fs::path& dir, const std::set<std::string>& exts) {
    std::vector<std::pair<std::string, fs::path>> out;
    if (dir.empty()) return out;
    if (!fs::is_directory(dir)) throw DataError("corpus directory not found: " + dir.string());
    std::set<std::string> seen;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file() || !exts.count(to_lower(e.path().extension().string()))) continue;
        const auto stem = e.path().stem().string();
        if (!seen.insert(stem).second) throw DataError("two files for app " + stem + " in " + dir.string());
        out.emplace_back(stem, e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::map<std::string, std::string> load_translation_table(const fs::path& p) {
    const auto doc = nlohmann::json::parse(read_file(p), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw DataError("translation table must be a JSON object");
    std::map<std::string, std::string> table;
    for (const auto& [k, v] : doc.items()) table[k] = v.get<std::string>();
    return table;
}

}  // namespace

PipelineOutput run_pipeline(const PipelineOptions& opts) {
    if (opts.llm.empty()) throw UsageError("no LLM configured (llm.mode or --llm)");
    const auto lexicon = opts.lexicon_path ? parse_lexicon(read_file(*opts.lexicon_path)) : default_lexicon();
    const auto dict = opts.descriptors_path ? parse_descriptor_dictionary(read_file(*opts.descriptors_path))
                                            : default_descriptor_dictionary();
    const auto tmpl = opts.prompt_path ? parse_prompt_template(read_file(*opts.prompt_path)) : default_prompt_template();
    std::unique_ptr<Translator> translator;
    if (opts.translation_table) translator = std::make_unique<TableTranslator>(load_translation_table(*opts.translation_table));
    else translator = std::make_unique<IdentityTranslator>();

    const auto policies = list_by_stem(opts.policies_dir, {".html", ".htm", ".txt", ".md"});
    auto classifier = make_classifier(opts.classifier, lexicon);
    auto llm = make_llm(opts.llm, opts.retry, opts.limits);
    if (opts.work_dir) fs::create_directories(*opts.work_dir);

    std::vector<std::optional<RadsFinding>> slots(policies.size());
    std::vector<std::string> skip_notes(policies.size());
    std::vector<std::exception_ptr> errors(policies.size());
    std::mutex translate_mutex;
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < policies.size(); i = next++) {
            const auto& [app, path] = policies[i];
            try {
                const auto doc = html_to_plaintext(fetch_policy(app, path.string()));
                std::vector<ClassifiedParagraph> classified;
                for (const auto& p : segment_paragraphs(doc)) classified.push_back(classify_paragraph(p, *classifier));
                auto excerpt = extract_rads_paragraphs(app, classified);
                {
                    std::lock_guard lock(translate_mutex);
                    excerpt = translate_excerpt(excerpt, *translator);
                }
                slots[i] = identify(excerpt, *llm, tmpl);
                if (opts.work_dir) {
                    write_file(*opts.work_dir / "excerpts" / (app + ".json"), excerpt_to_json(excerpt));
                    write_file(*opts.work_dir / "findings" / (app + ".json"), finding_to_json(*slots[i]));
                }
            } catch (const DataError& e) {
                skip_notes[i] = app + ": policy skipped: " + e.what();
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const auto n = std::clamp<std::size_t>(static_cast<std::size_t>(opts.workers), 1, std::max<std::size_t>(1, policies.size()));
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    PipelineOutput out;
    std::vector<std::string> notes;
    for (std::size_t i = 0; i < policies.size(); ++i) {
        if (slots[i]) out.findings.push_back(*slots[i]);
        if (!skip_notes[i].empty()) notes.push_back(skip_notes[i]);
    }

    for (const auto& [app, capture] : list_by_stem(opts.captures_dir, {".csv"})) {
        const auto profile = build_profile(app, ingest_capture_csv(capture), opts.compare.canonical);
        const auto extraction = extract_copies(copy_files_for(opts.copies_dir, app), dict, opts.orientation, notes);
        out.results.push_back(compare(profile, extraction, dict, opts.compare));
        if (opts.work_dir) {
            write_file(*opts.work_dir / "profiles" / (app + ".json"), profile_to_json(profile));
            write_file(*opts.work_dir / "extractions" / (app + ".json"), extraction_to_json(extraction));
            write_file(*opts.work_dir / "results" / (app + ".json"), result_to_json(out.results.back()));
        }
    }

    Ledger ledger(opts.ledger_path.empty() || !fs::exists(opts.ledger_path) ? fs::path{} : opts.ledger_path);
    out.report = assemble_report(opts.market_id, out.findings, ledger.requests(), ledger.ui_depths(), out.results,
                                 opts.horizon, opts.bounds, opts.missing_low, opts.missing_high);
    out.report.notes.insert(out.report.notes.begin(), notes.begin(), notes.end());
    return out;
}

}  // namespace rads
