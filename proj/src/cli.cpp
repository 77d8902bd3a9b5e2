#include "rads/cli.hpp"

#include "rads/capture_store.hpp"
#include "rads/completeness.hpp"
#include "rads/config.hpp"
#include "rads/copy_parser.hpp"
#include "rads/error.hpp"
#include "rads/ledger.hpp"
#include "rads/paragraph_extractor.hpp"
#include "rads/pipeline.hpp"
#include "rads/policy_ingest.hpp"
#include "rads/report.hpp"
#include "rads/rights_identifier.hpp"
#include "rads/util.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <iostream>

namespace rads {

namespace fs = std::filesystem;

namespace {

void emit(const std::string& out_path, const std::string& content, std::ostream& out) {
    if (out_path.empty() || out_path == "-") out << content;
    else write_file(out_path, content);
}

std::vector<fs::path> json_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<RadsFinding> load_gold(const fs::path& path) {
    const auto doc = nlohmann::json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded()) throw DataError("gold file is not valid JSON");
    const auto& list = doc.is_object() && doc.contains("findings") ? doc["findings"] : doc;
    if (!list.is_array()) throw DataError("gold file must hold a list of findings");
    std::vector<RadsFinding> out;
    for (const auto& f : list) out.push_back(finding_from_json(f.dump()));
    return out;
}

std::set<std::string> load_corpus(const fs::path& path) {
    std::set<std::string> apps;
    for (const auto& line : split(read_file(path), '\n')) {
        const auto t = trim(line);
        if (!t.empty() && t.front() != '#') apps.insert(std::string(t));
    }
    return apps;
}

Timestamp time_or_now(const std::string& s) { return s.empty() ? now_utc() : parse_timestamp(s); }

ReportFormat format_or_throw(const std::string& s) {
    const auto f = parse_report_format(s);
    if (!f) throw UsageError("format must be json or markdown");
    return *f;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Audit toolkit for access-right declarations, data copies and DSAR campaigns", "rads-checker"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "rads-checker 1.0");

    // ingest
    std::string source, app_id, out_path;
    int max_redirects = 5, timeout_s = 30;
    auto* ingest = app.add_subcommand("ingest", "Fetch a policy and store its plain text with paragraph spans");
    ingest->add_option("--source", source, "URL or local file")->required();
    ingest->add_option("--app-id", app_id, "App identifier")->required();
    ingest->add_option("--out", out_path, "Output directory")->required();
    ingest->add_option("--max-redirects", max_redirects)->capture_default_str();
    ingest->add_option("--timeout", timeout_s, "Seconds")->capture_default_str();

    // extract
    std::string doc_path, classifier = "builtin", lexicon_path;
    auto* extract = app.add_subcommand("extract", "Classify paragraphs and keep the access-right excerpt");
    extract->add_option("--doc", doc_path, "Document sidecar (.json) or text file")->required();
    extract->add_option("--classifier", classifier, "builtin | exec:<cmd> | http:<url>")->capture_default_str();
    extract->add_option("--lexicon", lexicon_path, "Lexicon JSON for the builtin classifier");
    extract->add_option("--out", out_path, "Excerpt JSON (stdout when omitted)");

    // identify
    std::string excerpt_path, llm_spec, prompt_path, translate_path;
    int attempts = 3;
    auto* identify_cmd = app.add_subcommand("identify", "Ask the model about the excerpt and classify the declaration");
    identify_cmd->add_option("--excerpt", excerpt_path)->required();
    identify_cmd->add_option("--llm", llm_spec, "mock:<replay-file> | http")->required();
    identify_cmd->add_option("--prompt", prompt_path, "Prompt template file");
    identify_cmd->add_option("--translate", translate_path, "JSON table for translating paragraphs first");
    identify_cmd->add_option("--attempts", attempts)->capture_default_str();
    identify_cmd->add_option("--out", out_path, "Finding JSON (stdout when omitted)");

    // evaluate
    std::string pred_dir, gold_path, json_out;
    auto* evaluate = app.add_subcommand("evaluate", "Score findings against labels");
    evaluate->add_option("--pred", pred_dir, "Directory of finding JSON files")->required();
    evaluate->add_option("--gold", gold_path, "Labelled findings (JSON list)")->required();
    evaluate->add_option("--out", json_out, "Also write the metrics as JSON");

    // parse-copy
    std::string in_path, format_s, orientation_s = "auto", dict_path, template_out;
    auto* parse_copy_cmd = app.add_subcommand("parse-copy", "Flatten a data copy and pick out sensitive categories");
    parse_copy_cmd->add_option("--in", in_path)->required();
    parse_copy_cmd->add_option("--format", format_s, "csv | json (detected when omitted)");
    parse_copy_cmd->add_option("--orientation", orientation_s, "auto | a | b")->capture_default_str();
    parse_copy_cmd->add_option("--dict", dict_path, "Descriptor dictionary (built-in when omitted)");
    parse_copy_cmd->add_option("--out", out_path, "Extraction JSON (stdout when omitted)");
    parse_copy_cmd->add_option("--template-out", template_out, "Where to write the manual-assist template");

    // ingest-capture
    int location_decimals = 4;
    long long session_seconds = -1;
    auto* ingest_capture = app.add_subcommand("ingest-capture", "Build a captured profile from a capture CSV");
    ingest_capture->add_option("--in", in_path)->required();
    ingest_capture->add_option("--app-id", app_id)->required();
    ingest_capture->add_option("--location-decimals", location_decimals)->capture_default_str();
    ingest_capture->add_option("--session-seconds", session_seconds, "How long the app was exercised while monitored")
        ->check(CLI::NonNegativeNumber);
    ingest_capture->add_option("--out", out_path, "Profile JSON (stdout when omitted)");

    // verify
    std::string profile_path, extraction_path;
    bool lenient_ip = false;
    auto* verify = app.add_subcommand("verify", "Compare a copy extraction with the captured profile");
    verify->add_option("--profile", profile_path)->required();
    verify->add_option("--extraction", extraction_path)->required();
    verify->add_option("--dict", dict_path, "Descriptor dictionary (built-in when omitted)");
    verify->add_option("--location-decimals", location_decimals)->capture_default_str();
    verify->add_flag("--lenient-ip", lenient_ip, "Accept IPv4 agreement on the /24 prefix");
    verify->add_option("--out", out_path, "Result JSON (stdout when omitted)");

    // aggregate
    std::string results_dir, findings_dir, ledger_path, market_id = "market", format = "json", horizon_s;
    double missing_low = 0.4, missing_high = 0.8;
    auto* aggregate = app.add_subcommand("aggregate", "Fold per-app results into a market report");
    aggregate->add_option("--results", results_dir, "Directory of completeness results")->required();
    aggregate->add_option("--findings", findings_dir, "Directory of findings");
    aggregate->add_option("--ledger", ledger_path, "Campaign ledger");
    aggregate->add_option("--market", market_id)->capture_default_str();
    aggregate->add_option("--horizon", horizon_s, "Feedback horizon (UTC timestamp)");
    aggregate->add_option("--missing-low", missing_low)->capture_default_str();
    aggregate->add_option("--missing-high", missing_high)->capture_default_str();
    aggregate->add_option("--format", format, "json | markdown")->capture_default_str();
    aggregate->add_option("--out", out_path, "Report file (stdout when omitted)");

    // ledger
    std::string corpus_path, method_s, right_s, at_s, notes, request_id, outcome_s, depth_s;
    bool immediate_view = false;
    auto* ledger = app.add_subcommand("ledger", "Record and summarise the DSAR campaign");
    ledger->add_option("--file", ledger_path, "Ledger file (JSON lines)")->required();
    ledger->add_option("--corpus", corpus_path, "File listing the app ids of the corpus, one per line");
    ledger->require_subcommand(1);
    auto* l_open = ledger->add_subcommand("open", "Open a request");
    l_open->add_option("--app", app_id)->required();
    l_open->add_option("--method", method_s, "email | settings | webform")->required();
    l_open->add_option("--right", right_s, "view | copy")->required();
    l_open->add_option("--at", at_s, "UTC timestamp (now when omitted)");
    l_open->add_option("--notes", notes);
    auto* l_feedback = ledger->add_subcommand("feedback", "Record the reply to a request");
    l_feedback->add_option("--id", request_id)->required();
    l_feedback->add_option("--outcome", outcome_s, "failure | view | copy")->required();
    l_feedback->add_option("--at", at_s, "UTC timestamp (now when omitted)");
    l_feedback->add_flag("--immediate-view", immediate_view, "Data was viewable at once in the app");
    l_feedback->add_option("--notes", notes);
    auto* l_depth = ledger->add_subcommand("ui-depth", "Record how deep the access setting sits");
    l_depth->add_option("--app", app_id)->required();
    l_depth->add_option("--depth", depth_s, "2..5 or NotFound")->required();
    l_depth->add_option("--at", at_s, "UTC timestamp (now when omitted)");
    auto* l_summary = ledger->add_subcommand("summary", "Authenticity, feedback and UI-depth tables");
    l_summary->add_option("--horizon", horizon_s, "Feedback horizon (UTC timestamp)");
    l_summary->add_option("--format", format, "json | markdown")->capture_default_str();
    l_summary->add_option("--out", out_path);

    // report
    std::string config_path, work_dir;
    auto* report = app.add_subcommand("report", "Run the whole pipeline from a config file");
    report->add_option("--config", config_path)->required();
    report->add_option("--market", market_id, "Overrides market_id");
    report->add_option("--llm", llm_spec, "Overrides llm.mode");
    report->add_option("--classifier", classifier, "Overrides classifier.backend");
    report->add_option("--work-dir", work_dir, "Overrides corpus.work_dir");
    report->add_option("--horizon", horizon_s, "Overrides feedback.horizon");
    report->add_flag("--lenient-ip", lenient_ip, "Overrides compare.lenient_ip");
    report->add_option("--format", format, "json | markdown")->capture_default_str();
    report->add_option("--out", out_path, "Report file (stdout when omitted)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : static_cast<int>(ExitCode::usage);
    }

    try {
        if (*ingest) {
            PolicyFetcher fetcher(1, FetchOptions{max_redirects, std::chrono::seconds(timeout_s)});
            const auto raw = fetcher.fetch(app_id, source);
            const auto doc = html_to_plaintext(raw);
            const auto sidecar = write_document(out_path, doc, raw);
            for (const auto& w : raw.warnings) err << "warning: " << w << "\n";
            out << sidecar.string() << "\n";
        } else if (*extract) {
            const auto lexicon = lexicon_path.empty() ? default_lexicon() : parse_lexicon(read_file(lexicon_path));
            auto backend = make_classifier(classifier, lexicon);
            const auto doc = read_document(doc_path);
            std::vector<ClassifiedParagraph> classified;
            for (const auto& p : segment_paragraphs(doc)) classified.push_back(classify_paragraph(p, *backend));
            emit(out_path, excerpt_to_json(extract_rads_paragraphs(doc.app_id, classified)), out);
        } else if (*identify_cmd) {
            RetryPolicy retry;
            retry.attempts = attempts;
            auto llm = make_llm(llm_spec, retry);
            auto excerpt = excerpt_from_json(read_file(excerpt_path));
            if (!translate_path.empty()) {
                std::map<std::string, std::string> table;
                for (const auto& [k, v] : nlohmann::json::parse(read_file(translate_path)).items())
                    table[k] = v.get<std::string>();
                TableTranslator translator(std::move(table));
                excerpt = translate_excerpt(excerpt, translator);
            }
            const auto tmpl = prompt_path.empty() ? default_prompt_template() : parse_prompt_template(read_file(prompt_path));
            emit(out_path, finding_to_json(identify(excerpt, *llm, tmpl)), out);
        } else if (*evaluate) {
            std::vector<RadsFinding> predicted;
            for (const auto& f : json_files(pred_dir)) predicted.push_back(finding_from_json(read_file(f)));
            const auto metrics = evaluate_classifier(predicted, load_gold(gold_path));
            out << metrics_to_text(metrics);
            if (!json_out.empty()) write_file(json_out, metrics_to_json(metrics));
        } else if (*parse_copy_cmd) {
            if (!fs::exists(in_path)) throw DataError("copy not found: " + in_path);
            const auto bytes = read_file(in_path);
            CopyFormat fmt;
            if (format_s.empty()) {
                fmt = detect_format(bytes, fs::path(in_path).extension().string());
            } else {
                const auto f = parse_copy_format(format_s);
                if (!f) throw UsageError("--format must be csv or json");
                fmt = *f;
            }
            const auto ori = parse_orientation(orientation_s);
            if (!ori) throw UsageError("--orientation must be auto, a or b");
            if (needs_manual_assist(fmt)) {
                const auto tpl = template_out.empty() ? in_path + ".manual.json" : template_out;
                write_file(tpl, manual_assist_template());
                err << to_string(fmt) << " copies are compared by hand. Fill in " << tpl
                    << " and run parse-copy on it.\n";
                emit(out_path, extraction_to_json({}), out);
            } else {
                const auto dict = dict_path.empty() ? default_descriptor_dictionary()
                                                    : parse_descriptor_dictionary(read_file(dict_path));
                emit(out_path, extraction_to_json(match_categories(parse_copy(bytes, fmt, {*ori, 0}), dict)), out);
            }
        } else if (*ingest_capture) {
            auto profile = build_profile(app_id, ingest_capture_csv(in_path), {location_decimals});
            if (session_seconds >= 0) profile.session_seconds = session_seconds;
            for (const auto& w : profile.warnings) err << "warning: " << w << "\n";
            emit(out_path, profile_to_json(profile), out);
        } else if (*verify) {
            const auto dict = dict_path.empty() ? default_descriptor_dictionary()
                                                : parse_descriptor_dictionary(read_file(dict_path));
            CompareOptions opts;
            opts.canonical.location_decimals = location_decimals;
            opts.lenient_ip = lenient_ip;
            const auto result = compare(profile_from_json(read_file(profile_path)),
                                        extraction_from_json(read_file(extraction_path)), dict, opts);
            if (result.no_collection) err << "warning: no collection observed for " << result.app_id << "\n";
            emit(out_path, result_to_json(result), out);
        } else if (*aggregate) {
            std::vector<AppCompletenessResult> results;
            for (const auto& f : json_files(results_dir)) results.push_back(result_from_json(read_file(f)));
            std::vector<RadsFinding> findings;
            if (!findings_dir.empty()) {
                for (const auto& f : json_files(findings_dir)) findings.push_back(finding_from_json(read_file(f)));
            }
            Ledger l(ledger_path.empty() ? fs::path{} : fs::path(ledger_path));
            std::optional<Timestamp> horizon;
            if (!horizon_s.empty()) horizon = parse_timestamp(horizon_s);
            const auto r = assemble_report(market_id, findings, l.requests(), l.ui_depths(), results, horizon, {},
                                           missing_low, missing_high);
            emit(out_path, emit_report(r, format_or_throw(format)), out);
        } else if (*ledger) {
            std::optional<std::set<std::string>> corpus;
            if (!corpus_path.empty()) corpus = load_corpus(corpus_path);
            Ledger l(ledger_path, corpus);
            if (*l_open) {
                const auto m = parse_method(method_s);
                const auto r = parse_right_requested(right_s);
                if (!m) throw UsageError("--method must be email, settings or webform");
                if (!r) throw UsageError("--right must be view or copy");
                out << l.open_request(app_id, *m, *r, time_or_now(at_s), notes).request_id << "\n";
            } else if (*l_feedback) {
                const auto o = parse_outcome(outcome_s);
                if (!o) throw UsageError("--outcome must be failure, view or copy");
                const auto req = l.record_feedback(request_id, time_or_now(at_s), *o, notes, immediate_view);
                out << req.request_id << " " << to_string(*req.outcome) << "\n";
            } else if (*l_depth) {
                std::optional<int> depth;
                if (!iequals(depth_s, "NotFound")) {
                    try {
                        depth = std::stoi(depth_s);
                    } catch (const std::exception&) {
                        throw UsageError("--depth must be 2..5 or NotFound");
                    }
                }
                const auto rec = l.record_ui_depth(app_id, depth, time_or_now(at_s));
                out << rec.app_id << " " << (rec.depth ? std::to_string(*rec.depth) : "NotFound") << "\n";
            } else if (*l_summary) {
                std::optional<Timestamp> horizon;
                if (!horizon_s.empty()) horizon = parse_timestamp(horizon_s);
                auto r = assemble_report("ledger", {}, l.requests(), l.ui_depths(), {}, horizon);
                r.notes.clear();
                emit(out_path, emit_report(r, format_or_throw(format)), out);
            }
        } else if (*report) {
            auto cfg = Config::load(config_path);
            if (report->count("--market")) cfg.set("market_id", market_id);
            if (report->count("--classifier")) cfg.set("classifier.backend", classifier);
            if (report->count("--horizon")) cfg.set("feedback.horizon", horizon_s);
            if (lenient_ip) cfg.set("compare.lenient_ip", "true");
            auto opts = options_from_config(cfg);
            if (report->count("--llm")) opts.llm = llm_spec;
            if (!work_dir.empty()) opts.work_dir = fs::path(work_dir);
            const auto fmt = format_or_throw(report->count("--format") ? format : cfg.get_or("output.format", format));
            const auto result = run_pipeline(opts);
            const auto dest = out_path.empty() ? cfg.get_path("output.path").value_or(fs::path{}).string() : out_path;
            emit(dest, emit_report(result.report, fmt), out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(e.code());
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed JSON input: " << e.what() << "\n";
        return static_cast<int>(ExitCode::data);
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::data);
    }
    return 0;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace rads
