#include "rads/report.hpp"

#include "rads/error.hpp"

#include <json.hpp>

#include <cstdio>

namespace rads {

using ordered_json = nlohmann::ordered_json;

std::string Proportion::text() const {
    const auto frac = " (" + std::to_string(count) + "/" + std::to_string(denominator) + ")";
    return defined() ? format_percent(hundredths()) + frac : "n/a" + frac;
}

RadsProportions aggregate_rads(const std::vector<RadsFinding>& findings) {
    RadsProportions p;
    p.total = static_cast<long long>(findings.size());
    for (const auto& f : findings) {
        if (f.rights_class == RightsClass::VDAR) ++p.vdar.count;
        else if (f.rights_class == RightsClass::DCAR) ++p.dcar.count;
        else ++p.none.count;
    }
    p.vdar.denominator = p.dcar.denominator = p.none.denominator = p.total;
    return p;
}

MethodProportions aggregate_methods(const std::vector<RadsFinding>& findings) {
    MethodProportions p;
    for (const auto& f : findings) {
        if (f.rights_class != RightsClass::None) ++p.denominator;
    }
    for (auto m : all_methods) p.per_method[m] = Proportion{0, p.denominator};
    for (const auto& f : findings) {
        if (f.rights_class == RightsClass::None) continue;
        for (auto m : f.methods) ++p.per_method[m].count;
    }
    return p;
}

ComplianceReport empty_report(const std::string& market_id) {
    ComplianceReport r;
    r.market_id = market_id;
    r.methods = aggregate_methods({});
    r.authenticity = authenticity_summary({});
    r.feedback = feedback_histogram({}, Timestamp{});
    r.ui_depth = ui_depth_histogram({});
    r.consistency = aggregate_consistency({});
    return r;
}

std::optional<ReportFormat> parse_report_format(std::string_view s) {
    const auto l = to_lower(trim(s));
    if (l == "json") return ReportFormat::Json;
    if (l == "markdown" || l == "md") return ReportFormat::Markdown;
    return std::nullopt;
}

namespace {

std::string depth_key(const std::optional<int>& d) { return d ? std::to_string(*d) : "NotFound"; }

std::string threshold_label(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g%%", t * 100.0);
    return buf;
}

struct MissingRow {
    std::string label;
    Proportion p;
};

std::vector<MissingRow> missing_rows(const MissingRateHistogram& h) {
    const auto d = h.defined();
    const auto lo = threshold_label(h.low_threshold), hi = threshold_label(h.high_threshold);
    return {
        {"= 0%", {h.complete, d}},
        {"(0%, " + lo + "]", {h.low, d}},
        {"(" + lo + ", " + hi + "]", {h.mid, d}},
        {"> " + hi, {h.high, d}},
        {"exceeding " + lo, {h.exceeding_low(), d}},
        {"exceeding " + hi, {h.exceeding_high(), d}},
    };
}

long long sum_values(const auto& m) {
    long long n = 0;
    for (const auto& [k, v] : m) n += v;
    return n;
}

ordered_json prop_json(const Proportion& p) {
    return {{"count", p.count},
            {"denominator", p.denominator},
            {"percent", p.defined() ? ordered_json(static_cast<double>(p.hundredths()) / 100.0) : ordered_json(nullptr)},
            {"text", p.text()}};
}

Proportion prop_from(const nlohmann::json& j) {
    return {j.at("count").get<long long>(), j.at("denominator").get<long long>()};
}

ordered_json to_json(const ComplianceReport& r) {
    ordered_json doc;
    doc["market_id"] = r.market_id;
    doc["app_count"] = r.rads.total;

    doc["rads"] = {{"VDAR", prop_json(r.rads.vdar)}, {"DCAR", prop_json(r.rads.dcar)}, {"None", prop_json(r.rads.none)}};

    ordered_json methods = {{"denominator", r.methods.denominator}};
    for (const auto& [m, p] : r.methods.per_method) methods[std::string(to_string(m))] = prop_json(p);
    doc["methods"] = methods;

    ordered_json auth = ordered_json::object();
    for (const auto& row : r.authenticity) {
        const auto t = row.total();
        auth[std::string(to_string(row.method))] = {{"Failure", prop_json({row.failure, t})},
                                                    {"ViewInformation", prop_json({row.view, t})},
                                                    {"ObtainDataCopy", prop_json({row.copy, t})}};
    }
    doc["authenticity"] = auth;

    const auto fb_total = sum_values(r.feedback);
    ordered_json buckets = ordered_json::object();
    for (const auto& [b, n] : r.feedback) buckets[std::string(to_string(b))] = prop_json({n, fb_total});
    doc["feedback"] = {
        {"horizon", r.feedback_horizon ? ordered_json(format_timestamp(*r.feedback_horizon)) : ordered_json(nullptr)},
        {"buckets", buckets}};

    const auto ui_total = sum_values(r.ui_depth);
    ordered_json ui = ordered_json::object();
    for (const auto& [d, n] : r.ui_depth) {
        if (d) ui[depth_key(d)] = prop_json({n, ui_total});
    }
    if (const auto it = r.ui_depth.find(std::nullopt); it != r.ui_depth.end())
        ui["NotFound"] = prop_json({it->second, ui_total});
    doc["ui_depth"] = ui;

    ordered_json cons = ordered_json::object();
    for (const auto& row : r.consistency) cons[std::string(to_string(row.category))] = prop_json({row.matched, row.collected});
    doc["consistency"] = cons;

    ordered_json mr = {{"low_threshold", r.missing_rate.low_threshold},
                       {"high_threshold", r.missing_rate.high_threshold},
                       {"undefined", r.missing_rate.undefined}};
    ordered_json rows = ordered_json::object();
    for (const auto& row : missing_rows(r.missing_rate)) rows[row.label] = prop_json(row.p);
    mr["buckets"] = rows;
    doc["missing_rate"] = mr;

    doc["notes"] = r.notes;
    return doc;
}

void table(std::string& out, const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    auto line = [&](const std::vector<std::string>& cells) {
        out += "|";
        for (const auto& c : cells) out += " " + c + " |";
        out += "\n";
    };
    line(header);
    out += "|";
    for (std::size_t i = 0; i < header.size(); ++i) out += "---|";
    out += "\n";
    for (const auto& r : rows) line(r);
    out += "\n";
}

std::string to_markdown(const ComplianceReport& r) {
    std::string out = "# Compliance report: " + r.market_id + "\n\n";
    out += "Apps analysed: " + std::to_string(r.rads.total) + "\n\n";

    out += "## Access-right declarations\n\n";
    table(out, {"Class", "Share"},
          {{"VDAR", r.rads.vdar.text()}, {"DCAR", r.rads.dcar.text()}, {"None", r.rads.none.text()}});

    out += "## Implementation methods\n\nDenominator: apps declaring an access right (" +
           std::to_string(r.methods.denominator) + "). Methods are not exclusive.\n\n";
    std::vector<std::vector<std::string>> rows;
    for (const auto& [m, p] : r.methods.per_method) rows.push_back({std::string(to_string(m)), p.text()});
    table(out, {"Method", "Share"}, rows);

    out += "## Authenticity of implementation methods\n\n";
    rows.clear();
    for (const auto& row : r.authenticity) {
        const auto t = row.total();
        rows.push_back({std::string(to_string(row.method)), Proportion{row.failure, t}.text(),
                        Proportion{row.view, t}.text(), Proportion{row.copy, t}.text()});
    }
    table(out, {"Method", "Failure", "View Information", "Obtain Data Copy"}, rows);

    out += "## Feedback duration\n\nHorizon: " +
           (r.feedback_horizon ? format_timestamp(*r.feedback_horizon) : std::string("none")) + "\n\n";
    rows.clear();
    const auto fb_total = sum_values(r.feedback);
    for (const auto& [b, n] : r.feedback) rows.push_back({std::string(to_string(b)), Proportion{n, fb_total}.text()});
    table(out, {"Bucket", "Share"}, rows);

    out += "## UI depth\n\n";
    rows.clear();
    const auto ui_total = sum_values(r.ui_depth);
    for (const auto& [d, n] : r.ui_depth) {
        if (d) rows.push_back({depth_key(d), Proportion{n, ui_total}.text()});
    }
    if (const auto it = r.ui_depth.find(std::nullopt); it != r.ui_depth.end())
        rows.push_back({"NotFound", Proportion{it->second, ui_total}.text()});
    table(out, {"Depth", "Share"}, rows);

    out += "## Copy consistency per category\n\n";
    rows.clear();
    for (const auto& row : r.consistency)
        rows.push_back({std::string(display_name(row.category)), Proportion{row.matched, row.collected}.text()});
    table(out, {"Category", "Consistent"}, rows);

    out += "## Missing rate\n\nUndefined (nothing collected): " + std::to_string(r.missing_rate.undefined) + "\n\n";
    rows.clear();
    for (const auto& row : missing_rows(r.missing_rate)) rows.push_back({row.label, row.p.text()});
    table(out, {"Missing rate", "Share"}, rows);

    if (!r.notes.empty()) {
        out += "## Notes\n\n";
        for (const auto& n : r.notes) out += "- " + n + "\n";
        out += "\n";
    }
    return out;
}

}  // namespace

std::string emit_report(const ComplianceReport& report, ReportFormat format) {
    if (format == ReportFormat::Markdown) return to_markdown(report);
    return to_json(report).dump(2) + "\n";
}

ComplianceReport report_from_json(std::string_view text) {
    const auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw DataError("report must be a JSON object");
    ComplianceReport r;
    try {
        r.market_id = doc.at("market_id").get<std::string>();
        r.rads.total = doc.at("app_count").get<long long>();
        r.rads.vdar = prop_from(doc.at("rads").at("VDAR"));
        r.rads.dcar = prop_from(doc.at("rads").at("DCAR"));
        r.rads.none = prop_from(doc.at("rads").at("None"));

        const auto& methods = doc.at("methods");
        r.methods.denominator = methods.at("denominator").get<long long>();
        for (auto m : all_methods) r.methods.per_method[m] = prop_from(methods.at(std::string(to_string(m))));

        for (auto m : all_methods) {
            const auto& row = doc.at("authenticity").at(std::string(to_string(m)));
            r.authenticity.push_back({m, row.at("Failure").at("count").get<long long>(),
                                      row.at("ViewInformation").at("count").get<long long>(),
                                      row.at("ObtainDataCopy").at("count").get<long long>()});
        }

        const auto& fb = doc.at("feedback");
        if (!fb.at("horizon").is_null()) r.feedback_horizon = parse_timestamp(fb.at("horizon").get<std::string>());
        for (auto b : all_feedback_buckets) r.feedback[b] = fb.at("buckets").at(std::string(to_string(b))).at("count");

        for (const auto& [k, v] : doc.at("ui_depth").items()) {
            const std::optional<int> d = k == "NotFound" ? std::nullopt : std::optional<int>(std::stoi(k));
            r.ui_depth[d] = v.at("count").get<long long>();
        }

        for (auto c : all_data_categories) {
            const auto p = prop_from(doc.at("consistency").at(std::string(to_string(c))));
            r.consistency.push_back({c, p.count, p.denominator});
        }

        const auto& mr = doc.at("missing_rate");
        r.missing_rate.low_threshold = mr.at("low_threshold").get<double>();
        r.missing_rate.high_threshold = mr.at("high_threshold").get<double>();
        r.missing_rate.undefined = mr.at("undefined").get<long long>();
        const auto rows = missing_rows(r.missing_rate);
        const auto& b = mr.at("buckets");
        r.missing_rate.complete = b.at(rows[0].label).at("count").get<long long>();
        r.missing_rate.low = b.at(rows[1].label).at("count").get<long long>();
        r.missing_rate.mid = b.at(rows[2].label).at("count").get<long long>();
        r.missing_rate.high = b.at(rows[3].label).at("count").get<long long>();

        r.notes = doc.value("notes", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed report: ") + e.what());
    } catch (const std::logic_error& e) {
        throw DataError(std::string("malformed report: ") + e.what());
    }
    return r;
}

}  // namespace rads
