#include "generators.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include "rads/copy_parser.hpp"
#include "rads/error.hpp"

#include <doctest.h>
#include <json.hpp>

#include <set>

using namespace rads;

namespace {

FlatRecord record(std::initializer_list<std::pair<std::string, std::vector<std::string>>> entries) {
    FlatRecord r;
    for (const auto& [d, vs] : entries) {
        for (const auto& v : vs) r.add(d, v);
    }
    return r;
}

std::set<DataCategory> categories(const CategoryExtraction& ex) {
    std::set<DataCategory> out;
    for (const auto& [c, v] : ex) out.insert(c);
    return out;
}

}  // namespace

TEST_SUITE("copy_parser") {

TEST_CASE("format detection") {
    CHECK(detect_format(std::string_view("{\"a\": 1}"), "json") == CopyFormat::JSON);
    CHECK(detect_format(std::string_view("{\"a\": 1}"), ".JSON") == CopyFormat::JSON);
    CHECK(detect_format(std::string_view("name,value\nip,1.2.3.4\nssid,home\n"), "") == CopyFormat::CSV);
    CHECK(detect_format(std::string_view("name;value\nip;1.2.3.4\n"), "") == CopyFormat::CSV);
    CHECK(detect_format(std::string_view("[1, 2]"), "") == CopyFormat::JSON);
    CHECK(detect_format(std::string_view("<!DOCTYPE html><html></html>"), "") == CopyFormat::HTML);
    CHECK(detect_format(std::string_view("%PDF-1.7 ..."), "") == CopyFormat::PDF);
    CHECK(detect_format(std::string_view("Your data: nothing much."), "") == CopyFormat::TXT);
    CHECK(detect_format(std::string_view("a,b\nc\n"), "") == CopyFormat::TXT);
    CHECK_THROWS_AS((void)detect_format(std::string_view(""), "json"), DataError);
    CHECK_THROWS_AS((void)detect_format(std::string_view(" \n "), ""), DataError);
    CHECK(needs_manual_assist(CopyFormat::HTML));
    CHECK(needs_manual_assist(CopyFormat::TXT));
    CHECK(needs_manual_assist(CopyFormat::PDF));
    CHECK_FALSE(needs_manual_assist(CopyFormat::CSV));
}

TEST_CASE("csv copy in both orientations") {
    const auto a = parse_csv_copy("IP Address,Location\n1.2.3.4,\"48.1,11.5\"\n");
    CHECK(a == record({{"IP Address", {"1.2.3.4"}}, {"Location", {"48.1,11.5"}}}));
    const auto b = parse_csv_copy("IP Address,1.2.3.4\nLocation,\"48.1,11.5\"\n");
    CHECK(b == a);
    CHECK(parse_csv_copy("IP Address,Location\n").empty());
}

TEST_CASE("csv copies accumulate repeated rows and skip blanks") {
    const auto a = parse_csv_copy("ip;ssid\n1.1.1.1;home\n;\n2.2.2.2;\n", {Orientation::A, 0});
    CHECK(a == record({{"ip", {"1.1.1.1", "2.2.2.2"}}, {"ssid", {"home"}}}));
    const auto b = parse_csv_copy("field,value\nIP,1.1.1.1\nIP,2.2.2.2\n", {Orientation::B, 0});
    CHECK(b == record({{"field", {"value"}}, {"IP", {"1.1.1.1", "2.2.2.2"}}}));
}

TEST_CASE("orientation guessing") {
    CHECK(guess_orientation({{"IP Address", "Location"}, {"1.2.3.4", "48.1"}}) == Orientation::A);
    CHECK(guess_orientation({{"IP Address", "1.2.3.4"}, {"Android ID", "0123"}}) == Orientation::B);
    CHECK(guess_orientation({{"a", "b", "c"}, {"1", "2", "3"}}) == Orientation::A);
    CHECK(guess_orientation({{"only"}}) == Orientation::A);
    CHECK_THROWS_AS((void)guess_orientation({{"Name", "SSID"}, {"home", "office"}}), UsageError);
    CHECK_THROWS_AS((void)parse_csv_copy("Name,SSID\nhome,office\n"), UsageError);
    CHECK(parse_csv_copy("Name,SSID\nhome,office\n", {Orientation::A, 0}) ==
          record({{"Name", {"home"}}, {"SSID", {"office"}}}));
}

TEST_CASE("ragged csv rows are rejected") {
    CHECK_THROWS_WITH_AS((void)parse_csv_copy("a,b,c\n1,2,3,4\n", {Orientation::A, 0}),
                         doctest::Contains("ragged"), DataError);
    CHECK_NOTHROW((void)parse_csv_copy("a,b,c\n1,2,3,\n", {Orientation::A, 0}));
}

TEST_CASE("json flattening examples") {
    CHECK(parse_json_copy(R"({"device":{"ip":"1.2.3.4"}})") == record({{"device.ip", {"1.2.3.4"}}}));
    CHECK(parse_json_copy(R"({"sessions":[{"ip":"a"},{"ip":"b"}]})") ==
          record({{"sessions.0.ip", {"a"}}, {"sessions.1.ip", {"b"}}}));
    CHECK(parse_json_copy("{}").empty());
    CHECK(parse_json_copy(R"({"n": 48.5, "ok": true, "gone": null, "e": [], "o": {}, "i": -3})") ==
          record({{"n", {"48.5"}}, {"ok", {"true"}}, {"i", {"-3"}}}));
    CHECK_THROWS_AS((void)parse_json_copy("{not json"), DataError);
}

TEST_CASE("dots and backslashes in keys are escaped") {
    const auto r = parse_json_copy(R"({"a.b": {"c": 1}, "a": {"b.c": 2}, "x\\y": 3})");
    CHECK(r == record({{"a\\.b.c", {"1"}}, {"a.b\\.c", {"2"}}, {"x\\\\y", {"3"}}}));
    CHECK(split_description("a\\.b.c") == std::vector<std::string>{"a.b", "c"});
    CHECK(split_description("x\\\\y") == std::vector<std::string>{"x\\y"});
    CHECK(escape_key_segment("a.b\\") == "a\\.b\\\\");
}

TEST_CASE("an empty key under the root does not collide with a sibling") {
    const auto r = parse_json_copy(R"({"": {"a": 1}, "a": 2})");
    CHECK(r == record({{".a", {"1"}}, {"a", {"2"}}}));
    CHECK(split_description(".a") == std::vector<std::string>{"", "a"});
}

TEST_CASE("flattening conserves leaves and keeps keys unique on random documents") {
    gen::Rng rng(41);
    for (int i = 0; i < 300; ++i) {
        const auto doc = gen::random_document(rng);
        const auto rec = parse_json_copy(doc.dump());
        REQUIRE(rec.value_count() == oracle::count_leaves(doc));
        REQUIRE(rec.size() == rec.value_count());
        for (const auto& [desc, values] : rec.entries()) {
            const auto* leaf = oracle::walk(doc, split_description(desc));
            REQUIRE(leaf != nullptr);
            REQUIRE(values.size() == 1);
            REQUIRE(values[0] == (leaf->is_string() ? leaf->get<std::string>() : leaf->dump()));
        }
    }
}

TEST_CASE("csv orientation invariance on random tables") {
    gen::Rng rng(43);
    for (int i = 0; i < 200; ++i) {
        const auto table = gen::random_table(rng);
        const auto a = parse_csv_copy(gen::to_csv(table), {Orientation::A, ','});
        const auto b = parse_csv_copy(gen::to_csv(gen::transpose(table)), {Orientation::B, ','});
        REQUIRE(a == b);
        const auto semi_a = parse_csv_copy(gen::to_csv(table, ';'), {Orientation::A, ';'});
        REQUIRE(semi_a == a);
    }
}

TEST_CASE("descriptor matching examples") {
    const auto& dict = default_descriptor_dictionary();
    const auto ip = match_categories(record({{"sessions.0.ip_address", {"1.2.3.4"}}}), dict);
    REQUIRE(ip.count(DataCategory::IPAddress));
    CHECK(ip.at(DataCategory::IPAddress) == std::vector<ExtractedValue>{{"sessions.0.ip_address", "1.2.3.4"}});

    const auto loc = match_categories(record({{"profile.latitude", {"48.1"}}, {"profile.longitude", {"11.5"}}}), dict);
    REQUIRE(loc.count(DataCategory::Location));
    CHECK(loc.at(DataCategory::Location) ==
          std::vector<ExtractedValue>{{"profile.latitude", "48.1"}, {"profile.longitude", "11.5"}});

    CHECK(match_categories(FlatRecord{}, dict).empty());
}

TEST_CASE("default dictionary covers every category with synonyms") {
    const auto& dict = default_descriptor_dictionary();
    for (auto c : all_data_categories) {
        REQUIRE(dict.patterns.count(c));
        CHECK_FALSE(dict.patterns.at(c).empty());
    }
    const std::vector<std::pair<std::string, DataCategory>> samples{
        {"IP Address", DataCategory::IPAddress},     {"client_ip", DataCategory::IPAddress},
        {"network type", DataCategory::NetType},     {"wifi_ssid", DataCategory::SSID},
        {"Android ID", DataCategory::AndroidID},     {"ssaid", DataCategory::AndroidID},
        {"oaid", DataCategory::OAID},                {"Advertising ID", DataCategory::AAID},
        {"vaid", DataCategory::VAID},                {"MCC/MNC", DataCategory::MccMnc},
        {"mobile country code", DataCategory::MccMnc}, {"SIM country code", DataCategory::SimCountryCode},
        {"Location", DataCategory::Location},        {"Longitude", DataCategory::Location},
        {"Latitude", DataCategory::Location},
    };
    for (const auto& [desc, cat] : samples) {
        INFO(desc);
        CHECK(dict.matches(cat, split_description(desc)));
    }
    CHECK_FALSE(dict.matches(DataCategory::IPAddress, {"description"}));
    CHECK_FALSE(dict.matches(DataCategory::Location, {"relationship"}));
}

TEST_CASE("every match satisfies a pattern and matching is monotone") {
    const auto& dict = default_descriptor_dictionary();
    const std::vector<std::string> descs{"ip", "device.ip_address", "ssid", "wifi.bssid", "android_id", "oaid",
                                         "gaid",  "vaid", "mcc", "sim.country", "location.lat", "profile.longitude",
                                         "name", "email", "net_type", "carrier.mnc", "x.y.z"};
    gen::Rng rng(47);
    for (int i = 0; i < 200; ++i) {
        FlatRecord rec;
        for (auto n = gen::pick(rng, 6); n > 0; --n) rec.add(gen::choose(rng, descs), "v" + std::to_string(gen::pick(rng, 5)));
        const auto before = match_categories(rec, dict);
        for (const auto& [cat, values] : before) {
            for (const auto& v : values) REQUIRE(dict.matches(cat, split_description(v.description)));
        }
        auto bigger = rec;
        bigger.add(gen::choose(rng, descs), "extra");
        const auto after = match_categories(bigger, dict);
        for (const auto& [cat, values] : before) {
            REQUIRE(after.count(cat));
            for (const auto& v : values) {
                REQUIRE(std::find(after.at(cat).begin(), after.at(cat).end(), v) != after.at(cat).end());
            }
        }
    }
}

TEST_CASE("descriptor dictionaries are validated") {
    CHECK_THROWS_AS((void)parse_descriptor_dictionary(R"({"categories": {"FOO": ["x"]}})"), DataError);
    CHECK_THROWS_AS((void)parse_descriptor_dictionary(R"({"categories": {"SSID": ["("]}})"), DataError);
    CHECK_THROWS_AS((void)parse_descriptor_dictionary(R"({"categories": {"SSID": ["ssid"]}})"), DataError);
}

TEST_CASE("extraction merge and json round trip") {
    CategoryExtraction a{{DataCategory::SSID, {{"ssid", "home"}}}};
    const CategoryExtraction b{{DataCategory::SSID, {{"ssid", "home"}, {"wifi", "work"}}},
                               {DataCategory::IPAddress, {{"ip", "1.2.3.4"}}}};
    merge_extraction(a, b);
    CHECK(a.at(DataCategory::SSID) == std::vector<ExtractedValue>{{"ssid", "home"}, {"wifi", "work"}});
    CHECK(categories(a) == std::set<DataCategory>{DataCategory::IPAddress, DataCategory::SSID});
    CHECK(extraction_from_json(extraction_to_json(a)) == a);
}

TEST_CASE("manual-assist template is itself a parseable copy") {
    const auto tmpl = manual_assist_template();
    CHECK(parse_json_copy(tmpl).empty());
    auto doc = nlohmann::ordered_json::parse(tmpl);
    doc["ip_address"].push_back("1.2.3.4");
    doc["ssid"].push_back("home");
    const auto ex = match_categories(parse_json_copy(doc.dump()), default_descriptor_dictionary());
    CHECK(ex.count(DataCategory::IPAddress));
    CHECK(ex.count(DataCategory::SSID));
    CHECK_THROWS_AS((void)parse_copy("<html></html>", CopyFormat::HTML), UsageError);
}

}
