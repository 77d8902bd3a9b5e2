#include "support.hpp"

#include "rads/cli.hpp"
#include "rads/rights_identifier.hpp"
#include "rads/util.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sstream>

using namespace rads;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 1") {
    CHECK(cli({}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
    CHECK(cli({"parse-copy"}).code == 1);
    CHECK(cli({"ledger", "--file", "x.jsonl", "open", "--app", "a", "--method", "fax", "--right", "copy"}).code == 1);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("bad input data exits with 2") {
    test::TempDir dir;
    const auto missing = cli({"parse-copy", "--in", (dir / "nope.json").string()});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("error:") != std::string::npos);
    const auto bad = dir.write("bad.json", "{\"a\": ");
    CHECK(cli({"parse-copy", "--in", bad.string(), "--format", "json"}).code == 2);
}

TEST_CASE("policy to finding through the command line") {
    test::TempDir dir;
    const auto ingest = cli({"ingest", "--source", test::fixture("corpus/policies/app01.html").string(), "--app-id",
                             "app01", "--out", (dir / "docs").string()});
    REQUIRE(ingest.code == 0);
    const auto sidecar = first_line(ingest.out);
    CHECK(std::filesystem::exists(sidecar));

    const auto excerpt = dir / "excerpt.json";
    REQUIRE(cli({"extract", "--doc", sidecar, "--out", excerpt.string()}).code == 0);
    CHECK_FALSE(nlohmann::json::parse(read_file(excerpt))["members"].empty());

    const auto replies = dir.write("replies.json", R"({"replies": {
        "app01": "{\"a1\": {\"Right\": 1, \"Methods\": [1]}, \"a2\": {\"Right\": 0, \"Methods\": []}}"}})");
    const auto finding = dir / "pred" / "app01.json";
    const auto id = cli({"identify", "--excerpt", excerpt.string(), "--llm", "mock:" + replies.string(), "--out",
                         finding.string()});
    REQUIRE(id.code == 0);
    const auto f = finding_from_json(read_file(finding));
    CHECK(f.rights_class == RightsClass::DCAR);
    CHECK(f.methods == std::set<MethodKind>{MethodKind::EmailContact});

    const auto fatal = dir.write("fatal.json", R"({"replies": {"app01": {"error": "fatal"}}})");
    const auto ext = cli({"identify", "--excerpt", excerpt.string(), "--llm", "mock:" + fatal.string()});
    CHECK(ext.code == 3);
    CHECK(ext.err.find("error:") != std::string::npos);

    const auto flaky = dir.write("flaky.json", R"({"replies": {"app01": [{"error": "transient"}, {"error": "transient"},
        "{\"a1\": {\"Right\": 0, \"Methods\": []}, \"a2\": {\"Right\": 0, \"Methods\": []}}"]}})");
    CHECK(cli({"identify", "--excerpt", excerpt.string(), "--llm", "mock:" + flaky.string(), "--attempts", "2"}).code ==
          3);
    const auto ok = cli({"identify", "--excerpt", excerpt.string(), "--llm", "mock:" + flaky.string()});
    CHECK(ok.code == 0);
    CHECK(finding_from_json(ok.out).rights_class == RightsClass::None);

    const auto gold = dir.write("gold.json", R"([{"app_id": "app01", "rights_class": "DCAR", "methods": ["EmailContact"]}])");
    const auto metrics = dir / "metrics.json";
    const auto eval = cli({"evaluate", "--pred", (dir / "pred").string(), "--gold", gold.string(), "--out",
                           metrics.string()});
    REQUIRE(eval.code == 0);
    CHECK(eval.out.find("100.00%") != std::string::npos);
    const auto m = nlohmann::json::parse(read_file(metrics));
    CHECK(m["targets"][1]["target"] == "DCAR");
    CHECK(m["targets"][1]["tp"] == 1);
}

TEST_CASE("evaluation against the fixture labels") {
    test::TempDir dir;
    const auto gold = nlohmann::json::parse(read_file(test::fixture("corpus/gold.json")));
    for (const auto& g : gold) dir.write("pred/" + g["app_id"].get<std::string>() + ".json", g.dump());
    const auto eval = cli({"evaluate", "--pred", (dir / "pred").string(), "--gold",
                           test::fixture("corpus/gold.json").string()});
    CHECK(eval.code == 0);
    dir.write("pred/extra.json", R"({"app_id": "zzz", "rights_class": "None", "methods": []})");
    CHECK(cli({"evaluate", "--pred", (dir / "pred").string(), "--gold", test::fixture("corpus/gold.json").string()})
              .code == 2);
}

TEST_CASE("data copies and captures through the command line") {
    test::TempDir dir;
    const auto copy = dir.write("copy.json", R"({"device": {"ssid": "\"HomeNet\"", "android_id": "AB-12"}})");
    const auto extraction = dir / "extraction.json";
    REQUIRE(cli({"parse-copy", "--in", copy.string(), "--out", extraction.string()}).code == 0);

    const auto cap = dir.write("cap.csv", "timestamp,api_name,category,operation,return_value,call_stack\n"
                                          "2024-01-02T03:04:05Z,a.B.getSSID,SSID,call,HomeNet,\n"
                                          "2024-01-02T03:04:06Z,a.B.getIp,IPAddress,call,10.0.0.1,\n");
    const auto profile = dir / "profile.json";
    REQUIRE(cli({"ingest-capture", "--in", cap.string(), "--app-id", "appX", "--session-seconds", "900", "--out",
                 profile.string()})
                .code == 0);
    CHECK(nlohmann::json::parse(read_file(profile))["session_seconds"] == 900);
    CHECK(cli({"ingest-capture", "--in", cap.string(), "--app-id", "appX", "--session-seconds", "-3"}).code == 1);

    const auto verify = cli({"verify", "--profile", profile.string(), "--extraction", extraction.string()});
    REQUIRE(verify.code == 0);
    const auto result = nlohmann::json::parse(verify.out);
    CHECK(result["collected"] == 2);
    CHECK(result["missing"] == 1);

    const auto pdf = dir.write("copy.pdf", "%PDF-1.4 binary");
    const auto manual = cli({"parse-copy", "--in", pdf.string()});
    CHECK(manual.code == 0);
    CHECK(std::filesystem::exists(pdf.string() + ".manual.json"));
    CHECK(manual.err.find("by hand") != std::string::npos);

    CHECK(cli({"parse-copy", "--in", copy.string(), "--orientation", "sideways"}).code == 1);
}

TEST_CASE("campaign ledger through the command line") {
    test::TempDir dir;
    const auto file = (dir / "ledger.jsonl").string();
    const auto corpus = dir.write("apps.txt", "# corpus\nappA\nappB\n").string();
    const auto open = cli({"ledger", "--file", file, "--corpus", corpus, "open", "--app", "appA", "--method", "email",
                           "--right", "copy", "--at", "2024-03-01T09:00:00Z"});
    REQUIRE(open.code == 0);
    CHECK(open.out == "req-000001\n");
    CHECK(cli({"ledger", "--file", file, "--corpus", corpus, "open", "--app", "appA", "--method", "email", "--right",
               "copy", "--at", "2024-03-01T10:00:00Z"})
              .code == 2);
    CHECK(cli({"ledger", "--file", file, "--corpus", corpus, "open", "--app", "ghost", "--method", "email", "--right",
               "copy"})
              .code == 2);
    const auto fb = cli({"ledger", "--file", file, "feedback", "--id", "req-000001", "--outcome", "copy", "--at",
                         "2024-03-03T09:00:00Z"});
    CHECK(fb.out == "req-000001 ObtainDataCopy\n");
    CHECK(cli({"ledger", "--file", file, "feedback", "--id", "req-000001", "--outcome", "failure"}).code == 2);
    CHECK(cli({"ledger", "--file", file, "ui-depth", "--app", "appB", "--depth", "NotFound"}).out == "appB NotFound\n");
    CHECK(cli({"ledger", "--file", file, "ui-depth", "--app", "appB", "--depth", "9"}).code == 2);
    CHECK(cli({"ledger", "--file", file, "ui-depth", "--app", "appB", "--depth", "deep"}).code == 1);

    const auto summary = cli({"ledger", "--file", file, "summary", "--horizon", "2024-04-01T00:00:00Z"});
    REQUIRE(summary.code == 0);
    const auto j = nlohmann::json::parse(summary.out);
    CHECK(j["feedback"]["buckets"]["TwoToThreeDays"]["count"] == 1);
    CHECK(j["authenticity"]["EmailContact"]["ObtainDataCopy"]["text"] == "100.00% (1/1)");
    CHECK(j["ui_depth"]["NotFound"]["count"] == 1);
}

TEST_CASE("the fixture market report") {
    test::TempDir dir;
    const auto out = dir / "report.json";
    const auto run = cli({"report", "--config", test::fixture("corpus/config.toml").string(), "--format", "json",
                          "--work-dir", (dir / "work").string(), "--out", out.string()});
    INFO(run.err);
    REQUIRE(run.code == 0);
    CHECK(read_file(out) == read_file(test::fixture("corpus/expected_report.json")));
    CHECK(std::filesystem::exists(dir / "work"));

    const auto md = cli({"report", "--config", test::fixture("corpus/config.toml").string(), "--format", "markdown"});
    REQUIRE(md.code == 0);
    CHECK(md.out.find("| DCAR | 50.00% (5/10) |") != std::string::npos);

    const auto renamed = cli({"report", "--config", test::fixture("corpus/config.toml").string(), "--market", "other"});
    REQUIRE(renamed.code == 0);
    CHECK(nlohmann::json::parse(renamed.out)["market_id"] == "other");

    CHECK(cli({"report", "--config", (dir / "none.toml").string()}).code == 1);
    CHECK(cli({"report", "--config", test::fixture("corpus/config.toml").string(), "--format", "pdf"}).code == 1);
}

}
