#include "geoloc/corpus.hpp"
#include "geoloc/errors.hpp"
#include "geoloc/random.hpp"
#include "geoloc/text_pipeline.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

using namespace geoloc;

namespace {

RawTweetRecord raw(std::string id, std::string user, std::string text, std::optional<GeoPoint> geo = GeoPoint(40, -100)) {
    RawTweetRecord r;
    r.id = std::move(id);
    r.user_id = std::move(user);
    r.content = std::move(text);
    r.geo = geo;
    return r;
}

std::vector<std::string> ids(const std::vector<RawTweetRecord>& records) {
    std::vector<std::string> out;
    for (const auto& r : records) out.push_back(r.id);
    return out;
}

CleanTweet clean(std::string id, std::string user, std::string text, GeoPoint geo,
                 std::optional<std::string> description = {}) {
    return CleanTweet{std::move(id), std::move(user), std::move(text), geo, std::move(description)};
}

}  // namespace

TEST_CASE("jsonl parsing") {
    const auto parsed = parse_tweet_file(GEOLOC_FIXTURES "/small.jsonl", InputFormat::Jsonl);
    CHECK(parsed.summary.parsed == 3);
    CHECK(parsed.summary.skipped == 1);
    REQUIRE(parsed.records.size() == 3);
    CHECK(parsed.records[0].id == "a1");
    CHECK(parsed.records[0].geo == GeoPoint(40.0, -100.0));
    CHECK(parsed.records[1].id == "a2");
    CHECK_FALSE(parsed.records[1].geo.has_value());
    CHECK(parsed.records[2].user_id == "u3");
    CHECK(parsed.records[2].geo == GeoPoint(35.25, -80.5));

    const auto full = parse_tweet_file(GEOLOC_FIXTURES "/ingest.jsonl", InputFormat::Jsonl);
    CHECK(full.summary.parsed == 9);
    CHECK(full.summary.skipped == 1);
    CHECK(full.records[0].mentions == std::vector<std::string>{"bob"});
    CHECK(full.records[0].user_time_zone == "Central Time (US & Canada)");
    CHECK(full.records[0].user_description == "weather nerd");
    CHECK_FALSE(full.records[2].user_description.has_value());
    CHECK(full.records.back().user_id == "17");
}

TEST_CASE("jsonl field variants") {
    auto r = parse_tweet_json(R"({"id": 5, "user": {"id": 1}, "text": "short", "extended_tweet": {"full_text": "long text"}})");
    REQUIRE(r);
    CHECK(r->id == "5");
    CHECK(r->content == "long text");
    r = parse_tweet_json(R"({"id": 5, "id_str": "0005", "user": {"id": 1}, "full_text": "ft", "text": "t"})");
    REQUIRE(r);
    CHECK(r->id == "0005");
    CHECK(r->content == "ft");
    CHECK_FALSE(parse_tweet_json(R"({"id": 5, "user": {"id": 1}, "coordinates": [-100]})"));
    CHECK_FALSE(parse_tweet_json(R"({"id": 5, "user": {"id": 1}, "coordinates": [-100, 95]})"));
    CHECK_FALSE(parse_tweet_json(R"([1, 2])"));
    CHECK_FALSE(parse_tweet_json(R"({"user": {"id": 1}})"));
}

TEST_CASE("csv parsing") {
    const auto parsed = parse_tweet_file(GEOLOC_FIXTURES "/small.csv", InputFormat::Csv);
    CHECK(parsed.summary.parsed == 3);
    CHECK(parsed.summary.skipped == 2);
    REQUIRE(parsed.records.size() == 3);
    CHECK(parsed.records[0].content == "Hello, \"world\"");
    CHECK_FALSE(parsed.records[0].user_description.has_value());
    CHECK_FALSE(parsed.records[1].geo.has_value());
    CHECK(parsed.records[1].user_description == "likes \"quotes\"");
    CHECK(parsed.records[2].content == "multi\nline");

    std::istringstream wrong_header("id,text\n1,hello\n");
    CHECK_THROWS_AS(for_each_tweet(wrong_header, InputFormat::Csv, [](RawTweetRecord&&) {}), FormatError);
    std::istringstream bom("\xEF\xBB\xBFid,user_id,time,lat,lon,text,description\n1,2,,40,-100,hi,\n");
    CHECK(for_each_tweet(bom, InputFormat::Csv, [](RawTweetRecord&&) {}).parsed == 1);
}

TEST_CASE("parsing edge cases") {
    std::istringstream empty;
    const auto s = for_each_tweet(empty, InputFormat::Jsonl, [](RawTweetRecord&&) {});
    CHECK(s.parsed == 0);
    CHECK(s.skipped == 0);
    std::istringstream empty_csv;
    CHECK(for_each_tweet(empty_csv, InputFormat::Csv, [](RawTweetRecord&&) {}).parsed == 0);
    CHECK_THROWS_AS(parse_input_format("xml"), UsageError);
    CHECK(parse_input_format("csv") == InputFormat::Csv);
    CHECK_THROWS_AS(parse_tweet_file("/nonexistent/tweets.jsonl", InputFormat::Jsonl), IoError);
    CHECK(parse_variant("TextPlusGeoEntities") == Variant::TextPlusGeoEntities);
    CHECK(to_string(Variant::TextOnly) == "TextOnly");
    CHECK_THROWS_AS(parse_variant("Text"), UsageError);
}

TEST_CASE("filter_bbox") {
    const auto box = GeoBoundingBox::us_default();
    std::vector<std::pair<std::string, std::string>> rejected;
    const auto kept = filter_bbox({raw("in", "u", "x"), raw("none", "u", "x", std::nullopt),
                                   raw("london", "u", "x", GeoPoint(51.5, -0.13))},
                                  box, [&](std::string_view id, std::string_view why) {
                                      rejected.emplace_back(std::string(id), std::string(why));
                                  });
    CHECK(ids(kept) == std::vector<std::string>{"in"});
    CHECK(rejected == std::vector<std::pair<std::string, std::string>>{{"none", "missing_geo"}, {"london", "outside_bbox"}});
    CHECK(filter_bbox({}, box).empty());
}

TEST_CASE("dedupe_and_despam examples") {
    CHECK(ids(dedupe_and_despam({raw("1", "u", "Hello there"), raw("2", "u", "hello   THERE!")})) ==
          std::vector<std::string>{"1"});
    CHECK(ids(dedupe_and_despam({raw("1", "u", "Hello there"), raw("2", "v", "hello there")})) ==
          std::vector<std::string>{"1", "2"});

    std::vector<std::pair<std::string, std::string>> rejected;
    const auto sink = [&](std::string_view id, std::string_view why) {
        rejected.emplace_back(std::string(id), std::string(why));
    };
    CHECK(dedupe_and_despam({raw("b", "u", "   "), raw("l", "u", "http://x.co @bob")}, {}, sink).empty());
    CHECK(rejected == std::vector<std::pair<std::string, std::string>>{{"b", "blank"}, {"l", "no_text_content"}});

    std::vector<RawTweetRecord> spam;
    for (int u = 0; u < 11; ++u) spam.push_back(raw(std::to_string(u), "user" + std::to_string(u), "Buy now"));
    spam.push_back(raw("real", "user0", "actual message"));
    CHECK(ids(dedupe_and_despam(spam)) == std::vector<std::string>{"real"});
    spam.pop_back();
    spam.pop_back();
    CHECK(dedupe_and_despam(spam).size() == 10);
    CHECK(dedupe_and_despam(spam, DespamOptions{5}).empty());
}

TEST_CASE("property: dedupe_and_despam is idempotent and only removes") {
    const std::vector<std::string> texts{"hello", "Hello!", "spam spam", "#win", "http://x.co", "",
                                         "good morning", "GOOD   morning", "@a", "rain"};
    Rng rng(21);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<RawTweetRecord> records;
        const auto n = rng.below(60);
        for (std::uint64_t i = 0; i < n; ++i) {
            records.push_back(raw("t" + std::to_string(i), "u" + std::to_string(rng.below(15)),
                                  texts[rng.below(texts.size())]));
        }
        const DespamOptions options{1 + rng.below(6)};
        const auto once = dedupe_and_despam(records, options);
        CHECK(ids(dedupe_and_despam(once, options)) == ids(once));
        CHECK(once.size() <= records.size());
        // Survivors are a subsequence of the input.
        auto it = records.begin();
        for (const auto& r : once) {
            it = std::find_if(it, records.end(), [&](const RawTweetRecord& x) { return x.id == r.id; });
            REQUIRE(it != records.end());
            ++it;
        }
        std::set<std::pair<std::string, std::string>> pairs;
        for (const auto& r : once) {
            CHECK_FALSE(normalize(r.content).empty());
            CHECK(pairs.insert({r.user_id, normalize(r.content)}).second);
        }
    }
}

TEST_CASE("make_clean_tweet") {
    auto r = raw("1", "u", "  lots   of\tspace ");
    r.user_description = "";
    const auto t = make_clean_tweet(r);
    CHECK(t.content == "lots of space");
    CHECK_FALSE(t.user_description.has_value());
    CHECK_THROWS_AS(make_clean_tweet(raw("2", "u", "x", std::nullopt)), DataError);
}

TEST_CASE("assign_labels") {
    const LatticeSpec lattice(GeoBoundingBox::us_default(), 8);
    std::vector<std::string> rejected;
    const std::vector<CleanTweet> tweets{clean("nw", "u", "x", GeoPoint(83.162102, -167.276413)),
                                         clean("mid", "u", "x", GeoPoint(40, -100)),
                                         clean("far", "u", "x", GeoPoint(51.5, -0.13))};
    const auto labeled =
        assign_labels(tweets, lattice, [&](std::string_view id, std::string_view) { rejected.emplace_back(id); });
    REQUIRE(labeled.size() == 2);
    CHECK(labeled[0].label == GridLabel{1});
    CHECK(labeled[1].label == GridLabel{37});
    CHECK(labeled[1].variant == Variant::TextOnly);
    CHECK(rejected == std::vector<std::string>{"far"});
    CHECK(assign_labels(std::vector<CleanTweet>{}, lattice).empty());

    const auto on16 = relabel(labeled, LatticeSpec(GeoBoundingBox::us_default(), 16));
    CHECK(on16[0].label == GridLabel{1});
    CHECK(inconsistent_labels(labeled, lattice).empty());
    CHECK(inconsistent_labels(labeled, LatticeSpec(GeoBoundingBox::us_default(), 16)) ==
          std::vector<std::string>{"mid"});
}

TEST_CASE("labeled corpus round trip") {
    const LatticeSpec lattice(GeoBoundingBox::us_default(), 8);
    const std::vector<CleanTweet> tweets{
        clean("1", "u1", "café ☕", GeoPoint(40, -100)),
        clean("2", "u2", "comma, \"quote\"\nnewline", GeoPoint(30.123456789012345, -90.5), "desc, with comma"),
        clean("3", "u,3", "plain", GeoPoint(45, -120))};
    const auto corpus = assign_labels(tweets, lattice);
    std::stringstream buffer;
    write_labeled(buffer, corpus);
    CHECK(read_labeled(buffer) == corpus);

    const auto path = std::filesystem::temp_directory_path() / "geoloc_corpus_roundtrip.csv";
    write_labeled(path.string(), corpus);
    CHECK(read_labeled(path.string()) == corpus);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_labeled(std::string("/nonexistent/corpus.csv")), IoError);
}

TEST_CASE("property: corpus round trip on random content") {
    const LatticeSpec lattice(GeoBoundingBox::us_default(), 11);
    const std::vector<std::string> pieces{"a", "Z", ",", "\"", "\n", "\r\n", " ", "é", "☕", "#x", "''", "\t", "0.5"};
    Rng rng(22);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<LabeledExample> corpus;
        const auto n = rng.below(20);
        for (std::uint64_t i = 0; i < n; ++i) {
            std::string text, desc;
            for (std::uint64_t p = 0, m = 1 + rng.below(8); p < m; ++p) text += pieces[rng.below(pieces.size())];
            for (std::uint64_t p = 0, m = rng.below(4); p < m; ++p) desc += pieces[rng.below(pieces.size())];
            const GeoPoint g(rng.uniform(6.0, 83.0), rng.uniform(-167.0, -53.0));
            LabeledExample ex{clean("id" + std::to_string(i), "u" + std::to_string(rng.below(5)), text, g,
                                    desc.empty() ? std::nullopt : std::optional<std::string>(desc)),
                              grid_index(g, lattice),
                              rng.below(2) ? Variant::TextOnly : Variant::TextPlusGeoEntities};
            corpus.push_back(ex);
        }
        std::stringstream buffer;
        write_labeled(buffer, corpus);
        CHECK(read_labeled(buffer) == corpus);
    }
}

TEST_CASE("labeled corpus format errors") {
    std::istringstream bad_header("id,label\n");
    CHECK_THROWS_AS(read_labeled(bad_header), FormatError);
    std::istringstream bad_version(
        "schema_version,id,user_id,label,lat,lon,text,description,variant\n"
        "7,1,u,G1,40,-100,hi,,TextOnly\n");
    try {
        read_labeled(bad_version);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        const std::string what = e.what();
        CHECK(what.find("schema_version 1") != std::string::npos);
        CHECK(what.find("'7'") != std::string::npos);
    }
    std::istringstream short_row(
        "schema_version,id,user_id,label,lat,lon,text,description,variant\n"
        "1,1,u,G1\n");
    CHECK_THROWS_AS(read_labeled(short_row), FormatError);
    std::istringstream bad_label(
        "schema_version,id,user_id,label,lat,lon,text,description,variant\n"
        "1,1,u,Gx,40,-100,hi,,TextOnly\n");
    CHECK_THROWS_AS(read_labeled(bad_label), FormatError);
    std::istringstream empty_ok("schema_version,id,user_id,label,lat,lon,text,description,variant\n");
    CHECK(read_labeled(empty_ok).empty());
}

TEST_CASE("users and centroids") {
    const LatticeSpec lattice(GeoBoundingBox::us_default(), 8);
    const auto corpus = assign_labels(std::vector<CleanTweet>{clean("1", "b", "x", GeoPoint(40, -100)),
                                                              clean("2", "a", "x", GeoPoint(30, -90)),
                                                              clean("3", "b", "x", GeoPoint(42, -104))},
                                      lattice);
    const auto users = group_users(corpus);
    REQUIRE(users.size() == 2);
    CHECK(users[0].user_id == "a");
    CHECK(users[1].user_id == "b");
    CHECK(users[1].tweets.size() == 2);
    REQUIRE(users[1].real_location);
    CHECK(users[1].real_location->latitude() == doctest::Approx(41.0));
    CHECK(users[1].real_location->longitude() == doctest::Approx(-102.0));
    CHECK_FALSE(users[0].predicted_location.has_value());
    CHECK_THROWS_AS(geotag_centroid(std::vector<CleanTweet>{}), DataError);
}
