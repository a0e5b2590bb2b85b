#include "geoloc/corpus.hpp"

#include "geoloc/csv.hpp"
#include "geoloc/errors.hpp"
#include "geoloc/text_pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace geoloc {

namespace {

using nlohmann::json;

const std::array<std::string, 7> kCsvInputHeader{"id", "user_id", "time", "lat", "lon", "text", "description"};
const std::array<std::string, 9> kCorpusHeader{"schema_version", "id",   "user_id",     "label",  "lat",
                                               "lon",            "text", "description", "variant"};

// Twitter ids arrive as numbers or strings; the *_str form wins when present.
std::optional<std::string> json_id(const json& obj) {
    if (auto it = obj.find("id_str"); it != obj.end() && it->is_string() && !it->get<std::string>().empty()) {
        return it->get<std::string>();
    }
    auto it = obj.find("id");
    if (it == obj.end()) return std::nullopt;
    if (it->is_string()) {
        auto s = it->get<std::string>();
        return s.empty() ? std::nullopt : std::optional(s);
    }
    if (it->is_number_unsigned()) return std::to_string(it->get<std::uint64_t>());
    if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
    return std::nullopt;
}

std::optional<std::string> json_string(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) return std::nullopt;
    return it->get<std::string>();
}

std::string text_or_empty(const std::optional<std::string>& s) { return s.value_or(std::string{}); }

std::optional<std::string> non_empty(std::string s) {
    if (s.empty()) return std::nullopt;
    return s;
}

}  // namespace

std::string_view to_string(Variant v) {
    return v == Variant::TextOnly ? "TextOnly" : "TextPlusGeoEntities";
}

Variant parse_variant(std::string_view text) {
    if (text == "TextOnly") return Variant::TextOnly;
    if (text == "TextPlusGeoEntities") return Variant::TextPlusGeoEntities;
    throw UsageError("unknown variant '" + std::string(text) + "' (expected TextOnly or TextPlusGeoEntities)");
}

InputFormat parse_input_format(std::string_view tag) {
    if (tag == "jsonl") return InputFormat::Jsonl;
    if (tag == "csv") return InputFormat::Csv;
    throw UsageError("unknown input format '" + std::string(tag) + "' (expected jsonl or csv)");
}

std::optional<RawTweetRecord> parse_tweet_json(std::string_view line) {
    const json obj = json::parse(line.begin(), line.end(), nullptr, /*allow_exceptions=*/false);
    if (!obj.is_object()) return std::nullopt;

    RawTweetRecord record;
    auto id = json_id(obj);
    auto user = obj.find("user");
    if (!id || user == obj.end() || !user->is_object()) return std::nullopt;
    auto user_id = json_id(*user);
    if (!user_id) return std::nullopt;
    record.id = std::move(*id);
    record.user_id = std::move(*user_id);
    record.time = text_or_empty(json_string(obj, "created_at"));

    if (auto full = json_string(obj, "full_text")) {
        record.content = std::move(*full);
    } else if (auto ext = obj.find("extended_tweet"); ext != obj.end() && ext->is_object() && ext->contains("full_text")) {
        record.content = text_or_empty(json_string(*ext, "full_text"));
    } else {
        record.content = text_or_empty(json_string(obj, "text"));
    }

    if (auto entities = obj.find("entities"); entities != obj.end() && entities->is_object()) {
        if (auto mentions = entities->find("user_mentions"); mentions != entities->end() && mentions->is_array()) {
            for (const auto& m : *mentions) {
                if (m.is_object()) {
                    if (auto name = json_string(m, "screen_name")) record.mentions.push_back(*name);
                }
            }
        }
    }

    // GeoJSON point, [longitude, latitude]; also accepts a bare pair.
    if (auto coords = obj.find("coordinates"); coords != obj.end() && !coords->is_null()) {
        const json* pair = &*coords;
        if (coords->is_object()) {
            auto inner = coords->find("coordinates");
            if (inner == coords->end()) return std::nullopt;
            pair = &*inner;
        }
        if (!pair->is_array() || pair->size() != 2 || !(*pair)[0].is_number() || !(*pair)[1].is_number()) {
            return std::nullopt;
        }
        try {
            record.geo = GeoPoint((*pair)[1].get<double>(), (*pair)[0].get<double>());
        } catch (const InvalidCoordinateError&) {
            return std::nullopt;
        }
    }

    record.user_description = json_string(*user, "description");
    record.user_time_zone = json_string(*user, "time_zone");
    return record;
}

ParseSummary for_each_tweet(std::istream& in, InputFormat format, const RecordVisitor& visit) {
    ParseSummary summary;
    if (format == InputFormat::Jsonl) {
        std::string line;
        while (std::getline(in, line)) {
            if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
            if (auto record = parse_tweet_json(line)) {
                ++summary.parsed;
                visit(std::move(*record));
            } else {
                ++summary.skipped;
            }
        }
        return summary;
    }

    csv::Reader reader(in);
    auto header = reader.next();
    if (!header) return summary;
    if (!header->empty() && header->front().starts_with("\xEF\xBB\xBF")) header->front().erase(0, 3);
    if (!std::equal(header->begin(), header->end(), kCsvInputHeader.begin(), kCsvInputHeader.end())) {
        throw FormatError("CSV input header must be id,user_id,time,lat,lon,text,description");
    }
    while (true) {
        std::optional<std::vector<std::string>> row;
        try {
            row = reader.next();
        } catch (const FormatError&) {
            ++summary.skipped;
            break;
        }
        if (!row) break;
        if (row->size() == 1 && row->front().empty()) continue;
        auto& f = *row;
        if (f.size() != kCsvInputHeader.size() || f[0].empty() || f[1].empty()) {
            ++summary.skipped;
            continue;
        }
        RawTweetRecord record;
        record.id = f[0];
        record.user_id = f[1];
        record.time = f[2];
        record.content = f[5];
        try {
            if (!f[3].empty() || !f[4].empty()) record.geo = GeoPoint(parse_double(f[3]), parse_double(f[4]));
        } catch (const Error&) {
            ++summary.skipped;
            continue;
        }
        record.user_description = non_empty(f[6]);
        ++summary.parsed;
        visit(std::move(record));
    }
    return summary;
}

ParseSummary for_each_tweet(const std::string& path, InputFormat format, const RecordVisitor& visit) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    return for_each_tweet(in, format, visit);
}

ParsedTweets parse_tweet_file(const std::string& path, InputFormat format) {
    ParsedTweets out;
    out.summary = for_each_tweet(path, format, [&](RawTweetRecord&& r) { out.records.push_back(std::move(r)); });
    return out;
}

std::vector<RawTweetRecord> filter_bbox(std::vector<RawTweetRecord> records, const GeoBoundingBox& bbox,
                                        const RejectSink& reject) {
    std::vector<RawTweetRecord> kept;
    kept.reserve(records.size());
    for (auto& r : records) {
        if (!r.geo) {
            if (reject) reject(r.id, "missing_geo");
        } else if (!bbox.contains(*r.geo)) {
            if (reject) reject(r.id, "outside_bbox");
        } else {
            kept.push_back(std::move(r));
        }
    }
    return kept;
}

std::string clean_content(std::string_view text) {
    std::string out;
    for (const auto& token : split_whitespace(text)) {
        if (!out.empty()) out.push_back(' ');
        out += token;
    }
    return out;
}

std::vector<RawTweetRecord> dedupe_and_despam(std::vector<RawTweetRecord> records, const DespamOptions& options,
                                              const RejectSink& reject) {
    std::vector<std::string> keys;
    keys.reserve(records.size());
    std::unordered_map<std::string, std::unordered_set<std::string>> users_by_text;
    for (const auto& r : records) {
        keys.push_back(normalize(r.content));
        if (!keys.back().empty()) users_by_text[keys.back()].insert(r.user_id);
    }

    std::vector<RawTweetRecord> kept;
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto& r = records[i];
        const auto& key = keys[i];
        if (key.empty()) {
            if (reject) reject(r.id, clean_content(r.content).empty() ? "blank" : "no_text_content");
            continue;
        }
        if (users_by_text[key].size() > options.max_distinct_users) {
            if (reject) reject(r.id, "spam_repeated_text");
            continue;
        }
        if (!seen.emplace(r.user_id, key).second) {
            if (reject) reject(r.id, "duplicate");
            continue;
        }
        kept.push_back(std::move(r));
    }
    return kept;
}

CleanTweet make_clean_tweet(const RawTweetRecord& record) {
    if (!record.geo) throw DataError("tweet " + record.id + " has no geotag");
    return CleanTweet{
        .id = record.id,
        .user_id = record.user_id,
        .content = clean_content(record.content),
        .geo = *record.geo,
        .user_description = record.user_description ? non_empty(clean_content(*record.user_description)) : std::nullopt,
    };
}

std::vector<LabeledExample> assign_labels(std::span<const CleanTweet> tweets, const LatticeSpec& lattice,
                                          const RejectSink& reject) {
    std::vector<LabeledExample> out;
    out.reserve(tweets.size());
    for (const auto& t : tweets) {
        if (!lattice.bbox().contains(t.geo)) {
            if (reject) reject(t.id, "outside_lattice");
            continue;
        }
        out.push_back(LabeledExample{t, grid_index(t.geo, lattice), Variant::TextOnly});
    }
    return out;
}

std::vector<std::string> inconsistent_labels(std::span<const LabeledExample> corpus, const LatticeSpec& lattice) {
    std::vector<std::string> bad;
    for (const auto& ex : corpus) {
        if (!lattice.bbox().contains(ex.tweet.geo) || grid_index(ex.tweet.geo, lattice) != ex.label) {
            bad.push_back(ex.tweet.id);
        }
    }
    return bad;
}

std::vector<LabeledExample> relabel(std::span<const LabeledExample> corpus, const LatticeSpec& lattice) {
    std::vector<LabeledExample> out(corpus.begin(), corpus.end());
    for (auto& ex : out) ex.label = grid_index(ex.tweet.geo, lattice);
    return out;
}

void write_labeled(std::ostream& out, std::span<const LabeledExample> corpus) {
    csv::write_row(out, kCorpusHeader);
    const std::string version = std::to_string(kCorpusSchemaVersion);
    for (const auto& ex : corpus) {
        const std::array<std::string, 9> row{version,
                                             ex.tweet.id,
                                             ex.tweet.user_id,
                                             to_string(ex.label),
                                             format_double(ex.tweet.geo.latitude()),
                                             format_double(ex.tweet.geo.longitude()),
                                             ex.tweet.content,
                                             ex.tweet.user_description.value_or(""),
                                             std::string(to_string(ex.variant))};
        csv::write_row(out, row);
    }
}

void write_labeled(const std::string& path, std::span<const LabeledExample> corpus) {
    write_file_atomically(path, [&](std::ostream& out) { write_labeled(out, corpus); });
}

std::vector<LabeledExample> read_labeled(std::istream& in) {
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header || !std::equal(header->begin(), header->end(), kCorpusHeader.begin(), kCorpusHeader.end())) {
        throw FormatError("labeled corpus: expected header schema_version,id,user_id,label,lat,lon,text,description,variant");
    }
    std::vector<LabeledExample> corpus;
    const std::string version = std::to_string(kCorpusSchemaVersion);
    while (auto row = reader.next()) {
        const auto& f = *row;
        const std::string where = "labeled corpus line " + std::to_string(reader.line());
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != kCorpusHeader.size()) {
            throw FormatError(where + ": expected 9 fields, found " + std::to_string(f.size()));
        }
        if (f[0] != version) {
            throw FormatError(where + ": expected schema_version " + version + ", found '" + f[0] + "'");
        }
        try {
            corpus.push_back(LabeledExample{
                .tweet = CleanTweet{.id = f[1],
                                    .user_id = f[2],
                                    .content = f[6],
                                    .geo = GeoPoint(parse_double(f[4]), parse_double(f[5])),
                                    .user_description = non_empty(f[7])},
                .label = parse_grid_label(f[3]),
                .variant = parse_variant(f[8]),
            });
        } catch (const Error& e) {
            throw FormatError(where + ": " + e.what());
        }
    }
    return corpus;
}

std::vector<LabeledExample> read_labeled(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    return read_labeled(in);
}

GeoPoint geotag_centroid(std::span<const CleanTweet> tweets) {
    if (tweets.empty()) throw DataError("cannot take the centroid of zero geotags");
    double lat = 0.0;
    double lon = 0.0;
    for (const auto& t : tweets) {
        lat += t.geo.latitude();
        lon += t.geo.longitude();
    }
    const auto count = static_cast<double>(tweets.size());
    return GeoPoint(lat / count, lon / count);
}

std::vector<User> group_users(std::span<const LabeledExample> corpus) {
    std::map<std::string, std::vector<CleanTweet>> by_user;
    for (const auto& ex : corpus) by_user[ex.tweet.user_id].push_back(ex.tweet);
    std::vector<User> users;
    users.reserve(by_user.size());
    for (auto& [id, tweets] : by_user) {
        const auto location = geotag_centroid(tweets);
        users.push_back(User{id, std::move(tweets), location, std::nullopt});
    }
    return users;
}

}  // namespace geoloc
