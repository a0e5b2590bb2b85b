#pragma once

#include "geoloc/geo_grid.hpp"
#include "geoloc/io.hpp"

#include <cstddef>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace geoloc {

/// One tweet as read from an input file, before any filtering.
struct RawTweetRecord {
    std::string id;
    std::string user_id;
    std::string time;
    std::string content;
    std::vector<std::string> mentions;
    std::optional<GeoPoint> geo;
    std::optional<std::string> user_description;
    std::optional<std::string> user_time_zone;
};

/// A tweet that survived filtering. `content` has whitespace runs collapsed
/// and is non-blank after normalization; an empty description is stored as
/// nullopt.
struct CleanTweet {
    std::string id;
    std::string user_id;
    std::string content;
    GeoPoint geo;
    std::optional<std::string> user_description;

    friend bool operator==(const CleanTweet&, const CleanTweet&) = default;
};

enum class Variant { TextOnly, TextPlusGeoEntities };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

/// For TextPlusGeoEntities, tweet.content already carries the appended
/// entity tokens, so the content is always the feature text.
struct LabeledExample {
    CleanTweet tweet;
    GridLabel label;
    Variant variant = Variant::TextOnly;

    friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

/// Per-user view of a corpus. real_location is the mean of the user's geotags.
struct User {
    std::string user_id;
    std::vector<CleanTweet> tweets;
    std::optional<GeoPoint> real_location;
    std::optional<GridLabel> predicted_location;
};

enum class InputFormat { Jsonl, Csv };

/// "jsonl" or "csv"; anything else is a UsageError.
InputFormat parse_input_format(std::string_view tag);

struct ParseSummary {
    std::size_t parsed = 0;
    std::size_t skipped = 0;
};

using RecordVisitor = std::function<void(RawTweetRecord&&)>;

/// Streams well-formed records to `visit`; malformed lines are counted and
/// skipped. A CSV stream with the wrong header is a FormatError.
ParseSummary for_each_tweet(std::istream& in, InputFormat format, const RecordVisitor& visit);
ParseSummary for_each_tweet(const std::string& path, InputFormat format, const RecordVisitor& visit);

struct ParsedTweets {
    std::vector<RawTweetRecord> records;
    ParseSummary summary;
};

/// Throws IoError if the file cannot be opened.
ParsedTweets parse_tweet_file(const std::string& path, InputFormat format);

/// Parses one JSON line in tweet-object layout; nullopt when malformed.
std::optional<RawTweetRecord> parse_tweet_json(std::string_view line);

/// Receives (record id, reason) for every record a stage drops.
using RejectSink = std::function<void(std::string_view id, std::string_view reason)>;

std::vector<RawTweetRecord> filter_bbox(std::vector<RawTweetRecord> records, const GeoBoundingBox& bbox,
                                        const RejectSink& reject = {});

/// Collapses whitespace runs to single spaces and trims.
std::string clean_content(std::string_view text);

struct DespamOptions {
    /// Normalized texts posted by more than this many distinct users are
    /// treated as spam and every copy is dropped.
    std::size_t max_distinct_users = 10;
};

/// Drops blank messages (including URL- or mention-only ones), repeated
/// (user, normalized text) pairs after the first, and cross-user spam.
/// Survivors keep their input order. Idempotent.
std::vector<RawTweetRecord> dedupe_and_despam(std::vector<RawTweetRecord> records, const DespamOptions& options = {},
                                              const RejectSink& reject = {});

/// Throws DataError when the record has no geotag.
CleanTweet make_clean_tweet(const RawTweetRecord& record);

/// One example per input inside the lattice box, in input order; the rest go
/// to `reject`.
std::vector<LabeledExample> assign_labels(std::span<const CleanTweet> tweets, const LatticeSpec& lattice,
                                          const RejectSink& reject = {});

/// Recomputes every label against `lattice`; returns ids whose stored label
/// disagrees (or whose geotag lies outside the box).
std::vector<std::string> inconsistent_labels(std::span<const LabeledExample> corpus, const LatticeSpec& lattice);

/// Same examples labeled on another lattice. Throws OutOfBoundsError.
std::vector<LabeledExample> relabel(std::span<const LabeledExample> corpus, const LatticeSpec& lattice);

inline constexpr int kCorpusSchemaVersion = 1;

void write_labeled(std::ostream& out, std::span<const LabeledExample> corpus);
void write_labeled(const std::string& path, std::span<const LabeledExample> corpus);
/// Throws FormatError on a bad header, schema version or row.
std::vector<LabeledExample> read_labeled(std::istream& in);
std::vector<LabeledExample> read_labeled(const std::string& path);

/// Users sorted by id, with real_location set to the geotag centroid.
std::vector<User> group_users(std::span<const LabeledExample> corpus);

/// Arithmetic mean of latitudes and longitudes. Throws DataError when empty.
GeoPoint geotag_centroid(std::span<const CleanTweet> tweets);

}  // namespace geoloc
