#pragma once

#include "geoloc/corpus.hpp"
#include "geoloc/geo_grid.hpp"

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace geoloc {

struct GazetteerEntry {
    std::string name;  // normalized, words separated by single spaces
    GeoPoint point;
    std::int64_t population = 0;
};

struct GeoEntity {
    std::string surface;
    GeoPoint point;
    std::int64_t population = 0;

    /// The name as one feature token: spaces become underscores.
    std::string token() const;
};

/// Place-name dictionary with a longest-match index keyed on the first word.
class Gazetteer {
public:
    Gazetteer() = default;
    /// Names are normalized; on a name clash the higher population wins.
    explicit Gazetteer(std::vector<GazetteerEntry> entries);

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    const std::vector<GazetteerEntry>& entries() const noexcept { return entries_; }
    const GazetteerEntry* find(std::string_view name) const;

    /// Greedy left-to-right longest match over the normalized description.
    /// Matches never overlap.
    std::vector<GeoEntity> extract(std::string_view description) const;

private:
    std::vector<GazetteerEntry> entries_;  // sorted by name
    // first word -> candidate (entry index, word count), longest first
    std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>, std::less<>> by_first_word_;
};

struct GazetteerLoad {
    Gazetteer gazetteer;
    std::size_t skipped_rows = 0;
};

/// TSV rows name, latitude, longitude, population; '#' lines are comments.
/// Malformed rows are skipped and counted. An empty result is a DataError.
GazetteerLoad load_gazetteer(std::istream& in);
GazetteerLoad load_gazetteer(const std::string& path);

inline std::vector<GeoEntity> extract_geo_entities(std::string_view description, const Gazetteer& g) {
    return g.extract(description);
}

/// Copy of `example` tagged TextPlusGeoEntities whose content has one token
/// appended per entity found in the user description. Examples that are
/// already enriched come back unchanged.
LabeledExample enrich(const LabeledExample& example, const Gazetteer& g);

/// Enriches a bare message/description pair the same way.
std::string enrich_text(std::string_view text, const std::optional<std::string>& description, const Gazetteer& g);

}  // namespace geoloc
