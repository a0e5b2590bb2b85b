#include "geoloc/geo_enrich.hpp"

#include "geoloc/errors.hpp"
#include "geoloc/io.hpp"
#include "geoloc/text_pipeline.hpp"

#include <algorithm>
#include <fstream>

namespace geoloc {

std::string GeoEntity::token() const {
    std::string out = surface;
    std::replace(out.begin(), out.end(), ' ', '_');
    return out;
}

Gazetteer::Gazetteer(std::vector<GazetteerEntry> entries) {
    std::map<std::string, GazetteerEntry> unique;
    for (auto& e : entries) {
        e.name = normalize(e.name);
        if (e.name.empty()) continue;
        auto [it, inserted] = unique.try_emplace(e.name, e);
        if (!inserted && e.population > it->second.population) it->second = e;
    }
    entries_.reserve(unique.size());
    for (auto& [name, entry] : unique) entries_.push_back(std::move(entry));

    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto words = split_whitespace(entries_[i].name);
        by_first_word_[words.front()].emplace_back(i, words.size());
    }
    for (auto& [word, candidates] : by_first_word_) {
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
    }
}

const GazetteerEntry* Gazetteer::find(std::string_view name) const {
    const auto key = normalize(name);
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const GazetteerEntry& e, const std::string& k) { return e.name < k; });
    return it != entries_.end() && it->name == key ? &*it : nullptr;
}

std::vector<GeoEntity> Gazetteer::extract(std::string_view description) const {
    std::vector<GeoEntity> found;
    const auto words = split_whitespace(normalize(description));
    std::size_t i = 0;
    while (i < words.size()) {
        std::size_t advance = 1;
        if (auto it = by_first_word_.find(words[i]); it != by_first_word_.end()) {
            for (const auto& [index, length] : it->second) {
                if (i + length > words.size()) continue;
                const auto& entry = entries_[index];
                const auto entry_words = split_whitespace(entry.name);
                if (std::equal(entry_words.begin(), entry_words.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) {
                    found.push_back(GeoEntity{entry.name, entry.point, entry.population});
                    advance = length;
                    break;
                }
            }
        }
        i += advance;
    }
    return found;
}

GazetteerLoad load_gazetteer(std::istream& in) {
    std::vector<GazetteerEntry> entries;
    std::size_t skipped = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1) {
            cols.push_back(line.substr(start, tab - start));
        }
        cols.push_back(line.substr(start));
        try {
            if (cols.size() != 4 || normalize(cols[0]).empty()) throw FormatError("bad row");
            const auto population = parse_int(cols[3]);
            if (population < 0) throw FormatError("negative population");
            entries.push_back(GazetteerEntry{cols[0], GeoPoint(parse_double(cols[1]), parse_double(cols[2])), population});
        } catch (const Error&) {
            ++skipped;
        }
    }
    if (entries.empty()) throw DataError("gazetteer has no usable entries");
    return GazetteerLoad{Gazetteer(std::move(entries)), skipped};
}

GazetteerLoad load_gazetteer(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read gazetteer '" + path + "'");
    return load_gazetteer(in);
}

std::string enrich_text(std::string_view text, const std::optional<std::string>& description, const Gazetteer& g) {
    std::string out(text);
    if (!description) return out;
    for (const auto& entity : g.extract(*description)) {
        if (!out.empty()) out.push_back(' ');
        out += entity.token();
    }
    return out;
}

LabeledExample enrich(const LabeledExample& example, const Gazetteer& g) {
    LabeledExample out = example;
    if (example.variant == Variant::TextPlusGeoEntities) return out;
    out.tweet.content = enrich_text(example.tweet.content, example.tweet.user_description, g);
    out.variant = Variant::TextPlusGeoEntities;
    return out;
}

}  // namespace geoloc
