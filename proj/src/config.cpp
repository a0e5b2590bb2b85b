#include "geoloc/config.hpp"

#include "geoloc/errors.hpp"
#include "geoloc/io.hpp"
#include "geoloc/text_pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace geoloc {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
    if (value == "0" || value == "false" || value == "no" || value == "off") return false;
    throw UsageError("setting '" + key + "' expects a boolean, got '" + value + "'");
}

std::string resolve(const std::string& path, const std::string& base_dir) {
    namespace fs = std::filesystem;
    if (base_dir.empty() || fs::path(path).is_absolute()) return path;
    return (fs::path(base_dir) / path).lexically_normal().string();
}

}  // namespace

GeoBoundingBox RunConfig::bbox() const {
    try {
        return GeoBoundingBox(lat_max, lat_min, lon_max, lon_min);
    } catch (const InvalidCoordinateError& e) {
        throw UsageError(std::string("bounding box: ") + e.what());
    }
}

Tokenizer RunConfig::make_tokenizer() const {
    if (stopwords) return Tokenizer(tokenizer, load_stopwords(*stopwords));
    return Tokenizer(tokenizer);
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& raw, const std::string& base_dir) {
    const std::string value = trim(raw);
    try {
        if (key == "lat_max" || key == "lat_min" || key == "lon_max" || key == "lon_min") {
            const double v = parse_double(value);
            (key == "lat_max" ? c.lat_max : key == "lat_min" ? c.lat_min : key == "lon_max" ? c.lon_max : c.lon_min) = v;
        } else if (key == "n" || key == "lattices") {
            std::vector<int> sizes;
            for (const auto& item : split_list(value)) {
                const auto n = parse_int(item);
                if (n < 1 || n > 46340) throw UsageError("lattice size must be in [1, 46340], got " + item);
                sizes.push_back(static_cast<int>(n));
            }
            if (sizes.empty()) throw UsageError("setting '" + key + "' needs at least one lattice size");
            c.lattices = std::move(sizes);
        } else if (key == "variant" || key == "variants") {
            std::vector<Variant> variants;
            for (const auto& item : split_list(value)) variants.push_back(parse_variant(item));
            if (variants.empty()) throw UsageError("setting '" + key + "' needs at least one variant");
            c.variants = std::move(variants);
        } else if (key == "alpha") {
            c.alpha = parse_double(value);
            if (!(c.alpha > 0.0)) throw UsageError("alpha must be > 0");
        } else if (key == "train_fraction") {
            c.split.train_fraction = parse_double(value);
            if (!(c.split.train_fraction > 0.0 && c.split.train_fraction < 1.0)) {
                throw UsageError("train_fraction must lie in (0, 1)");
            }
        } else if (key == "seed") {
            c.split.seed = static_cast<std::uint64_t>(parse_int(value));
        } else if (key == "spam_k") {
            const auto k = parse_int(value);
            if (k < 1) throw UsageError("spam_k must be >= 1");
            c.spam_k = static_cast<std::size_t>(k);
        } else if (key == "min_df") {
            c.min_df = parse_int(value);
            if (c.min_df < 1) throw UsageError("min_df must be >= 1");
        } else if (key == "min_token_length") {
            const auto len = parse_int(value);
            if (len < 1) throw UsageError("min_token_length must be >= 1");
            c.tokenizer.min_token_length = static_cast<std::size_t>(len);
        } else if (key == "stem") {
            c.tokenizer.stem = parse_bool(key, value);
        } else if (key == "stopwords") {
            c.stopwords = value.empty() ? std::nullopt : std::optional(resolve(value, base_dir));
        } else if (key == "gazetteer") {
            c.gazetteer = value.empty() ? std::nullopt : std::optional(resolve(value, base_dir));
        } else if (key == "baseline_accuracy") {
            c.baseline_accuracy = value.empty() ? std::nullopt : std::optional(parse_double(value));
        } else if (key == "top_k") {
            const auto k = parse_int(value);
            if (k < 1) throw UsageError("top_k must be >= 1");
            c.top_k = static_cast<std::size_t>(k);
        } else {
            throw UsageError("unknown setting '" + key + "'");
        }
    } catch (const UsageError&) {
        throw;
    } catch (const Error& e) {
        throw UsageError("setting '" + key + "': " + e.what());
    }
}

void load_config_file(RunConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    const auto base_dir = std::filesystem::path(path).parent_path().string();
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path + ":" + std::to_string(line_no) + ": expected key = value");
        }
        apply_setting(config, trim(text.substr(0, eq)), text.substr(eq + 1), base_dir);
    }
    config.bbox();
}

RunConfig load_config_file(const std::string& path) {
    RunConfig config;
    load_config_file(config, path);
    return config;
}

std::string to_config_text(const RunConfig& c) {
    std::ostringstream os;
    os << "lat_max = " << format_double(c.lat_max) << '\n'
       << "lat_min = " << format_double(c.lat_min) << '\n'
       << "lon_max = " << format_double(c.lon_max) << '\n'
       << "lon_min = " << format_double(c.lon_min) << '\n';
    os << "lattices = ";
    for (std::size_t i = 0; i < c.lattices.size(); ++i) os << (i ? "," : "") << c.lattices[i];
    os << "\nvariants = ";
    for (std::size_t i = 0; i < c.variants.size(); ++i) os << (i ? "," : "") << to_string(c.variants[i]);
    os << "\nalpha = " << format_double(c.alpha) << '\n'
       << "train_fraction = " << format_double(c.split.train_fraction) << '\n'
       << "seed = " << c.split.seed << '\n'
       << "spam_k = " << c.spam_k << '\n'
       << "min_df = " << c.min_df << '\n'
       << "min_token_length = " << c.tokenizer.min_token_length << '\n'
       << "stem = " << (c.tokenizer.stem ? "true" : "false") << '\n'
       << "stopwords = " << c.stopwords.value_or("") << '\n'
       << "gazetteer = " << c.gazetteer.value_or("") << '\n'
       << "baseline_accuracy = " << (c.baseline_accuracy ? format_double(*c.baseline_accuracy) : "") << '\n'
       << "top_k = " << c.top_k << '\n';
    return os.str();
}

void validate_paths(const RunConfig& config) {
    for (const auto* path : {&config.stopwords, &config.gazetteer}) {
        if (*path && !std::filesystem::is_regular_file(**path)) {
            throw IoError("configured file '" + **path + "' does not exist");
        }
    }
}

}  // namespace geoloc
