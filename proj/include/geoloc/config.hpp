#pragma once

#include "geoloc/corpus.hpp"
#include "geoloc/eval.hpp"
#include "geoloc/geo_grid.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace geoloc {

/// Settings shared by every subcommand. Loaded from key=value files; the
/// same format doubles as the lattice configuration file.
struct RunConfig {
    // Kept as raw edges so settings may arrive in any order; bbox() validates.
    double lat_max = 83.162102;
    double lat_min = 5.49955;
    double lon_max = -52.23304;
    double lon_min = -167.276413;
    std::vector<int> lattices{8};
    std::vector<Variant> variants{Variant::TextOnly};
    double alpha = 1.0;
    SplitSpec split;
    std::size_t spam_k = 10;
    std::int64_t min_df = 2;
    TokenizerOptions tokenizer;
    std::optional<std::string> stopwords;  // path; built-in list when absent
    std::optional<std::string> gazetteer;  // path
    std::optional<double> baseline_accuracy;
    std::size_t top_k = 3;

    /// The lattice used by single-lattice commands (the first configured).
    LatticeSpec primary_lattice() const { return LatticeSpec(bbox(), lattices.front()); }
    /// Throws UsageError when the edges do not form a valid box.
    GeoBoundingBox bbox() const;
    Tokenizer make_tokenizer() const;
};

/// Applies one key=value setting. Throws UsageError for unknown keys or bad
/// values. Relative paths are resolved against `base_dir`.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value,
                   const std::string& base_dir = {});

/// Reads "key = value" lines ('#' comments allowed) on top of `config`.
void load_config_file(RunConfig& config, const std::string& path);
RunConfig load_config_file(const std::string& path);

/// Every resolved setting, one per line, in a fixed order.
std::string to_config_text(const RunConfig& config);

/// Existence check for every path the config refers to.
void validate_paths(const RunConfig& config);

}  // namespace geoloc
