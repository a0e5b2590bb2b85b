#pragma once

#include "geoloc/config.hpp"
#include "geoloc/corpus.hpp"
#include "geoloc/eval.hpp"
#include "geoloc/mnb.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

// Subcommand bodies. The CLI only parses arguments and maps exceptions to
// exit codes; everything observable lives here.
namespace geoloc::commands {

struct IngestOptions {
    std::vector<std::string> inputs;
    InputFormat format = InputFormat::Jsonl;
    std::string corpus_out;
    std::string rejects_out;  // defaults to <corpus_out>.rejects.csv
    bool enrich = false;      // needs config.gazetteer
};

struct IngestSummary {
    std::size_t parsed = 0;
    std::size_t malformed = 0;
    std::size_t in_bbox = 0;
    std::size_t after_despam = 0;
    std::size_t labeled = 0;
    std::size_t rejected = 0;
};

/// parse -> bbox filter -> dedupe/despam -> label [-> enrich]. Outputs are
/// written only once every stage has succeeded.
IngestSummary ingest(const IngestOptions& options, const RunConfig& config);

/// Vocabulary plus everything needed to rebuild feature vectors and map
/// labels back to the map at prediction time.
struct FeatureSpace {
    LatticeSpec lattice;
    Variant variant = Variant::TextOnly;
    TokenizerOptions tokenizer;
    std::vector<std::string> stopwords;  // sorted
    Vocabulary vocabulary;

    Tokenizer make_tokenizer() const;
};

inline constexpr int kFeatureSchemaVersion = 1;

void save_feature_space(const std::string& path, const FeatureSpace& space);
FeatureSpace load_feature_space(const std::string& path);

/// Companion file holding the vocabulary for a model.
inline std::string feature_space_path(const std::string& model_path) { return model_path + ".vocab"; }

struct TrainSummary {
    std::size_t documents = 0;
    std::size_t classes = 0;
    std::size_t vocab_size = 0;
    double alpha = 1.0;
    std::vector<std::string> warnings;
};

/// Trains on the stored labels, which must agree with the config's first
/// lattice. Writes the model and its feature-space file.
TrainSummary train(const std::string& corpus_path, const std::string& model_path, const RunConfig& config);

struct EvaluateOutputs {
    std::vector<MetricsReport> rows;
    std::string csv_path;
    std::string table_path;
    std::string config_path;
};

/// One report row per (lattice, variant). Writes report.csv, report.txt and
/// run_config.txt into `report_dir`.
EvaluateOutputs evaluate(const std::string& corpus_path, const std::string& report_dir, const RunConfig& config);

struct Prediction {
    std::string text;
    GridLabel label;
    GeoPoint centroid;
    std::vector<ScoredLabel> top;
    bool empty_features = false;
};

struct PredictOptions {
    std::string model_path;
    std::vector<std::string> texts;
    std::optional<std::string> description;
    std::size_t top_k = 3;
};

/// Throws DataError when the model and its feature space disagree.
std::vector<Prediction> predict(const PredictOptions& options, const RunConfig& config);

std::string format_predictions(const std::vector<Prediction>& predictions, bool json);

struct SynthOptions {
    SynthSpec spec;
    std::string corpus_out;
    std::optional<std::string> gazetteer_out;
};

/// Writes a synthetic labeled corpus on the config's first lattice.
std::size_t synth(const SynthOptions& options, const RunConfig& config);

}  // namespace geoloc::commands
