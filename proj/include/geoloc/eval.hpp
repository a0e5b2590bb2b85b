#pragma once

#include "geoloc/corpus.hpp"
#include "geoloc/geo_enrich.hpp"
#include "geoloc/geo_grid.hpp"
#include "geoloc/mnb.hpp"
#include "geoloc/text_pipeline.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace geoloc {

// ---------------------------------------------------------------------------
// Train/test split

struct SplitSpec {
    double train_fraction = 0.75;
    std::uint64_t seed = 42;
};

struct SplitIndices {
    std::vector<std::size_t> train;  // ascending
    std::vector<std::size_t> test;   // ascending
};

/// Seeded shuffle of [0, n); the first round(fraction * n) go to training.
/// Throws DataError when either side would be empty.
SplitIndices split_indices(std::size_t n, const SplitSpec& spec);

template <typename T>
std::pair<std::vector<T>, std::vector<T>> split(std::span<const T> corpus, const SplitSpec& spec) {
    const auto idx = split_indices(corpus.size(), spec);
    std::pair<std::vector<T>, std::vector<T>> out;
    out.first.reserve(idx.train.size());
    out.second.reserve(idx.test.size());
    for (auto i : idx.train) out.first.push_back(corpus[i]);
    for (auto i : idx.test) out.second.push_back(corpus[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Classification metrics

/// Rows are true labels, columns predicted labels, both in `labels` order.
struct ConfusionMatrix {
    std::vector<GridLabel> labels;  // ascending union of truth and predictions
    Eigen::MatrixXi counts;

    std::int64_t total() const { return counts.cast<std::int64_t>().sum(); }
    /// Position of `label` in `labels`, or -1.
    Eigen::Index position(GridLabel label) const;
};

ConfusionMatrix confusion_matrix(std::span<const GridLabel> truth, std::span<const GridLabel> predicted);

struct ClassMetrics {
    GridLabel label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;    // true instances
    std::int64_t predicted = 0;  // predicted instances
};

struct ClassificationMetrics {
    std::size_t size = 0;
    double accuracy = 0.0;
    // Averaged over labels present in the truth; a class that is never
    // predicted contributes precision 0.
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double micro_precision = 0.0;
    double micro_recall = 0.0;
    double micro_f1 = 0.0;
    std::size_t zero_prediction_classes = 0;
    std::vector<ClassMetrics> per_class;  // labels present in the truth
    ConfusionMatrix confusion;
};

/// Throws DataError on empty or mismatched inputs.
ClassificationMetrics compute_metrics(std::span<const GridLabel> truth, std::span<const GridLabel> predicted);

// ---------------------------------------------------------------------------
// Model evaluation

struct EvalExample {
    FeatureVector features;
    GridLabel truth;
    GeoPoint geo;
};

struct MetricsReport {
    int lattice_n = 0;
    Variant variant = Variant::TextOnly;
    ClassificationMetrics metrics;
    LatticeRadius radius;
    double mean_distance_km = 0.0;
    double median_distance_km = 0.0;
    std::size_t test_size = 0;
    std::size_t train_size = 0;
    /// Test examples whose true label never occurred in training.
    std::size_t unseen_test_labels = 0;
};

/// Predicts every test example; distance error is measured from the true
/// geotag to the centroid of the predicted cell. Throws DataError when
/// `test` is empty.
MetricsReport evaluate(const MnbModel& model, std::span<const EvalExample> test, const LatticeSpec& lattice,
                       Variant variant = Variant::TextOnly);

/// Median of a copy of `values`; 0 when empty.
double median(std::vector<double> values);

// ---------------------------------------------------------------------------
// Per-user aggregation and the distance objective

struct TweetPrediction {
    GridLabel label;
    double log_score = 0.0;
};

/// Majority vote; ties go to the larger summed log-score, then to the smaller
/// label. Throws DataError when empty.
GridLabel aggregate_user(std::span<const TweetPrediction> predictions);

/// Sum over users of the distance from the real location to the centroid of
/// the predicted cell, in km. Throws DataError naming users that lack either.
double user_objective(std::span<const User> users, const LatticeSpec& lattice);

// ---------------------------------------------------------------------------
// Experiment harness

struct FeatureOptions {
    TokenizerOptions tokenizer;
    std::int64_t min_df = 2;
};

struct Featurizer {
    Tokenizer tokenizer;
    Vocabulary vocabulary;

    FeatureVector operator()(std::string_view text) const { return vectorize(tokenizer(text), vocabulary); }
};

/// Vocabulary over the training texts.
Featurizer build_featurizer(std::span<const LabeledExample> train, Tokenizer tokenizer, std::int64_t min_df);

TrainingSet make_training_set(std::span<const LabeledExample> train, const Featurizer& featurizer);
std::vector<EvalExample> make_eval_set(std::span<const LabeledExample> test, const Featurizer& featurizer);

struct ExperimentConfig {
    LatticeSpec lattice;
    Variant variant = Variant::TextOnly;
    double alpha = 1.0;
    SplitSpec split;
    std::int64_t min_df = 2;
};

struct ExperimentResult {
    MetricsReport report;
    Featurizer featurizer;
    MnbModel model;
};

/// Relabels `corpus` on the configured lattice, enriches it when the variant
/// asks for it (requires `gazetteer`), splits, trains and evaluates.
ExperimentResult run_experiment(std::span<const LabeledExample> corpus, const ExperimentConfig& config,
                                const Tokenizer& tokenizer, const Gazetteer* gazetteer = nullptr);

// ---------------------------------------------------------------------------
// Reports

void write_report_csv(std::ostream& out, std::span<const MetricsReport> rows);

/// Aligned text table with the published column set plus extras. When a
/// baseline accuracy is given, each row also states the absolute (points)
/// and relative (%) change against it.
std::string format_report_table(std::span<const MetricsReport> rows, std::optional<double> baseline_accuracy = {});

struct Improvement {
    double absolute_points;
    double relative_percent;
};
Improvement improvement_over(double baseline, double value);

// ---------------------------------------------------------------------------
// Synthetic corpora

struct SynthSpec {
    int docs_per_cell = 200;
    int vocab_per_cell = 5;
    double noise_fraction = 0.1;
    std::uint64_t seed = 42;
    int tokens_per_doc = 8;
    int tweets_per_user = 4;
    /// Share of documents whose text carries no signature tokens beyond the
    /// usual noise and whose only location signal is a place name in the
    /// user description.
    double description_only_fraction = 0.0;
};

struct SyntheticCorpus {
    std::vector<LabeledExample> examples;
    /// One place per cell, at the cell centroid.
    std::vector<GazetteerEntry> places;
};

/// Every cell gets a disjoint signature vocabulary; each token is a
/// signature token with probability 1 - noise_fraction and otherwise drawn
/// uniformly from all cells' vocabularies. Description-only documents use
/// background tokens in place of their own signature. Geotags are uniform
/// inside the cell. Deterministic per seed.
SyntheticCorpus generate_synthetic_corpus(const LatticeSpec& lattice, const SynthSpec& spec);

std::string signature_token(GridLabel cell, int term);
/// Location-neutral filler used by description-only documents.
inline constexpr std::uint64_t kBackgroundTerms = 20;
std::string background_token(int term);
std::string synthetic_place_name(GridLabel cell);

}  // namespace geoloc
