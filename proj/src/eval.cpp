#include "geoloc/eval.hpp"

#include "geoloc/errors.hpp"
#include "geoloc/io.hpp"
#include "geoloc/random.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

namespace geoloc {

SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw DataError("train fraction must lie strictly between 0 and 1");
    }
    const auto train_size = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
    if (n < 2 || train_size == 0 || train_size >= n) {
        throw DataError("degenerate split: " + std::to_string(n) + " examples with train fraction " +
                        format_fixed(spec.train_fraction, 4) + " leaves one side empty");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(spec.seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(order[i], order[static_cast<std::size_t>(rng.below(i + 1))]);
    }
    SplitIndices out;
    out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_size));
    out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(train_size), order.end());
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

Eigen::Index ConfusionMatrix::position(GridLabel label) const {
    auto it = std::lower_bound(labels.begin(), labels.end(), label);
    return it != labels.end() && *it == label ? it - labels.begin() : -1;
}

ConfusionMatrix confusion_matrix(std::span<const GridLabel> truth, std::span<const GridLabel> predicted) {
    if (truth.size() != predicted.size()) throw DataError("truth and prediction counts differ");
    ConfusionMatrix cm;
    cm.labels.assign(truth.begin(), truth.end());
    cm.labels.insert(cm.labels.end(), predicted.begin(), predicted.end());
    std::sort(cm.labels.begin(), cm.labels.end());
    cm.labels.erase(std::unique(cm.labels.begin(), cm.labels.end()), cm.labels.end());
    const auto k = static_cast<Eigen::Index>(cm.labels.size());
    cm.counts = Eigen::MatrixXi::Zero(k, k);
    for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts(cm.position(truth[i]), cm.position(predicted[i]));
    return cm;
}

namespace {

double ratio(std::int64_t num, std::int64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace

ClassificationMetrics compute_metrics(std::span<const GridLabel> truth, std::span<const GridLabel> predicted) {
    if (truth.empty()) throw DataError("cannot score an empty test set");
    ClassificationMetrics m;
    m.confusion = confusion_matrix(truth, predicted);
    m.size = truth.size();
    const auto& counts = m.confusion.counts;
    const Eigen::VectorXi support = counts.rowwise().sum();
    const Eigen::VectorXi predicted_count = counts.colwise().sum().transpose();
    const std::int64_t correct = counts.diagonal().sum();

    std::int64_t micro_tp = 0;
    std::int64_t micro_pred = 0;
    std::int64_t micro_support = 0;
    for (Eigen::Index k = 0; k < counts.rows(); ++k) {
        if (support(k) == 0) continue;
        ClassMetrics c;
        c.label = m.confusion.labels[static_cast<std::size_t>(k)];
        c.support = support(k);
        c.predicted = predicted_count(k);
        c.precision = ratio(counts(k, k), c.predicted);
        c.recall = ratio(counts(k, k), c.support);
        c.f1 = harmonic(c.precision, c.recall);
        if (c.predicted == 0) ++m.zero_prediction_classes;
        m.macro_precision += c.precision;
        m.macro_recall += c.recall;
        m.macro_f1 += c.f1;
        micro_tp += counts(k, k);
        micro_pred += c.predicted;
        micro_support += c.support;
        m.per_class.push_back(c);
    }
    const auto classes = static_cast<double>(m.per_class.size());
    m.macro_precision /= classes;
    m.macro_recall /= classes;
    m.macro_f1 /= classes;
    m.accuracy = ratio(correct, static_cast<std::int64_t>(truth.size()));
    m.micro_precision = ratio(micro_tp, micro_pred);
    m.micro_recall = ratio(micro_tp, micro_support);
    m.micro_f1 = harmonic(m.micro_precision, m.micro_recall);
    return m;
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    const auto mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return (lower + upper) / 2.0;
}

MetricsReport evaluate(const MnbModel& model, std::span<const EvalExample> test, const LatticeSpec& lattice,
                       Variant variant) {
    if (test.empty()) throw DataError("cannot evaluate on an empty test set");
    std::vector<GridLabel> truth;
    std::vector<GridLabel> predicted;
    std::vector<double> distances;
    truth.reserve(test.size());
    predicted.reserve(test.size());
    distances.reserve(test.size());
    MetricsReport report;
    for (const auto& ex : test) {
        const auto label = predict(model, ex.features);
        truth.push_back(ex.truth);
        predicted.push_back(label);
        distances.push_back(haversine_km(ex.geo, grid_centroid(label, lattice)));
        if (!std::binary_search(model.classes().begin(), model.classes().end(), ex.truth)) ++report.unseen_test_labels;
    }
    report.lattice_n = lattice.n();
    report.variant = variant;
    report.metrics = compute_metrics(truth, predicted);
    report.radius = radius_for_lattice(lattice.n(), lattice.bbox());
    report.mean_distance_km = std::accumulate(distances.begin(), distances.end(), 0.0) / static_cast<double>(distances.size());
    report.median_distance_km = median(std::move(distances));
    report.test_size = test.size();
    report.train_size = static_cast<std::size_t>(
        std::accumulate(model.class_documents().begin(), model.class_documents().end(), std::int64_t{0}));
    return report;
}

GridLabel aggregate_user(std::span<const TweetPrediction> predictions) {
    if (predictions.empty()) throw DataError("a user needs at least one tweet prediction");
    struct Tally {
        std::size_t votes = 0;
        double score = 0.0;
    };
    std::map<GridLabel, Tally> tally;
    for (const auto& p : predictions) {
        auto& t = tally[p.label];
        ++t.votes;
        t.score += p.log_score;
    }
    // Ascending label order, so strict comparisons keep the smaller label.
    auto best = tally.begin();
    for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
        if (it->second.votes > best->second.votes ||
            (it->second.votes == best->second.votes && it->second.score > best->second.score)) {
            best = it;
        }
    }
    return best->first;
}

double user_objective(std::span<const User> users, const LatticeSpec& lattice) {
    std::string missing;
    double total = 0.0;
    for (const auto& u : users) {
        if (!u.real_location || !u.predicted_location) {
            missing += (missing.empty() ? "" : ", ") + u.user_id;
            continue;
        }
        total += haversine_km(*u.real_location, grid_centroid(*u.predicted_location, lattice));
    }
    if (!missing.empty()) throw DataError("users without a real or predicted location: " + missing);
    return total;
}

Featurizer build_featurizer(std::span<const LabeledExample> train, Tokenizer tokenizer, std::int64_t min_df) {
    DocumentFrequency df;
    for (const auto& ex : train) df.add_document(tokenizer(ex.tweet.content));
    auto vocab = build_vocabulary(df, min_df);
    return Featurizer{std::move(tokenizer), std::move(vocab)};
}

TrainingSet make_training_set(std::span<const LabeledExample> train, const Featurizer& featurizer) {
    TrainingSet set;
    set.vocab_size = static_cast<std::int32_t>(featurizer.vocabulary.size());
    set.examples.reserve(train.size());
    for (const auto& ex : train) set.examples.push_back({featurizer(ex.tweet.content), ex.label});
    return set;
}

std::vector<EvalExample> make_eval_set(std::span<const LabeledExample> test, const Featurizer& featurizer) {
    std::vector<EvalExample> out;
    out.reserve(test.size());
    for (const auto& ex : test) out.push_back({featurizer(ex.tweet.content), ex.label, ex.tweet.geo});
    return out;
}

ExperimentResult run_experiment(std::span<const LabeledExample> corpus, const ExperimentConfig& config,
                                const Tokenizer& tokenizer, const Gazetteer* gazetteer) {
    auto labeled = relabel(corpus, config.lattice);
    if (config.variant == Variant::TextPlusGeoEntities) {
        if (gazetteer == nullptr) throw UsageError("the TextPlusGeoEntities variant needs a gazetteer");
        for (auto& ex : labeled) ex = enrich(ex, *gazetteer);
    }
    const auto [train, test] = split<LabeledExample>(labeled, config.split);
    auto featurizer = build_featurizer(train, tokenizer, config.min_df);
    auto model = fit(make_training_set(train, featurizer), config.alpha);
    auto report = evaluate(model, make_eval_set(test, featurizer), config.lattice, config.variant);
    return ExperimentResult{std::move(report), std::move(featurizer), std::move(model)};
}

void write_report_csv(std::ostream& out, std::span<const MetricsReport> rows) {
    out << "lattice,variant,precision,recall,f1,radius_miles,radius_source,accuracy,micro_precision,micro_recall,"
           "micro_f1,mean_dist_km,median_dist_km,mean_dist_miles,median_dist_miles,test_size,train_size,"
           "zero_prediction_classes,unseen_test_labels\n";
    for (const auto& r : rows) {
        const auto& m = r.metrics;
        out << r.lattice_n << 'x' << r.lattice_n << ',' << to_string(r.variant) << ','
            << format_fixed(m.macro_precision, 6) << ',' << format_fixed(m.macro_recall, 6) << ','
            << format_fixed(m.macro_f1, 6) << ',' << format_fixed(r.radius.miles, 2) << ','
            << (r.radius.computed ? "computed" : "table") << ',' << format_fixed(m.accuracy, 6) << ','
            << format_fixed(m.micro_precision, 6) << ',' << format_fixed(m.micro_recall, 6) << ','
            << format_fixed(m.micro_f1, 6) << ',' << format_fixed(r.mean_distance_km, 3) << ','
            << format_fixed(r.median_distance_km, 3) << ',' << format_fixed(km_to_miles(r.mean_distance_km), 3) << ','
            << format_fixed(km_to_miles(r.median_distance_km), 3) << ',' << r.test_size << ',' << r.train_size << ','
            << m.zero_prediction_classes << ',' << r.unseen_test_labels << '\n';
    }
}

Improvement improvement_over(double baseline, double value) {
    return {(value - baseline) * 100.0, baseline == 0.0 ? 0.0 : (value - baseline) / baseline * 100.0};
}

std::string format_report_table(std::span<const MetricsReport> rows, std::optional<double> baseline_accuracy) {
    std::ostringstream os;
    os << std::left << std::setw(9) << "Lattice" << std::setw(21) << "Variant" << std::right << std::setw(10)
       << "Precision" << std::setw(8) << "Recall" << std::setw(8) << "F1" << std::setw(14) << "Radius_miles"
       << std::setw(10) << "Accuracy" << std::setw(12) << "MeanDistKm" << std::setw(14) << "MedianDistKm"
       << std::setw(10) << "TestSize" << '\n';
    for (const auto& r : rows) {
        const auto& m = r.metrics;
        const std::string lattice = std::to_string(r.lattice_n) + "x" + std::to_string(r.lattice_n);
        os << std::left << std::setw(9) << lattice << std::setw(21) << to_string(r.variant) << std::right
           << std::setw(10) << format_fixed(m.macro_precision, 2) << std::setw(8) << format_fixed(m.macro_recall, 2)
           << std::setw(8) << format_fixed(m.macro_f1, 2) << std::setw(14)
           << (format_fixed(r.radius.miles, 0) + (r.radius.computed ? "*" : "")) << std::setw(10)
           << format_fixed(m.accuracy, 4) << std::setw(12) << format_fixed(r.mean_distance_km, 1) << std::setw(14)
           << format_fixed(r.median_distance_km, 1) << std::setw(10) << r.test_size << '\n';
    }
    if (std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.radius.computed; })) {
        os << "* radius computed from the cell geometry (no tabulated value)\n";
    }
    if (baseline_accuracy) {
        for (const auto& r : rows) {
            const auto delta = improvement_over(*baseline_accuracy, r.metrics.accuracy);
            os << r.lattice_n << 'x' << r.lattice_n << ' ' << to_string(r.variant) << ": accuracy "
               << format_fixed(r.metrics.accuracy, 4) << " vs baseline " << format_fixed(*baseline_accuracy, 4) << " = "
               << (delta.absolute_points >= 0 ? "+" : "") << format_fixed(delta.absolute_points, 2)
               << " points absolute, " << (delta.relative_percent >= 0 ? "+" : "")
               << format_fixed(delta.relative_percent, 2) << "% relative\n";
        }
    }
    return os.str();
}

std::string signature_token(GridLabel cell, int term) {
    return "c" + std::to_string(cell.index) + "w" + std::to_string(term);
}

std::string background_token(int term) { return "bg" + std::to_string(term); }

std::string synthetic_place_name(GridLabel cell) { return "town" + std::to_string(cell.index) + " city"; }

SyntheticCorpus generate_synthetic_corpus(const LatticeSpec& lattice, const SynthSpec& spec) {
    if (spec.docs_per_cell < 1 || spec.vocab_per_cell < 1 || spec.tokens_per_doc < 1 || spec.tweets_per_user < 1) {
        throw std::invalid_argument("synthetic corpus parameters must be positive");
    }
    if (!(spec.noise_fraction >= 0.0 && spec.noise_fraction < 1.0)) {
        throw std::invalid_argument("noise fraction must lie in [0, 1)");
    }
    if (!(spec.description_only_fraction >= 0.0 && spec.description_only_fraction <= 1.0)) {
        throw std::invalid_argument("description-only fraction must lie in [0, 1]");
    }
    static const std::vector<std::string> fillers{"coffee lover", "dog person", "views are my own",
                                                  "music and more", "just here for the memes"};

    SyntheticCorpus corpus;
    Rng rng(spec.seed);
    const auto cells = static_cast<std::uint64_t>(lattice.cell_count());
    const auto vocab = static_cast<std::uint64_t>(spec.vocab_per_cell);
    std::uint64_t serial = 0;
    for (std::int32_t index = 1; index <= lattice.cell_count(); ++index) {
        const GridLabel cell{index};
        const auto bounds = grid_bounds(cell, lattice);
        corpus.places.push_back({synthetic_place_name(cell), grid_centroid(cell, lattice), 10000 + index});
        for (int d = 0; d < spec.docs_per_cell; ++d) {
            const bool description_only = rng.unit() < spec.description_only_fraction;
            std::string text;
            for (int t = 0; t < spec.tokens_per_doc; ++t) {
                if (!text.empty()) text.push_back(' ');
                const bool noise = rng.unit() < spec.noise_fraction;
                if (description_only && !noise) {
                    text += background_token(static_cast<int>(rng.below(kBackgroundTerms)));
                    continue;
                }
                GridLabel source = cell;
                if (noise) source = GridLabel{static_cast<std::int32_t>(rng.below(cells)) + 1};
                text += signature_token(source, static_cast<int>(rng.below(vocab)));
            }
            std::optional<std::string> description;
            if (description_only) {
                description = "living in " + synthetic_place_name(cell);
            } else if (rng.unit() < 0.5) {
                description = fillers[rng.below(fillers.size())];
            }
            // Strictly inside the cell, away from shared edges.
            const GeoPoint geo(bounds.lat_min() + (bounds.lat_max() - bounds.lat_min()) * rng.open_unit(),
                               bounds.lon_min() + (bounds.lon_max() - bounds.lon_min()) * rng.open_unit());
            CleanTweet tweet{
                .id = "s" + std::to_string(++serial),
                .user_id = "u" + std::to_string(index) + "_" + std::to_string(d / spec.tweets_per_user),
                .content = std::move(text),
                .geo = geo,
                .user_description = std::move(description),
            };
            corpus.examples.push_back({std::move(tweet), grid_index(geo, lattice), Variant::TextOnly});
        }
    }
    return corpus;
}

}  // namespace geoloc
