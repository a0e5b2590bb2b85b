#include "geoloc/errors.hpp"
#include "geoloc/eval.hpp"
#include "geoloc/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

using namespace geoloc;

namespace {

const GridLabel A{1}, B{2}, C{3};

std::vector<GridLabel> random_labels(Rng& rng, std::size_t n, std::uint64_t classes) {
    std::vector<GridLabel> out(n);
    for (auto& l : out) l = GridLabel{static_cast<std::int32_t>(1 + rng.below(classes))};
    return out;
}

}  // namespace

TEST_CASE("split examples") {
    const auto s = split_indices(100, SplitSpec{0.75, 42});
    CHECK(s.train.size() == 75);
    CHECK(s.test.size() == 25);
    CHECK(std::is_sorted(s.train.begin(), s.train.end()));
    CHECK(std::is_sorted(s.test.begin(), s.test.end()));
    const auto again = split_indices(100, SplitSpec{0.75, 42});
    CHECK(again.train == s.train);
    CHECK(split_indices(100, SplitSpec{0.75, 43}).train != s.train);
    const auto four = split_indices(4, SplitSpec{0.5, 1});
    CHECK(four.train.size() == 2);
    CHECK(four.test.size() == 2);
    CHECK_THROWS_AS(split_indices(1, SplitSpec{0.75, 42}), DataError);
    CHECK_THROWS_AS(split_indices(0, SplitSpec{0.75, 42}), DataError);
    CHECK_THROWS_AS(split_indices(10, SplitSpec{1.0, 42}), DataError);
    CHECK_THROWS_AS(split_indices(10, SplitSpec{0.0, 42}), DataError);

    const std::vector<int> items{10, 11, 12, 13};
    const auto [train, test] = split<int>(items, SplitSpec{0.5, 1});
    std::vector<int> both = train;
    both.insert(both.end(), test.begin(), test.end());
    std::sort(both.begin(), both.end());
    CHECK(both == items);
}

TEST_CASE("property: split partitions the index range") {
    Rng rng(41);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = 2 + rng.below(500);
        const SplitSpec spec{0.05 + rng.unit() * 0.9, rng.next()};
        SplitIndices s;
        try {
            s = split_indices(n, spec);
        } catch (const DataError&) {
            continue;
        }
        CHECK(s.train.size() == static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n))));
        std::vector<std::size_t> all = s.train;
        all.insert(all.end(), s.test.begin(), s.test.end());
        std::sort(all.begin(), all.end());
        std::vector<std::size_t> expected(n);
        std::iota(expected.begin(), expected.end(), 0);
        CHECK(all == expected);
    }
}

TEST_CASE("metrics fixture") {
    const std::vector<GridLabel> truth{A, A, B, B};
    const std::vector<GridLabel> predicted{A, B, B, B};
    const auto m = compute_metrics(truth, predicted);
    CHECK(m.accuracy == doctest::Approx(0.75));
    CHECK(m.macro_precision == doctest::Approx(5.0 / 6.0));
    CHECK(m.macro_recall == doctest::Approx(0.75));
    CHECK(m.macro_f1 == doctest::Approx((2.0 / 3.0 + 0.8) / 2.0));
    CHECK(m.micro_precision == doctest::Approx(0.75));
    CHECK(m.micro_f1 == doctest::Approx(0.75));
    REQUIRE(m.per_class.size() == 2);
    CHECK(m.per_class[0].precision == doctest::Approx(1.0));
    CHECK(m.per_class[0].recall == doctest::Approx(0.5));
    CHECK(m.per_class[1].precision == doctest::Approx(2.0 / 3.0));
    CHECK(m.zero_prediction_classes == 0);
    CHECK(m.confusion.counts(0, 0) == 1);
    CHECK(m.confusion.counts(0, 1) == 1);
    CHECK(m.confusion.counts(1, 1) == 2);

    const auto perfect = compute_metrics(truth, truth);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.macro_f1 == 1.0);

    // A predicted class absent from the truth does not enter the macro average.
    const auto extra = compute_metrics(std::vector<GridLabel>{A, A}, std::vector<GridLabel>{A, C});
    CHECK(extra.per_class.size() == 1);
    CHECK(extra.macro_recall == doctest::Approx(0.5));
    CHECK(extra.confusion.labels == std::vector<GridLabel>{A, C});

    const auto never = compute_metrics(std::vector<GridLabel>{A, B}, std::vector<GridLabel>{A, A});
    CHECK(never.zero_prediction_classes == 1);
    CHECK(never.macro_precision == doctest::Approx(0.25));

    CHECK_THROWS_AS(compute_metrics(std::vector<GridLabel>{}, std::vector<GridLabel>{}), DataError);
    CHECK_THROWS_AS(compute_metrics(std::vector<GridLabel>{A}, std::vector<GridLabel>{A, B}), DataError);
}

TEST_CASE("property: metrics agree with a per-class count oracle") {
    Rng rng(42);
    for (int trial = 0; trial < 500; ++trial) {
        const auto n = 1 + rng.below(80);
        const auto classes = 1 + rng.below(7);
        const auto truth = random_labels(rng, n, classes);
        const auto predicted = random_labels(rng, n, classes);
        const auto m = compute_metrics(truth, predicted);
        const auto& cm = m.confusion;
        CHECK(cm.total() == static_cast<std::int64_t>(n));
        CHECK(std::is_sorted(cm.labels.begin(), cm.labels.end()));

        std::set<GridLabel> truth_labels(truth.begin(), truth.end());
        double p_sum = 0, r_sum = 0, f_sum = 0;
        std::size_t correct = 0;
        for (std::size_t i = 0; i < n; ++i) correct += truth[i] == predicted[i];
        for (const auto label : truth_labels) {
            std::int64_t tp = 0, fp = 0, fn = 0;
            for (std::size_t i = 0; i < n; ++i) {
                tp += truth[i] == label && predicted[i] == label;
                fp += truth[i] != label && predicted[i] == label;
                fn += truth[i] == label && predicted[i] != label;
            }
            const auto k = cm.position(label);
            REQUIRE(k >= 0);
            CHECK(cm.counts.row(k).sum() == tp + fn);
            CHECK(cm.counts.col(k).sum() == tp + fp);
            const double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
            const double r = static_cast<double>(tp) / static_cast<double>(tp + fn);
            p_sum += p;
            r_sum += r;
            f_sum += p + r == 0 ? 0.0 : 2 * p * r / (p + r);
        }
        const double k = static_cast<double>(truth_labels.size());
        CHECK(m.macro_precision == doctest::Approx(p_sum / k));
        CHECK(m.macro_recall == doctest::Approx(r_sum / k));
        CHECK(m.macro_f1 == doctest::Approx(f_sum / k));
        CHECK(m.accuracy == doctest::Approx(static_cast<double>(correct) / static_cast<double>(n)));
        for (double v : {m.accuracy, m.macro_precision, m.macro_recall, m.macro_f1, m.micro_f1}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("median") {
    CHECK(median({}) == 0.0);
    CHECK(median({3.0}) == 3.0);
    CHECK(median({5.0, 1.0, 3.0}) == 3.0);
    CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
}

TEST_CASE("aggregate_user") {
    CHECK(aggregate_user(std::vector<TweetPrediction>{{GridLabel{5}, -3}, {GridLabel{5}, -4}, {GridLabel{7}, -1}}) ==
          GridLabel{5});
    CHECK(aggregate_user(std::vector<TweetPrediction>{{GridLabel{9}, -1}}) == GridLabel{9});
    CHECK(aggregate_user(std::vector<TweetPrediction>{{GridLabel{5}, -3}, {GridLabel{7}, -1}}) == GridLabel{7});
    CHECK(aggregate_user(std::vector<TweetPrediction>{{GridLabel{7}, -2}, {GridLabel{5}, -2}}) == GridLabel{5});
    CHECK_THROWS_AS(aggregate_user(std::vector<TweetPrediction>{}), DataError);
}

TEST_CASE("user_objective") {
    const LatticeSpec lattice(GeoBoundingBox::us_default(), 8);
    const auto centroid = grid_centroid(GridLabel{37}, lattice);
    std::vector<User> users{{"a", {}, centroid, GridLabel{37}}};
    CHECK(user_objective(users, lattice) == doctest::Approx(0.0));
    const GeoPoint off(centroid.latitude() + 1.0, centroid.longitude());
    users.push_back({"b", {}, off, GridLabel{37}});
    CHECK(user_objective(users, lattice) == doctest::Approx(haversine_km(off, centroid)));
    CHECK(user_objective(std::vector<User>{}, lattice) == 0.0);
    users.push_back({"c", {}, std::nullopt, GridLabel{1}});
    users.push_back({"d", {}, centroid, std::nullopt});
    try {
        user_objective(users, lattice);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string what = e.what();
        CHECK(what.find("c, d") != std::string::npos);
    }
}

TEST_CASE("evaluate reports distances and unseen labels") {
    const LatticeSpec lattice(GeoBoundingBox::us_default(), 8);
    const TrainingSet data{2, {{FeatureVector{{{0, 1}}}, GridLabel{37}}, {FeatureVector{{{1, 1}}}, GridLabel{1}}}};
    const auto model = fit(data);
    const auto c37 = grid_centroid(GridLabel{37}, lattice);
    const std::vector<EvalExample> test{{FeatureVector{{{0, 1}}}, GridLabel{37}, c37},
                                        {FeatureVector{{{0, 1}}}, GridLabel{38}, grid_centroid(GridLabel{38}, lattice)}};
    const auto r = evaluate(model, test, lattice);
    CHECK(r.metrics.accuracy == 0.5);
    CHECK(r.unseen_test_labels == 1);
    CHECK(r.train_size == 2);
    CHECK(r.test_size == 2);
    const double neighbour = haversine_km(grid_centroid(GridLabel{38}, lattice), c37);
    CHECK(r.mean_distance_km == doctest::Approx(neighbour / 2));
    CHECK(r.median_distance_km == doctest::Approx(neighbour / 2));
    CHECK(r.radius.miles == 120.0);
    CHECK_FALSE(r.radius.computed);
    CHECK_THROWS_AS(evaluate(model, std::vector<EvalExample>{}, lattice), DataError);
}

TEST_CASE("report formatting") {
    MetricsReport row;
    row.lattice_n = 8;
    row.metrics.accuracy = 0.5;
    row.radius = radius_for_lattice(8);
    row.test_size = 10;
    MetricsReport computed = row;
    computed.lattice_n = 5;
    computed.radius = radius_for_lattice(5);
    const std::vector<MetricsReport> rows{row, computed};

    std::ostringstream csv;
    write_report_csv(csv, rows);
    const auto text = csv.str();
    CHECK(text.starts_with("lattice,variant,precision,recall,f1,radius_miles"));
    CHECK(text.find("8x8,TextOnly,") != std::string::npos);
    CHECK(text.find(",120.00,table,") != std::string::npos);
    CHECK(text.find(",computed,") != std::string::npos);

    const auto table = format_report_table(rows, 0.4);
    CHECK(table.find("Radius_miles") != std::string::npos);
    CHECK(table.find("+10.00 points absolute, +25.00% relative") != std::string::npos);
    CHECK(table.find("* radius computed") != std::string::npos);
    CHECK(format_report_table(std::vector<MetricsReport>{row}).find("baseline") == std::string::npos);

    const auto d = improvement_over(0.4, 0.5);
    CHECK(d.absolute_points == doctest::Approx(10.0));
    CHECK(d.relative_percent == doctest::Approx(25.0));
}

TEST_CASE("synthetic corpus") {
    const LatticeSpec lattice(GeoBoundingBox::us_default(), 4);
    SynthSpec spec;
    spec.docs_per_cell = 10;
    const auto corpus = generate_synthetic_corpus(lattice, spec);
    CHECK(corpus.examples.size() == 160);
    CHECK(corpus.places.size() == 16);
    for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
        const auto& ex = corpus.examples[i];
        const GridLabel cell{static_cast<std::int32_t>(i / 10 + 1)};
        CHECK(ex.label == cell);
        CHECK(grid_index(ex.tweet.geo, lattice) == cell);
        CHECK(ex.tweet.content.find(' ') != std::string::npos);
    }
    const auto again = generate_synthetic_corpus(lattice, spec);
    CHECK(again.examples == corpus.examples);
    spec.seed = 7;
    CHECK(generate_synthetic_corpus(lattice, spec).examples != corpus.examples);

    spec.noise_fraction = 1.5;
    CHECK_THROWS_AS(generate_synthetic_corpus(lattice, spec), std::invalid_argument);
    spec.noise_fraction = 0.0;
    spec.docs_per_cell = 0;
    CHECK_THROWS_AS(generate_synthetic_corpus(lattice, spec), std::invalid_argument);

    spec.docs_per_cell = 5;
    spec.description_only_fraction = 1.0;
    for (const auto& ex : generate_synthetic_corpus(lattice, spec).examples) {
        CHECK(ex.tweet.user_description == "living in " + synthetic_place_name(ex.label));
        for (const auto& token : split_whitespace(ex.tweet.content)) CHECK(token.starts_with("bg"));
    }
    spec.description_only_fraction = 1.5;
    CHECK_THROWS_AS(generate_synthetic_corpus(lattice, spec), std::invalid_argument);

    CHECK(signature_token(GridLabel{12}, 3) == "c12w3");
    CHECK(background_token(4) == "bg4");
    CHECK(synthetic_place_name(GridLabel{12}) == "town12 city");
}

TEST_CASE("noise-free synthetic experiment is nearly perfect") {
    const LatticeSpec lattice(GeoBoundingBox::us_default(), 4);
    SynthSpec spec;
    spec.docs_per_cell = 40;
    spec.noise_fraction = 0.0;
    const auto corpus = generate_synthetic_corpus(lattice, spec);
    ExperimentConfig config{lattice};
    const auto result = run_experiment(corpus.examples, config, Tokenizer());
    CHECK(result.report.metrics.accuracy >= 0.99);
    CHECK(result.report.mean_distance_km <= max_cell_diagonal_km(lattice));
    CHECK(result.report.test_size + result.report.train_size == corpus.examples.size());

    config.variant = Variant::TextPlusGeoEntities;
    CHECK_THROWS_AS(run_experiment(corpus.examples, config, Tokenizer()), UsageError);
}

TEST_CASE("correct predictions stay within half a cell diagonal") {
    const LatticeSpec lattice(GeoBoundingBox::us_default(), 8);
    SynthSpec spec;
    spec.docs_per_cell = 12;
    spec.noise_fraction = 0.0;
    const auto corpus = generate_synthetic_corpus(lattice, spec);
    const auto result = run_experiment(corpus.examples, ExperimentConfig{lattice}, Tokenizer());
    REQUIRE(result.report.metrics.accuracy == 1.0);
    double widest = 0.0;
    for (std::int32_t g = 1; g <= lattice.cell_count(); ++g) {
        widest = std::max(widest, half_cell_diagonal_km(GridLabel{g}, lattice));
    }
    CHECK(result.report.mean_distance_km > 0.0);
    CHECK(result.report.mean_distance_km <= widest);
    CHECK(result.report.median_distance_km <= widest);
}
