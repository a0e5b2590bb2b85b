#include "geoloc/commands.hpp"

#include "geoloc/csv.hpp"
#include "geoloc/errors.hpp"
#include "geoloc/geo_enrich.hpp"
#include "geoloc/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace geoloc::commands {

namespace fs = std::filesystem;

namespace {

void require_file(const std::string& path, std::string_view what) {
    if (!fs::is_regular_file(path)) throw IoError(std::string(what) + " '" + path + "' does not exist");
}

Gazetteer load_configured_gazetteer(const RunConfig& config) {
    if (!config.gazetteer) throw UsageError("no gazetteer configured (set gazetteer = <path>)");
    return load_gazetteer(*config.gazetteer).gazetteer;
}

std::string lattice_line(const LatticeSpec& lattice) {
    const auto& b = lattice.bbox();
    return format_double(b.lat_max()) + " " + format_double(b.lat_min()) + " " + format_double(b.lon_max()) + " " +
           format_double(b.lon_min()) + " " + std::to_string(lattice.n());
}

}  // namespace

IngestSummary ingest(const IngestOptions& options, const RunConfig& config) {
    if (options.inputs.empty()) throw UsageError("ingest needs at least one input file");
    if (options.corpus_out.empty()) throw UsageError("ingest needs an output corpus path");
    for (const auto& input : options.inputs) require_file(input, "input file");
    validate_paths(config);
    const auto lattice = config.primary_lattice();
    std::optional<Gazetteer> gazetteer;
    if (options.enrich) gazetteer = load_configured_gazetteer(config);

    IngestSummary summary;
    std::vector<std::pair<std::string, std::string>> rejects;
    const RejectSink sink = [&](std::string_view id, std::string_view reason) {
        rejects.emplace_back(std::string(id), std::string(reason));
    };

    std::vector<RawTweetRecord> records;
    for (const auto& input : options.inputs) {
        const auto parsed = for_each_tweet(input, options.format, [&](RawTweetRecord&& r) { records.push_back(std::move(r)); });
        summary.parsed += parsed.parsed;
        summary.malformed += parsed.skipped;
    }
    records = filter_bbox(std::move(records), lattice.bbox(), sink);
    summary.in_bbox = records.size();
    records = dedupe_and_despam(std::move(records), DespamOptions{config.spam_k}, sink);
    summary.after_despam = records.size();

    std::vector<CleanTweet> tweets;
    tweets.reserve(records.size());
    for (const auto& r : records) tweets.push_back(make_clean_tweet(r));
    auto labeled = assign_labels(tweets, lattice, sink);
    if (gazetteer) {
        for (auto& ex : labeled) ex = enrich(ex, *gazetteer);
    }
    summary.labeled = labeled.size();
    summary.rejected = rejects.size();

    const std::string rejects_path = options.rejects_out.empty() ? options.corpus_out + ".rejects.csv" : options.rejects_out;
    write_labeled(options.corpus_out, labeled);
    try {
        write_file_atomically(rejects_path, [&](std::ostream& out) {
            out << "id,reason\n";
            for (const auto& [id, reason] : rejects) csv::write_row(out, std::vector<std::string>{id, reason});
        });
    } catch (...) {
        std::error_code ignored;
        fs::remove(options.corpus_out, ignored);
        throw;
    }
    return summary;
}

Tokenizer FeatureSpace::make_tokenizer() const {
    return Tokenizer(tokenizer, std::unordered_set<std::string>(stopwords.begin(), stopwords.end()));
}

void save_feature_space(const std::string& path, const FeatureSpace& space) {
    write_file_atomically(path, [&](std::ostream& out) {
        out << "geoloc-features\n"
            << "schema_version " << kFeatureSchemaVersion << '\n'
            << "lattice " << lattice_line(space.lattice) << '\n'
            << "variant " << to_string(space.variant) << '\n'
            << "min_token_length " << space.tokenizer.min_token_length << '\n'
            << "stem " << (space.tokenizer.stem ? 1 : 0) << '\n'
            << "stopwords " << space.stopwords.size() << '\n';
        for (const auto& w : space.stopwords) out << w << '\n';
        out << "terms " << space.vocabulary.size() << '\n';
        for (const auto& t : space.vocabulary.terms()) out << t << '\n';
        out << "end\n";
    });
}

FeatureSpace load_feature_space(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read feature file '" + path + "'");
    std::string line;
    auto field = [&](std::string_view key) {
        if (!std::getline(in, line)) throw FormatError("feature file truncated before '" + std::string(key) + "'");
        if (!line.starts_with(std::string(key) + " ")) {
            throw FormatError("feature file: expected '" + std::string(key) + "', found '" + line + "'");
        }
        return line.substr(key.size() + 1);
    };
    auto words = [&](std::size_t count) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < count; ++i) {
            if (!std::getline(in, line)) throw FormatError("feature file truncated");
            out.push_back(line);
        }
        return out;
    };
    if (!std::getline(in, line) || line != "geoloc-features") throw FormatError("not a feature file: '" + path + "'");
    const auto version = field("schema_version");
    if (version != std::to_string(kFeatureSchemaVersion)) {
        throw FormatError("feature file: expected schema_version " + std::to_string(kFeatureSchemaVersion) +
                          ", found " + version);
    }
    std::istringstream lat(field("lattice"));
    std::string lat_max, lat_min, lon_max, lon_min, n;
    if (!(lat >> lat_max >> lat_min >> lon_max >> lon_min >> n)) throw FormatError("feature file: bad lattice line");
    LatticeSpec lattice(GeoBoundingBox(parse_double(lat_max), parse_double(lat_min), parse_double(lon_max),
                                       parse_double(lon_min)),
                        static_cast<int>(parse_int(n)));
    const auto variant = parse_variant(field("variant"));
    TokenizerOptions options;
    options.min_token_length = static_cast<std::size_t>(parse_int(field("min_token_length")));
    options.stem = field("stem") == "1";
    auto stopwords = words(static_cast<std::size_t>(parse_int(field("stopwords"))));
    auto terms = words(static_cast<std::size_t>(parse_int(field("terms"))));
    if (!std::getline(in, line) || line != "end") throw FormatError("feature file truncated (missing 'end')");
    return FeatureSpace{lattice, variant, options, std::move(stopwords), Vocabulary(std::move(terms))};
}

TrainSummary train(const std::string& corpus_path, const std::string& model_path, const RunConfig& config) {
    if (model_path.empty()) throw UsageError("train needs a model output path");
    require_file(corpus_path, "corpus");
    validate_paths(config);
    const auto lattice = config.primary_lattice();
    auto corpus = read_labeled(corpus_path);
    if (corpus.empty()) throw DataError("corpus '" + corpus_path + "' has no examples");
    if (const auto bad = inconsistent_labels(corpus, lattice); !bad.empty()) {
        throw DataError(std::to_string(bad.size()) + " corpus labels disagree with the " + std::to_string(lattice.n()) +
                        "x" + std::to_string(lattice.n()) + " lattice (first: " + bad.front() + ")");
    }
    const auto variant = config.variants.front();
    if (variant == Variant::TextPlusGeoEntities) {
        const auto gazetteer = load_configured_gazetteer(config);
        for (auto& ex : corpus) ex = enrich(ex, gazetteer);
    }
    const auto featurizer = build_featurizer(corpus, config.make_tokenizer(), config.min_df);
    const auto model = fit(make_training_set(corpus, featurizer), config.alpha);

    std::vector<std::string> stopwords(featurizer.tokenizer.stopwords().begin(), featurizer.tokenizer.stopwords().end());
    std::sort(stopwords.begin(), stopwords.end());
    save_model(model_path, model);
    try {
        save_feature_space(feature_space_path(model_path),
                           FeatureSpace{lattice, variant, config.tokenizer, std::move(stopwords), featurizer.vocabulary});
    } catch (...) {
        std::error_code ignored;
        fs::remove(model_path, ignored);
        throw;
    }

    TrainSummary summary{corpus.size(), model.class_count(), featurizer.vocabulary.size(), model.alpha(), {}};
    if (model.class_count() == 1) summary.warnings.push_back("corpus has a single class; every prediction will be " +
                                                             to_string(model.classes().front()));
    return summary;
}

EvaluateOutputs evaluate(const std::string& corpus_path, const std::string& report_dir, const RunConfig& config) {
    if (report_dir.empty()) throw UsageError("evaluate needs a report directory");
    require_file(corpus_path, "corpus");
    validate_paths(config);
    const auto bbox = config.bbox();
    const auto corpus = read_labeled(corpus_path);
    if (corpus.size() < 2) throw DataError("corpus '" + corpus_path + "' is too small to split");
    std::optional<Gazetteer> gazetteer;
    if (std::find(config.variants.begin(), config.variants.end(), Variant::TextPlusGeoEntities) != config.variants.end()) {
        gazetteer = load_configured_gazetteer(config);
    }
    const auto tokenizer = config.make_tokenizer();

    EvaluateOutputs out;
    for (const int n : config.lattices) {
        for (const auto variant : config.variants) {
            const ExperimentConfig experiment{LatticeSpec(bbox, n), variant, config.alpha, config.split, config.min_df};
            out.rows.push_back(
                run_experiment(corpus, experiment, tokenizer, gazetteer ? &*gazetteer : nullptr).report);
        }
    }

    fs::create_directories(report_dir);
    out.csv_path = (fs::path(report_dir) / "report.csv").string();
    out.table_path = (fs::path(report_dir) / "report.txt").string();
    out.config_path = (fs::path(report_dir) / "run_config.txt").string();
    write_file_atomically(out.csv_path, [&](std::ostream& os) { write_report_csv(os, out.rows); });
    write_file_atomically(out.table_path,
                          [&](std::ostream& os) { os << format_report_table(out.rows, config.baseline_accuracy); });
    write_file_atomically(out.config_path, [&](std::ostream& os) { os << to_config_text(config); });
    return out;
}

std::vector<Prediction> predict(const PredictOptions& options, const RunConfig& config) {
    require_file(options.model_path, "model");
    const auto model = load_model(options.model_path);
    const auto space = load_feature_space(feature_space_path(options.model_path));
    if (static_cast<std::size_t>(model.vocab_size()) != space.vocabulary.size()) {
        throw DataError("model/vocabulary mismatch: model has " + std::to_string(model.vocab_size()) +
                        " terms, vocabulary file has " + std::to_string(space.vocabulary.size()));
    }
    if (model.classes().back().index > space.lattice.cell_count()) {
        throw DataError("model/lattice mismatch: class " + to_string(model.classes().back()) + " outside the " +
                        std::to_string(space.lattice.n()) + "x" + std::to_string(space.lattice.n()) + " lattice");
    }
    std::optional<Gazetteer> gazetteer;
    if (space.variant == Variant::TextPlusGeoEntities && options.description) {
        validate_paths(config);
        gazetteer = load_configured_gazetteer(config);
    }
    const Featurizer featurizer{space.make_tokenizer(), space.vocabulary};

    std::vector<Prediction> out;
    for (const auto& text : options.texts) {
        const auto feature_text = gazetteer ? enrich_text(text, options.description, *gazetteer) : text;
        const auto x = featurizer(feature_text);
        auto top = top_k(model, x, std::max<std::size_t>(1, options.top_k));
        const auto label = top.front().label;
        out.push_back(Prediction{text, label, grid_centroid(label, space.lattice), std::move(top), x.empty()});
    }
    return out;
}

std::string format_predictions(const std::vector<Prediction>& predictions, bool json) {
    if (json) {
        auto array = nlohmann::json::array();
        for (const auto& p : predictions) {
            auto top = nlohmann::json::array();
            for (const auto& s : p.top) top.push_back({{"label", to_string(s.label)}, {"log_score", s.log_score}});
            array.push_back({{"text", p.text},
                             {"label", to_string(p.label)},
                             {"latitude", p.centroid.latitude()},
                             {"longitude", p.centroid.longitude()},
                             {"empty_features", p.empty_features},
                             {"top", top}});
        }
        return array.dump() + "\n";
    }
    std::ostringstream os;
    for (const auto& p : predictions) {
        os << to_string(p.label) << '\t' << format_fixed(p.centroid.latitude(), 6) << '\t'
           << format_fixed(p.centroid.longitude(), 6) << '\t';
        for (std::size_t i = 0; i < p.top.size(); ++i) {
            os << (i ? " " : "") << to_string(p.top[i].label) << ':' << format_fixed(p.top[i].log_score, 4);
        }
        os << '\n';
    }
    return os.str();
}

std::size_t synth(const SynthOptions& options, const RunConfig& config) {
    if (options.corpus_out.empty()) throw UsageError("synth needs an output corpus path");
    const auto corpus = generate_synthetic_corpus(config.primary_lattice(), options.spec);
    write_labeled(options.corpus_out, corpus.examples);
    if (options.gazetteer_out) {
        write_file_atomically(*options.gazetteer_out, [&](std::ostream& out) {
            out << "# name\tlatitude\tlongitude\tpopulation\n";
            for (const auto& p : corpus.places) {
                out << p.name << '\t' << format_double(p.point.latitude()) << '\t' << format_double(p.point.longitude())
                    << '\t' << p.population << '\n';
            }
        });
    }
    return corpus.examples.size();
}

}  // namespace geoloc::commands
