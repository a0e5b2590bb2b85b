// geoloc: grid-based tweet geolocation with multinomial naive Bayes.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 internal invariant violation.

#include "geoloc/commands.hpp"
#include "geoloc/errors.hpp"
#include "geoloc/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    bool json = false;
    std::vector<std::string> settings;  // key=value overrides
};

geoloc::RunConfig resolve_config(const GlobalOptions& g) {
    geoloc::RunConfig config;
    if (!g.config_path.empty()) geoloc::load_config_file(config, g.config_path);
    for (const auto& kv : g.settings) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw geoloc::UsageError("--set expects key=value, got '" + kv + "'");
        geoloc::apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (g.seed) config.split.seed = *g.seed;
    config.bbox();
    return config;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw geoloc::IoError("cannot read '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid-based geolocation of short messages"};
    app.require_subcommand(1);
    GlobalOptions global;
    app.add_option("--config", global.config_path, "Run config file (key = value lines)");
    app.add_option("--seed", global.seed, "Random seed (overrides the config)");
    app.add_option("--set", global.settings, "Override a config setting, key=value (repeatable)");
    app.add_flag("--quiet", global.quiet, "Suppress progress and summary output");
    app.add_flag("--json", global.json, "Machine-readable output");

    geoloc::commands::IngestOptions ingest;
    std::string format = "jsonl";
    auto* ingest_cmd = app.add_subcommand("ingest", "Filter, clean and grid-label raw tweet files");
    ingest_cmd->add_option("inputs", ingest.inputs, "Input files")->required();
    ingest_cmd->add_option("--format", format, "Input format: jsonl or csv");
    ingest_cmd->add_option("-o,--out", ingest.corpus_out, "Labeled corpus output (CSV)")->required();
    ingest_cmd->add_option("--rejects", ingest.rejects_out, "Reject file (default <out>.rejects.csv)");
    ingest_cmd->add_flag("--enrich", ingest.enrich, "Append gazetteer entities from user descriptions");

    std::string corpus_path;
    std::string model_path;
    auto* train_cmd = app.add_subcommand("train", "Train a model on a labeled corpus");
    train_cmd->add_option("corpus", corpus_path, "Labeled corpus")->required();
    train_cmd->add_option("-m,--model", model_path, "Model output path")->required();

    std::string report_dir;
    auto* eval_cmd = app.add_subcommand("evaluate", "Split/train/evaluate for every configured lattice and variant");
    eval_cmd->add_option("corpus", corpus_path, "Labeled corpus")->required();
    eval_cmd->add_option("-o,--out", report_dir, "Report directory")->required();

    geoloc::commands::PredictOptions predict;
    std::vector<std::string> texts;
    std::string input_file;
    std::optional<std::string> description;
    std::optional<std::size_t> top_k;
    auto* predict_cmd = app.add_subcommand("predict", "Predict the grid cell of messages");
    predict_cmd->add_option("-m,--model", predict.model_path, "Model file")->required();
    predict_cmd->add_option("--text", texts, "Message text (repeatable)");
    predict_cmd->add_option("--input", input_file, "File with one message per line");
    predict_cmd->add_option("--description", description, "User profile description");
    predict_cmd->add_option("--top-k", top_k, "Number of scored cells to print");

    geoloc::commands::SynthOptions synth;
    std::optional<std::string> synth_gazetteer;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
    synth_cmd->add_option("-o,--out", synth.corpus_out, "Corpus output")->required();
    synth_cmd->add_option("--docs-per-cell", synth.spec.docs_per_cell);
    synth_cmd->add_option("--vocab-per-cell", synth.spec.vocab_per_cell);
    synth_cmd->add_option("--noise", synth.spec.noise_fraction);
    synth_cmd->add_option("--tokens-per-doc", synth.spec.tokens_per_doc);
    synth_cmd->add_option("--description-only", synth.spec.description_only_fraction,
                          "Share of documents located only through the user description");
    synth_cmd->add_option("--gazetteer-out", synth_gazetteer, "Also write the synthetic place gazetteer (TSV)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    auto& log = std::cerr;
    try {
        const auto config = resolve_config(global);
        if (ingest_cmd->parsed()) {
            ingest.format = geoloc::parse_input_format(format);
            const auto s = geoloc::commands::ingest(ingest, config);
            if (global.json) {
                std::cout << nlohmann::json{{"parsed", s.parsed},     {"malformed", s.malformed},
                                            {"in_bbox", s.in_bbox},   {"after_despam", s.after_despam},
                                            {"labeled", s.labeled},   {"rejected", s.rejected}}
                                 .dump()
                          << '\n';
            } else if (!global.quiet) {
                log << "parsed " << s.parsed << " (" << s.malformed << " malformed), in bbox " << s.in_bbox
                    << ", after despam " << s.after_despam << ", labeled " << s.labeled << ", rejected " << s.rejected
                    << '\n';
            }
            if (s.labeled == 0 && !global.quiet) log << "warning: corpus is empty\n";
        } else if (train_cmd->parsed()) {
            const auto s = geoloc::commands::train(corpus_path, model_path, config);
            if (!global.quiet) {
                for (const auto& w : s.warnings) log << "warning: " << w << '\n';
            }
            if (global.json) {
                std::cout << nlohmann::json{{"documents", s.documents},
                                            {"classes", s.classes},
                                            {"vocab_size", s.vocab_size},
                                            {"alpha", s.alpha}}
                                 .dump()
                          << '\n';
            } else if (!global.quiet) {
                log << "trained on " << s.documents << " documents: " << s.classes << " classes, V=" << s.vocab_size
                    << ", alpha=" << s.alpha << '\n';
            }
        } else if (eval_cmd->parsed()) {
            const auto out = geoloc::commands::evaluate(corpus_path, report_dir, config);
            if (global.json) {
                std::cout << geoloc::read_file(out.csv_path);
            } else if (!global.quiet) {
                std::cout << geoloc::read_file(out.table_path);
            }
        } else if (predict_cmd->parsed()) {
            predict.texts = texts;
            if (!input_file.empty()) {
                const auto lines = read_lines(input_file);
                predict.texts.insert(predict.texts.end(), lines.begin(), lines.end());
            }
            if (predict.texts.empty()) throw geoloc::UsageError("predict needs --text or --input");
            predict.description = description;
            predict.top_k = top_k.value_or(config.top_k);
            const auto predictions = geoloc::commands::predict(predict, config);
            if (!global.quiet) {
                for (const auto& p : predictions) {
                    if (p.empty_features) log << "warning: no known terms in '" << p.text << "', using the prior\n";
                }
            }
            std::cout << geoloc::commands::format_predictions(predictions, global.json);
        } else if (synth_cmd->parsed()) {
            synth.spec.seed = config.split.seed;
            synth.gazetteer_out = synth_gazetteer;
            const auto count = geoloc::commands::synth(synth, config);
            if (!global.quiet) log << "wrote " << count << " synthetic examples\n";
        }
    } catch (const geoloc::UsageError& e) {
        log << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const geoloc::Error& e) {
        log << "error: " << e.what() << '\n';
        return kData;
    } catch (const std::invalid_argument& e) {
        log << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        log << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kOk;
}
