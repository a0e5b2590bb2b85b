#include "geoloc/mnb.hpp"

#include "geoloc/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

namespace geoloc {

namespace {

std::string hex_double(double value) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::hex);
    return std::string(buf.data(), end);
}

double parse_hex_double(std::string_view text) {
    double value = 0.0;
    const auto [end, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value, std::chars_format::hex);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
        throw FormatError("model file: bad hex float '" + std::string(text) + "'");
    }
    return value;
}

// Reads "key value" and checks the key.
std::string expect_field(std::istream& in, std::string_view key) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("model file truncated before '" + std::string(key) + "'");
    const auto space = line.find(' ');
    if (space == std::string::npos || std::string_view(line).substr(0, space) != key) {
        throw FormatError("model file: expected '" + std::string(key) + "', found '" + line + "'");
    }
    return line.substr(space + 1);
}

}  // namespace

std::vector<ScoredLabel> top_k(const MnbModel& model, const FeatureVector& x, std::size_t k) {
    const auto scores = predict_log_scores(model, x);
    std::vector<std::size_t> order(model.class_count());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
    });
    order.resize(std::min(k, order.size()));
    std::vector<ScoredLabel> out;
    for (auto i : order) out.push_back({model.classes()[i], scores(static_cast<Eigen::Index>(i))});
    return out;
}

void save_model(std::ostream& out, const MnbModel& model) {
    char fp[17];
    std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(model.fingerprint()));
    out << "geoloc-mnb-model\n"
        << "schema_version " << kModelSchemaVersion << '\n'
        << "alpha " << hex_double(model.alpha()) << '\n'
        << "vocab_size " << model.vocab_size() << '\n'
        << "class_count " << model.class_count() << '\n'
        << "fingerprint " << fp << '\n';
    for (std::size_t k = 0; k < model.class_count(); ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        out << "class " << to_string(model.classes()[k]) << ' ' << model.class_documents()[k] << ' '
            << hex_double(model.log_prior()(row)) << '\n';
        for (Eigen::Index t = 0; t < model.log_likelihood().cols(); ++t) {
            if (t) out << ' ';
            out << hex_double(model.log_likelihood()(row, t));
        }
        out << '\n';
    }
    out << "end\n";
}

void save_model(const std::string& path, const MnbModel& model) {
    write_file_atomically(path, [&](std::ostream& out) { save_model(out, model); });
}

MnbModel load_model(std::istream& in) {
    std::string magic;
    if (!std::getline(in, magic) || magic != "geoloc-mnb-model") {
        throw FormatError("not a model file (missing 'geoloc-mnb-model' header)");
    }
    const auto version = expect_field(in, "schema_version");
    if (version != std::to_string(kModelSchemaVersion)) {
        throw FormatError("model file: expected schema_version " + std::to_string(kModelSchemaVersion) + ", found " +
                          version);
    }
    const double alpha = parse_hex_double(expect_field(in, "alpha"));
    const auto vocab = parse_int(expect_field(in, "vocab_size"));
    const auto classes = parse_int(expect_field(in, "class_count"));
    const auto fp_text = expect_field(in, "fingerprint");
    std::uint64_t fingerprint = 0;
    if (auto [p, ec] = std::from_chars(fp_text.data(), fp_text.data() + fp_text.size(), fingerprint, 16);
        ec != std::errc{} || p != fp_text.data() + fp_text.size()) {
        throw FormatError("model file: bad fingerprint");
    }
    if (vocab < 1 || classes < 1 || vocab > (1 << 28) || classes > (1 << 28)) {
        throw FormatError("model file: bad dimensions");
    }

    std::vector<GridLabel> labels;
    std::vector<std::int64_t> docs;
    MnbModel::Vector prior(classes);
    MnbModel::Matrix likelihood(classes, vocab);
    for (Eigen::Index k = 0; k < classes; ++k) {
        std::istringstream header(expect_field(in, "class"));
        std::string label, prior_text;
        std::int64_t count = -1;
        if (!(header >> label >> count >> prior_text) || count < 0) throw FormatError("model file: bad class record");
        try {
            labels.push_back(parse_grid_label(label));
        } catch (const InvalidLabelError& e) {
            throw FormatError(std::string("model file: ") + e.what());
        }
        docs.push_back(count);
        prior(k) = parse_hex_double(prior_text);

        std::string row;
        if (!std::getline(in, row)) throw FormatError("model file truncated inside class " + label);
        std::istringstream values(row);
        std::string value;
        Eigen::Index t = 0;
        while (values >> value) {
            if (t >= vocab) throw FormatError("model file: too many likelihoods for class " + label);
            likelihood(k, t++) = parse_hex_double(value);
        }
        if (t != vocab) throw FormatError("model file truncated inside class " + label);
    }
    std::string end;
    if (!std::getline(in, end) || end != "end") throw FormatError("model file truncated (missing 'end')");
    if (!std::is_sorted(labels.begin(), labels.end()) ||
        std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
        throw FormatError("model file: classes must be unique and ascending");
    }
    return MnbModel(std::move(labels), std::move(docs), std::move(prior), std::move(likelihood), alpha, fingerprint);
}

MnbModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read model '" + path + "'");
    return load_model(in);
}

}  // namespace geoloc
