#pragma once

#include "geoloc/errors.hpp"
#include "geoloc/geo_grid.hpp"
#include "geoloc/text_pipeline.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace geoloc {

struct TrainingExample {
    FeatureVector features;
    GridLabel label;
};

/// Labeled count vectors over a vocabulary of `vocab_size` terms.
struct TrainingSet {
    std::int32_t vocab_size = 0;
    std::vector<TrainingExample> examples;
};

/// Per-class document and term counts. Shards built independently merge by
/// summation, so any partitioning of the training data gives the same model.
template <typename Scalar>
class MnbCounts {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    explicit MnbCounts(std::int32_t vocab_size) : vocab_size_(vocab_size) {
        if (vocab_size < 1) throw EmptyVocabularyError("multinomial model needs a non-empty vocabulary");
    }

    void add(const FeatureVector& x, GridLabel label) {
        auto [it, inserted] = classes_.try_emplace(label, ClassCounts{0, Vector::Zero(vocab_size_)});
        auto& cls = it->second;
        ++cls.documents;
        for (const auto& [term, count] : x.entries) {
            if (term < 0 || term >= vocab_size_) throw std::out_of_range("feature index outside vocabulary");
            cls.terms[term] += static_cast<Scalar>(count);
        }
    }

    void merge(const MnbCounts& other) {
        if (other.vocab_size_ != vocab_size_) throw std::invalid_argument("cannot merge counts over different vocabularies");
        for (const auto& [label, cls] : other.classes_) {
            auto [it, inserted] = classes_.try_emplace(label, cls);
            if (!inserted) {
                it->second.documents += cls.documents;
                it->second.terms += cls.terms;
            }
        }
    }

    std::int32_t vocab_size() const noexcept { return vocab_size_; }
    std::int64_t documents() const noexcept {
        std::int64_t n = 0;
        for (const auto& [label, cls] : classes_) n += cls.documents;
        return n;
    }

    struct ClassCounts {
        std::int64_t documents;
        Vector terms;
    };
    const std::map<GridLabel, ClassCounts>& classes() const noexcept { return classes_; }

private:
    std::int32_t vocab_size_;
    std::map<GridLabel, ClassCounts> classes_;
};

/// Multinomial naive Bayes over grid-cell classes. Classes are kept in
/// ascending label order; row k of every matrix belongs to classes()[k].
template <typename Scalar>
class BasicMnbModel {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    BasicMnbModel(std::vector<GridLabel> classes, std::vector<std::int64_t> class_documents, Vector log_prior,
                  Matrix log_likelihood, Scalar alpha, std::uint64_t fingerprint)
        : classes_(std::move(classes)),
          class_documents_(std::move(class_documents)),
          log_prior_(std::move(log_prior)),
          log_likelihood_(std::move(log_likelihood)),
          alpha_(alpha),
          fingerprint_(fingerprint) {
        const auto k = static_cast<Eigen::Index>(classes_.size());
        if (k == 0 || log_prior_.size() != k || log_likelihood_.rows() != k || log_likelihood_.cols() == 0 ||
            static_cast<Eigen::Index>(class_documents_.size()) != k) {
            throw std::invalid_argument("inconsistent model dimensions");
        }
    }

    const std::vector<GridLabel>& classes() const noexcept { return classes_; }
    const std::vector<std::int64_t>& class_documents() const noexcept { return class_documents_; }
    const Vector& log_prior() const noexcept { return log_prior_; }
    /// classes x vocabulary
    const Matrix& log_likelihood() const noexcept { return log_likelihood_; }
    Scalar alpha() const noexcept { return alpha_; }
    std::int32_t vocab_size() const noexcept { return static_cast<std::int32_t>(log_likelihood_.cols()); }
    std::size_t class_count() const noexcept { return classes_.size(); }
    /// Hash of the training counts the model was fit on.
    std::uint64_t fingerprint() const noexcept { return fingerprint_; }

private:
    std::vector<GridLabel> classes_;
    std::vector<std::int64_t> class_documents_;
    Vector log_prior_;
    Matrix log_likelihood_;
    Scalar alpha_;
    std::uint64_t fingerprint_;
};

using MnbModel = BasicMnbModel<double>;

namespace detail {

inline void fnv_mix(std::uint64_t& h, std::uint64_t value) {
    for (int i = 0; i < 8; ++i) {
        h ^= (value >> (8 * i)) & 0xFFu;
        h *= 0x100000001b3ULL;
    }
}

}  // namespace detail

/// Largest deviation of the per-class likelihood sums and of the prior sum
/// from one, in linear space.
template <typename Scalar>
Scalar normalization_error(const BasicMnbModel<Scalar>& model) {
    using std::abs;
    Scalar worst = abs(model.log_prior().array().exp().sum() - Scalar(1));
    const auto row_sums = model.log_likelihood().array().exp().rowwise().sum();
    for (Eigen::Index k = 0; k < row_sums.size(); ++k) worst = std::max(worst, abs(row_sums(k) - Scalar(1)));
    return worst;
}

/// Laplace/Lidstone smoothed fit: log P(t|c) = log((n_ct + alpha) / (n_c + alpha V)).
template <typename Scalar>
BasicMnbModel<Scalar> fit(const MnbCounts<Scalar>& counts, Scalar alpha) {
    if (!(alpha > Scalar(0))) throw std::invalid_argument("smoothing alpha must be > 0");
    const auto total_docs = counts.documents();
    if (total_docs == 0) throw DataError("cannot fit a model on an empty training set");

    const auto k = static_cast<Eigen::Index>(counts.classes().size());
    const Eigen::Index v = counts.vocab_size();
    std::vector<GridLabel> labels;
    std::vector<std::int64_t> docs;
    typename BasicMnbModel<Scalar>::Vector log_prior(k);
    typename BasicMnbModel<Scalar>::Matrix term_counts(k, v);

    std::uint64_t hash = 0xcbf29ce484222325ULL;
    Eigen::Index row = 0;
    for (const auto& [label, cls] : counts.classes()) {
        labels.push_back(label);
        docs.push_back(cls.documents);
        log_prior(row) = std::log(static_cast<Scalar>(cls.documents) / static_cast<Scalar>(total_docs));
        term_counts.row(row) = cls.terms.transpose();
        detail::fnv_mix(hash, static_cast<std::uint64_t>(label.index));
        detail::fnv_mix(hash, static_cast<std::uint64_t>(cls.documents));
        for (Eigen::Index t = 0; t < v; ++t) detail::fnv_mix(hash, static_cast<std::uint64_t>(cls.terms(t)));
        ++row;
    }

    const auto denominators = (term_counts.rowwise().sum().array() + alpha * static_cast<Scalar>(v)).eval();
    typename BasicMnbModel<Scalar>::Matrix log_likelihood =
        ((term_counts.array() + alpha).colwise() / denominators).log().matrix();

    BasicMnbModel<Scalar> model(std::move(labels), std::move(docs), std::move(log_prior), std::move(log_likelihood), alpha,
                                hash);
    if (!(normalization_error(model) <= Scalar(1e-9))) {
        throw std::logic_error("fitted model is not normalized");
    }
    return model;
}

template <typename Scalar = double>
BasicMnbModel<Scalar> fit(const TrainingSet& data, Scalar alpha = Scalar(1)) {
    if (data.examples.empty()) throw DataError("cannot fit a model on an empty training set");
    MnbCounts<Scalar> counts(data.vocab_size);
    for (const auto& ex : data.examples) counts.add(ex.features, ex.label);
    return fit(counts, alpha);
}

/// Per-class log P(c) + sum_t x_t log P(t|c), aligned with model.classes().
template <typename Scalar>
typename BasicMnbModel<Scalar>::Vector predict_log_scores(const BasicMnbModel<Scalar>& model, const FeatureVector& x) {
    typename BasicMnbModel<Scalar>::Vector scores = model.log_prior();
    for (const auto& [term, count] : x.entries) {
        if (term < 0 || term >= model.vocab_size()) throw std::out_of_range("feature index outside vocabulary");
        scores.noalias() += static_cast<Scalar>(count) * model.log_likelihood().col(term);
    }
    return scores;
}

/// Index into classes() of the best score; ties go to the smaller label.
template <typename Derived>
Eigen::Index argmax_first(const Eigen::MatrixBase<Derived>& scores) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < scores.size(); ++k) {
        if (scores(k) > scores(best)) best = k;
    }
    return best;
}

template <typename Scalar>
GridLabel predict(const BasicMnbModel<Scalar>& model, const FeatureVector& x) {
    return model.classes()[static_cast<std::size_t>(argmax_first(predict_log_scores(model, x)))];
}

struct ScoredLabel {
    GridLabel label;
    double log_score;
};

/// Best `k` classes, descending by score, ties by smaller label.
std::vector<ScoredLabel> top_k(const MnbModel& model, const FeatureVector& x, std::size_t k);

inline constexpr int kModelSchemaVersion = 1;

/// Plain-text model file; every log value is a hex float so a reload is
/// bit-exact.
void save_model(std::ostream& out, const MnbModel& model);
void save_model(const std::string& path, const MnbModel& model);
/// Throws FormatError on a truncated file or a schema mismatch.
MnbModel load_model(std::istream& in);
MnbModel load_model(const std::string& path);

}  // namespace geoloc
