#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace geoloc {

/// Lowercase, URL-free, mention-free, punctuation-free text. Keeps word
/// characters (ASCII alphanumerics, '_', any non-ASCII byte) and apostrophes
/// that sit between two word characters; hashtags lose their '#'.
/// Idempotent.
std::string normalize(std::string_view text);

std::vector<std::string> split_whitespace(std::string_view text);

/// English stopwords used when no list file is configured.
const std::vector<std::string>& default_stopwords();

/// One word per line; blank lines and '#' comments ignored.
std::unordered_set<std::string> load_stopwords(const std::string& path);

/// Plural-stripping suffix stemmer (Harman's S-stemmer).
std::string s_stem(std::string_view token);

struct TokenizerOptions {
    std::size_t min_token_length = 2;  // in code points
    bool stem = false;
};

class Tokenizer {
public:
    Tokenizer();
    explicit Tokenizer(TokenizerOptions options);
    Tokenizer(TokenizerOptions options, std::unordered_set<std::string> stopwords);

    /// Whitespace split of already-normalized text, dropping short tokens
    /// and stopwords.
    std::vector<std::string> tokenize(std::string_view normalized) const;

    /// normalize + tokenize.
    std::vector<std::string> operator()(std::string_view raw) const { return tokenize(normalize(raw)); }

    const TokenizerOptions& options() const noexcept { return options_; }
    bool is_stopword(const std::string& token) const { return stopwords_.contains(token); }
    const std::unordered_set<std::string>& stopwords() const noexcept { return stopwords_; }

private:
    TokenizerOptions options_;
    std::unordered_set<std::string> stopwords_;
};

using TokenSequence = std::vector<std::string>;

/// Sparse term counts, sorted by term index, counts strictly positive.
struct FeatureVector {
    std::vector<std::pair<std::int32_t, std::int32_t>> entries;  // (term index, count)

    bool empty() const noexcept { return entries.empty(); }
    std::int64_t total() const noexcept;
};

/// Term -> index bijection onto [0, V), indices in lexicographic term order.
class Vocabulary {
public:
    Vocabulary() = default;
    /// Terms need not be sorted or unique.
    explicit Vocabulary(std::vector<std::string> terms);

    std::size_t size() const noexcept { return terms_.size(); }
    bool empty() const noexcept { return terms_.empty(); }
    /// -1 when absent.
    std::int32_t index_of(std::string_view term) const;
    const std::string& term(std::int32_t index) const { return terms_.at(static_cast<std::size_t>(index)); }
    const std::vector<std::string>& terms() const noexcept { return terms_; }

    friend bool operator==(const Vocabulary&, const Vocabulary&) = default;

private:
    std::vector<std::string> terms_;
};

/// Document-frequency counts; merging shards is a commutative sum.
class DocumentFrequency {
public:
    void add_document(const TokenSequence& tokens);
    void merge(const DocumentFrequency& other);
    const std::map<std::string, std::int64_t, std::less<>>& counts() const noexcept { return df_; }

private:
    std::map<std::string, std::int64_t, std::less<>> df_;
};

/// Terms found in at least min_df documents. Throws EmptyVocabularyError if
/// none qualify and std::invalid_argument if min_df < 1.
Vocabulary build_vocabulary(std::span<const TokenSequence> corpus, std::int64_t min_df);
Vocabulary build_vocabulary(const DocumentFrequency& df, std::int64_t min_df);

struct VectorizeResult {
    FeatureVector vector;
    std::int64_t oov_count = 0;
};

VectorizeResult vectorize_with_diagnostics(const TokenSequence& tokens, const Vocabulary& vocab);

inline FeatureVector vectorize(const TokenSequence& tokens, const Vocabulary& vocab) {
    return vectorize_with_diagnostics(tokens, vocab).vector;
}

}  // namespace geoloc
