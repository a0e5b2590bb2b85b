#include "geoloc/text_pipeline.hpp"

#include "geoloc/errors.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace geoloc {

namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_word(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}

// ASCII plus the Latin-1 supplement capitals (U+00C0..U+00DE, except U+00D7).
std::string fold_case(std::string_view text) {
    std::string out(text);
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto c = static_cast<unsigned char>(out[i]);
        if (c >= 'A' && c <= 'Z') {
            out[i] = static_cast<char>(c + 32);
        } else if (c == 0xC3 && i + 1 < out.size()) {
            auto next = static_cast<unsigned char>(out[i + 1]);
            if (next >= 0x80 && next <= 0x9E && next != 0x97) out[i + 1] = static_cast<char>(next + 0x20);
            ++i;
        }
    }
    return out;
}

bool starts_with_at(std::string_view s, std::size_t pos, std::string_view prefix) {
    return s.substr(pos, prefix.size()) == prefix;
}

// Blanks out URLs and @-mentions. Both must start at a token boundary.
std::string strip_urls_and_mentions(std::string s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const bool boundary = i == 0 || !is_word(static_cast<unsigned char>(s[i - 1]));
        if (boundary && (starts_with_at(s, i, "http://") || starts_with_at(s, i, "https://") ||
                         starts_with_at(s, i, "www."))) {
            while (i < s.size() && !is_space(static_cast<unsigned char>(s[i]))) s[i++] = ' ';
            continue;
        }
        if (boundary && s[i] == '@' && i + 1 < s.size() && is_word(static_cast<unsigned char>(s[i + 1]))) {
            s[i++] = ' ';
            while (i < s.size() && is_word(static_cast<unsigned char>(s[i]))) s[i++] = ' ';
            continue;
        }
        ++i;
    }
    return s;
}

std::size_t codepoint_count(std::string_view s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string normalize(std::string_view text) {
    const std::string stripped = strip_urls_and_mentions(fold_case(text));
    std::string out;
    out.reserve(stripped.size());
    bool pending_space = false;
    for (std::size_t i = 0; i < stripped.size(); ++i) {
        const auto c = static_cast<unsigned char>(stripped[i]);
        bool keep = is_word(c);
        if (c == '\'') {
            keep = i > 0 && i + 1 < stripped.size() && is_word(static_cast<unsigned char>(stripped[i - 1])) &&
                   is_word(static_cast<unsigned char>(stripped[i + 1]));
        }
        if (!keep) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(c));
    }
    return out;
}

std::vector<std::string> split_whitespace(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
        const std::size_t start = i;
        while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) tokens.emplace_back(text.substr(start, i - start));
    }
    return tokens;
}

const std::vector<std::string>& default_stopwords() {
    static const std::vector<std::string> words{
        "a",       "about",   "above",   "after",   "again",   "against", "all",     "am",      "an",
        "and",     "any",     "are",     "aren't",  "as",      "at",      "be",      "because", "been",
        "before",  "being",   "below",   "between", "both",    "but",     "by",      "can",     "can't",
        "cannot",  "could",   "couldn't", "did",    "didn't",  "do",      "does",    "doesn't", "doing",
        "don't",   "down",    "during",  "each",    "few",     "for",     "from",    "further", "had",
        "hadn't",  "has",     "hasn't",  "have",    "haven't", "having",  "he",      "her",     "here",
        "hers",    "herself", "him",     "himself", "his",     "how",     "i",       "i'm",     "if",
        "in",      "into",    "is",      "isn't",   "it",      "it's",    "its",     "itself",  "just",
        "me",      "more",    "most",    "my",      "myself",  "no",      "nor",     "not",     "now",
        "of",      "off",     "on",      "once",    "only",    "or",      "other",   "our",     "ours",
        "ourselves", "out",   "over",    "own",     "rt",      "same",    "she",     "should",  "so",
        "some",    "such",    "than",    "that",    "the",     "their",   "theirs",  "them",    "themselves",
        "then",    "there",   "these",   "they",    "this",    "those",   "through", "to",      "too",
        "under",   "until",   "up",      "very",    "was",     "wasn't",  "we",      "were",    "weren't",
        "what",    "when",    "where",   "which",   "while",   "who",     "whom",    "why",     "will",
        "with",    "won't",   "would",   "you",     "you're",  "your",    "yours",   "yourself", "yourselves",
    };
    return words;
}

std::unordered_set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read stopword list '" + path + "'");
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        auto tokens = split_whitespace(line);
        if (tokens.empty() || tokens.front().starts_with('#')) continue;
        words.insert(normalize(tokens.front()));
    }
    return words;
}

std::string s_stem(std::string_view token) {
    std::string word(token);
    if (word.size() <= 3) return word;
    if (ends_with(word, "ies") && !ends_with(word, "eies") && !ends_with(word, "aies")) {
        word.replace(word.size() - 3, 3, "y");
    } else if (ends_with(word, "es") && !ends_with(word, "aes") && !ends_with(word, "ees") && !ends_with(word, "oes")) {
        word.pop_back();
    } else if (ends_with(word, "s") && !ends_with(word, "us") && !ends_with(word, "ss")) {
        word.pop_back();
    }
    return word;
}

Tokenizer::Tokenizer() : Tokenizer(TokenizerOptions{}) {}

Tokenizer::Tokenizer(TokenizerOptions options)
    : Tokenizer(options, {default_stopwords().begin(), default_stopwords().end()}) {}

Tokenizer::Tokenizer(TokenizerOptions options, std::unordered_set<std::string> stopwords)
    : options_(options), stopwords_(std::move(stopwords)) {}

std::vector<std::string> Tokenizer::tokenize(std::string_view normalized) const {
    std::vector<std::string> tokens;
    for (auto& token : split_whitespace(normalized)) {
        if (codepoint_count(token) < options_.min_token_length || stopwords_.contains(token)) continue;
        tokens.push_back(options_.stem ? s_stem(token) : std::move(token));
    }
    return tokens;
}

std::int64_t FeatureVector::total() const noexcept {
    std::int64_t sum = 0;
    for (const auto& [index, count] : entries) sum += count;
    return sum;
}

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
    std::sort(terms_.begin(), terms_.end());
    terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
}

std::int32_t Vocabulary::index_of(std::string_view term) const {
    const auto it = std::lower_bound(terms_.begin(), terms_.end(), term);
    if (it == terms_.end() || *it != term) return -1;
    return static_cast<std::int32_t>(it - terms_.begin());
}

void DocumentFrequency::add_document(const TokenSequence& tokens) {
    std::vector<std::string_view> unique(tokens.begin(), tokens.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (auto term : unique) {
        auto it = df_.find(term);
        if (it == df_.end()) {
            df_.emplace(std::string(term), 1);
        } else {
            ++it->second;
        }
    }
}

void DocumentFrequency::merge(const DocumentFrequency& other) {
    for (const auto& [term, count] : other.df_) df_[term] += count;
}

Vocabulary build_vocabulary(const DocumentFrequency& df, std::int64_t min_df) {
    if (min_df < 1) throw std::invalid_argument("min_df must be >= 1");
    std::vector<std::string> terms;
    for (const auto& [term, count] : df.counts()) {
        if (count >= min_df) terms.push_back(term);
    }
    if (terms.empty()) {
        throw EmptyVocabularyError("no term occurs in at least " + std::to_string(min_df) + " documents");
    }
    return Vocabulary(std::move(terms));
}

Vocabulary build_vocabulary(std::span<const TokenSequence> corpus, std::int64_t min_df) {
    DocumentFrequency df;
    for (const auto& doc : corpus) df.add_document(doc);
    return build_vocabulary(df, min_df);
}

VectorizeResult vectorize_with_diagnostics(const TokenSequence& tokens, const Vocabulary& vocab) {
    VectorizeResult result;
    std::vector<std::int32_t> indices;
    indices.reserve(tokens.size());
    for (const auto& token : tokens) {
        const auto index = vocab.index_of(token);
        if (index < 0) {
            ++result.oov_count;
        } else {
            indices.push_back(index);
        }
    }
    std::sort(indices.begin(), indices.end());
    for (const auto index : indices) {
        if (!result.vector.entries.empty() && result.vector.entries.back().first == index) {
            ++result.vector.entries.back().second;
        } else {
            result.vector.entries.emplace_back(index, 1);
        }
    }
    return result;
}

}  // namespace geoloc
