#include "geoloc/errors.hpp"
#include "geoloc/random.hpp"
#include "geoloc/text_pipeline.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>

using namespace geoloc;

TEST_CASE("normalize examples") {
    CHECK(normalize("Raining in #London http://t.co/x @bob") == "raining in london");
    CHECK(normalize("") == "");
    CHECK(normalize("HELLO") == "hello");
}

TEST_CASE("normalize rules") {
    CHECK(normalize("Don't STOP") == "don't stop");
    CHECK(normalize("'quoted' words''") == "quoted words");
    CHECK(normalize("see https://example.com/a?b=c now") == "see now");
    CHECK(normalize("visit www.example.org.") == "visit");
    CHECK(normalize("(http://x.co)") == "");
    CHECK(normalize("email bob@example.com") == "email bob example com");
    CHECK(normalize("hi @Alice_99, @bob!") == "hi");
    CHECK(normalize("new_york stays one token") == "new_york stays one token");
    CHECK(normalize("  lots \t of\n\nspace  ") == "lots of space");
    CHECK(normalize("rock-n-roll!!!") == "rock n roll");
    CHECK(normalize("CAFÉ ☕ Zürich") == "café ☕ zürich");
    CHECK(normalize("#") == "");
}

TEST_CASE("property: normalize is idempotent and strips markup") {
    const std::vector<std::string> pieces{"Hello", "WORLD", "#tag", "@user", "http://t.co/abc", "www.x.com",
                                          "don't", "'", "''", "a'b", "@", "#", "!!", ",", "e-mail", "x@y.z",
                                          "Ünïcode", "☕", "__", "https://", "9am", "@bo'b", "it's'", " ", "\t"};
    Rng rng(1);
    for (int i = 0; i < 5000; ++i) {
        std::string text;
        const auto parts = 1 + rng.below(10);
        for (std::uint64_t p = 0; p < parts; ++p) {
            text += pieces[rng.below(pieces.size())];
            if (rng.below(3) != 0) text += ' ';
        }
        const auto once = normalize(text);
        REQUIRE(normalize(once) == once);
        for (const auto& token : Tokenizer()(text)) {
            CHECK(std::none_of(token.begin(), token.end(), [](char c) { return c >= 'A' && c <= 'Z'; }));
            CHECK(token.find('#') == std::string::npos);
            CHECK(token.find('@') == std::string::npos);
            CHECK(token.find("://") == std::string::npos);
            CHECK(token.find("www.") == std::string::npos);
        }
    }
}

TEST_CASE("tokenize examples") {
    const Tokenizer tok;
    CHECK(tok.tokenize("raining in london") == TokenSequence{"raining", "london"});
    CHECK(tok.tokenize("").empty());
    CHECK(tok.tokenize("a b london") == TokenSequence{"london"});
    CHECK(tok("RT @x: The weather in #Chicago!") == TokenSequence{"weather", "chicago"});
}

TEST_CASE("tokenizer options") {
    CHECK(default_stopwords().size() >= 120);
    const Tokenizer keep_short(TokenizerOptions{1, false}, {});
    CHECK(keep_short.tokenize("a b in") == TokenSequence{"a", "b", "in"});
    const Tokenizer stemming(TokenizerOptions{2, true});
    CHECK(stemming.tokenize("cities buses dogs glass") == TokenSequence{"city", "buse", "dog", "glass"});
    // Code points, not bytes, count toward the minimum length.
    const Tokenizer three(TokenizerOptions{3, false}, {});
    CHECK(three.tokenize("éé abc") == TokenSequence{"abc"});
}

TEST_CASE("s_stem") {
    CHECK(s_stem("queries") == "query");
    CHECK(s_stem("aies") == "aie");
    CHECK(s_stem("shoes") == "shoe");
    CHECK(s_stem("status") == "status");
    CHECK(s_stem("class") == "class");
    CHECK(s_stem("cats") == "cat");
    CHECK(s_stem("its") == "its");
}

TEST_CASE("load_stopwords") {
    const auto words = load_stopwords(GEOLOC_DATA "/stopwords.txt");
    for (const auto& w : default_stopwords()) CHECK(words.contains(w));
    CHECK_THROWS_AS(load_stopwords("/nonexistent/stopwords.txt"), IoError);
}

TEST_CASE("build_vocabulary examples") {
    const std::vector<TokenSequence> docs{{"a", "b"}, {"b", "c"}};
    CHECK(build_vocabulary(docs, 2).terms() == std::vector<std::string>{"b"});
    const std::vector<TokenSequence> one{{"x", "y"}};
    const auto v = build_vocabulary(one, 1);
    CHECK(v.terms() == std::vector<std::string>{"x", "y"});
    CHECK(v.index_of("x") == 0);
    CHECK(v.index_of("y") == 1);
    CHECK(v.index_of("z") == -1);
    CHECK_THROWS_AS(build_vocabulary(one, 2), EmptyVocabularyError);
    CHECK_THROWS_AS(build_vocabulary(one, 0), std::invalid_argument);
    // Repeats inside a document count once.
    const std::vector<TokenSequence> repeats{{"q", "q", "q"}, {"r"}};
    CHECK_THROWS_AS(build_vocabulary(repeats, 2), EmptyVocabularyError);
}

TEST_CASE("property: vocabulary is order independent and shard merges commute") {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<TokenSequence> docs(1 + rng.below(30));
        for (auto& d : docs) {
            const auto len = rng.below(8);
            for (std::uint64_t i = 0; i < len; ++i) d.push_back("t" + std::to_string(rng.below(15)));
        }
        docs.push_back({"t0", "t1"});
        docs.push_back({"t0", "t1"});
        const auto base = build_vocabulary(docs, 2);
        auto shuffled = docs;
        for (std::size_t i = shuffled.size() - 1; i > 0; --i) std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
        CHECK(build_vocabulary(shuffled, 2) == base);

        DocumentFrequency left, right;
        const auto cut = rng.below(docs.size());
        for (std::size_t i = 0; i < docs.size(); ++i) (i < cut ? left : right).add_document(docs[i]);
        DocumentFrequency lr = left, rl = right;
        lr.merge(right);
        rl.merge(left);
        CHECK(lr.counts() == rl.counts());
        CHECK(build_vocabulary(lr, 2) == base);
    }
}

TEST_CASE("vectorize examples") {
    const Vocabulary vocab(std::vector<std::string>{"rain", "london"});
    CHECK(vocab.index_of("london") == 0);
    const auto x = vectorize({"london", "london", "rain"}, vocab);
    CHECK(x.entries == std::vector<std::pair<std::int32_t, std::int32_t>>{{0, 2}, {1, 1}});
    CHECK(vectorize({}, vocab).empty());
    const auto oov = vectorize_with_diagnostics({"x", "y", "z"}, vocab);
    CHECK(oov.vector.empty());
    CHECK(oov.oov_count == 3);
}

TEST_CASE("property: vector total equals in-vocabulary token count") {
    Rng rng(4);
    const Vocabulary vocab(std::vector<std::string>{"t1", "t3", "t5", "t7"});
    for (int trial = 0; trial < 500; ++trial) {
        TokenSequence tokens;
        const auto len = rng.below(20);
        for (std::uint64_t i = 0; i < len; ++i) tokens.push_back("t" + std::to_string(rng.below(9)));
        const auto r = vectorize_with_diagnostics(tokens, vocab);
        const auto in_vocab = std::count_if(tokens.begin(), tokens.end(), [&](const auto& t) { return vocab.index_of(t) >= 0; });
        CHECK(r.vector.total() == in_vocab);
        CHECK(r.oov_count == static_cast<std::int64_t>(tokens.size()) - in_vocab);
        CHECK(std::is_sorted(r.vector.entries.begin(), r.vector.entries.end()));
        for (const auto& [index, count] : r.vector.entries) {
            CHECK(index < static_cast<std::int32_t>(vocab.size()));
            CHECK(count > 0);
        }
    }
}
