#include <gtest/gtest.h>

#include <fstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "tmfix/textnorm.hpp"

using namespace tmfix;
using namespace tmfix::textnorm;
using testing_support::source_path;

namespace {

std::vector<std::pair<std::string, std::string>> load_tsv(const std::string& rel) {
    std::ifstream in(source_path(rel));
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    while (std::getline(in, line)) {
        auto tab = line.find('\t');
        if (tab == std::string::npos) continue;
        out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    return out;
}

NormalizationConfig english_only() {
    NormalizationConfig cfg;
    cfg.profiles = {english_profile()};
    return cfg;
}

}  // namespace

TEST(Stemmer, EnglishVocabularyFixtures) {
    const auto pairs = load_tsv("tests/data/snowball_english.tsv");
    ASSERT_GE(pairs.size(), 1000u);
    std::size_t failures = 0;
    for (const auto& [word, expected] : pairs) {
        const auto got = stem::stem_english(word);
        if (got != expected && ++failures <= 10) ADD_FAILURE() << word << " -> " << got << ", expected " << expected;
    }
    EXPECT_EQ(failures, 0u);
}

TEST(Stemmer, GermanVocabularyFixtures) {
    const auto pairs = load_tsv("tests/data/snowball_german.tsv");
    ASSERT_GE(pairs.size(), 1000u);
    std::size_t failures = 0;
    for (const auto& [word, expected] : pairs) {
        const auto got = stem::stem_german(word);
        if (got != expected && ++failures <= 10) ADD_FAILURE() << word << " -> " << got << ", expected " << expected;
    }
    EXPECT_EQ(failures, 0u);
}

TEST(Stemmer, ClassicPorterExamples) {
    EXPECT_EQ(stem::stem_english("caresses"), "caress");
    EXPECT_EQ(stem::stem_english("ponies"), "poni");
    EXPECT_EQ(stem::stem_english("generously"), "generous");
    EXPECT_EQ(stem::stem_german("aufeinanderfolgenden"), "aufeinanderfolg");
}

TEST(Tokenize, Examples) {
    EXPECT_EQ(tokenize("Social policy, and welfare"),
              (std::vector<std::string>{"Social", "policy", "and", "welfare"}));
    EXPECT_TRUE(tokenize("").empty());
    EXPECT_EQ(tokenize("Sozialwissenschaften"), (std::vector<std::string>{"Sozialwissenschaften"}));
}

TEST(Tokenize, KeepsUmlautsAndSharpS) {
    EXPECT_EQ(tokenize("Größe über Straße"), (std::vector<std::string>{"Größe", "über", "Straße"}));
}

TEST(Tokenize, SplitsHyphensAndUnicodeSpace) {
    EXPECT_EQ(tokenize("Arbeits-markt Politik x"),
              (std::vector<std::string>{"Arbeits", "markt", "Politik", "x"}));
}

TEST(Tokenize, NeverEmitsWhitespaceOrEmptyTokens) {
    testing_support::EventGen gen(7);
    for (int i = 0; i < 2000; ++i) {
        for (const auto& t : tokenize(gen.text(30, true))) {
            ASSERT_FALSE(t.empty());
            for (char c : t) ASSERT_TRUE(c != ' ' && c != '\t' && c != '\n' && c != '\r');
        }
    }
}

TEST(NormalizeTerm, StopwordIsDropped) {
    EXPECT_FALSE(normalize_term("the", default_config(), true));
    EXPECT_FALSE(normalize_term("UND", default_config(), true));
}

TEST(NormalizeTerm, LengthFilter) {
    auto cfg = default_config();
    EXPECT_FALSE(normalize_term("zq", cfg, true));
    ASSERT_TRUE(normalize_term("zq", cfg, false));
    EXPECT_EQ(normalize_term("zqx", cfg, true)->str(), "zqx");
    // counts code points, not bytes
    EXPECT_FALSE(normalize_term("äö", cfg, true));
}

TEST(NormalizeTerm, EnglishProfileStems) {
    auto r = normalize_term("caresses", english_only(), true);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->str(), "caress");
}

TEST(NormalizeTerm, CaseFoldsBeforeStemming) {
    auto cfg = default_config();
    EXPECT_EQ(normalize_term("Sozialwissenschaften", cfg, true)->str(), "sozialwissenschaft");
    EXPECT_EQ(normalize_term("SOZIALWISSENSCHAFTEN", cfg, true)->str(), "sozialwissenschaft");
}

TEST(NormalizeTerm, ComposedAndDecomposedAgree) {
    auto cfg = default_config();
    EXPECT_EQ(normalize_term("Grüße", cfg, true), normalize_term("Grüße", cfg, true));
}

TEST(NormalizeTerm, StopwordAbsorptionAnyCasing) {
    const auto cfg = default_config();
    for (const auto& p : cfg.profiles) {
        for (const auto& w : p.stopwords) {
            ASSERT_FALSE(normalize_term(w, cfg, false)) << w;
            std::string upper;
            for (char32_t cp : unicode::decode_utf8(w)) {
                unicode::append_utf8(upper, (cp >= U'a' && cp <= U'z') ? cp - 32 : cp);
            }
            ASSERT_FALSE(normalize_term(upper, cfg, false)) << upper;
        }
    }
}

TEST(NormalizeTerm, Deterministic) {
    const auto cfg = default_config();
    testing_support::EventGen gen(11);
    for (int i = 0; i < 500; ++i) {
        for (const auto& t : tokenize(gen.text(12, true))) {
            EXPECT_EQ(normalize_term(t, cfg, true), normalize_term(t, cfg, true));
        }
    }
}

TEST(Blacklist, Examples) {
    NormalizationConfig cfg = default_config();
    cfg.blacklist = {Stem("author")};
    std::vector<Stem> in{Stem("author"), Stem("migrat")};
    EXPECT_EQ(apply_blacklist(in, cfg), std::vector<Stem>{Stem("migrat")});
    EXPECT_TRUE(apply_blacklist(std::vector<Stem>{}, cfg).empty());
    cfg.blacklist.clear();
    EXPECT_EQ(apply_blacklist(std::vector<Stem>{Stem("migrat")}, cfg), std::vector<Stem>{Stem("migrat")});
    EXPECT_EQ(in.size(), 2u);
}

TEST(Blacklist, SoundOnDefaultList) {
    const auto cfg = default_config();
    std::vector<Stem> terms(cfg.blacklist.begin(), cfg.blacklist.end());
    terms.push_back(Stem("armut"));
    auto out = apply_blacklist(terms, cfg);
    ASSERT_EQ(out.size(), 1u);
    for (const auto& s : out) EXPECT_FALSE(cfg.blacklist.contains(s));
}

TEST(Blacklist, ShippedFileMatchesBuiltin) {
    auto file = make_blacklist(load_word_list(source_path("data/blacklist.txt")));
    EXPECT_EQ(file, default_config().blacklist);
    // entries are already normalized
    for (const auto& b : file) EXPECT_EQ(unicode::fold(b.str()), b.str());
}

TEST(Stopwords, ShippedFilesMatchBuiltinProfiles) {
    EXPECT_EQ(folded_set(load_word_list(source_path("data/stopwords/de.txt"))), german_profile().stopwords);
    EXPECT_EQ(folded_set(load_word_list(source_path("data/stopwords/en.txt"))), english_profile().stopwords);
}

TEST(Stopwords, ProfilesNonemptyAndFolded) {
    for (const auto& p : default_config().profiles) {
        EXPECT_FALSE(p.stopwords.empty());
        for (const auto& w : p.stopwords) EXPECT_EQ(unicode::fold(w), w);
    }
}

TEST(WordList, CommentsAndBlankLinesIgnored) {
    EXPECT_EQ(parse_word_list("# header\n\nund\n  der \r\n#x\n"), (std::vector<std::string>{"und", "der"}));
}

TEST(Config, LoadsFromFile) {
    auto dir = testing_support::temp_dir("normcfg");
    {
        std::ofstream(dir / "sw.txt") << "# test\nfoo\nBar\n";
        std::ofstream(dir / "bl.txt") << "zzz\n";
        std::ofstream(dir / "cfg.json")
            << R"({"profiles": [{"id": "xx", "stopwords": "sw.txt", "stemmer": "none"}, "en"],
                   "min_search_term_len": 2, "blacklist": "bl.txt"})";
    }
    auto cfg = load_config(dir / "cfg.json");
    ASSERT_EQ(cfg.profiles.size(), 2u);
    EXPECT_EQ(cfg.stemmer(), StemmerId::none);
    EXPECT_TRUE(cfg.is_stopword("bar"));
    EXPECT_TRUE(cfg.is_stopword("the"));
    EXPECT_EQ(cfg.min_search_term_len, 2u);
    EXPECT_EQ(cfg.blacklist, std::set<Stem>{Stem("zzz")});
    EXPECT_EQ(normalize_term("Running", cfg, true)->str(), "running");
}

TEST(Config, RejectsBadValues) {
    auto dir = testing_support::temp_dir("normcfg-bad");
    std::ofstream(dir / "a.json") << R"({"min_search_term_len": 0})";
    std::ofstream(dir / "b.json") << R"({"profiles": ["fr"]})";
    try {
        load_config(dir / "a.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::invalid_config);
        EXPECT_EQ(e.field(), "min_search_term_len");
    }
    EXPECT_THROW(load_config(dir / "b.json"), Error);
    EXPECT_THROW(load_config(dir / "missing.json"), Error);
}
