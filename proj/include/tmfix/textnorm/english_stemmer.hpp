#pragma once

// Snowball English ("Porter2") stemmer. Input must already be lowercase;
// non-ASCII bytes are treated as consonants.

#include <array>
#include <string>
#include <string_view>
#include <utility>

namespace tmfix::stem {

namespace english_detail {

inline bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

inline bool ends_with(std::string_view w, std::string_view suffix) {
    return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

inline bool has_vowel(std::string_view w) {
    for (char c : w) {
        if (is_vowel(c)) return true;
    }
    return false;
}

// vowel-consonant boundary at or after `from`; returns the index just past it
inline std::size_t region_start(std::string_view w, std::size_t from) {
    for (std::size_t i = from + 1; i < w.size(); ++i) {
        if (!is_vowel(w[i]) && is_vowel(w[i - 1])) return i + 1;
    }
    return w.size();
}

inline bool ends_in_short_syllable(std::string_view w) {
    const auto n = w.size();
    if (n == 2) return is_vowel(w[0]) && !is_vowel(w[1]);
    if (n < 3) return false;
    const char last = w[n - 1];
    return !is_vowel(w[n - 3]) && is_vowel(w[n - 2]) && !is_vowel(last) && last != 'w' &&
           last != 'x' && last != 'Y';
}

struct Rule {
    std::string_view suffix;
    std::string_view replacement;
};

// Returns the longest rule whose suffix ends `w`, or nullptr.
template <std::size_t N>
const Rule* longest_suffix(std::string_view w, const std::array<Rule, N>& rules) {
    const Rule* best = nullptr;
    for (const auto& r : rules) {
        if (ends_with(w, r.suffix) && (!best || r.suffix.size() > best->suffix.size())) best = &r;
    }
    return best;
}

inline bool valid_li_ending(char c) {
    return c == 'c' || c == 'd' || c == 'e' || c == 'g' || c == 'h' || c == 'k' || c == 'm' ||
           c == 'n' || c == 'r' || c == 't';
}

inline bool is_double(std::string_view w) {
    if (w.size() < 2) return false;
    const char c = w.back();
    if (w[w.size() - 2] != c) return false;
    return c == 'b' || c == 'd' || c == 'f' || c == 'g' || c == 'm' || c == 'n' || c == 'p' ||
           c == 'r' || c == 't';
}

inline constexpr std::array<std::pair<std::string_view, std::string_view>, 18> exceptions1{{
    {"skis", "ski"},     {"skies", "sky"},   {"dying", "die"},   {"lying", "lie"},
    {"tying", "tie"},    {"idly", "idl"},    {"gently", "gentl"}, {"ugly", "ugli"},
    {"early", "earli"},  {"only", "onli"},   {"singly", "singl"}, {"sky", "sky"},
    {"news", "news"},    {"howe", "howe"},   {"atlas", "atlas"}, {"cosmos", "cosmos"},
    {"bias", "bias"},    {"andes", "andes"},
}};

inline constexpr std::array<std::string_view, 8> exceptions2{
    "inning", "outing", "canning", "herring", "earring", "proceed", "exceed", "succeed"};

inline constexpr std::array<Rule, 24> step2_rules{{
    {"tional", "tion"}, {"enci", "ence"},    {"anci", "ance"},   {"abli", "able"},
    {"entli", "ent"},   {"izer", "ize"},     {"ization", "ize"}, {"ational", "ate"},
    {"ation", "ate"},   {"ator", "ate"},     {"alism", "al"},    {"aliti", "al"},
    {"alli", "al"},     {"fulness", "ful"},  {"ousli", "ous"},   {"ousness", "ous"},
    {"iveness", "ive"}, {"iviti", "ive"},    {"biliti", "ble"},  {"bli", "ble"},
    {"ogi", "og"},      {"fulli", "ful"},    {"lessli", "less"}, {"li", ""},
}};

inline constexpr std::array<Rule, 9> step3_rules{{
    {"tional", "tion"}, {"ational", "ate"}, {"alize", "al"}, {"icate", "ic"}, {"iciti", "ic"},
    {"ical", "ic"},     {"ful", ""},        {"ness", ""},    {"ative", ""},
}};

inline constexpr std::array<Rule, 18> step4_rules{{
    {"al", ""},  {"ance", ""}, {"ence", ""}, {"er", ""},    {"ic", ""},   {"able", ""}, {"ible", ""},
    {"ant", ""}, {"ement", ""}, {"ment", ""}, {"ent", ""},  {"ism", ""},  {"ate", ""},  {"iti", ""},
    {"ous", ""}, {"ive", ""},  {"ize", ""},  {"ion", ""},
}};

class EnglishStemmer {
public:
    std::string operator()(std::string word) {
        for (const auto& [from, to] : exceptions1) {
            if (word == from) return std::string(to);
        }
        if (word.size() < 3) return word;

        prelude(word);
        if (word.empty()) return word;
        mark_regions(word);

        step0(word);
        step1a(word);
        for (auto e : exceptions2) {
            if (word == e) return word;
        }
        step1b(word);
        step1c(word);
        step2(word);
        step3(word);
        step4(word);
        step5(word);

        for (auto& c : word) {
            if (c == 'Y') c = 'y';
        }
        return word;
    }

private:
    std::size_t r1_ = 0;
    std::size_t r2_ = 0;

    static void prelude(std::string& w) {
        if (!w.empty() && w[0] == '\'') w.erase(0, 1);
        if (!w.empty() && w[0] == 'y') w[0] = 'Y';
        for (std::size_t i = 1; i < w.size(); ++i) {
            if (w[i] == 'y' && is_vowel(w[i - 1])) w[i] = 'Y';
        }
    }

    void mark_regions(std::string_view w) {
        if (w.starts_with("gener") || w.starts_with("arsen")) {
            r1_ = 5;
        } else if (w.starts_with("commun")) {
            r1_ = 6;
        } else {
            r1_ = region_start(w, 0);
        }
        r2_ = r1_ >= w.size() ? w.size() : region_start(w, r1_);
    }

    bool in_r1(const std::string& w, std::size_t suffix_len) const {
        return w.size() - suffix_len >= r1_;
    }
    bool in_r2(const std::string& w, std::size_t suffix_len) const {
        return w.size() - suffix_len >= r2_;
    }
    bool is_short(std::string_view w) const { return ends_in_short_syllable(w) && r1_ >= w.size(); }

    static void chop(std::string& w, std::size_t n) { w.resize(w.size() - n); }

    static void step0(std::string& w) {
        for (std::string_view s : {"'s'", "'s", "'"}) {
            if (ends_with(w, s)) {
                chop(w, s.size());
                return;
            }
        }
    }

    static void step1a(std::string& w) {
        if (ends_with(w, "sses")) {
            chop(w, 2);
        } else if (ends_with(w, "ied") || ends_with(w, "ies")) {
            chop(w, 3);
            w += (w.size() > 1) ? "i" : "ie";
        } else if (ends_with(w, "us") || ends_with(w, "ss")) {
            // unchanged
        } else if (ends_with(w, "s")) {
            if (w.size() >= 2 && has_vowel(std::string_view(w).substr(0, w.size() - 2))) chop(w, 1);
        }
    }

    void step1b(std::string& w) const {
        static constexpr std::array<Rule, 6> rules{{
            {"eed", "ee"}, {"eedly", "ee"}, {"ed", ""}, {"edly", ""}, {"ing", ""}, {"ingly", ""},
        }};
        const Rule* r = longest_suffix(w, rules);
        if (!r) return;
        if (r->replacement == "ee") {
            if (in_r1(w, r->suffix.size())) {
                chop(w, r->suffix.size());
                w += "ee";
            }
            return;
        }
        if (!has_vowel(std::string_view(w).substr(0, w.size() - r->suffix.size()))) return;
        chop(w, r->suffix.size());
        if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
            w += 'e';
        } else if (is_double(w)) {
            chop(w, 1);
        } else if (is_short(w)) {
            w += 'e';
        }
    }

    static void step1c(std::string& w) {
        const auto n = w.size();
        if (n > 2 && (w[n - 1] == 'y' || w[n - 1] == 'Y') && !is_vowel(w[n - 2])) w[n - 1] = 'i';
    }

    void step2(std::string& w) const {
        const Rule* r = longest_suffix(w, step2_rules);
        if (!r || !in_r1(w, r->suffix.size())) return;
        const auto stem_len = w.size() - r->suffix.size();
        if (r->suffix == "ogi" && (stem_len == 0 || w[stem_len - 1] != 'l')) return;
        if (r->suffix == "li" && (stem_len == 0 || !valid_li_ending(w[stem_len - 1]))) return;
        chop(w, r->suffix.size());
        w += r->replacement;
    }

    void step3(std::string& w) const {
        const Rule* r = longest_suffix(w, step3_rules);
        if (!r || !in_r1(w, r->suffix.size())) return;
        if (r->suffix == "ative" && !in_r2(w, r->suffix.size())) return;
        chop(w, r->suffix.size());
        w += r->replacement;
    }

    void step4(std::string& w) const {
        const Rule* r = longest_suffix(w, step4_rules);
        if (!r || !in_r2(w, r->suffix.size())) return;
        if (r->suffix == "ion") {
            const auto stem_len = w.size() - 3;
            if (stem_len == 0 || (w[stem_len - 1] != 's' && w[stem_len - 1] != 't')) return;
        }
        chop(w, r->suffix.size());
    }

    void step5(std::string& w) const {
        if (ends_with(w, "e")) {
            const std::string_view rest = std::string_view(w).substr(0, w.size() - 1);
            if (in_r2(w, 1) || (in_r1(w, 1) && !ends_in_short_syllable(rest))) chop(w, 1);
        } else if (ends_with(w, "ll") && in_r2(w, 1)) {
            chop(w, 1);
        }
    }
};

}  // namespace english_detail

inline std::string stem_english(std::string word) {
    return english_detail::EnglishStemmer{}(std::move(word));
}

}  // namespace tmfix::stem
