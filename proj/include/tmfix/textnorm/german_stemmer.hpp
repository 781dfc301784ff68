#pragma once

// Snowball German stemmer. Operates on code points; input must be lowercase.
// Output has umlauts folded to their base vowel and ß expanded to "ss".

#include <string>
#include <string_view>

#include "tmfix/textnorm/unicode.hpp"

namespace tmfix::stem {

namespace german_detail {

inline constexpr char32_t a_uml = 0xE4;
inline constexpr char32_t o_uml = 0xF6;
inline constexpr char32_t u_uml = 0xFC;
inline constexpr char32_t sharp_s = 0xDF;

inline bool is_vowel(char32_t c) {
    return c == U'a' || c == U'e' || c == U'i' || c == U'o' || c == U'u' || c == U'y' ||
           c == a_uml || c == o_uml || c == u_uml;
}

inline bool s_ending(char32_t c) {
    return c == U'b' || c == U'd' || c == U'f' || c == U'g' || c == U'h' || c == U'k' ||
           c == U'l' || c == U'm' || c == U'n' || c == U'r' || c == U't';
}

inline bool st_ending(char32_t c) { return s_ending(c) && c != U'r'; }

inline bool ends_with(std::u32string_view w, std::u32string_view s) {
    return w.size() >= s.size() && w.substr(w.size() - s.size()) == s;
}

class GermanStemmer {
public:
    std::u32string operator()(std::u32string w) {
        prelude(w);
        mark_regions(w);
        step1(w);
        step2(w);
        step3(w);
        postlude(w);
        return w;
    }

private:
    std::size_t r1_ = 0;
    std::size_t r2_ = 0;

    static void prelude(std::u32string& w) {
        std::u32string out;
        out.reserve(w.size() + 2);
        for (char32_t c : w) {
            if (c == sharp_s) {
                out += U"ss";
            } else {
                out.push_back(c);
            }
        }
        w = std::move(out);
        // u and y between vowels are protected as consonants
        std::size_t i = 0;
        while (i + 2 < w.size()) {
            if (is_vowel(w[i]) && (w[i + 1] == U'u' || w[i + 1] == U'y') && is_vowel(w[i + 2])) {
                w[i + 1] = (w[i + 1] == U'u') ? U'U' : U'Y';
                i += 2;
            } else {
                ++i;
            }
        }
    }

    void mark_regions(std::u32string_view w) {
        r1_ = r2_ = w.size();
        if (w.size() < 3) return;
        std::size_t p = w.size();
        for (std::size_t i = 1; i < w.size(); ++i) {
            if (!is_vowel(w[i]) && is_vowel(w[i - 1])) {
                p = i + 1;
                break;
            }
        }
        r1_ = p < 3 ? 3 : p;
        for (std::size_t i = p + 1; i < w.size(); ++i) {
            if (!is_vowel(w[i]) && is_vowel(w[i - 1])) {
                r2_ = i + 1;
                break;
            }
        }
    }

    bool in_r1(const std::u32string& w, std::size_t len) const { return w.size() - len >= r1_; }
    bool in_r2(const std::u32string& w, std::size_t len) const { return w.size() - len >= r2_; }
    static void chop(std::u32string& w, std::size_t n) { w.resize(w.size() - n); }

    void step1(std::u32string& w) const {
        // longest of: em ern er | e en es | s
        if (ends_with(w, U"ern")) {
            if (in_r1(w, 3)) chop(w, 3);
        } else if (ends_with(w, U"em") || ends_with(w, U"er")) {
            if (in_r1(w, 2)) chop(w, 2);
        } else if (ends_with(w, U"en") || ends_with(w, U"es") || ends_with(w, U"e")) {
            const std::size_t len = ends_with(w, U"e") ? 1 : 2;
            if (in_r1(w, len)) {
                chop(w, len);
                if (ends_with(w, U"niss")) chop(w, 1);
            }
        } else if (ends_with(w, U"s")) {
            if (in_r1(w, 1) && w.size() >= 2 && s_ending(w[w.size() - 2])) chop(w, 1);
        }
    }

    void step2(std::u32string& w) const {
        // longest of: en er est | st
        if (ends_with(w, U"est")) {
            if (in_r1(w, 3)) chop(w, 3);
        } else if (ends_with(w, U"en") || ends_with(w, U"er")) {
            if (in_r1(w, 2)) chop(w, 2);
        } else if (ends_with(w, U"st")) {
            // the st-ending letter needs at least three letters before it
            if (in_r1(w, 2) && w.size() >= 6 && st_ending(w[w.size() - 3])) chop(w, 2);
        }
    }

    void step3(std::u32string& w) const {
        // longest of: end ung | ig ik isch | lich heit | keit
        if (ends_with(w, U"end") || ends_with(w, U"ung")) {
            if (!in_r2(w, 3)) return;
            chop(w, 3);
            if (ends_with(w, U"ig") && in_r2(w, 2) && !(w.size() >= 3 && w[w.size() - 3] == U'e'))
                chop(w, 2);
        } else if (ends_with(w, U"isch") || ends_with(w, U"ig") || ends_with(w, U"ik")) {
            const std::size_t len = ends_with(w, U"isch") ? 4 : 2;
            if (!in_r2(w, len)) return;
            if (w.size() > len && w[w.size() - len - 1] == U'e') return;
            chop(w, len);
        } else if (ends_with(w, U"lich") || ends_with(w, U"heit")) {
            if (!in_r2(w, 4)) return;
            chop(w, 4);
            if ((ends_with(w, U"er") || ends_with(w, U"en")) && in_r1(w, 2)) chop(w, 2);
        } else if (ends_with(w, U"keit")) {
            if (!in_r2(w, 4)) return;
            chop(w, 4);
            if (ends_with(w, U"lich")) {
                if (in_r2(w, 4)) chop(w, 4);
            } else if (ends_with(w, U"ig")) {
                if (in_r2(w, 2)) chop(w, 2);
            }
        }
    }

    static void postlude(std::u32string& w) {
        for (auto& c : w) {
            switch (c) {
                case U'U': c = U'u'; break;
                case U'Y': c = U'y'; break;
                case a_uml: c = U'a'; break;
                case o_uml: c = U'o'; break;
                case u_uml: c = U'u'; break;
                default: break;
            }
        }
    }
};

}  // namespace german_detail

inline std::string stem_german(std::string_view word) {
    german_detail::GermanStemmer stemmer;
    return unicode::encode_utf8(stemmer(unicode::decode_utf8(word)));
}

}  // namespace tmfix::stem
