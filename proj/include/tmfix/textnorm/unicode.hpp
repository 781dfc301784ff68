#pragma once

// Minimal UTF-8 and case/composition helpers for the Latin, Greek and
// Cyrillic text found in bibliographic metadata. Not a general Unicode
// library: lowercase and composition cover the scripts listed below only.

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace tmfix::unicode {

inline constexpr char32_t replacement_char = 0xFFFD;

inline std::u32string decode_utf8(std::string_view in) {
    std::u32string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        const auto b0 = static_cast<unsigned char>(in[i]);
        if (b0 < 0x80) {
            out.push_back(b0);
            ++i;
            continue;
        }
        int extra = 0;
        char32_t cp = 0;
        if ((b0 & 0xE0) == 0xC0) {
            extra = 1;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            extra = 2;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            extra = 3;
            cp = b0 & 0x07;
        } else {
            out.push_back(replacement_char);
            ++i;
            continue;
        }
        if (i + extra >= in.size()) {  // truncated sequence at end of input
            out.push_back(replacement_char);
            break;
        }
        bool ok = true;
        for (int k = 1; k <= extra; ++k) {
            const auto b = static_cast<unsigned char>(in[i + k]);
            if ((b & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (b & 0x3F);
        }
        // overlong forms, surrogates and out-of-range values are invalid
        static constexpr std::array<char32_t, 4> min_for_len{0, 0x80, 0x800, 0x10000};
        if (!ok || cp < min_for_len[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            out.push_back(replacement_char);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += extra + 1;
    }
    return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string encode_utf8(std::u32string_view in) {
    std::string out;
    out.reserve(in.size());
    for (char32_t cp : in) append_utf8(out, cp);
    return out;
}

inline std::size_t codepoint_count(std::string_view utf8) {
    return static_cast<std::size_t>(std::count_if(utf8.begin(), utf8.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

inline char32_t to_lower(char32_t c) {
    if (c < 0x80) return (c >= 'A' && c <= 'Z') ? c + 0x20 : c;
    if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
    if (c >= 0x100 && c <= 0x17F) {
        if (c == 0x130) return U'i';
        if (c == 0x178) return 0xFF;
        if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) return (c % 2 == 1) ? c + 1 : c;
        if (c == 0x138 || c == 0x149 || c == 0x17F) return c;
        return (c % 2 == 0) ? c + 1 : c;
    }
    if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
    if (c == 0x386) return 0x3AC;
    if (c >= 0x388 && c <= 0x38A) return c + 37;
    if (c == 0x38C) return 0x3CC;
    if (c == 0x38E || c == 0x38F) return c + 63;
    if (c >= 0x410 && c <= 0x42F) return c + 0x20;
    if (c >= 0x400 && c <= 0x40F) return c + 0x50;
    if (c == 0x1E9E) return 0xDF;
    return c;
}

namespace detail {

struct Composition {
    char32_t base;
    char32_t mark;
    char32_t composed;
};

// Sorted by (base, mark).
inline constexpr std::array<Composition, 96> compositions{{
    {U'A', 0x300, 0xC0}, {U'A', 0x301, 0xC1}, {U'A', 0x302, 0xC2}, {U'A', 0x303, 0xC3},
    {U'A', 0x308, 0xC4}, {U'A', 0x30A, 0xC5}, {U'C', 0x301, 0x106}, {U'C', 0x30C, 0x10C},
    {U'C', 0x327, 0xC7}, {U'E', 0x300, 0xC8}, {U'E', 0x301, 0xC9}, {U'E', 0x302, 0xCA},
    {U'E', 0x308, 0xCB}, {U'E', 0x30C, 0x11A}, {U'I', 0x300, 0xCC}, {U'I', 0x301, 0xCD},
    {U'I', 0x302, 0xCE}, {U'I', 0x308, 0xCF}, {U'N', 0x301, 0x143}, {U'N', 0x303, 0xD1},
    {U'N', 0x30C, 0x147}, {U'O', 0x300, 0xD2}, {U'O', 0x301, 0xD3}, {U'O', 0x302, 0xD4},
    {U'O', 0x303, 0xD5}, {U'O', 0x308, 0xD6}, {U'R', 0x30C, 0x158}, {U'S', 0x301, 0x15A},
    {U'S', 0x30C, 0x160}, {U'S', 0x327, 0x15E}, {U'U', 0x300, 0xD9}, {U'U', 0x301, 0xDA},
    {U'U', 0x302, 0xDB}, {U'U', 0x308, 0xDC}, {U'U', 0x30A, 0x16E}, {U'Y', 0x301, 0xDD},
    {U'Y', 0x308, 0x178}, {U'Z', 0x301, 0x179}, {U'Z', 0x30C, 0x17D}, {U'a', 0x300, 0xE0},
    {U'a', 0x301, 0xE1}, {U'a', 0x302, 0xE2}, {U'a', 0x303, 0xE3}, {U'a', 0x308, 0xE4},
    {U'a', 0x30A, 0xE5}, {U'c', 0x301, 0x107}, {U'c', 0x30C, 0x10D}, {U'c', 0x327, 0xE7},
    {U'd', 0x30C, 0x10F}, {U'e', 0x300, 0xE8}, {U'e', 0x301, 0xE9}, {U'e', 0x302, 0xEA},
    {U'e', 0x308, 0xEB}, {U'e', 0x30C, 0x11B}, {U'g', 0x306, 0x11F}, {U'i', 0x300, 0xEC},
    {U'i', 0x301, 0xED}, {U'i', 0x302, 0xEE}, {U'i', 0x308, 0xEF}, {U'n', 0x301, 0x144},
    {U'n', 0x303, 0xF1}, {U'n', 0x30C, 0x148}, {U'o', 0x300, 0xF2}, {U'o', 0x301, 0xF3},
    {U'o', 0x302, 0xF4}, {U'o', 0x303, 0xF5}, {U'o', 0x308, 0xF6}, {U'o', 0x30B, 0x151},
    {U'r', 0x30C, 0x159}, {U's', 0x301, 0x15B}, {U's', 0x30C, 0x161}, {U's', 0x327, 0x15F},
    {U't', 0x30C, 0x165}, {U'u', 0x300, 0xF9}, {U'u', 0x301, 0xFA}, {U'u', 0x302, 0xFB},
    {U'u', 0x308, 0xFC}, {U'u', 0x30A, 0x16F}, {U'u', 0x30B, 0x171}, {U'y', 0x301, 0xFD},
    {U'y', 0x308, 0xFF}, {U'z', 0x301, 0x17A}, {U'z', 0x307, 0x17C}, {U'z', 0x30C, 0x17E},
    {0xC5, 0x301, 0x1FA}, {0xE5, 0x301, 0x1FB}, {0xC6, 0x301, 0x1FC}, {0xE6, 0x301, 0x1FD},
    {0xD8, 0x301, 0x1FE}, {0xF8, 0x301, 0x1FF}, {0xDC, 0x301, 0x1D7}, {0xFC, 0x301, 0x1D8},
    {0xDC, 0x300, 0x1DB}, {0xFC, 0x300, 0x1DC}, {0xDC, 0x30C, 0x1D9}, {0xFC, 0x30C, 0x1DA},
}};

inline char32_t compose(char32_t base, char32_t mark) {
    for (const auto& c : compositions) {
        if (c.base == base && c.mark == mark) return c.composed;
    }
    return 0;
}

}  // namespace detail

inline bool is_combining_mark(char32_t c) { return c >= 0x300 && c <= 0x36F; }

/// Canonical composition of a base letter followed directly by one combining
/// mark, for the pairs in the table above. Unknown pairs stay decomposed.
inline std::u32string compose_nfc(std::u32string_view in) {
    std::u32string out;
    out.reserve(in.size());
    for (char32_t c : in) {
        if (is_combining_mark(c) && !out.empty()) {
            if (char32_t composed = detail::compose(out.back(), c)) {
                out.back() = composed;
                continue;
            }
        }
        out.push_back(c);
    }
    return out;
}

/// Lowercase and compose; the form every stem and stopword is compared in.
inline std::string fold(std::string_view utf8) {
    auto cps = decode_utf8(utf8);
    for (auto& c : cps) c = to_lower(c);
    // lowercasing can expose new composable pairs (e.g. "A" + U+0308)
    return encode_utf8(compose_nfc(cps));
}

inline bool is_word_char(char32_t c) {
    if (c < 0x80) return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (c == 0xAA || c == 0xB5 || c == 0xBA) return true;
    if (c < 0xC0) return false;
    if (c == 0xD7 || c == 0xF7) return false;
    if (c <= 0x2FF) return true;
    if (c <= 0x36F) return true;  // combining marks stay inside the word
    if (c == 0x37E || c == 0x387) return false;
    if (c <= 0x1FFF) return true;
    if (c >= 0x2C00 && c <= 0x2DFF) return true;
    if (c >= 0x3040 && c <= 0x9FFF) return true;
    if (c >= 0xAC00 && c <= 0xD7AF) return true;
    if (c >= 0xF900 && c <= 0xFDFF) return true;
    if (c >= 0xFE70 && c <= 0xFEFF) return true;
    if ((c >= 0xFF10 && c <= 0xFF19) || (c >= 0xFF21 && c <= 0xFF3A) || (c >= 0xFF41 && c <= 0xFF5A))
        return true;
    if (c >= 0xFF66 && c <= 0xFFDC) return true;
    if (c >= 0x10000 && c <= 0x1EFFF) return true;
    return false;
}

}  // namespace tmfix::unicode
