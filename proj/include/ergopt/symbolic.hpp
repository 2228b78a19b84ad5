#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ergopt/errors.hpp"

namespace ergopt {

// Finite word over the alphabet {0, ..., d-1}.  Symbol order matters: when a
// word indexes a composition of inverse branches, the first symbol is applied
// first (innermost), so psi_w = psi_{w[k-1]} o ... o psi_{w[0]}.
struct Word {
    std::vector<int> symbols;
    int alphabet = 2;

    Word() = default;
    Word(std::vector<int> syms, int d);

    std::size_t size() const { return symbols.size(); }
    bool empty() const { return symbols.empty(); }
    int operator[](std::size_t i) const { return symbols[i]; }

    Word appended(int s) const;   // new symbol at the end (new outermost branch)
    Word prepended(int s) const;  // new symbol at the front
    Word prefix(std::size_t k) const;
    Word dropped_front(std::size_t k) const;
    Word reversed() const;
    Word rotated_left(std::size_t k) const;
    Word repeated(std::size_t times) const;

    bool is_primitive() const;
    Word primitive_root() const;
    Word min_rotation() const;

    // Digit-string form, e.g. "0110"; alphabet size must be at most 10.
    std::string to_string() const;
    static Word parse(std::string_view s, int alphabet);

    bool operator==(const Word&) const = default;
};

// Point of the one-sided full shift given as head . cycle cycle cycle ...
// Stored canonically: the cycle is primitive and the head is as short as
// possible (trailing head symbols matching the cycle are absorbed).  The
// cycle phase is whatever the absorption leaves; rotating it further would
// change the sequence.  Serialized as "head|cycle", e.g. "01|10" or "|1".
class EventuallyPeriodicPoint {
public:
    EventuallyPeriodicPoint() = default;
    EventuallyPeriodicPoint(Word head, Word cycle);  // canonicalizes

    const Word& head() const { return head_; }
    const Word& cycle() const { return cycle_; }
    int alphabet() const { return cycle_.alphabet; }

    int symbol_at(std::size_t i) const;
    Word truncation(std::size_t k) const;  // first k symbols
    EventuallyPeriodicPoint shifted(std::size_t k = 1) const;
    EventuallyPeriodicPoint prepended(int s) const;
    EventuallyPeriodicPoint prepended(const Word& w) const;  // w[0] becomes symbol 0
    bool purely_periodic() const { return head_.empty(); }

    std::string to_string() const;
    static EventuallyPeriodicPoint parse(std::string_view s, int alphabet);

    bool operator==(const EventuallyPeriodicPoint&) const = default;

private:
    Word head_;
    Word cycle_{std::vector<int>{0}, 2};
};

// All primitive words of length 1..max_len up to rotation (necklace
// representatives, each the lexicographically least rotation), ordered by
// length then lexicographically.
std::vector<Word> primitive_necklaces(int alphabet, int max_len);

std::strong_ordering lex_compare(const EventuallyPeriodicPoint& a, const EventuallyPeriodicPoint& b);

// 2^{-n} where n is the first index (0-based) of disagreement; 0 when equal.
double symbol_distance(const EventuallyPeriodicPoint& a, const EventuallyPeriodicPoint& b);

// Splits off the first k symbols: (sigma^k(omega), prefix word).
std::pair<EventuallyPeriodicPoint, Word> shift_truncate(const EventuallyPeriodicPoint& omega, std::size_t k);

// The d shift-preimages s.omega, sorted lexicographically.
std::vector<EventuallyPeriodicPoint> preimage_words(const EventuallyPeriodicPoint& omega);

// Shift cylinder [w] = sequences starting with the defining word.
struct Cylinder {
    Word defining_word;
    bool contains(const EventuallyPeriodicPoint& p) const;
};

} // namespace ergopt

template <>
struct std::hash<ergopt::Word> {
    std::size_t operator()(const ergopt::Word& w) const noexcept {
        std::size_t h = static_cast<std::size_t>(w.alphabet);
        for (int s : w.symbols) h = h * 1099511628211ULL + static_cast<std::size_t>(s) + 1;
        return h;
    }
};

template <>
struct std::hash<ergopt::EventuallyPeriodicPoint> {
    std::size_t operator()(const ergopt::EventuallyPeriodicPoint& p) const noexcept {
        std::hash<ergopt::Word> h;
        return h(p.head()) * 31 + h(p.cycle());
    }
};
