#include "ergopt/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ergopt {

Word::Word(std::vector<int> syms, int d) : symbols(std::move(syms)), alphabet(d) {
    if (d < 2) throw ConfigError("alphabet size must be at least 2");
    for (int s : symbols)
        if (s < 0 || s >= d)
            throw ConfigError("word symbol " + std::to_string(s) + " outside alphabet of size " +
                              std::to_string(d));
}

Word Word::appended(int s) const {
    Word w = *this;
    if (s < 0 || s >= alphabet) throw ConfigError("symbol outside alphabet");
    w.symbols.push_back(s);
    return w;
}

Word Word::prepended(int s) const {
    if (s < 0 || s >= alphabet) throw ConfigError("symbol outside alphabet");
    Word w;
    w.alphabet = alphabet;
    w.symbols.reserve(symbols.size() + 1);
    w.symbols.push_back(s);
    w.symbols.insert(w.symbols.end(), symbols.begin(), symbols.end());
    return w;
}

Word Word::prefix(std::size_t k) const {
    Word w;
    w.alphabet = alphabet;
    w.symbols.assign(symbols.begin(), symbols.begin() + static_cast<long>(std::min(k, size())));
    return w;
}

Word Word::dropped_front(std::size_t k) const {
    Word w;
    w.alphabet = alphabet;
    if (k < size()) w.symbols.assign(symbols.begin() + static_cast<long>(k), symbols.end());
    return w;
}

Word Word::reversed() const {
    Word w = *this;
    std::reverse(w.symbols.begin(), w.symbols.end());
    return w;
}

Word Word::rotated_left(std::size_t k) const {
    Word w = *this;
    if (!w.symbols.empty())
        std::rotate(w.symbols.begin(), w.symbols.begin() + static_cast<long>(k % size()), w.symbols.end());
    return w;
}

Word Word::repeated(std::size_t times) const {
    Word w;
    w.alphabet = alphabet;
    w.symbols.reserve(size() * times);
    for (std::size_t t = 0; t < times; ++t)
        w.symbols.insert(w.symbols.end(), symbols.begin(), symbols.end());
    return w;
}

Word Word::primitive_root() const {
    std::size_t n = size();
    for (std::size_t p = 1; p <= n; ++p) {
        if (n % p != 0) continue;
        bool ok = true;
        for (std::size_t i = p; i < n && ok; ++i) ok = symbols[i] == symbols[i - p];
        if (ok) return prefix(p);
    }
    return *this;
}

bool Word::is_primitive() const { return !empty() && primitive_root().size() == size(); }

Word Word::min_rotation() const {
    if (empty()) return *this;
    Word best = *this;
    for (std::size_t k = 1; k < size(); ++k) {
        Word r = rotated_left(k);
        if (r.symbols < best.symbols) best = r;
    }
    return best;
}

std::string Word::to_string() const {
    if (alphabet > 10) throw ConfigError("word serialization requires alphabet size at most 10");
    std::string s;
    s.reserve(size());
    for (int v : symbols) s.push_back(static_cast<char>('0' + v));
    return s;
}

Word Word::parse(std::string_view s, int alphabet) {
    if (alphabet > 10) throw ConfigError("word serialization requires alphabet size at most 10");
    std::vector<int> syms;
    syms.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c < '0' || c > '9') throw ParseError("word symbols must be digits", i);
        syms.push_back(c - '0');
    }
    return Word(std::move(syms), alphabet);
}

EventuallyPeriodicPoint::EventuallyPeriodicPoint(Word head, Word cycle)
    : head_(std::move(head)), cycle_(std::move(cycle)) {
    if (cycle_.empty()) throw ConfigError("cycle of an eventually periodic point must be nonempty");
    if (head_.alphabet != cycle_.alphabet && !head_.empty())
        throw ConfigError("head and cycle use different alphabets");
    head_.alphabet = cycle_.alphabet;
    cycle_ = cycle_.primitive_root();
    // Absorb trailing head symbols that already agree with the cycle: if the
    // last head symbol equals the last cycle symbol, the same sequence is
    // described with a shorter head and the cycle rotated one step right.
    // Primitive cycle plus shortest head is a canonical form, so equality of
    // representations coincides with equality of sequences.  Rotating the
    // cycle any further would change the sequence itself.
    while (!head_.empty() && head_.symbols.back() == cycle_.symbols.back()) {
        head_.symbols.pop_back();
        std::rotate(cycle_.symbols.begin(), cycle_.symbols.end() - 1, cycle_.symbols.end());
    }
}

int EventuallyPeriodicPoint::symbol_at(std::size_t i) const {
    if (i < head_.size()) return head_[i];
    return cycle_[(i - head_.size()) % cycle_.size()];
}

Word EventuallyPeriodicPoint::truncation(std::size_t k) const {
    std::vector<int> syms;
    syms.reserve(k);
    for (std::size_t i = 0; i < k; ++i) syms.push_back(symbol_at(i));
    return Word(std::move(syms), alphabet());
}

EventuallyPeriodicPoint EventuallyPeriodicPoint::shifted(std::size_t k) const {
    if (k <= head_.size()) return EventuallyPeriodicPoint(head_.dropped_front(k), cycle_);
    std::size_t r = (k - head_.size()) % cycle_.size();
    Word empty_head;
    empty_head.alphabet = alphabet();
    return EventuallyPeriodicPoint(empty_head, cycle_.rotated_left(r));
}

EventuallyPeriodicPoint EventuallyPeriodicPoint::prepended(int s) const {
    return EventuallyPeriodicPoint(head_.prepended(s), cycle_);
}

EventuallyPeriodicPoint EventuallyPeriodicPoint::prepended(const Word& w) const {
    Word h = w;
    h.alphabet = alphabet();
    h.symbols.insert(h.symbols.end(), head_.symbols.begin(), head_.symbols.end());
    return EventuallyPeriodicPoint(std::move(h), cycle_);
}

std::string EventuallyPeriodicPoint::to_string() const {
    return head_.to_string() + "|" + cycle_.to_string();
}

EventuallyPeriodicPoint EventuallyPeriodicPoint::parse(std::string_view s, int alphabet) {
    auto bar = s.find('|');
    if (bar == std::string_view::npos)
        throw ParseError("expected 'head|cycle' with a '|' separator", 0);
    Word head = Word::parse(s.substr(0, bar), alphabet);
    Word cycle = Word::parse(s.substr(bar + 1), alphabet);
    return EventuallyPeriodicPoint(std::move(head), std::move(cycle));
}

std::vector<Word> primitive_necklaces(int alphabet, int max_len) {
    if (alphabet < 2) throw ConfigError("necklace enumeration needs an alphabet of size at least 2");
    if (max_len < 1) throw ConfigError("necklace length cap must be at least 1");
    std::vector<Word> out;
    for (int p = 1; p <= max_len; ++p) {
        std::vector<int> syms(static_cast<std::size_t>(p), 0);
        long total = 1;
        for (int i = 0; i < p; ++i) total *= alphabet;
        for (long code = 0; code < total; ++code) {
            long c = code;
            for (int i = p - 1; i >= 0; --i) {
                syms[static_cast<std::size_t>(i)] = static_cast<int>(c % alphabet);
                c /= alphabet;
            }
            Word w(syms, alphabet);
            if (!w.is_primitive()) continue;
            if (!(w == w.min_rotation())) continue;
            out.push_back(std::move(w));
        }
    }
    return out;
}

namespace {
// Two eventually periodic sequences that agree this far agree everywhere.
std::size_t compare_horizon(const EventuallyPeriodicPoint& a, const EventuallyPeriodicPoint& b) {
    std::size_t lcm = std::lcm(a.cycle().size(), b.cycle().size());
    return std::max(a.head().size(), b.head().size()) + lcm;
}
} // namespace

std::strong_ordering lex_compare(const EventuallyPeriodicPoint& a, const EventuallyPeriodicPoint& b) {
    std::size_t horizon = compare_horizon(a, b);
    for (std::size_t i = 0; i < horizon; ++i) {
        int sa = a.symbol_at(i), sb = b.symbol_at(i);
        if (sa != sb) return sa <=> sb;
    }
    return std::strong_ordering::equal;
}

double symbol_distance(const EventuallyPeriodicPoint& a, const EventuallyPeriodicPoint& b) {
    std::size_t horizon = compare_horizon(a, b);
    for (std::size_t i = 0; i < horizon; ++i)
        if (a.symbol_at(i) != b.symbol_at(i)) return std::ldexp(1.0, -static_cast<int>(i));
    return 0.0;
}

std::pair<EventuallyPeriodicPoint, Word> shift_truncate(const EventuallyPeriodicPoint& omega,
                                                        std::size_t k) {
    return {omega.shifted(k), omega.truncation(k)};
}

std::vector<EventuallyPeriodicPoint> preimage_words(const EventuallyPeriodicPoint& omega) {
    std::vector<EventuallyPeriodicPoint> out;
    out.reserve(static_cast<std::size_t>(omega.alphabet()));
    for (int s = 0; s < omega.alphabet(); ++s) out.push_back(omega.prepended(s));
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        return lex_compare(x, y) == std::strong_ordering::less;
    });
    return out;
}

bool Cylinder::contains(const EventuallyPeriodicPoint& p) const {
    for (std::size_t i = 0; i < defining_word.size(); ++i)
        if (p.symbol_at(i) != defining_word[i]) return false;
    return true;
}

} // namespace ergopt
