#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"

namespace locdec {

// A label is a finite bit string. Everything a node carries (input label,
// oracle label) bottoms out in one of these. Convenience encodings exist for
// naturals and for tuples of labels; both round-trip exactly. The encodings
// are conventions, not self-describing: "0" is both of_nat(0) and the tuple
// containing one empty field, and the caller knows which reading it wants.
class LabelValue {
public:
    LabelValue() = default;

    static LabelValue of_bits(std::string bits) {
        for (char c : bits) {
            if (c != '0' && c != '1') throw ValidationError("label bits must be '0'/'1'");
        }
        LabelValue v;
        v.bits_ = std::move(bits);
        return v;
    }

    // Minimal binary form, MSB first; 0 encodes as "0".
    static LabelValue of_nat(std::uint64_t n) {
        if (n == 0) return of_bits("0");
        std::string s;
        while (n > 0) {
            s.push_back(char('0' + (n & 1)));
            n >>= 1;
        }
        std::string r(s.rbegin(), s.rend());
        LabelValue v;
        v.bits_ = std::move(r);
        return v;
    }

    // Each field emits every bit b as '1'b and closes with '0'; fields are
    // concatenated. Prefix-free per field, so decoding is unambiguous.
    static LabelValue of_tuple(const std::vector<LabelValue>& fields) {
        std::string out;
        for (const auto& f : fields) {
            for (char c : f.bits_) {
                out.push_back('1');
                out.push_back(c);
            }
            out.push_back('0');
        }
        LabelValue v;
        v.bits_ = std::move(out);
        return v;
    }

    const std::string& bits() const { return bits_; }
    bool empty() const { return bits_.empty(); }
    std::size_t size() const { return bits_.size(); }

    // Reads the bits as binary. Leading zeros are tolerated.
    std::uint64_t to_nat() const {
        std::uint64_t n = 0;
        std::size_t meaningful = 0;
        bool seen_one = false;
        for (char c : bits_) {
            if (c == '1') seen_one = true;
            if (seen_one) ++meaningful;
            if (meaningful > 64) throw ValidationError("label does not fit in 64 bits: " + bits_);
            n = (n << 1) | std::uint64_t(c - '0');
        }
        return n;
    }

    // Like to_nat but clamps oversized values instead of throwing. Used where
    // a label only feeds a simulation budget.
    std::uint64_t to_nat_saturating() const {
        std::size_t meaningful = 0;
        bool seen_one = false;
        for (char c : bits_) {
            if (c == '1') seen_one = true;
            if (seen_one) ++meaningful;
        }
        if (meaningful > 64) return std::numeric_limits<std::uint64_t>::max();
        std::uint64_t n = 0;
        for (char c : bits_) n = (n << 1) | std::uint64_t(c - '0');
        return n;
    }

    std::vector<LabelValue> tuple_fields() const {
        std::vector<LabelValue> out;
        std::string cur;
        std::size_t i = 0;
        while (i < bits_.size()) {
            if (bits_[i] == '1') {
                if (i + 1 >= bits_.size()) throw ValidationError("truncated tuple field");
                cur.push_back(bits_[i + 1]);
                i += 2;
            } else {
                out.push_back(of_bits(cur));
                cur.clear();
                ++i;
            }
        }
        if (!cur.empty()) throw ValidationError("tuple field missing terminator");
        return out;
    }

    // Numeric order: leading zeros are insignificant, so "0010" == "10".
    // Equality of LabelValue objects stays exact on the bits; multisets of
    // oracle labels care about the distinction.
    static int compare_numeric(const LabelValue& a, const LabelValue& b) {
        std::size_t ia = a.first_one(), ib = b.first_one();
        std::size_t la = a.bits_.size() - ia, lb = b.bits_.size() - ib;
        if (la != lb) return la < lb ? -1 : 1;
        for (std::size_t k = 0; k < la; ++k) {
            char ca = a.bits_[ia + k], cb = b.bits_[ib + k];
            if (ca != cb) return ca < cb ? -1 : 1;
        }
        return 0;
    }

    bool numeric_less(const LabelValue& o) const { return compare_numeric(*this, o) < 0; }
    bool numeric_eq(const LabelValue& o) const { return compare_numeric(*this, o) == 0; }
    bool numeric_geq(const LabelValue& o) const { return compare_numeric(*this, o) >= 0; }

    bool operator==(const LabelValue& o) const { return bits_ == o.bits_; }
    bool operator!=(const LabelValue& o) const { return bits_ != o.bits_; }
    bool operator<(const LabelValue& o) const { return bits_ < o.bits_; }

private:
    std::size_t first_one() const {
        std::size_t i = 0;
        while (i < bits_.size() && bits_[i] == '0') ++i;
        return i;
    }

    std::string bits_;
};

} // namespace locdec

template <>
struct std::hash<locdec::LabelValue> {
    std::size_t operator()(const locdec::LabelValue& v) const noexcept {
        return std::hash<std::string>{}(v.bits());
    }
};
