#pragma once

// Chunking of objects larger than one packet. Each chunk travels as a CSP payload prefixed
// with an 8-byte sub-header: transfer_id, index, total, chunk_len (all big-endian u16).

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "orbitkem/common/bytes.hpp"

namespace orbitkem::link {

inline constexpr std::size_t kFragmentHeaderBytes = 8;

class FragmentError : public Error {
public:
    using Error::Error;
};

/// Same index seen twice with different bytes, or inconsistent totals.
class IntegrityConflict : public FragmentError {
public:
    using FragmentError::FragmentError;
};

struct FragmentHeader {
    std::uint16_t transfer_id = 0;
    std::uint16_t index = 0;
    std::uint16_t total = 0;
    std::uint16_t chunk_len = 0;

    friend bool operator==(const FragmentHeader&, const FragmentHeader&) = default;
};

struct Fragment {
    FragmentHeader header;
    Bytes chunk;

    friend bool operator==(const Fragment&, const Fragment&) = default;
};

inline std::vector<Fragment> fragment(ByteView payload, std::size_t chunk_size, std::uint16_t transfer_id = 0) {
    if (payload.empty()) throw FragmentError("fragment: empty payload");
    if (chunk_size == 0 || chunk_size > 0xFFFF) throw FragmentError("fragment: chunk size out of range");
    const std::size_t total = (payload.size() + chunk_size - 1) / chunk_size;
    if (total > 0xFFFF) throw FragmentError("fragment: too many fragments");
    std::vector<Fragment> out;
    out.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        const std::size_t off = i * chunk_size;
        const std::size_t len = std::min(chunk_size, payload.size() - off);
        Fragment f;
        f.header = {transfer_id, static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(total),
                    static_cast<std::uint16_t>(len)};
        f.chunk.assign(payload.begin() + static_cast<std::ptrdiff_t>(off),
                       payload.begin() + static_cast<std::ptrdiff_t>(off + len));
        out.push_back(std::move(f));
    }
    return out;
}

inline Bytes encode_fragment(const Fragment& f) {
    ByteWriter w;
    w.u16(f.header.transfer_id);
    w.u16(f.header.index);
    w.u16(f.header.total);
    w.u16(f.header.chunk_len);
    w.raw(f.chunk);
    return std::move(w).take();
}

inline Fragment decode_fragment(ByteView payload) {
    if (payload.size() < kFragmentHeaderBytes) throw FragmentError("fragment: truncated sub-header");
    Fragment f;
    f.header.transfer_id = load_be16(payload.data());
    f.header.index = load_be16(payload.data() + 2);
    f.header.total = load_be16(payload.data() + 4);
    f.header.chunk_len = load_be16(payload.data() + 6);
    if (f.header.index >= f.header.total) throw FragmentError("fragment: index >= total");
    if (f.header.chunk_len == 0) throw FragmentError("fragment: zero-length chunk");
    if (payload.size() - kFragmentHeaderBytes != f.header.chunk_len)
        throw FragmentError("fragment: chunk_len does not match payload");
    f.chunk.assign(payload.begin() + kFragmentHeaderBytes, payload.end());
    return f;
}

/// Collects the fragments of one transfer. Duplicates are idempotent.
class Reassembler {
public:
    enum class AddResult { New, Duplicate };

    Reassembler() = default;
    explicit Reassembler(std::uint16_t transfer_id) : transfer_id_(transfer_id) {}

    AddResult add(const Fragment& f) {
        if (f.header.index >= f.header.total || f.header.chunk_len != f.chunk.size() || f.chunk.empty())
            throw FragmentError("reassembler: malformed fragment");
        if (!transfer_id_) transfer_id_ = f.header.transfer_id;
        if (*transfer_id_ != f.header.transfer_id) throw FragmentError("reassembler: transfer id mismatch");
        if (total_ && *total_ != f.header.total) throw IntegrityConflict("reassembler: inconsistent total");
        auto it = chunks_.find(f.header.index);
        if (it != chunks_.end()) {
            if (it->second != f.chunk) throw IntegrityConflict("reassembler: conflicting duplicate fragment");
            return AddResult::Duplicate;
        }
        total_ = f.header.total;
        chunks_.emplace(f.header.index, f.chunk);
        return AddResult::New;
    }

    std::optional<std::uint16_t> total() const noexcept { return total_; }
    std::size_t received() const noexcept { return chunks_.size(); }
    bool complete() const noexcept { return total_ && chunks_.size() == *total_; }
    bool has(std::uint16_t index) const { return chunks_.count(index) != 0; }

    /// Indices not yet received; empty while the total is still unknown.
    std::vector<std::uint16_t> missing() const {
        std::vector<std::uint16_t> out;
        if (!total_) return out;
        for (std::uint32_t i = 0; i < *total_; ++i)
            if (!chunks_.count(static_cast<std::uint16_t>(i))) out.push_back(static_cast<std::uint16_t>(i));
        return out;
    }

    Bytes payload() const {
        if (!complete()) throw FragmentError("reassembler: transfer incomplete");
        Bytes out;
        for (const auto& [idx, chunk] : chunks_) out.insert(out.end(), chunk.begin(), chunk.end());
        return out;
    }

    /// Chunks in index order (for transcript hashing once complete).
    const std::map<std::uint16_t, Bytes>& chunks() const noexcept { return chunks_; }

    void serialize(ByteWriter& w) const {
        w.u8(transfer_id_ ? 1 : 0);
        w.u16(transfer_id_.value_or(0));
        w.u8(total_ ? 1 : 0);
        w.u16(total_.value_or(0));
        w.u32(static_cast<std::uint32_t>(chunks_.size()));
        for (const auto& [idx, chunk] : chunks_) {
            w.u16(idx);
            w.blob(chunk);
        }
    }

    static Reassembler deserialize(ByteReader& r) {
        Reassembler out;
        const bool has_id = r.u8() != 0;
        const auto id = r.u16();
        if (has_id) out.transfer_id_ = id;
        const bool has_total = r.u8() != 0;
        const auto total = r.u16();
        if (has_total) out.total_ = total;
        const auto n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i) {
            const auto idx = r.u16();
            out.chunks_.emplace(idx, r.blob());
        }
        return out;
    }

    friend bool operator==(const Reassembler&, const Reassembler&) = default;

private:
    std::optional<std::uint16_t> transfer_id_;
    std::optional<std::uint16_t> total_;
    std::map<std::uint16_t, Bytes> chunks_;
};

struct Incomplete {
    std::vector<std::uint16_t> missing;
    friend bool operator==(const Incomplete&, const Incomplete&) = default;
};

/// One-shot reassembly of an unordered, possibly duplicated fragment set.
inline std::variant<Bytes, Incomplete> reassemble(std::span<const Fragment> frags) {
    Reassembler r;
    for (const auto& f : frags) r.add(f);
    if (r.complete()) return r.payload();
    return Incomplete{r.missing()};
}

} // namespace orbitkem::link
