#include <gtest/gtest.h>

#include <algorithm>

#include "orbitkem/crypto/primitives.hpp"
#include "orbitkem/sim/export.hpp"
#include "orbitkem/sim/orbit_sim.hpp"

using namespace orbitkem;
using namespace orbitkem::sim;
using handshake::Direction;
using handshake::Outcome;

namespace {

ExchangeConfig lossy(std::uint64_t seed, double loss) {
    ExchangeConfig c;
    c.link.rng_seed = seed;
    c.link.loss_prob = loss;
    return c;
}

// Two public-key fragments fit in each pass: 212 B at 1200 bit/s is about 1.4 s of air time.
ExchangeConfig stress() {
    ExchangeConfig c;
    c.link.data_rate = 1200;
    c.schedule.duration = 3 * kSecond;
    return c;
}

std::string sha256_hex(std::string_view s) { return to_hex(crypto::sha256(to_bytes(s))); }

void check_trace_invariants(const ExchangeConfig& cfg, const ExchangeResult& r) {
    Micros last = 0;
    for (const auto& e : r.trace) {
        EXPECT_GE(e.t_us, last);
        last = e.t_us;
        EXPECT_EQ(e.deliver_us, e.t_us + cfg.link.serialization(e.size) + cfg.link.turnaround);
        const auto w = window_at(cfg.schedule, e.t_us);
        if (e.outcome == Outcome::Delivered || e.outcome == Outcome::Corrupted) {
            ASSERT_TRUE(w);
            EXPECT_LT(e.deliver_us, w->close);
            EXPECT_EQ(e.wire.size(), e.size);
        } else {
            EXPECT_TRUE(e.wire.empty());
        }
        if (e.outcome == Outcome::OutOfWindow) {
            EXPECT_TRUE(!w || e.deliver_us >= w->close);
        }
    }
    const auto& a = r.report;
    EXPECT_EQ(a.packets, a.delivered + a.lost + a.corrupted + a.out_of_window);
    EXPECT_EQ(a.packets, r.trace.size());
}

} // namespace

TEST(Windows, SixteenPerDay) {
    PassSchedule s;
    const auto w = windows(s, kDay);
    ASSERT_EQ(w.size(), 16u);
    // Oracle: direct enumeration of k·period < horizon.
    std::size_t n = 0;
    for (Micros k = 0; k * 5700 * kSecond < kDay; ++k) ++n;
    EXPECT_EQ(n, 16u);
    EXPECT_EQ(w[15].open, 15 * 5700 * kSecond);
    EXPECT_EQ(w[15].close, 15 * 5700 * kSecond + 480 * kSecond);
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_EQ(w[i].index, i);
}

TEST(Windows, EmptyBeforeOffsetAndClippedAtHorizon) {
    PassSchedule s;
    s.offset = 1000 * kSecond;
    EXPECT_TRUE(windows(s, 999 * kSecond).empty());
    const auto w = windows(s, 1100 * kSecond);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0].close, 1100 * kSecond);
    EXPECT_THROW(windows(s, 0), SimError);
}

TEST(Windows, DisjointAndErrors) {
    for (Micros period : {10, 100, 5700})
        for (Micros duration = 1; duration < period; duration += std::max<Micros>(1, period / 7)) {
            PassSchedule s{period * kSecond, duration * kSecond, 3 * kSecond};
            const auto w = windows(s, 20 * period * kSecond);
            for (std::size_t i = 1; i < w.size(); ++i) EXPECT_LE(w[i - 1].close, w[i].open);
        }
    PassSchedule bad{100 * kSecond, 100 * kSecond, 0};
    EXPECT_THROW(windows(bad, kDay), SimError);
    bad.duration = 101 * kSecond;
    EXPECT_THROW(bad.validate(), SimError);
}

TEST(Windows, WindowAt) {
    PassSchedule s;
    EXPECT_EQ(window_at(s, 0)->index, 0u);
    EXPECT_FALSE(window_at(s, 480 * kSecond));
    EXPECT_EQ(window_at(s, 5700 * kSecond)->index, 1u);
    s.offset = 10;
    EXPECT_FALSE(window_at(s, 5));
}

TEST(Transmit, DeterministicDelay) {
    Channel ch(LinkModel{});
    PassSchedule s;
    const Bytes pkt(212, 1);
    const auto r = ch.transmit(s, 1 * kSecond, pkt);
    EXPECT_EQ(r.outcome, Outcome::Delivered);
    EXPECT_EQ(r.deliver_us, 1 * kSecond + 176667 + 20 * kMillisecond);  // ceil(212·8/9600 s) in µs
    EXPECT_EQ(r.wire, pkt);
    EXPECT_THROW(ch.transmit(s, -1, pkt), SimError);
}

TEST(Transmit, OutOfWindow) {
    LinkModel l;
    l.loss_prob = 0.5;
    Channel ch(l);
    PassSchedule s;
    for (Micros t : {480 * kSecond, 1000 * kSecond, 5699 * kSecond})
        for (std::size_t size : {1, 100, 1000}) EXPECT_EQ(ch.transmit(s, t, Bytes(size)).outcome, Outcome::OutOfWindow);
    // Starts in-window but cannot finish before close.
    EXPECT_EQ(ch.transmit(s, 480 * kSecond - 1000, Bytes(10)).outcome, Outcome::OutOfWindow);
}

TEST(Transmit, SeededLossRateAndReproducibility) {
    LinkModel l;
    l.loss_prob = 0.2;
    l.rng_seed = 2024;
    PassSchedule s;
    auto run = [&] {
        Channel ch(l);
        std::vector<Outcome> out;
        for (int i = 0; i < 10000; ++i) out.push_back(ch.transmit(s, 0, Bytes(32)).outcome);
        return out;
    };
    const auto a = run();
    const auto lost = std::count(a.begin(), a.end(), Outcome::Lost);
    EXPECT_GE(lost, 1900);
    EXPECT_LE(lost, 2100);
    EXPECT_EQ(a, run());
}

TEST(Transmit, CorruptionChangesExactlyOneByte) {
    LinkModel l;
    l.corrupt_prob = 0.999;
    Channel ch(l);
    PassSchedule s;
    const Bytes pkt(64, 0x5A);
    for (int i = 0; i < 500; ++i) {
        const auto r = ch.transmit(s, 0, pkt);
        if (r.outcome != Outcome::Corrupted) continue;
        int diff = 0;
        for (std::size_t k = 0; k < pkt.size(); ++k) diff += r.wire[k] != pkt[k];
        EXPECT_EQ(diff, 1);
    }
}

TEST(LinkModel, Validation) {
    LinkModel l;
    l.loss_prob = 1.0;
    EXPECT_THROW(l.validate(), SimError);
    l = {};
    l.data_rate = 0;
    EXPECT_THROW(Channel{l}, SimError);
    l = {};
    l.corrupt_prob = -0.1;
    EXPECT_THROW(l.validate(), SimError);
}

TEST(Exchange, LosslessSinglePass) {
    ExchangeConfig cfg;
    const auto r = run_exchange(cfg);
    ASSERT_EQ(r.status, ExchangeStatus::Established);
    EXPECT_EQ(r.passes_elapsed, 1u);
    EXPECT_LT(r.finished_us, 480 * kSecond);
    EXPECT_TRUE(r.secrets_equal);
    EXPECT_TRUE(r.confirm_tags_match);
    EXPECT_EQ(r.app_frames_ok, cfg.app_frames);
    EXPECT_EQ(r.report.pk_fragments, 5u);
    EXPECT_EQ(r.report.ct_fragments, 4u);
    EXPECT_EQ(r.report.retransmissions, 0u);
    EXPECT_EQ(r.report.lost, 0u);
    check_trace_invariants(cfg, r);
}

TEST(Exchange, LossySweepWithinTenPasses) {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto cfg = lossy(seed, 0.2);
        const auto r = run_exchange(cfg);
        ASSERT_EQ(r.status, ExchangeStatus::Established) << seed;
        EXPECT_LE(r.passes_elapsed, 10u) << seed;
        EXPECT_TRUE(r.confirm_tags_match);
        check_trace_invariants(cfg, r);
    }
}

TEST(Exchange, StressConfigResumesAcrossPasses) {
    const auto cfg = stress();
    const auto r = run_exchange(cfg);
    ASSERT_EQ(r.status, ExchangeStatus::Established);
    EXPECT_GE(r.passes_elapsed, 4u);
    EXPECT_TRUE(r.secrets_equal);
    check_trace_invariants(cfg, r);
    std::size_t pk_in_first_pass = 0;
    for (const auto& e : r.trace)
        pk_in_first_pass += e.pass_index == 0 && e.kind == handshake::MessageKind::PkFragment &&
                            e.outcome == Outcome::Delivered;
    EXPECT_EQ(pk_in_first_pass, 2u);
}

TEST(Exchange, CorruptedDeliveriesNeverAccepted) {
    auto cfg = lossy(7, 0.05);
    cfg.link.corrupt_prob = 0.2;
    std::size_t corrupted = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        cfg.link.rng_seed = seed;
        const auto r = run_exchange(cfg);
        ASSERT_EQ(r.status, ExchangeStatus::Established) << seed;
        const auto opts = cfg.party(handshake::Site::Ground).verify_options();
        for (const auto& e : r.trace) {
            if (e.outcome != Outcome::Corrupted) continue;
            ++corrupted;
            EXPECT_THROW(link::verify(link::CspPacket::decode(e.wire), opts), link::LinkError);
        }
        EXPECT_EQ(r.ground.link_stats().rejected() + r.satellite.link_stats().rejected(), r.report.corrupted);
    }
    EXPECT_GT(corrupted, 20u);
}

TEST(Exchange, AdversaryDuplicatesAreHarmless) {
    auto cfg = lossy(3, 0.1);
    cfg.adversary = [](const handshake::TraceEvent&, ByteView w) {
        return std::vector<Bytes>{Bytes(w.begin(), w.end()), Bytes(w.begin(), w.end())};
    };
    const auto r = run_exchange(cfg);
    ASSERT_EQ(r.status, ExchangeStatus::Established);
    EXPECT_GT(r.ground.stats().duplicates + r.satellite.stats().duplicates, 0u);
}

TEST(Exchange, MaxPassesGivesHorizonExhausted) {
    auto cfg = stress();
    cfg.max_passes = 2;
    const auto r = run_exchange(cfg);
    EXPECT_EQ(r.status, ExchangeStatus::HorizonExhausted);
    EXPECT_EQ(r.passes_elapsed, 2u);
}

TEST(Exchange, SatelliteKeyHolder) {
    ExchangeConfig cfg;
    cfg.ground_role = handshake::Role::Encapsulator;
    const auto r = run_exchange(cfg);
    ASSERT_EQ(r.status, ExchangeStatus::Established);
    EXPECT_EQ(r.report.pk_fragments, 5u);
    for (const auto& e : r.trace)
        if (e.kind == handshake::MessageKind::PkFragment) {
            EXPECT_EQ(e.dir, Direction::Downlink);
        }
}

TEST(Exchange, SmallMtu) {
    ExchangeConfig cfg;
    cfg.mtu = 32;
    const auto r = run_exchange(cfg);
    ASSERT_EQ(r.status, ExchangeStatus::Established);
    EXPECT_EQ(r.report.pk_fragments, 34u);
    EXPECT_EQ(r.report.ct_fragments, 32u);
}

TEST(Determinism, IdenticalTraces) {
    const auto cfg = lossy(11, 0.2);
    EXPECT_EQ(trace_ndjson(run_exchange(cfg).trace), trace_ndjson(run_exchange(cfg).trace));
    auto other = cfg;
    other.link.rng_seed = 12;
    EXPECT_NE(trace_ndjson(run_exchange(cfg).trace), trace_ndjson(run_exchange(other).trace));
}

// Frozen from a reviewed run; any change to the protocol or channel model shows up here.
TEST(Determinism, GoldenTraceDigest) {
    const auto r = run_exchange(lossy(42, 0.2));
    const auto nd = trace_ndjson(r.trace);
    EXPECT_EQ(sha256_hex(nd), "f7c36f1c5955fdaa5cb4b905ba707a088b22443f0ee14a7b83a09c29094f77ba");
}

TEST(Persist, SnapshotRestoreMatchesControl) {
    for (auto cfg : {stress(), lossy(5, 0.3), lossy(9, 0.2)}) {
        auto persisted = cfg;
        persisted.persist_between_passes = true;
        const auto a = run_exchange(cfg);
        const auto b = run_exchange(persisted);
        EXPECT_EQ(trace_ndjson(a.trace), trace_ndjson(b.trace));
        ASSERT_EQ(a.trace.size(), b.trace.size());
        for (std::size_t i = 0; i < a.trace.size(); ++i) EXPECT_EQ(a.trace[i].wire, b.trace[i].wire);
        EXPECT_EQ(a.status, b.status);
        EXPECT_EQ(a.ground.snapshot(), b.ground.snapshot());
    }
}

TEST(Export, TraceRecordFields) {
    const auto r = run_exchange(ExchangeConfig{});
    const auto nd = trace_ndjson(r.trace);
    const auto first = nlohmann::json::parse(nd.substr(0, nd.find('\n')));
    for (const char* k : {"t_us", "dir", "size", "outcome", "port"}) EXPECT_TRUE(first.contains(k)) << k;
    EXPECT_EQ(first["dir"], "up");
    EXPECT_EQ(first["outcome"], "delivered");
    EXPECT_EQ(std::count(nd.begin(), nd.end(), '\n'), static_cast<long>(r.trace.size()));
    const auto j = to_json(r);
    EXPECT_EQ(j["status"], "Established");
    EXPECT_TRUE(j.contains("model_note"));
    EXPECT_EQ(j["accounting"]["pk_fragments"], 5);
}
