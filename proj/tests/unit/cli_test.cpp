#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "orbitkem/cli/bench.hpp"
#include "orbitkem/cli/commands.hpp"
#include "orbitkem/cli/keystore.hpp"
#include "orbitkem/cli/run_config.hpp"

using namespace orbitkem;
using namespace orbitkem::cli;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path temp_file(const std::string& name, const std::string& content) {
    const auto p = fs::temp_directory_path() / ("orbitkem_cli_test_" + name);
    std::ofstream(p, std::ios::binary) << content;
    return p;
}

const std::string kKatPath = std::string(ORBITKEM_TEST_DATA) + "/PQCkemKAT_1632.rsp";

} // namespace

TEST(Keystore, HundredNodesAndSmallCases) {
    EXPECT_EQ(keystore(100).pairwise_keys, 4950u);
    EXPECT_EQ(keystore(1).pairwise_keys, 0u);
    EXPECT_EQ(keystore(2).pairwise_keys, 1u);
    EXPECT_EQ(keystore(2).keypairs, 2u);
    EXPECT_EQ(keystore(2).pk_keys, 4u);
    const auto r = keystore(100);
    EXPECT_EQ(r.symmetric_storage_bytes, 4950u * 32u);
    EXPECT_EQ(r.pk_storage_bytes, 100u * (800u + 1632u));
    EXPECT_THROW(keystore(0), KeystoreError);
    EXPECT_NO_THROW(keystore(std::uint64_t{1} << 31));
    EXPECT_THROW(keystore((std::uint64_t{1} << 31) + 1), KeystoreError);
}

TEST(Keystore, RecurrenceUpToTenThousand) {
    for (std::uint64_t n = 2; n <= 10000; ++n) {
        ASSERT_EQ(keystore(n).pairwise_keys, keystore(n - 1).pairwise_keys + (n - 1)) << n;
        ASSERT_EQ(keystore(n).pk_keys, 2 * n);
    }
}

TEST(RunConfig, TextRoundTrip) {
    RunConfig c;
    c.seed = 77;
    c.seeds = 3;
    c.loss = 0.2;
    c.corrupt = 0.015;
    c.ground_role = "encapsulator";
    c.persist = true;
    c.format = "csv";
    std::istringstream in(c.to_text());
    RunConfig back;
    parse_config(in, back);
    EXPECT_EQ(back.to_text(), c.to_text());
    EXPECT_EQ(back.get("loss"), "0.2");
    EXPECT_EQ(back.get("persist"), "true");
}

TEST(RunConfig, ParseCommentsAndErrors) {
    std::istringstream in("# sweep\n  mtu = 32   # small\n\nloss=0.1\n");
    RunConfig c;
    parse_config(in, c);
    EXPECT_EQ(c.mtu, 32u);
    EXPECT_DOUBLE_EQ(c.loss, 0.1);

    auto bad = [](const std::string& text) {
        std::istringstream s(text);
        RunConfig r;
        parse_config(s, r);
        r.validate();
    };
    EXPECT_THROW(bad("colour = red\n"), UsageError);
    EXPECT_THROW(bad("mtu\n"), UsageError);
    EXPECT_THROW(bad("mtu = -1\n"), UsageError);
    EXPECT_THROW(bad("loss = lots\n"), UsageError);
    EXPECT_THROW(bad("persist = maybe\n"), UsageError);
    EXPECT_THROW(bad("loss = 1.5\n"), UsageError);
    EXPECT_THROW(bad("format = xml\n"), UsageError);
    EXPECT_THROW(bad("ground_role = both\n"), UsageError);
    EXPECT_THROW(bad("mtu = 8\n"), UsageError);
}

TEST(RunConfig, MapsOntoExchangeConfig) {
    RunConfig c;
    c.mtu = 64;
    c.loss = 0.1;
    c.rate = 1200;
    c.duration_s = 60;
    c.ground_role = "encapsulator";
    const auto e = c.exchange_config(9);
    EXPECT_EQ(e.mtu, 64u);
    EXPECT_EQ(e.link.rng_seed, 9u);
    EXPECT_EQ(e.link.data_rate, 1200u);
    EXPECT_EQ(e.schedule.duration, 60 * handshake::kSecond);
    EXPECT_EQ(e.ground_role, handshake::Role::Encapsulator);
}

TEST(Exchange, ReportEmbedsConfigAndReproduces) {
    RunConfig c;
    c.seeds = 3;
    c.loss = 0.2;
    std::ostringstream out;
    ASSERT_EQ(cmd_exchange(c, {}, out), kExitOk);
    const auto rep = nlohmann::json::parse(out.str());
    EXPECT_EQ(rep["tool"], "orbitkem");
    EXPECT_TRUE(rep.contains("version"));
    EXPECT_EQ(rep["runs"], 3);
    EXPECT_EQ(rep["established"], 3);
    EXPECT_DOUBLE_EQ(rep["success_rate"].get<double>(), 1.0);

    RunConfig again;
    for (const auto& [k, v] : rep["config"].items()) again.set(k, v.get<std::string>());
    std::ostringstream out2;
    cmd_exchange(again, {}, out2);
    EXPECT_EQ(out.str(), out2.str());  // no timing fields in exchange reports
}

TEST(Exchange, CsvAndFailureExit) {
    RunConfig c;
    c.format = "csv";
    c.rate = 1200;
    c.duration_s = 3;
    c.max_passes = 1;
    std::ostringstream out;
    EXPECT_EQ(cmd_exchange(c, {}, out), kExitFailure);
    EXPECT_EQ(out.str().substr(0, 12), "seed,status,");
    EXPECT_NE(out.str().find("HorizonExhausted"), std::string::npos);
}

TEST(Exchange, TraceFile) {
    RunConfig c;
    const auto path = fs::temp_directory_path() / "orbitkem_cli_test_trace.ndjson";
    std::ostringstream out;
    ASSERT_EQ(cmd_exchange(c, path.string(), out), kExitOk);
    const auto text = read_file(path);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 12);
    fs::remove(path);
}

TEST(Bench, SmallRunHasAllRows) {
    const auto rep = run_bench({}, 1);
    EXPECT_EQ(rep.requested_iterations, 1u);
    EXPECT_EQ(rep.iterations, kMinBenchIterations);
    EXPECT_GE(rep.rows.size(), 8u);
    for (const auto& r : rep.rows) {
        EXPECT_GT(r.median_ns, 0.0) << r.name;
        EXPECT_GE(r.p95_ns, r.median_ns) << r.name;
        EXPECT_EQ(r.iterations, kMinBenchIterations);
    }
    EXPECT_TRUE(rep.decaps_encaps_ratio());
    EXPECT_FALSE(rep.environment.empty());
    EXPECT_THROW(run_bench({"nope"}, 1), BenchError);
    EXPECT_THROW(run_bench({}, 0), BenchError);
    EXPECT_EQ(run_bench({"xtea_block"}, 100).rows.size(), 1u);
}

TEST(Kat, OfficialFilePasses) {
    std::ostringstream out, err;
    EXPECT_EQ(cmd_kat({kKatPath, false}, out, err), kExitOk);
    EXPECT_NE(out.str().find("kat: 100/100 vectors pass"), std::string::npos);
}

TEST(Kat, OneCorruptedSharedSecret) {
    auto text = read_file(kKatPath);
    // The fourth "ss = " line belongs to count = 3.
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) pos = text.find("\nss = ", pos + 1);
    ASSERT_NE(pos, std::string::npos);
    char& c = text[pos + 6];
    c = c == '0' ? '1' : '0';
    const auto p = temp_file("bad_ss.rsp", text);
    std::ostringstream out, err;
    EXPECT_EQ(cmd_kat({p.string(), false}, out, err), kExitFailure);
    EXPECT_NE(out.str().find("vector 3: FAIL ss"), std::string::npos);
    EXPECT_NE(out.str().find("kat: 99/100 vectors pass"), std::string::npos);
    fs::remove(p);
}

TEST(Kat, EmptyOrMissingIsUsageError) {
    const auto p = temp_file("empty.rsp", "");
    std::ostringstream out, err;
    EXPECT_EQ(cmd_kat({p.string(), false}, out, err), kExitUsage);
    EXPECT_EQ(cmd_kat({"/nonexistent/file.rsp", false}, out, err), kExitUsage);
    fs::remove(p);
}

TEST(DumpPacket, WorkedExampleAndVerification) {
    const Bytes key(16, 0x11);
    link::SealOptions so;
    so.crc = true;
    so.hmac_key = key;
    const auto wire = link::seal(link::CspHeader{2, 1, 10, 22, 22, 0}, to_bytes("ping"), so).encode();

    std::ostringstream out, err;
    EXPECT_EQ(cmd_dump_packet({to_hex(wire), to_hex(key), true}, out, err), kExitOk);
    EXPECT_NE(out.str().find("verify      ok"), std::string::npos);

    std::ostringstream o2;
    EXPECT_EQ(cmd_dump_packet({to_hex(wire), std::string(32, '2'), true}, o2, err), kExitFailure);
    EXPECT_NE(o2.str().find("FAIL"), std::string::npos);

    std::ostringstream o3;
    EXPECT_EQ(cmd_dump_packet({to_hex(wire), "", false}, o3, err), kExitOk);
    EXPECT_NE(o3.str().find("hmac not checked"), std::string::npos);

    auto bad = wire;
    bad[5] ^= 1;
    std::ostringstream o4;
    EXPECT_EQ(cmd_dump_packet({to_hex(bad), "", false}, o4, err), kExitFailure);

    std::ostringstream o5;
    EXPECT_EQ(cmd_dump_packet({"xyz", "", false}, o5, err), kExitUsage);
    EXPECT_EQ(cmd_dump_packet({"82a4", "", false}, o5, err), kExitFailure);
}
