// orbitkem: KAT runner, simulated exchanges, key-management arithmetic, benchmarks, packet dumps.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "orbitkem/cli/commands.hpp"

using namespace orbitkem;

namespace {

void add_run_flags(CLI::App* sub, cli::RunConfig& cfg, std::string& config_file) {
    sub->add_option("--config", config_file, "key = value config file (flags override it)");
    sub->add_option("--seed", cfg.seed, "first RNG seed");
    sub->add_option("--seeds", cfg.seeds, "number of consecutive seeds to run");
    sub->add_option("--mtu", cfg.mtu, "CSP payload MTU in bytes (32..1024)");
    sub->add_option("--loss", cfg.loss, "per-packet loss probability");
    sub->add_option("--corrupt", cfg.corrupt, "per-packet corruption probability");
    sub->add_option("--rate", cfg.rate, "link data rate, bit/s");
    sub->add_option("--period", cfg.period_s, "orbit period, s");
    sub->add_option("--duration", cfg.duration_s, "pass duration, s");
    sub->add_option("--offset", cfg.offset_s, "first pass offset, s");
    sub->add_option("--turnaround-ms", cfg.turnaround_ms, "half-duplex turnaround, ms");
    sub->add_option("--ground-role", cfg.ground_role, "keyholder or encapsulator");
    sub->add_option("--max-passes", cfg.max_passes, "stop after this many passes (0 = until timeout)");
    sub->add_flag("--persist", cfg.persist, "snapshot and restore sessions between passes");
    sub->add_option("-o,--output", cfg.output, "write the report here instead of stdout");
    sub->add_option("--format", cfg.format, "json or csv");
}

/// File values first, then any flag given on the command line wins.
void merge_config_file(CLI::App* sub, const std::string& path, cli::RunConfig& cfg) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw cli::UsageError("cannot open config file '" + path + "'");
    cli::RunConfig from_file;
    cli::parse_config(in, from_file);
    const std::vector<std::pair<std::string, std::string>> flag_keys{
        {"--seed", "seed"},         {"--seeds", "seeds"},           {"--mtu", "mtu"},
        {"--loss", "loss"},         {"--corrupt", "corrupt"},       {"--rate", "rate"},
        {"--period", "period_s"},   {"--duration", "duration_s"},   {"--offset", "offset_s"},
        {"--turnaround-ms", "turnaround_ms"}, {"--ground-role", "ground_role"}, {"--max-passes", "max_passes"},
        {"--persist", "persist"},   {"--output", "output"},         {"--format", "format"}};
    for (const auto& [flag, key] : flag_keys)
        if (sub->count(flag) != 0) from_file.set(key, cfg.get(key));
    cfg = from_file;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"orbitkem: post-quantum key exchange over an intermittent CSP link"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ORBITKEM_VERSION);

    cli::RunConfig cfg;
    std::string config_file;

    cli::KatOptions kat;
    auto* kat_cmd = app.add_subcommand("kat", "check the KEM against a KAT response file");
    kat_cmd->add_option("file", kat.path, "PQCkemKAT .rsp file")->required();
    kat_cmd->add_flag("-v,--verbose", kat.verbose, "print every vector");

    std::string trace_path;
    auto* ex_cmd = app.add_subcommand("exchange", "simulate the handshake over passes");
    add_run_flags(ex_cmd, cfg, config_file);
    ex_cmd->add_option("--trace", trace_path, "write the packet trace as NDJSON");

    std::vector<std::uint64_t> ns;
    auto* ks_cmd = app.add_subcommand("keystore", "pairwise vs public-key key counts for n nodes");
    ks_cmd->add_option("n", ns, "node counts")->required();
    ks_cmd->add_option("--format", cfg.format, "json or csv");
    ks_cmd->add_option("-o,--output", cfg.output, "write the report here instead of stdout");

    std::vector<std::string> ops;
    std::size_t iterations = 1000;
    auto* bench_cmd = app.add_subcommand("bench", "time the primitives");
    bench_cmd->add_option("--ops", ops, "operation names or 'all'")->delimiter(',');
    bench_cmd->add_option("-n,--iterations", iterations, "iterations per operation (at least 100 are run)");
    bench_cmd->add_option("--format", cfg.format, "json or csv");
    bench_cmd->add_option("-o,--output", cfg.output, "write the report here instead of stdout");
    bench_cmd->add_flag("--list", "list operation names")->trigger_on_parse();

    cli::DumpOptions dump;
    auto* dump_cmd = app.add_subcommand("dump-packet", "decode a CSP packet given as hex");
    dump_cmd->add_option("hex", dump.hex, "wire bytes")->required();
    dump_cmd->add_option("--key", dump.hmac_key_hex, "HMAC key as hex");
    dump_cmd->add_flag("--require-crc", dump.require_crc, "treat a missing CRC as failure");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kExitUsage;
    }

    try {
        if (*kat_cmd) return cli::cmd_kat(kat, std::cout, std::cerr);
        if (*ex_cmd) {
            merge_config_file(ex_cmd, config_file, cfg);
            return cli::cmd_exchange(cfg, trace_path, std::cout);
        }
        if (*ks_cmd) {
            cfg.validate();
            return cli::cmd_keystore(cfg, ns, std::cout);
        }
        if (*bench_cmd) {
            if (bench_cmd->count("--list")) {
                for (const auto& n : cli::bench_op_names()) std::cout << n << "\n";
                return cli::kExitOk;
            }
            cfg.validate();
            return cli::cmd_bench(cfg, ops, iterations, std::cout);
        }
        if (*dump_cmd) return cli::cmd_dump_packet(dump, std::cout, std::cerr);
    } catch (const cli::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitUsage;
    } catch (const cli::KeystoreError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitUsage;
    } catch (const cli::BenchError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitUsage;
    } catch (const sim::SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitFailure;
    }
    return cli::kExitUsage;
}
