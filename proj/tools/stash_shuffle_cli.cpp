// Command-line front end: run shuffles on item files, evaluate parameter
// vectors, and run the statistical verification suites.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "stash_shuffle/stash_shuffle.hpp"

namespace ss = stashshuffle;

namespace {

ss::ShuffleParams load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ss::IoError("cannot open config " + path);
    return ss::parse_params(is);
}

ss::AssignMode parse_mode(const std::string& mode) {
    if (mode == "separators") return ss::AssignMode::Separators;
    if (mode == "multinomial") return ss::AssignMode::Multinomial;
    throw ss::ParamError("mode must be 'separators' or 'multinomial'");
}

void print_report(std::ostream& os, const std::string& label, const ss::SecurityReport& report) {
    if (!label.empty()) os << "# " << label << "\n";
    ss::write_params(os, report.params);
    ss::write_report(os, report);
    if (report.params.stash_rounded_up)
        os << "# note: S was rounded up to the next multiple of B\n";
    os << "\n";
}

int cmd_shuffle(const std::string& config_path, const std::string& in_path,
                const std::string& out_path, std::optional<std::uint64_t> seed_opt,
                const std::string& mode_name, const std::string& trace_path,
                std::string manifest_path) {
    const ss::ShuffleParams params = load_config(config_path);
    const ss::AssignMode mode = parse_mode(mode_name);
    const ss::ItemFile input = ss::read_item_file(in_path);
    if (input.payloads.size() != params.n_items)
        throw ss::IoError("input file holds " + std::to_string(input.payloads.size()) +
                          " items but the config says N = " + std::to_string(params.n_items));

    const std::uint64_t seed = seed_opt ? *seed_opt : std::random_device{}();
    std::optional<ss::UntrustedStore> store;
    const ss::RunResult run =
        ss::run_shuffle(input.payloads, params, input.payload_size, seed, mode, &store);

    if (run.output) ss::write_item_file(out_path, *run.output, input.payload_size);
    if (!trace_path.empty())
        ss::atomic_write(trace_path, [&](std::ostream& os) { ss::write_trace(os, *store); });

    const int exit_code = ss::outcome_exit_code(run.outcome);

    if (manifest_path.empty()) manifest_path = out_path + ".manifest";
    ss::atomic_write(manifest_path, [&](std::ostream& os) {
        os << "outcome = " << ss::outcome_name(run.outcome) << '\n';
        os << "exit_code = " << exit_code << '\n';
        os << "seed = " << seed << '\n';
        os << "mode = " << ss::assign_mode_name(mode) << '\n';
        os << "input = " << in_path << '\n';
        os << "output = " << out_path << '\n';
        os << "payload_size = " << input.payload_size << '\n';
        os << "peak_private_items_distribute = " << run.stats.peak_distribute_items << '\n';
        os << "peak_private_items_compress = " << run.stats.peak_compress_items << '\n';
        os << "trace_fingerprint = " << run.fingerprint << '\n';
        if (!run.failure_detail.empty()) os << "failure = " << run.failure_detail << '\n';
        std::ostringstream ps;
        ps.precision(17);
        ss::write_params(ps, params);
        std::istringstream lines(ps.str());
        std::string line;
        while (std::getline(lines, line)) os << "params." << line << '\n';
    });

    if (run.outcome == ss::ShuffleOutcome::Success) {
        std::cout << "shuffled " << params.n_items << " items; fingerprint " << run.fingerprint
                  << "\n";
    } else {
        std::cerr << "shuffle failed: " << run.failure_detail << "\n";
    }
    return exit_code;
}

int cmd_verify(const std::string& suite, std::uint64_t trials, std::uint64_t seed,
               const std::string& config_path) {
    std::optional<ss::ShuffleParams> config;
    if (!config_path.empty()) config = load_config(config_path);

    if (suite == "uniform") {
        const std::uint64_t n = trials ? trials : 120'000;
        const ss::UniformityResult real =
            config ? ss::verify_uniform_real(n, seed, *config) : ss::verify_uniform_real(n, seed);
        std::cout << "real shuffle: trials=" << real.trials << " cells=" << real.cells
                  << " chi2=" << real.statistic << " p=" << real.p_value
                  << " failures=" << real.failures << "\n";
        const ss::UniformityResult oracle = ss::verify_uniform_oracle(n, seed + 1);
        std::cout << "ideal oracle: trials=" << oracle.trials << " cells=" << oracle.cells
                  << " chi2=" << oracle.statistic << " p=" << oracle.p_value << "\n";
        return real.pass() && oracle.pass() ? 0 : 1;
    }
    if (suite == "oblivious") {
        const std::uint64_t n = trials ? trials : 100;
        const ss::ObliviousnessResult r =
            config ? ss::verify_oblivious(n, seed, *config) : ss::verify_oblivious(n, seed);
        std::cout << "runs=" << r.runs << " unique_fingerprints=" << r.unique_fingerprints
                  << " failures=" << r.failures << " prefix_checked=" << r.prefix_checked
                  << " prefix_ok=" << r.prefix_ok << "\n";
        return r.pass() ? 0 : 1;
    }
    if (suite == "couple") {
        const std::uint64_t n = trials ? trials : 500;
        bool ok = true;
        for (const ss::AssignMode mode : {ss::AssignMode::Separators, ss::AssignMode::Multinomial}) {
            const ss::CouplingResult r = config ? ss::verify_couple(n, seed, mode, *config)
                                                : ss::verify_couple(n, seed, mode);
            std::cout << ss::assign_mode_name(mode) << ": seeds=" << r.seeds
                      << " successes=" << r.successes << " failures=" << r.failures
                      << " mismatches=" << r.mismatches << "\n";
            ok = ok && r.pass();
        }
        return ok ? 0 : 1;
    }
    if (suite == "montecarlo") {
        const std::uint64_t n = trials ? trials : 10'000;
        const ss::MonteCarloComparison r =
            config ? ss::verify_montecarlo(n, seed, *config) : ss::verify_montecarlo(n, seed);
        std::cout << "exact=" << r.exact << " multinomial=" << r.multinomial.rate << " (95% CI ["
                  << r.multinomial.ci_low << ", " << r.multinomial.ci_high << "])"
                  << " separators=" << r.separators.rate << " se=" << r.standard_error << "\n";
        std::cout << "multinomial causes: stash_overflow=" << r.multinomial.tally.stash_overflow
                  << " drain_failure=" << r.multinomial.tally.drain_failure
                  << " queue_overflow=" << r.multinomial.tally.queue_overflow
                  << " queue_underflow=" << r.multinomial.tally.queue_underflow << "\n";
        return r.pass() ? 0 : 1;
    }
    throw ss::ParamError("unknown verify suite: " + suite);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stash Shuffle: oblivious external-memory shuffling with a planner"};
    app.require_subcommand(1);

    // shuffle
    auto* shuffle = app.add_subcommand("shuffle", "run the shuffle on an item file");
    std::string config_path, in_path, out_path, trace_path, manifest_path;
    std::string mode_name = "separators";
    std::optional<std::uint64_t> seed_opt;
    shuffle->add_option("--config", config_path, "parameter config file")->required();
    shuffle->add_option("--in", in_path, "input item file")->required();
    shuffle->add_option("--out", out_path, "output item file")->required();
    shuffle->add_option("--seed", seed_opt, "master seed (random when omitted)");
    shuffle->add_option("--trace", trace_path, "write the access trace to this file");
    shuffle->add_option("--manifest", manifest_path, "manifest path (default <out>.manifest)");
    shuffle->add_option("--mode", mode_name, "separators|multinomial")
        ->check(CLI::IsMember({"separators", "multinomial"}));

    // plan
    auto* plan = app.add_subcommand("plan", "evaluate failure bounds for parameter vectors");
    std::string plan_config;
    bool table1 = false;
    std::vector<double> corollary;
    std::optional<std::uint64_t> n_opt, b_opt, c_opt, s_opt, w_opt, q_opt;
    std::optional<double> alpha_opt;
    plan->add_option("--config", plan_config, "parameter config file");
    plan->add_flag("--table1", table1, "evaluate the four published scenarios");
    plan->add_option("--corollary", corollary, "N eps: evaluate the asymptotic preset")
        ->expected(2);
    plan->add_option("--N", n_opt, "item count");
    plan->add_option("--B", b_opt, "bucket count");
    plan->add_option("--C", c_opt, "per-bucket cap");
    plan->add_option("--alpha", alpha_opt, "cap slack (alternative to --C)");
    plan->add_option("--S", s_opt, "stash capacity");
    plan->add_option("--W", w_opt, "window");
    plan->add_option("--Q", q_opt, "queue hedge");

    // verify
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    std::string suite;
    std::uint64_t trials = 0;
    std::uint64_t vseed = 1;
    std::string verify_config;
    verify->add_option("suite", suite, "uniform|oblivious|couple|montecarlo")->required();
    verify->add_option("--trials", trials, "trial count (suite default when omitted)");
    verify->add_option("--seed", vseed, "sweep seed");
    verify->add_option("--config", verify_config, "override the suite's parameter vector");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a random item file");
    std::string gen_out;
    std::uint64_t gen_n = 0, gen_seed = 1;
    std::uint32_t gen_payload = 64;
    gen->add_option("--n", gen_n, "item count")->required();
    gen->add_option("--out", gen_out, "output path")->required();
    gen->add_option("--payload", gen_payload, "payload bytes per item");
    gen->add_option("--seed", gen_seed, "generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*shuffle) {
            return cmd_shuffle(config_path, in_path, out_path, seed_opt, mode_name, trace_path,
                               manifest_path);
        }
        if (*plan) {
            std::cout.precision(12);
            if (table1) {
                for (const auto& [name, params] : ss::table1_presets())
                    print_report(std::cout, name, ss::theorem_distance(params));
                return 0;
            }
            if (!corollary.empty()) {
                const auto params = ss::corollary_preset(
                    static_cast<std::uint64_t>(corollary[0]), corollary[1]);
                print_report(std::cout, "corollary", ss::theorem_distance(params));
                return 0;
            }
            ss::ShuffleParams params;
            if (!plan_config.empty()) {
                params = load_config(plan_config);
            } else if (n_opt && b_opt && s_opt && w_opt && q_opt && (c_opt || alpha_opt)) {
                params = c_opt ? ss::derive_params_with_cap(*n_opt, *b_opt, *c_opt, *s_opt,
                                                            *w_opt, *q_opt)
                               : ss::derive_params(*n_opt, *b_opt, *alpha_opt, *s_opt, *w_opt,
                                                   *q_opt);
            } else {
                std::cerr << "plan needs --config, --table1, --corollary, or the full "
                             "--N/--B/--C|--alpha/--S/--W/--Q set\n";
                return ss::kExitIo;
            }
            print_report(std::cout, "", ss::theorem_distance(params));
            return 0;
        }
        if (*verify) {
            return cmd_verify(suite, trials, vseed, verify_config);
        }
        if (*gen) {
            ss::StreamRng rng(ss::splitmix64(gen_seed));
            std::vector<ss::Payload> payloads(gen_n);
            for (auto& p : payloads) {
                p.resize(gen_payload);
                rng.fill_bytes(p.data(), p.size());
            }
            ss::write_item_file(gen_out, payloads, gen_payload);
            std::cout << "wrote " << gen_n << " items of " << gen_payload << " bytes to "
                      << gen_out << "\n";
            return 0;
        }
    } catch (const ss::IntegrityError& e) {
        std::cerr << "integrity error: " << e.what() << "\n";
        return ss::kExitIntegrity;
    } catch (const ss::ParamError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return ss::kExitIo;
    } catch (const ss::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return ss::kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ss::kExitIo;
    }
    return 0;
}
