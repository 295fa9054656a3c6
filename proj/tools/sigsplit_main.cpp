// Experiment runner: codebook construction and verification, protocol
// simulation sweeps, analytic performance curves, CSV emission.

#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "sigsplit/analysis.hpp"
#include "sigsplit/channel.hpp"
#include "sigsplit/protocol.hpp"
#include "sigsplit/rng.hpp"
#include "sigsplit/signature_code.hpp"

namespace {

using namespace sigsplit;

// ---------------------------------------------------------------------
// small utilities

std::string fmt10(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    return os;
}

// Dispatches sweep points to a worker pool; callers index results so the
// assembled output order never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::scoped_lock lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Walks every subset of ids with 1 <= size <= max_size.
template <class Fn>
void for_each_subset(const std::vector<int>& ids, unsigned max_size, Fn&& fn) {
    const std::size_t n = ids.size();
    for (std::size_t size = 1; size <= std::min<std::size_t>(max_size, n);
         ++size) {
        std::vector<std::size_t> pick(size);
        for (std::size_t i = 0; i < size; ++i) pick[i] = i;
        std::vector<int> subset(size);
        for (;;) {
            for (std::size_t i = 0; i < size; ++i) subset[i] = ids[pick[i]];
            fn(subset);
            std::size_t i = size;
            bool advanced = false;
            while (i-- > 0) {
                if (pick[i] + (size - i) < n) {
                    ++pick[i];
                    for (std::size_t j = i + 1; j < size; ++j) {
                        pick[j] = pick[j - 1] + 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if (!advanced) break;
        }
    }
}

mpz_class subset_count(std::size_t n, unsigned max_size) {
    mpz_class total = 0, choose;
    for (unsigned size = 1; size <= std::min<std::size_t>(max_size, n); ++size) {
        mpz_bin_uiui(choose.get_mpz_t(), n, size);
        total += choose;
    }
    return total;
}

// ---------------------------------------------------------------------
// config file support: a JSON object whose keys mirror the long flags;
// explicit command-line flags win.

nlohmann::json load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read config file " + path);
    nlohmann::json j;
    is >> j;
    if (!j.is_object()) throw std::runtime_error("config must be a JSON object");
    return j;
}

template <class T>
void merge_config(const CLI::App& cmd, const nlohmann::json& cfg,
                  const std::string& name, T& target) {
    if (!cfg.contains(name)) return;
    if (cmd.count("--" + name) > 0) return;
    target = cfg.at(name).get<T>();
}

struct CommonOpts {
    std::string config;

    nlohmann::json config_json(const CLI::App& cmd) const {
        (void)cmd;
        return config.empty() ? nlohmann::json::object() : load_config(config);
    }
};

void add_config_flag(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config,
                    "JSON config file mirroring the long flags; explicit "
                    "flags override it");
}

// ---------------------------------------------------------------------
// codebook verification shared by `codebook` and `verify`

bool verify_codebook(const SignatureCodebook& cb, std::uint64_t max_subsets) {
    const std::vector<int> ids = cb.users();
    const mpz_class total = subset_count(ids.size(), cb.threshold());
    if (total > max_subsets) {
        std::cout << "uniqueness check skipped: " << total.get_str()
                  << " subsets exceed the cap of " << max_subsets << "\n";
        return true;
    }
    const auto expected = total.get_ui();
    std::set<ColumnSums> seen;
    std::uint64_t checked = 0, decoded = 0;
    bool ok = true;
    for_each_subset(ids, cb.threshold(), [&](const std::vector<int>& subset) {
        std::vector<SignatureWord> words;
        words.reserve(subset.size());
        for (int user : subset) words.push_back(cb.encode_signature(user));
        const ColumnSums sums = sum_signature_words(words, cb.sig_len());
        ++checked;
        if (!seen.insert(sums).second) {
            ok = false;
            return;
        }
        try {
            if (cb.decode_active_set(sums) == subset) ++decoded;
        } catch (const std::exception&) {
            ok = false;
        }
    });
    ok = ok && checked == expected && decoded == expected;
    if (ok) {
        std::cout << checked << "/" << expected << " subsets unique\n"
                  << decoded << "/" << expected << " decode round-trips OK\n";
    } else {
        std::cout << "verification FAILED: " << seen.size() << "/" << checked
                  << " unique, " << decoded << "/" << checked << " decoded\n";
    }
    return ok;
}

// ---------------------------------------------------------------------
// subcommands

struct CodebookOpts : CommonOpts {
    std::uint64_t m = 0;
    unsigned k = 1;
    std::uint32_t q = 2;
    std::string out = "codebook.json";
    std::uint64_t max_order = 1'000'000'000ULL;
    std::uint64_t max_subsets = 2'000'000ULL;
};

int run_codebook(const CLI::App& cmd, CodebookOpts opts) {
    const auto cfg = opts.config_json(cmd);
    merge_config(cmd, cfg, "m", opts.m);
    merge_config(cmd, cfg, "k", opts.k);
    merge_config(cmd, cfg, "q", opts.q);
    merge_config(cmd, cfg, "out", opts.out);
    merge_config(cmd, cfg, "max-order", opts.max_order);
    merge_config(cmd, cfg, "max-subsets", opts.max_subsets);

    mpz_class order;
    mpz_ui_pow_ui(order.get_mpz_t(), opts.m, opts.k);
    order -= 1;
    if (order > opts.max_order) {
        std::cerr << "refusing to build: group order " << order.get_str()
                  << " exceeds the construction cap " << opts.max_order
                  << " (a table of ~sqrt(order) elements would be required;"
                  << " raise --max-order only for desk-scale parameters)\n";
        return 2;
    }

    const SignatureCodebook cb =
        SignatureCodebook::build(opts.m, opts.k, opts.q);
    open_out(opts.out) << cb.to_json().dump(2) << "\n";
    std::cout << "codebook M=" << opts.m << " K=" << opts.k << " q=" << opts.q
              << " sig_len=" << cb.sig_len() << " N_w=" << fmt10(cb.signature_bits())
              << " bits -> " << opts.out << "\n";
    return verify_codebook(cb, opts.max_subsets) ? 0 : 1;
}

struct VerifyOpts : CommonOpts {
    std::string in;
    std::uint64_t max_subsets = 2'000'000ULL;
};

int run_verify(const CLI::App& cmd, VerifyOpts opts) {
    const auto cfg = opts.config_json(cmd);
    merge_config(cmd, cfg, "in", opts.in);
    merge_config(cmd, cfg, "max-subsets", opts.max_subsets);

    std::ifstream is(opts.in);
    if (!is) throw std::runtime_error("cannot read " + opts.in);
    nlohmann::json j;
    is >> j;
    const SignatureCodebook cb = SignatureCodebook::from_json(j);
    std::cout << "loaded codebook M=" << cb.user_count()
              << " K=" << cb.threshold() << " q=" << cb.q() << " ("
              << cb.assignments().size() << " signatures)\n"
              << "field and exponent consistency OK\n";
    return verify_codebook(cb, opts.max_subsets) ? 0 : 1;
}

struct SimulateOpts : CommonOpts {
    std::uint64_t m = 0;
    unsigned k = 1;
    std::uint32_t q = 2;
    double p = 0.5;
    double power = 100.0;
    unsigned d_bits = 64;
    std::uint64_t trials = 1000;
    std::uint64_t seed = 1;
    std::optional<unsigned> fixed_l;
    std::string out = "simulate.csv";
    std::string transcript;
};

int run_simulate(const CLI::App& cmd, SimulateOpts opts) {
    const auto cfg = opts.config_json(cmd);
    merge_config(cmd, cfg, "m", opts.m);
    merge_config(cmd, cfg, "k", opts.k);
    merge_config(cmd, cfg, "q", opts.q);
    merge_config(cmd, cfg, "p", opts.p);
    merge_config(cmd, cfg, "power", opts.power);
    merge_config(cmd, cfg, "d-bits", opts.d_bits);
    merge_config(cmd, cfg, "trials", opts.trials);
    merge_config(cmd, cfg, "seed", opts.seed);
    merge_config(cmd, cfg, "out", opts.out);
    merge_config(cmd, cfg, "transcript", opts.transcript);
    if (cmd.count("--l") == 0 && cfg.contains("l")) {
        opts.fixed_l = cfg.at("l").get<unsigned>();
    }

    SystemParams params{.m = opts.m,
                        .k = opts.k,
                        .q = opts.q,
                        .activation_prob = opts.p,
                        .power = opts.power,
                        .payload_bits = opts.d_bits,
                        .seed = opts.seed};
    params.validate();

    const SignatureCodebook cb =
        SignatureCodebook::build(opts.m, opts.k, opts.q);
    const std::vector<int> ids = cb.users();
    const std::size_t d_len = params.data_symbols();
    if (opts.fixed_l && *opts.fixed_l > ids.size()) {
        throw std::invalid_argument("fixed L exceeds the signatured users");
    }

    std::ofstream transcript_os;
    if (!opts.transcript.empty()) transcript_os = open_out(opts.transcript);

    auto csv = open_out(opts.out);
    csv << "trial,L,slots_used,zero_error\n";

    std::uint64_t failures = 0;
    double slot_sum = 0;
    for (std::uint64_t t = 0; t < opts.trials; ++t) {
        std::mt19937_64 rng = seeded_stream(opts.seed, t);

        std::vector<int> who;
        if (opts.fixed_l) {
            std::vector<int> deck = ids;
            for (unsigned i = 0; i < *opts.fixed_l; ++i) {
                const std::size_t j =
                    i + uniform_below(rng, deck.size() - i);
                std::swap(deck[i], deck[j]);
                who.push_back(deck[i]);
            }
            std::sort(who.begin(), who.end());
        } else {
            for (int user : ids) {
                if (uniform_unit(rng) < opts.p) who.push_back(user);
            }
        }

        if (who.empty()) {
            csv << t << ",0,0,1\n";
            continue;
        }
        ActiveSet active;
        for (int user : who) {
            std::vector<std::uint32_t> payload(d_len);
            for (auto& sym : payload) {
                sym = static_cast<std::uint32_t>(uniform_below(rng, opts.q));
            }
            active.emplace(user, std::move(payload));
        }

        const ResolutionResult res = run_contention(params, cb, active);
        const bool ok = res.payloads == active;
        failures += !ok;
        slot_sum += static_cast<double>(res.slots_used);
        csv << t << "," << who.size() << "," << res.slots_used << ","
            << (ok ? 1 : 0) << "\n";
        if (transcript_os.is_open()) {
            transcript_os << nlohmann::json{{"trial", t},
                                            {"active", who},
                                            {"slots_used", res.slots_used}}
                                 .dump()
                          << "\n";
            write_event_log(transcript_os, res);
        }
    }

    std::cout << "trials=" << opts.trials << " mean_slots="
              << fmt10(slot_sum / static_cast<double>(opts.trials))
              << " zero_error=" << (opts.trials - failures) << "/"
              << opts.trials << " -> " << opts.out << "\n";
    return failures == 0 ? 0 : 1;
}

struct SlotsOpts : CommonOpts {
    unsigned k = 1;
    unsigned l_max = 20;
    std::uint64_t trials = 100'000;
    std::uint64_t seed = 1;
    std::string out = "slots.csv";
};

int run_slots(const CLI::App& cmd, SlotsOpts opts) {
    const auto cfg = opts.config_json(cmd);
    merge_config(cmd, cfg, "k", opts.k);
    merge_config(cmd, cfg, "l-max", opts.l_max);
    merge_config(cmd, cfg, "trials", opts.trials);
    merge_config(cmd, cfg, "seed", opts.seed);
    merge_config(cmd, cfg, "out", opts.out);

    const analysis::SlotCountTable table(opts.k, opts.l_max);
    std::vector<SlotCountSample> samples(opts.l_max);
    parallel_for(opts.l_max, [&](std::size_t i) {
        samples[i] = simulate_slot_count(static_cast<unsigned>(i + 1), opts.k,
                                         opts.trials, mix64(opts.seed) + i);
    });

    auto csv = open_out(opts.out);
    csv << "L,S_exact,mc_mean,mc_stderr,within_3se\n";
    bool all_ok = true;
    for (unsigned l = 1; l <= opts.l_max; ++l) {
        const auto& s = samples[l - 1];
        const double exact = table.expected_slots_d(l);
        const bool ok = std::fabs(s.mean - exact) <= 3 * s.std_error ||
                        s.mean == exact;
        all_ok = all_ok && ok;
        csv << l << "," << fmt10(exact) << "," << fmt10(s.mean) << ","
            << fmt10(s.std_error) << "," << (ok ? 1 : 0) << "\n";
    }
    std::cout << (all_ok ? "all" : "NOT all") << " Monte Carlo means within 3"
              << " standard errors of the exact recursion -> " << opts.out
              << "\n";
    return all_ok ? 0 : 1;
}

struct FiguresOpts : CommonOpts {
    std::string out = ".";
};

void write_fig3(const std::string& dir) {
    const unsigned ks[] = {1, 4, 16};
    const unsigned l_max = 20;
    std::vector<analysis::SlotCountTable> tables;
    for (unsigned k : ks) tables.emplace_back(k, l_max);

    auto csv = open_out(dir + "/fig3.csv");
    csv << "L";
    for (unsigned k : ks) {
        csv << ",S_exact_K" << k << ",lower_K" << k << ",upper_K" << k;
    }
    csv << "\n";
    for (unsigned l = 1; l <= l_max; ++l) {
        csv << l;
        for (std::size_t i = 0; i < std::size(ks); ++i) {
            const double alpha = analysis::alpha_star(ks[i]).get_d();
            const double beta = analysis::beta_star(ks[i]).get_d();
            csv << "," << fmt10(tables[i].expected_slots_d(l)) << ","
                << fmt10(alpha * l - 1) << "," << fmt10(beta * l - 1);
        }
        csv << "\n";
    }
}

void write_fig4(const std::string& dir) {
    const std::uint64_t m = 1031;
    const double ps[] = {3.0 / m, 6.0 / m, 12.0 / m};
    const unsigned k_max = 20;

    std::vector<std::array<double, 3>> rows(k_max);
    parallel_for(k_max, [&](std::size_t i) {
        for (std::size_t c = 0; c < 3; ++c) {
            rows[i][c] = analysis::avg_res_rate_bound(
                m, ps[c], static_cast<unsigned>(i + 1));
        }
    });

    auto csv = open_out(dir + "/fig4.csv");
    csv << "K,Rres_p3M,Rres_p6M,Rres_p12M\n";
    for (unsigned k = 1; k <= k_max; ++k) {
        csv << k;
        for (std::size_t c = 0; c < 3; ++c) csv << "," << fmt10(rows[k - 1][c]);
        csv << "\n";
    }
}

void write_fig5(const std::string& dir) {
    const std::uint64_t m = 1031;
    const double p = 3.0 / m;
    const double power = 100.0;
    const unsigned ks[] = {3, 8, 16};

    std::vector<double> payloads;
    for (int j = 0; j <= 40; ++j) {
        payloads.push_back(std::round(std::pow(10.0, 1.0 + j / 10.0)));
    }

    std::vector<std::array<double, 4>> rows(payloads.size());
    parallel_for(payloads.size(), [&](std::size_t i) {
        for (std::size_t c = 0; c < std::size(ks); ++c) {
            rows[i][c] =
                analysis::net_rate_bounds(m, p, ks[c], power, payloads[i])
                    .lower;
        }
        rows[i][3] =
            analysis::net_rate_bounds(m, p, ks[0], power, payloads[i]).upper;
    });

    auto csv = open_out(dir + "/fig5.csv");
    csv << "D,Rnet_K3,Rnet_K8,Rnet_K16,upper,half_log2P\n";
    const double half_log2p = 0.5 * std::log2(power);
    for (std::size_t i = 0; i < payloads.size(); ++i) {
        csv << static_cast<std::uint64_t>(payloads[i]);
        for (std::size_t c = 0; c < 4; ++c) csv << "," << fmt10(rows[i][c]);
        csv << "," << fmt10(half_log2p) << "\n";
    }
}

int run_figures(const CLI::App& cmd, FiguresOpts opts) {
    const auto cfg = opts.config_json(cmd);
    merge_config(cmd, cfg, "out", opts.out);
    std::filesystem::create_directories(opts.out);
    write_fig3(opts.out);
    write_fig4(opts.out);
    write_fig5(opts.out);
    std::cout << "wrote " << opts.out << "/fig3.csv, fig4.csv, fig5.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Random access with signature codes over an adder channel: codebook "
        "tools, contention-resolution simulation, analytic rate curves"};
    app.require_subcommand(1);

    CodebookOpts cb_opts;
    auto* cb_cmd = app.add_subcommand(
        "codebook", "build a signature codebook, write it, verify it");
    cb_cmd->add_option("--m", cb_opts.m, "user population (prime)");
    cb_cmd->add_option("--k", cb_opts.k, "decodable-collision threshold");
    cb_cmd->add_option("--q", cb_opts.q, "transmission alphabet (prime <= M)");
    cb_cmd->add_option("--out", cb_opts.out, "output codebook path");
    cb_cmd->add_option("--max-order", cb_opts.max_order,
                       "largest group order the builder accepts");
    cb_cmd->add_option("--max-subsets", cb_opts.max_subsets,
                       "largest subset count for exhaustive verification");
    add_config_flag(cb_cmd, cb_opts);

    VerifyOpts v_opts;
    auto* v_cmd =
        app.add_subcommand("verify", "re-verify a stored codebook file");
    v_cmd->add_option("--in", v_opts.in, "codebook file to verify");
    v_cmd->add_option("--max-subsets", v_opts.max_subsets,
                      "largest subset count for exhaustive verification");
    add_config_flag(v_cmd, v_opts);

    SimulateOpts sim_opts;
    auto* sim_cmd = app.add_subcommand(
        "simulate", "run seeded contention-resolution trials end to end");
    sim_cmd->add_option("--m", sim_opts.m, "user population (prime)");
    sim_cmd->add_option("--k", sim_opts.k, "decodable-collision threshold");
    sim_cmd->add_option("--q", sim_opts.q, "transmission alphabet (prime <= M)");
    sim_cmd->add_option("--p", sim_opts.p, "per-user activation probability");
    sim_cmd->add_option("--power", sim_opts.power, "power constraint P > 1");
    sim_cmd->add_option("--d-bits", sim_opts.d_bits, "payload bits per packet");
    sim_cmd->add_option("--trials", sim_opts.trials, "number of trials");
    sim_cmd->add_option("--seed", sim_opts.seed, "master RNG seed");
    sim_cmd->add_option("--l", sim_opts.fixed_l,
                        "fix the number of active users instead of sampling");
    sim_cmd->add_option("--out", sim_opts.out, "summary CSV path");
    sim_cmd->add_option("--transcript", sim_opts.transcript,
                        "optional per-slot event log (JSON lines)");
    add_config_flag(sim_cmd, sim_opts);

    SlotsOpts sl_opts;
    auto* sl_cmd = app.add_subcommand(
        "slots", "exact expected slot counts vs Monte Carlo estimates");
    sl_cmd->add_option("--k", sl_opts.k, "decodable-collision threshold");
    sl_cmd->add_option("--l-max", sl_opts.l_max, "largest active count");
    sl_cmd->add_option("--trials", sl_opts.trials, "Monte Carlo trials per L");
    sl_cmd->add_option("--seed", sl_opts.seed, "master RNG seed");
    sl_cmd->add_option("--out", sl_opts.out, "output CSV path");
    add_config_flag(sl_cmd, sl_opts);

    FiguresOpts fig_opts;
    auto* fig_cmd = app.add_subcommand(
        "figures", "emit the analytic performance curves as CSV");
    fig_cmd->add_option("--out", fig_opts.out, "output directory");
    add_config_flag(fig_cmd, fig_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cb_cmd->parsed()) return run_codebook(*cb_cmd, cb_opts);
        if (v_cmd->parsed()) return run_verify(*v_cmd, v_opts);
        if (sim_cmd->parsed()) return run_simulate(*sim_cmd, sim_opts);
        if (sl_cmd->parsed()) return run_slots(*sl_cmd, sl_opts);
        if (fig_cmd->parsed()) return run_figures(*fig_cmd, fig_opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
