#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "sigsplit/analysis.hpp"
#include "sigsplit/signature_code.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWorkDir = fs::temp_directory_path() / "sigsplit_cli_test";

struct RunResult {
    int exit_code;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
    const fs::path log = kWorkDir / "cli_output.log";
    const std::string cmd = std::string(SIGSPLIT_CLI_PATH) + " " + args +
                            " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream is(log);
    std::stringstream buf;
    buf << is.rdbuf();
    return RunResult{WEXITSTATUS(status), buf.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    REQUIRE(is.good());
    std::stringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream is(p);
    REQUIRE(is.good());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(cell);
        rows.push_back(std::move(row));
    }
    return rows;
}

struct WorkDirSetup {
    WorkDirSetup() {
        fs::remove_all(kWorkDir);
        fs::create_directories(kWorkDir);
    }
};
const WorkDirSetup setup_once;

}  // namespace

TEST_CASE("codebook command builds, reports uniqueness, verifies") {
    const fs::path out = kWorkDir / "cb_7_3_2.json";
    const auto res =
        run_cli("codebook --m 7 --k 3 --q 2 --out " + out.string());
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("63/63 subsets unique") != std::string::npos);

    // The written file round-trips through the library.
    std::ifstream is(out);
    nlohmann::json j;
    is >> j;
    const auto cb = sigsplit::SignatureCodebook::from_json(j);
    CHECK(cb.user_count() == 7);
    CHECK(cb.sig_len() == j.at("sig_len").get<std::size_t>());

    const auto verify = run_cli("verify --in " + out.string());
    CHECK(verify.exit_code == 0);
    CHECK(verify.output.find("63/63 subsets unique") != std::string::npos);
}

TEST_CASE("codebook command refuses out-of-scale and invalid parameters") {
    const auto huge = run_cli("codebook --m 1031 --k 16 --q 2 --out " +
                              (kWorkDir / "never.json").string());
    CHECK(huge.exit_code == 2);
    CHECK(huge.output.find("refusing to build") != std::string::npos);
    CHECK_FALSE(fs::exists(kWorkDir / "never.json"));

    const auto composite = run_cli("codebook --m 6 --k 2 --q 2 --out " +
                                   (kWorkDir / "never.json").string());
    CHECK(composite.exit_code == 1);
    CHECK(composite.output.find("not prime") != std::string::npos);
}

TEST_CASE("figures are reproducible and carry the pinned values") {
    const fs::path dir_a = kWorkDir / "figs_a";
    const fs::path dir_b = kWorkDir / "figs_b";
    CHECK(run_cli("figures --out " + dir_a.string()).exit_code == 0);
    CHECK(run_cli("figures --out " + dir_b.string()).exit_code == 0);

    for (const char* name : {"fig3.csv", "fig4.csv", "fig5.csv"}) {
        CHECK(slurp(dir_a / name) == slurp(dir_b / name));
    }

    // fig3: L = 2 at K = 1 gives exact 5 between bounds 3 and 6.
    const auto fig3 = read_csv(dir_a / "fig3.csv");
    CHECK(fig3[0][0] == "L");
    CHECK(fig3[0][1] == "S_exact_K1");
    const auto& row2 = fig3[2];
    CHECK(row2[0] == "2");
    CHECK(std::stod(row2[1]) == doctest::Approx(5.0));
    CHECK(std::stod(row2[2]) == doctest::Approx(3.0));
    CHECK(std::stod(row2[3]) == doctest::Approx(6.0));

    // fig4: the first column of bounds is nondecreasing in K.
    const auto fig4 = read_csv(dir_a / "fig4.csv");
    CHECK(fig4[0][0] == "K");
    for (std::size_t i = 2; i < fig4.size(); ++i) {
        CHECK(std::stod(fig4[i][1]) >= std::stod(fig4[i - 1][1]) - 1e-12);
    }

    // fig5: the reference column is (1/2) log2(100) on every row.
    const auto fig5 = read_csv(dir_a / "fig5.csv");
    CHECK(fig5[0][5] == "half_log2P");
    for (std::size_t i = 1; i < fig5.size(); ++i) {
        CHECK(std::fabs(std::stod(fig5[i][5]) - 3.3219280949) < 1e-9);
        CHECK(std::stod(fig5[i][1]) <= std::stod(fig5[i][4]));
    }
    CHECK(fig5[1][0] == "10");
    CHECK(fig5.back()[0] == "100000");
}

TEST_CASE("simulate with a fixed group size hits the slot identity") {
    const fs::path out = kWorkDir / "sim_fixed.csv";
    const auto res = run_cli(
        "simulate --m 31 --k 4 --q 2 --l 4 --trials 50 --seed 7 --d-bits 16 "
        "--out " +
        out.string());
    CHECK(res.exit_code == 0);
    const auto rows = read_csv(out);
    REQUIRE(rows.size() == 51);
    CHECK(rows[0] ==
          std::vector<std::string>{"trial", "L", "slots_used", "zero_error"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][1] == "4");
        CHECK(rows[i][2] == "4");
        CHECK(rows[i][3] == "1");
    }

    // Byte-identical rerun under the same seed.
    const fs::path out2 = kWorkDir / "sim_fixed_2.csv";
    run_cli(
        "simulate --m 31 --k 4 --q 2 --l 4 --trials 50 --seed 7 --d-bits 16 "
        "--out " +
        out2.string());
    CHECK(slurp(out) == slurp(out2));
}

TEST_CASE("simulate with sampled activity matches the analytic mixture") {
    const fs::path out = kWorkDir / "sim_sampled.csv";
    const fs::path transcript = kWorkDir / "sim_sampled.jsonl";
    const auto res = run_cli(
        "simulate --m 31 --k 3 --q 2 --p 0.15 --trials 10000 --seed 11 "
        "--d-bits 8 --out " +
        out.string() + " --transcript " + transcript.string());
    CHECK(res.exit_code == 0);

    const auto rows = read_csv(out);
    REQUIRE(rows.size() == 10001);
    std::vector<std::pair<unsigned, double>> trials;  // (L, slots), L >= 1
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const unsigned l = static_cast<unsigned>(std::stoul(rows[i][1]));
        CHECK(rows[i][3] == "1");
        if (l > 0) trials.emplace_back(l, std::stod(rows[i][2]));
    }
    const auto n = static_cast<double>(trials.size());
    const sigsplit::analysis::SlotCountTable table(3, 31);

    // Empirical resolution rate: per-L slot averages recombined with the
    // observed activity weights. (A per-trial mean of L/slots would sit
    // systematically above the mixture: 1/slots is convex.)
    std::map<unsigned, std::pair<double, double>> by_l;  // L -> (count, slots)
    for (const auto& [l, slots] : trials) {
        by_l[l].first += 1;
        by_l[l].second += slots;
    }
    double grouped = 0;
    for (const auto& [l, acc] : by_l) {
        grouped += acc.first / n * (l / (acc.second / acc.first));
    }
    double expect = 0;
    for (unsigned l = 1; l <= 31; ++l) {
        expect += sigsplit::analysis::q_hat(31, 0.15, l) *
                  (l / table.expected_slots_d(l));
    }
    // Standard error via the estimator's influence values.
    double psi_sum = 0, psi_sq = 0;
    for (const auto& [l, slots] : trials) {
        const double s = table.expected_slots_d(l);
        const double psi = l / s - l * (slots - s) / (s * s);
        psi_sum += psi;
        psi_sq += psi * psi;
    }
    const double se =
        std::sqrt((psi_sq - psi_sum * psi_sum / n) / (n - 1) / n);
    CHECK(std::fabs(grouped - expect) < 3 * se);

    // The mean slot count is linear, so it compares directly.
    double slot_sum = 0, slot_sq = 0;
    for (const auto& [l, slots] : trials) {
        slot_sum += slots;
        slot_sq += slots * slots;
    }
    const double slot_mean = slot_sum / n;
    const double slot_se =
        std::sqrt((slot_sq - slot_sum * slot_sum / n) / (n - 1) / n);
    double expect_slots = 0;
    for (unsigned l = 1; l <= 31; ++l) {
        expect_slots += sigsplit::analysis::q_hat(31, 0.15, l) *
                        table.expected_slots_d(l);
    }
    CHECK(std::fabs(slot_mean - expect_slots) < 3 * slot_se);

    // The transcript log parses as JSON lines.
    std::ifstream ts(transcript);
    std::string line;
    std::size_t records = 0;
    while (std::getline(ts, line)) {
        const auto rec = nlohmann::json::parse(line, nullptr, false);
        CHECK_FALSE(rec.is_discarded());
        ++records;
    }
    CHECK(records > 10000);
}

TEST_CASE("slots command verifies the recursion against Monte Carlo") {
    const fs::path out = kWorkDir / "slots.csv";
    const auto res = run_cli("slots --k 2 --l-max 8 --trials 20000 --seed 3 --out " +
                             out.string());
    CHECK(res.exit_code == 0);
    const auto rows = read_csv(out);
    REQUIRE(rows.size() == 9);
    CHECK(rows[0][0] == "L");
    CHECK(std::stod(rows[2][1]) == doctest::Approx(2.0));  // S(2) = 2 at K=2
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][4] == "1");
}

TEST_CASE("config file supplies defaults and flags override it") {
    const fs::path cfg = kWorkDir / "config.json";
    {
        std::ofstream os(cfg);
        os << nlohmann::json{{"m", 7},
                             {"k", 3},
                             {"q", 2},
                             {"out", (kWorkDir / "cb_from_cfg.json").string()}}
                  .dump();
    }
    const auto res = run_cli("codebook --config " + cfg.string());
    CHECK(res.exit_code == 0);
    CHECK(fs::exists(kWorkDir / "cb_from_cfg.json"));
    CHECK(res.output.find("M=7") != std::string::npos);

    // --m on the command line beats the config value.
    const auto over = run_cli("codebook --config " + cfg.string() +
                              " --m 11 --k 2 --out " +
                              (kWorkDir / "cb_override.json").string());
    CHECK(over.exit_code == 0);
    CHECK(over.output.find("M=11") != std::string::npos);
    std::ifstream is(kWorkDir / "cb_override.json");
    nlohmann::json j;
    is >> j;
    CHECK(j.at("m").get<int>() == 11);
    CHECK(j.at("k").get<int>() == 2);
}
