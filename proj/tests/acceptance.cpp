// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include "splicebs/backcast_bootstrap.hpp"
#include "splicebs/ck_oracle.hpp"
#include "splicebs/cli.hpp"
#include "splicebs/coverage_lab.hpp"
#include "splicebs/splice_bootstrap.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

using namespace splicebs;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& detail) {
    std::printf("%s  criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void note(const std::string& text) {
    std::printf("      %s\n", text.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CoverageReport run_preset(const std::string& name, std::optional<Method> method = std::nullopt) {
    auto p = cli::load_preset(SPLICEBS_PRESETS_DIR, name);
    p.config.threads = workers();
    return run_scenario(p.scenario, method.value_or(p.method), p.config);
}

TimeSeries simulate_truth(const FittedModel& truth, const NoiseSpec& noise, std::size_t n, std::uint64_t seed) {
    RandomStream rng(seed, 0);
    const std::vector<double> zero(static_cast<std::size_t>(truth.max_lag()), 0.0);
    return simulate(truth, noise, n, 1000, zero, rng);
}

void criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_preset("ar1_normal_100");
    const double secs = seconds_since(t0);
    const double cov1 = r.rows[0].coverage.mean, len1 = r.rows[0].length.mean, len5 = r.rows[4].length.mean;
    const bool ok = within(cov1, 0.85, 0.92) && within(len1, 2.9, 3.5) && within(len5, 4.5, 5.5) && secs <= 900.0;
    verdict(1, ok,
            "ar1_normal_100 sb B=999: coverage(1)=" + fmt("%.3f", cov1) + " in [0.85,0.92], Len(1)=" +
                fmt("%.3f", len1) + " in [2.9,3.5], Len(5)=" + fmt("%.3f", len5) + " in [4.5,5.5], runtime " +
                fmt("%.0f", secs) + "s <= 900s on " + std::to_string(workers()) + " thread(s)");
}

void criterion2() {
    CoverageConfig cfg;
    cfg.replicates = 2000;
    cfg.threads = workers();
    const auto r = run_scenario({TrueModelId::ar1, NoiseSpec{}, 100, 20062}, Method::rigged, cfg);
    const double z = 1.6448536269514722;
    bool ok = true;
    std::string detail = "rigged AR(1) B=2000 lengths";
    double var = 0.0;
    for (int k = 1; k <= 3; ++k) {
        var = 0.64 * var + 1.0;
        const double target = 2.0 * z * std::sqrt(var);
        const double len = r.rows[static_cast<std::size_t>(k - 1)].length.mean;
        ok = ok && std::abs(len - target) <= 0.03 * target;
        detail += " k=" + std::to_string(k) + ":" + fmt("%.3f", len) + " vs " + fmt("%.3f", target);
    }
    verdict(2, ok, detail + " (within 3%)");
}

void criterion3() {
    const auto r = run_preset("setar_normal_500");
    bool cov_ok = true;
    std::string covs;
    for (const auto& row : r.rows) {
        cov_ok = cov_ok && within(row.coverage.mean, 0.86, 0.92);
        covs += fmt("%.3f ", row.coverage.mean);
    }
    const double len1 = r.rows[0].length.mean;
    verdict(3, cov_ok && within(len1, 1.55, 1.90),
            "setar_normal_500 sb: coverage(1..5)= " + covs + "all in [0.86,0.92]; Len(1)=" +
                fmt("%.3f", len1) + " in [1.55,1.90]");

    // not part of the verdict: the same scenario with noise of scale 0.5
    auto p = cli::load_preset(SPLICEBS_PRESETS_DIR, "setar_normal_500");
    p.scenario.noise.scale = 0.5;
    p.config.threads = workers();
    const auto half = run_scenario(p.scenario, p.method, p.config);
    note("diagnostic, noise sd 0.5: coverage(1)=" + fmt("%.3f", half.rows[0].coverage.mean) +
         ", Len(1)=" + fmt("%.3f", half.rows[0].length.mean));
}

void criterion4() {
    const auto r = run_preset("ar1_exp_25");
    const double c1 = r.rows[0].coverage.mean, c5 = r.rows[4].coverage.mean;
    verdict(4, within(c5, 0.72, 0.85) && c5 < c1,
            "ar1_exp_25 sb: coverage(5)=" + fmt("%.3f", c5) + " in [0.72,0.85] and below coverage(1)=" +
                fmt("%.3f", c1));
}

void criterion5() {
    struct Fixture {
        FittedModel truth;
        NoiseSpec noise;
        ModelSpec spec;
        std::size_t n;
    };
    const std::vector<Fixture> fixtures{
        {ar1_truth(), NoiseSpec{NoiseKind::normal}, ModelSpec::ar(1), 50},
        {make_ar_model({0.5, -0.3}), NoiseSpec{NoiseKind::centered_exponential}, ModelSpec::ar(2), 80},
        {setar211_truth(), NoiseSpec{NoiseKind::normal_mixture}, ModelSpec::setar(1, 1, 1, std::nullopt), 150},
        {setar211_truth(), NoiseSpec{NoiseKind::centered_exponential}, ModelSpec::setar(1, 1, 1, 0.0), 100},
    };
    std::size_t total = 0, tails = 0, valid = 0, rejected = 0;
    for (std::size_t f = 0; f < fixtures.size(); ++f) {
        const auto& fx = fixtures[f];
        const auto y = simulate_truth(fx.truth, fx.noise, fx.n, 500 + f);
        const auto model = fit_model(y, fx.spec);
        const auto pool = residual_pool(model);
        const auto lag = static_cast<std::size_t>(model.max_lag());
        const auto last = y.tail(lag);
        SpliceConfig cfg;
        cfg.replicates = 250;
        RandomStream rng(77, f);
        for (int j = 0; j < 250; ++j) {
            auto stream = rng.child(static_cast<std::uint64_t>(j));
            const auto res = splice_replicate(y, model, pool, cfg, stream);
            ++total;
            const auto tail = res.replicate.tail(lag);
            if (res.replicate.size() == y.size() && std::memcmp(tail.data(), last.data(), lag * sizeof(double)) == 0)
                ++tails;
            if (validate_refit(model, res.refit)) ++valid;
            rejected += res.rejections;
        }
    }
    verdict(5, total == 1000 && tails == total && valid == total,
            std::to_string(tails) + "/" + std::to_string(total) + " replicates keep the tail bitwise, " +
                std::to_string(valid) + "/" + std::to_string(total) + " refits valid (" +
                std::to_string(rejected) + " invalid refits discarded along the way)");
}

void criterion6() {
    const auto truth = setar211_truth();
    const NoiseSpec noise{NoiseKind::normal};
    const int K = 5;

    // quadrature vs brute-force simulation of the true model
    double worst_mc = 0.0;
    for (double y_n : {-1.0, 0.8}) {
        const auto laws = ck_densities(truth, noise, y_n, K, default_grid(truth, noise, y_n, K));
        RandomStream rng(606, static_cast<std::uint64_t>(y_n > 0));
        std::vector<std::vector<double>> cols(K);
        const double start[] = {y_n};
        for (int i = 0; i < 1'000'000; ++i) {
            const auto path = forecast_path(truth, start, K, noise, rng);
            for (int k = 0; k < K; ++k) cols[static_cast<std::size_t>(k)].push_back(path[static_cast<std::size_t>(k)]);
        }
        for (int k = 0; k < K; ++k) {
            const auto q = ck_interval(laws[static_cast<std::size_t>(k)], 0.9);
            const auto mc = percentile_interval(cols[static_cast<std::size_t>(k)], 0.9, k + 1);
            worst_mc = std::max({worst_mc, std::abs(q.lower - mc.lower), std::abs(q.upper - mc.upper)});
        }
    }

    // splice bootstrap vs quadrature, averaged over seeds
    const int seeds = 20;
    std::vector<double> gap(2 * K, 0.0), bias(2 * K, 0.0);
    for (int s = 1; s <= seeds; ++s) {
        const auto y = simulate_truth(truth, noise, 500, 6000 + static_cast<std::uint64_t>(s));
        SpliceConfig cfg;
        cfg.replicates = 999;
        cfg.horizon = K;
        cfg.threads = workers();
        const auto fan = sb_predictive(y, ModelSpec::setar(1, 1, 1, 0.0), cfg, RandomStream(static_cast<std::uint64_t>(s), 6));
        const double y_n = y.values().back();
        const auto laws = ck_densities(truth, noise, y_n, K, default_grid(truth, noise, y_n, K));
        for (int k = 0; k < K; ++k) {
            const auto q = ck_interval(laws[static_cast<std::size_t>(k)], 0.9);
            const auto& b = fan.intervals[static_cast<std::size_t>(k)];
            gap[2 * static_cast<std::size_t>(k)] += std::abs(b.lower - q.lower) / seeds;
            gap[2 * static_cast<std::size_t>(k) + 1] += std::abs(b.upper - q.upper) / seeds;
            bias[2 * static_cast<std::size_t>(k)] += (b.lower - q.lower) / seeds;
            bias[2 * static_cast<std::size_t>(k) + 1] += (b.upper - q.upper) / seeds;
        }
    }
    const double worst_sb = *std::max_element(gap.begin(), gap.end());
    verdict(6, worst_mc < 0.02 && worst_sb <= 0.15,
            "quadrature vs 1e6-draw simulation, worst endpoint gap " + fmt("%.4f", worst_mc) +
                " < 0.02; SB (n=500, B=999, threshold 0) vs quadrature, worst seed-averaged endpoint gap " +
                fmt("%.3f", worst_sb) + " <= 0.15");
    std::string per_k = "mean |gap| L/U by k:";
    for (int k = 0; k < K; ++k)
        per_k += " " + fmt("%.3f", gap[2 * static_cast<std::size_t>(k)]) + "/" +
                 fmt("%.3f", gap[2 * static_cast<std::size_t>(k) + 1]);
    note(per_k);
    double worst_bias = 0.0;
    for (double b : bias) worst_bias = std::max(worst_bias, std::abs(b));
    note("largest mean signed gap " + fmt("%.3f", worst_bias));
}

void criterion7() {
    auto p = cli::load_preset(SPLICEBS_PRESETS_DIR, "ar1_exp_100");
    p.config.threads = workers();
    const auto sb = run_scenario(p.scenario, Method::sb, p.config);
    const auto bc = run_scenario(p.scenario, Method::backcast, p.config);
    // both methods see the same realization in each replication, so pair them
    std::vector<double> diff;
    for (std::size_t i = 0; i < sb.replications.size(); ++i) {
        if (sb.replications[i].attempts != bc.replications[i].attempts) continue;
        diff.push_back(sb.replications[i].intervals[0].lower - bc.replications[i].intervals[0].lower);
    }
    const auto d = summarize(diff);
    const double se = d.se.value_or(INFINITY);
    verdict(7, std::abs(d.mean) > 3.0 * se,
            "ar1_exp_100 k=1 lower endpoint, sb minus backcast over " + std::to_string(diff.size()) +
                " paired replications: " + fmt("%.4f", d.mean) + " vs 3 SE = " + fmt("%.4f", 3.0 * se));
    std::vector<double> lsb, lbc;
    for (const auto& r : sb.replications) lsb.push_back(r.intervals[0].lower);
    for (const auto& r : bc.replications) lbc.push_back(r.intervals[0].lower);
    const auto a = summarize(lsb), b = summarize(lbc);
    note("unpaired: means " + fmt("%.4f", a.mean) + " vs " + fmt("%.4f", b.mean) + ", 3 SE of the difference = " +
         fmt("%.4f", 3.0 * std::sqrt(*a.se * *a.se + *b.se * *b.se)));
}

void criterion8() {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "splicebs_acceptance";
    fs::create_directories(dir);

    auto sim = [&](const std::string& preset, std::size_t n, std::uint64_t seed) {
        cli::RunConfig cfg;
        cfg.command = "simulate";
        cfg.preset = preset;
        cfg.n = n;
        cfg.seed = seed;
        const auto path = (dir / (preset + ".csv")).string();
        std::ofstream(path, std::ios::binary) << cli::run(cfg).text;
        return path;
    };
    const auto ar_path = sim("ar1-exp", 100, 3);
    const auto setar_path = sim("setar-mixture", 300, 4);
    const std::string setar_model = R"({"kind":"setar","d":1,"p_low":1,"p_high":1,"threshold":"estimate"})";

    std::vector<cli::RunConfig> commands;
    auto add = [&](cli::RunConfig c) {
        c.presets_dir = SPLICEBS_PRESETS_DIR;
        commands.push_back(std::move(c));
    };
    {
        cli::RunConfig c;
        c.command = "simulate";
        c.preset = "setar-normal";
        c.n = 250;
        c.seed = 11;
        add(c);
        c.format = "json";
        add(c);
    }
    {
        cli::RunConfig c;
        c.command = "fit";
        c.input = setar_path;
        c.model = setar_model;
        add(c);
    }
    for (const char* method : {"sb", "backcast", "ck"}) {
        cli::RunConfig c;
        c.command = "interval";
        c.input = ar_path;
        c.method = method;
        c.replicates = 300;
        c.seed = 21;
        add(c);
        c.format = "csv";
        add(c);
    }
    {
        cli::RunConfig c;
        c.command = "interval";
        c.input = setar_path;
        c.model = setar_model;
        c.replicates = 300;
        add(c);
    }
    for (const char* fmt_name : {"json", "csv", "table"}) {
        cli::RunConfig c;
        c.command = "coverage";
        c.preset = "setar_exp_100";
        c.reps = 6;
        c.replicates = 99;
        c.format = fmt_name;
        add(c);
    }

    std::size_t identical = 0, checked = 0;
    for (const auto& base : commands) {
        std::string reference;
        bool same = true;
        for (unsigned threads : {1u, 2u, 3u, 8u}) {
            auto c = base;
            c.threads = threads;
            const auto out = cli::run(c);
            const std::string text = std::to_string(out.status) + "\n" + out.text;
            if (threads == 1) reference = text;
            else same = same && text == reference;
            if (out.status != 0) same = false;
        }
        ++checked;
        if (same) ++identical;
    }
    verdict(8, identical == checked,
            std::to_string(identical) + "/" + std::to_string(checked) +
                " command variants byte-identical across --threads 1,2,3,8");
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<void (*)()> criteria{criterion1, criterion2, criterion3, criterion4,
                                           criterion5, criterion6, criterion7, criterion8};
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        try {
            criteria[i]();
        } catch (const std::exception& e) {
            verdict(static_cast<int>(i + 1), false, std::string("error: ") + e.what());
        }
    }
    std::printf("%d of %zu criteria failed (%.0fs)\n", failures, criteria.size(), seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
