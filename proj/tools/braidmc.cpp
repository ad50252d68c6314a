// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

// braidmc command line: run, analyze, oracle-compare, strtree, presets list.
//
// Exit codes: 0 ok, 1 other failure, 2 configuration or argument error,
// 3 stalled sampler, 4 basis too large, 5 oracle disagreement (|z| > 4),
// 6 invariant violations during a run.

#include <braidmc/braidmc.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace braidmc;
using nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitStalled = 3;
constexpr int kExitBasis = 4;
constexpr int kExitOracle = 5;
constexpr int kExitInvariants = 6;

std::string preset_dir() {
    if (const char* env = std::getenv("BRAIDMC_PRESETS"); env && *env) return env;
#ifdef BRAIDMC_PRESET_DIR
    return BRAIDMC_PRESET_DIR;
#else
    return "presets";
#endif
}

/// A path, or the name of a shipped preset with or without `.toml`.
std::string locate_config(const std::string& arg) {
    if (fs::is_regular_file(arg)) return arg;
    for (const auto& name : {arg, arg + ".toml"}) {
        const fs::path p = fs::path(preset_dir()) / name;
        if (fs::is_regular_file(p)) return p.string();
    }
    throw ConfigError("no config file or preset named '" + arg + "'");
}

std::size_t worker_cap() {
    std::size_t cap = std::max(1U, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("BRAIDMC_THREADS"); env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1) throw ConfigError(std::string("BRAIDMC_THREADS must be a positive integer, got '") + env + "'");
        cap = static_cast<std::size_t>(v);
    }
    return cap;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + p.string());
    out << text;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

struct CommonRunOptions {
    std::string config;
    std::string out;
    std::vector<std::string> sets;
    std::optional<std::size_t> samples;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicas;
    bool quiet = false;
};

RunConfig build_config(const CommonRunOptions& o) {
    RunConfig cfg = load_config(locate_config(o.config));
    for (const auto& s : o.sets) apply_override(cfg, s);
    if (o.samples) cfg.params.target_samples = *o.samples;
    if (o.seed) cfg.params.seed = *o.seed;
    if (o.replicas) cfg.replicas = *o.replicas;
    if (!o.out.empty()) cfg.output_dir = o.out;
    validate_config(cfg);
    return cfg;
}

// -----------------------------------------------------------------------------
// run
// -----------------------------------------------------------------------------

struct ReplicaOutcome {
    RunParams params;
    std::vector<Snapshot> samples;
    UpdateStats stats;
    RunDiagnostics diagnostics;
    EngineCounters counters;
    std::exception_ptr error;
};

class RunLog {
 public:
    explicit RunLog(const fs::path& path, bool append)
        : out_(path, append ? std::ios::app : std::ios::trunc), start_(std::chrono::steady_clock::now()) {}

    void write(json j) {
        j["elapsed_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        const std::lock_guard lock(mu_);
        out_ << j.dump() << "\n";
        out_.flush();
    }

 private:
    std::mutex mu_;
    std::ofstream out_;
    std::chrono::steady_clock::time_point start_;
};

json acceptance_json(const UpdateStats& st) {
    json j = st.to_json();
    for (std::size_t k = 0; k < kMoveKinds; ++k) {
        const auto& m = st.moves[k];
        j[kMoveNames[k]]["rate"] = m.proposed ? static_cast<double>(m.accepted) / static_cast<double>(m.proposed) : 0.0;
    }
    return j;
}

void save_replica(const fs::path& dir, const Simulation& sim, const std::vector<Snapshot>& samples) {
    write_samples((dir / "samples.bin").string(), sim.params(), samples);
    write_checkpoint((dir / "checkpoint.bin").string(), sim);
    write_json(dir / "checkpoint.json", to_json(capture(sim)));
}

ReplicaOutcome run_replica(const RunConfig& cfg, std::uint64_t replica, const fs::path& out, bool resume_run,
                           RunLog& log) {
    ReplicaOutcome r;
    RunParams p = cfg.params;
    p.replica = replica;
    r.params = p;
    const fs::path dir = out / ("replica_" + std::to_string(replica));
    fs::create_directories(dir);
    const int n = p.model.particles(static_cast<std::size_t>(p.lattice.site_count()));

    std::optional<Simulation> sim;
    if (resume_run && fs::exists(dir / "checkpoint.bin")) {
        const auto ck = read_checkpoint((dir / "checkpoint.bin").string());
        check_same_run(ck.params, p);
        auto stored = read_samples((dir / "samples.bin").string());
        if (stored.samples.size() != ck.counters.samples)
            throw MetadataMismatch("replica " + std::to_string(replica) + ": samples.bin and checkpoint.bin disagree");
        r.samples = std::move(stored.samples);
        sim.emplace(resume(ck, p.target_samples));
        log.write({{"event", "resume"}, {"replica", replica}, {"samples", r.samples.size()}});
    } else {
        sim.emplace(p);
    }

    sim->thermalize();
    log.write({{"event", "thermalized"}, {"replica", replica}, {"steps_per_sweep", sim->counters().steps_per_sweep}});
    r.samples.reserve(p.target_samples);
    double block_f = 0;
    double block_e = 0;
    std::size_t block_n = 0;
    while (r.samples.size() < p.target_samples) {
        r.samples.push_back(sim->next_sample());
        const auto& s = r.samples.back();
        block_f += f_pc(s.cycles, n);
        block_e += s.energy(p.model.beta);
        ++block_n;
        if (block_n == cfg.log_every || r.samples.size() == p.target_samples) {
            log.write({{"event", "block"},
                       {"replica", replica},
                       {"samples", r.samples.size()},
                       {"sweeps", sim->counters().sweeps},
                       {"f_pc", block_f / static_cast<double>(block_n)},
                       {"energy", block_e / static_cast<double>(block_n)},
                       {"violations", sim->diagnostics().invariant_violations},
                       {"max_weight_drift", sim->diagnostics().max_weight_drift},
                       {"acceptance", acceptance_json(sim->stats())}});
            save_replica(dir, *sim, r.samples);
            block_f = block_e = 0;
            block_n = 0;
        }
    }
    save_replica(dir, *sim, r.samples);
    r.stats = sim->stats();
    r.diagnostics = sim->diagnostics();
    r.counters = sim->counters();
    return r;
}

/// Runs all replicas on at most min(threads, BRAIDMC_THREADS) workers; results stay in replica order.
std::vector<ReplicaOutcome> run_replicas(const RunConfig& cfg, const fs::path& out, bool resume_run, RunLog& log,
                                         std::size_t threads) {
    std::vector<ReplicaOutcome> results(cfg.replicas);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r; (r = next.fetch_add(1)) < cfg.replicas;) {
            try {
                results[r] = run_replica(cfg, r, out, resume_run, log);
            } catch (...) {
                results[r].error = std::current_exception();
            }
        }
    };
    const std::size_t w = std::max<std::size_t>(1, std::min({threads, worker_cap(), cfg.replicas}));
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < w; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& r : results)
        if (r.error) std::rethrow_exception(r.error);
    return results;
}

struct RunSummary {
    RunConfig cfg;
    std::optional<TuneResult> tune;
    std::vector<ReplicaOutcome> replicas;
    MergedRun merged;
    std::uint64_t violations = 0;
    double max_drift = 0;
};

json manifest_json(const RunSummary& s, const std::string& command, const std::string& config_path) {
    const auto& cfg = s.cfg;
    json j;
    j["tool"] = "braidmc";
    j["version"] = BRAIDMC_VERSION;
    j["command"] = command;
    j["config_file"] = config_path;
    j["config_hash"] = hex64(fnv1a(cfg.canonical()));
    j["lattice_hash"] = hex64(fnv1a(cfg.params.lattice.canonical()));
    j["seed"] = cfg.params.seed;
    j["replicas"] = cfg.replicas;
    j["config"] = cfg.to_json();
    j["mu_resolved"] = cfg.params.model.mu;
    if (s.tune) {
        json h = json::array();
        for (const auto& tp : s.tune->history)
            h.push_back({{"mu", tp.mu}, {"mean_n", tp.mean_n}, {"fraction_at_target", tp.fraction_at_target}});
        j["mu_tuning"] = {{"history", h}, {"fraction_at_target", s.tune->fraction_at_target},
                          {"non_monotone", s.tune->non_monotone}};
    }
    j["created_utc"] = utc_now();
    return j;
}

json report_json(const RunSummary& s) {
    const auto& p = s.cfg.params;
    const auto& sp = s.merged.spectrum;
    json j;
    j["label"] = {{"name", s.cfg.name},
                  {"lattice", p.lattice.canonical()},
                  {"model", to_string(p.model.kind)},
                  {"V_over_t", p.model.V / p.model.t},
                  {"beta_t", p.model.beta * p.model.t},
                  {"N", sp.particles},
                  {"L", p.lattice.L},
                  {"mu", p.model.mu}};
    j["samples"] = sp.total_samples;
    j["energy"] = {{"mean", s.merged.energy.mean}, {"err", s.merged.energy.stderr_}, {"units", "t"}};
    j["f_pc"] = {{"mean", s.merged.f_pc.mean}, {"err", s.merged.f_pc.stderr_}, {"n_eff", s.merged.f_pc.n_eff}};
    const auto& top = sp.top();
    j["top"] = {{"q", top.q.str()}, {"prob", top.probability}, {"err", top.error}};
    json shown = json::array();
    for (const auto& e : sp.entries)
        if (e.probability > s.cfg.threshold) shown.push_back({{"q", e.q.str()}, {"prob", e.probability}, {"err", e.error}});
    j["spectrum_above_threshold"] = shown;
    j["threshold"] = s.cfg.threshold;
    UpdateStats st;
    json reps = json::array();
    for (const auto& r : s.replicas) {
        st += r.stats;
        reps.push_back({{"replica", r.params.replica},
                        {"samples", r.samples.size()},
                        {"sweeps", r.counters.sweeps},
                        {"steps_per_sweep", r.counters.steps_per_sweep},
                        {"snapshot_yield", r.diagnostics.attempts ? static_cast<double>(r.diagnostics.valid_attempts) /
                                                                        static_cast<double>(r.diagnostics.attempts)
                                                                  : 0.0}});
    }
    j["replicas"] = reps;
    j["updates"] = acceptance_json(st);
    j["invariants"] = {{"violations", s.violations}, {"max_weight_drift", s.max_drift}, {"ok", s.violations == 0 && s.max_drift <= 1e-9}};
    return j;
}

RunSummary execute_run(RunConfig cfg, bool resume_run, std::size_t threads, const std::string& command,
                       const std::string& config_path, bool quiet) {
    RunSummary s;
    const fs::path out = cfg.output_dir;
    fs::create_directories(out);
    RunLog log(out / "run.log", resume_run);
    s.tune = resolve_mu(cfg);
    if (s.tune && s.tune->non_monotone)
        log.write({{"event", "warning"}, {"message", "<N>(mu) looked non-monotone during tuning"}});
    s.cfg = cfg;
    write_json(out / "manifest.json", manifest_json(s, command, config_path));
    log.write({{"event", "start"}, {"config_hash", hex64(fnv1a(cfg.canonical()))}, {"mu", cfg.params.model.mu}});
    s.replicas = run_replicas(cfg, out, resume_run, log, threads);

    std::vector<std::pair<RunParams, std::vector<Snapshot>>> streams;
    for (const auto& r : s.replicas) {
        streams.emplace_back(r.params, r.samples);
        s.violations += r.diagnostics.invariant_violations;
        s.max_drift = std::max(s.max_drift, r.diagnostics.max_weight_drift);
    }
    s.merged = merge_streams(streams);
    write_text(out / "spectrum.csv", spectrum_csv(s.merged.spectrum));
    write_json(out / "spectrum.json", to_json(s.merged.spectrum));
    write_json(out / "report.json", report_json(s));
    log.write({{"event", "done"}, {"samples", s.merged.spectrum.total_samples}});
    if (!quiet) {
        std::cout << "# " << cfg.params.lattice.canonical() << " " << to_string(cfg.params.model.kind)
                  << " V/t=" << cfg.params.model.V / cfg.params.model.t << " beta*t=" << cfg.params.model.beta * cfg.params.model.t
                  << " N=" << s.merged.spectrum.particles << " mu=" << cfg.params.model.mu << "\n";
        std::cout << "energy = " << s.merged.energy.mean << " +/- " << s.merged.energy.stderr_ << "\n";
        std::cout << "f_pc = " << s.merged.f_pc.mean << " +/- " << s.merged.f_pc.stderr_ << "\n";
        std::cout << spectrum_report(s.merged.spectrum, cfg.threshold);
        std::cout << "wrote " << out.string() << "\n";
    }
    return s;
}

// -----------------------------------------------------------------------------
// analyze
// -----------------------------------------------------------------------------

std::vector<fs::path> sample_files(const std::vector<std::string>& inputs) {
    std::vector<fs::path> files;
    for (const auto& in : inputs) {
        const fs::path p = in;
        if (fs::is_regular_file(p)) {
            files.push_back(p);
        } else if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            if (fs::is_regular_file(p / "samples.bin")) found.push_back(p / "samples.bin");
            for (const auto& e : fs::directory_iterator(p))
                if (e.is_directory() && e.path().filename().string().rfind("replica_", 0) == 0 &&
                    fs::is_regular_file(e.path() / "samples.bin"))
                    found.push_back(e.path() / "samples.bin");
            std::sort(found.begin(), found.end(), [](const fs::path& a, const fs::path& b) {
                // numeric replica order
                auto idx = [](const fs::path& f) {
                    const auto name = f.parent_path().filename().string();
                    return name.rfind("replica_", 0) == 0 ? std::stol(name.substr(8)) : -1L;
                };
                return idx(a) < idx(b);
            });
            if (found.empty()) throw InvalidArgument("no samples.bin under " + p.string());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            throw InvalidArgument("no such file or directory: " + in);
        }
    }
    return files;
}

int cmd_analyze(const std::vector<std::string>& inputs, double threshold, const std::string& out) {
    std::vector<std::pair<RunParams, std::vector<Snapshot>>> streams;
    for (const auto& f : sample_files(inputs)) {
        auto sf = read_samples(f.string());
        streams.emplace_back(sf.params, std::move(sf.samples));
    }
    const auto merged = merge_streams(streams);
    const auto& p = streams.front().first;
    std::cout << "# " << p.lattice.canonical() << " " << to_string(p.model.kind) << " V/t=" << p.model.V / p.model.t
              << " beta*t=" << p.model.beta * p.model.t << " N=" << merged.spectrum.particles << " replicas=" << merged.replicas
              << " samples=" << merged.spectrum.total_samples << "\n";
    std::cout << "energy = " << merged.energy.mean << " +/- " << merged.energy.stderr_ << "\n";
    std::cout << "f_pc = " << merged.f_pc.mean << " +/- " << merged.f_pc.stderr_ << "\n";
    std::cout << spectrum_report(merged.spectrum, threshold);
    if (!out.empty()) {
        fs::create_directories(out);
        write_text(fs::path(out) / "spectrum.csv", spectrum_csv(merged.spectrum));
        write_json(fs::path(out) / "spectrum.json", to_json(merged.spectrum));
    }
    return 0;
}

// -----------------------------------------------------------------------------
// oracle-compare
// -----------------------------------------------------------------------------

int cmd_oracle_compare(const CommonRunOptions& o, std::size_t threads, const std::string& command) {
    RunConfig cfg = build_config(o);
    const auto& p = cfg.params;
    const auto m = static_cast<std::uint64_t>(p.lattice.site_count());
    const auto n = static_cast<std::uint64_t>(p.model.particles(m));
    if (binomial(m, n) > kDenseBasisLimit)
        throw BasisTooLarge("oracle-compare: fixed-N basis of " + std::to_string(binomial(m, n)) +
                            " states exceeds the dense limit of " + std::to_string(kDenseBasisLimit));
    const auto s = execute_run(cfg, false, threads, command, o.config, true);
    std::vector<Snapshot> all;
    for (const auto& r : s.replicas) all.insert(all.end(), r.samples.begin(), r.samples.end());
    const auto rep = compare_to_oracles(s.cfg.params, all, s.cfg.threshold);
    json j = to_json(rep);
    j["pass"] = rep.max_abs_z() <= 4.0;
    write_json(fs::path(s.cfg.output_dir) / "oracle_report.json", j);
    std::cout << "energy: sampled " << rep.energy.mean << " +/- " << rep.energy.stderr_ << ", exact " << rep.energy_exact
              << ", z = " << rep.energy_z << "\n";
    std::cout << "diagonal: " << rep.dof << " states above threshold, chi2 = " << rep.chi2 << "\n";
    for (const auto& st : rep.states)
        std::cout << "  |" << st.label << "> exact " << st.exact << " sampled " << st.sampled << " z = " << st.z << "\n";
    if (rep.cycles) {
        std::cout << "cycles (trotter residual " << rep.trotter_residual << "):\n";
        for (const auto& c : *rep.cycles)
            std::cout << "  q=" << c.label << " exact " << c.exact << " sampled " << c.sampled << " z = " << c.z << "\n";
    } else {
        std::cout << rep.cycles_note << "\n";
    }
    std::cout << "max |z| = " << rep.max_abs_z() << (rep.max_abs_z() <= 4.0 ? "  (ok)" : "  (FAIL)") << "\n";
    return rep.max_abs_z() <= 4.0 ? 0 : kExitOracle;
}

// -----------------------------------------------------------------------------
// strtree
// -----------------------------------------------------------------------------

int cmd_strtree(int L, const std::string& phase, const std::string& out) {
    StateSet set;
    if (phase == "str")
        set = build_str_states(L);
    else if (phase == "cb")
        set = build_cb_states(L);
    else
        throw ConfigError("phase must be 'cb' or 'str', got '" + phase + "'");
    const auto r = optimal_tree(set);
    std::cout << "phase = " << phase << ", L = " << L << ", states = " << set.size() << "\n";
    std::cout << "expected_measurements = " << r.expected_depth.str() << " (" << r.expected_depth.value() << ")\n";
    std::cout << "info = log2(" << set.size() << ") = " << info_content(set) << " bits\n";
    std::cout << "leaf depths:";
    for (const auto& [d, c] : r.profile) std::cout << " " << c << " at " << d;
    std::cout << "\n" << to_text(r.tree, set);
    const std::string path = out.empty() ? "tree_" + phase + "_L" + std::to_string(L) + ".json" : out;
    json j{{"phase", phase},
           {"L", L},
           {"expected_measurements", r.expected_depth.str()},
           {"info_bits", info_content(set)},
           {"labels", set.labels},
           {"tree", to_json(r.tree, set)}};
    write_json(path, j);
    std::cout << "wrote " << path << "\n";
    return 0;
}

// -----------------------------------------------------------------------------
// presets
// -----------------------------------------------------------------------------

int cmd_presets_list() {
    std::vector<fs::path> files;
    if (fs::is_directory(preset_dir()))
        for (const auto& e : fs::directory_iterator(preset_dir()))
            if (e.path().extension() == ".toml") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        std::ifstream in(f);
        std::string line;
        std::string desc;
        while (std::getline(in, line))
            if (line.rfind("#", 0) == 0) {
                desc = line.substr(line.find_first_not_of("# "));
                break;
            }
        std::cout << std::left << std::setw(22) << f.stem().string() << desc << "\n";
    }
    return 0;
}

void add_run_options(CLI::App* c, CommonRunOptions& o) {
    c->add_option("config", o.config, "config file or preset name")->required();
    c->add_option("-o,--out", o.out, "output directory (overrides [output] dir)");
    c->add_option("--set", o.sets, "override, e.g. --set model.V=15");
    c->add_option("--samples", o.samples, "samples per replica");
    c->add_option("--seed", o.seed, "base seed");
    c->add_option("--replicas", o.replicas, "independent chains");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"braidmc: worldline topology of hard-core boson ground states"};
    app.set_version_flag("--version", BRAIDMC_VERSION);
    app.require_subcommand(1);
    std::size_t threads = std::max(1U, std::thread::hardware_concurrency());
    app.add_option("-j,--threads", threads, "worker threads (capped by BRAIDMC_THREADS)");

    CommonRunOptions run_opts;
    bool resume_run = false;
    auto* run = app.add_subcommand("run", "sample a configuration and write the spectrum");
    add_run_options(run, run_opts);
    run->add_flag("--resume", resume_run, "continue from the checkpoints in the output directory");

    std::vector<std::string> inputs;
    double threshold = 0.01;
    std::string analyze_out;
    auto* analyze = app.add_subcommand("analyze", "merge sample files and print the spectrum");
    analyze->add_option("inputs", inputs, "run directories or samples.bin files")->required();
    analyze->add_option("--threshold", threshold, "report cut on probability");
    analyze->add_option("-o,--out", analyze_out, "write spectrum.csv and spectrum.json here");

    CommonRunOptions cmp_opts;
    auto* compare = app.add_subcommand("oracle-compare", "sample a small system and compare with exact results");
    add_run_options(compare, cmp_opts);

    int tree_L = 6;
    std::string phase = "str";
    std::string tree_out;
    auto* strtree = app.add_subcommand("strtree", "optimal single-site measurement tree for the solid states");
    strtree->add_option("--L,-L", tree_L, "linear size")->required();
    strtree->add_option("--phase", phase, "cb or str");
    strtree->add_option("-o,--out", tree_out, "tree JSON path");

    auto* presets = app.add_subcommand("presets", "shipped configurations");
    presets->require_subcommand(1);
    auto* presets_list = presets->add_subcommand("list", "list presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    std::string command;
    for (int k = 0; k < argc; ++k) command += (k ? " " : "") + std::string(argv[k]);

    try {
        if (run->parsed()) {
            RunConfig cfg = build_config(run_opts);
            const auto s = execute_run(cfg, resume_run, threads, command, run_opts.config, false);
            if (s.violations > 0 || s.max_drift > 1e-9) {
                std::cerr << "braidmc: " << s.violations << " invariant violations, max weight drift " << s.max_drift << "\n";
                return kExitInvariants;
            }
            return 0;
        }
        if (analyze->parsed()) return cmd_analyze(inputs, threshold, analyze_out);
        if (compare->parsed()) return cmd_oracle_compare(cmp_opts, threads, command);
        if (strtree->parsed()) return cmd_strtree(tree_L, phase, tree_out);
        if (presets_list->parsed()) return cmd_presets_list();
    } catch (const ConfigError& e) {
        std::cerr << "braidmc: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const StalledSampler& e) {
        std::cerr << "braidmc: stalled sampler: " << e.what() << "\n";
        return kExitStalled;
    } catch (const BasisTooLarge& e) {
        std::cerr << "braidmc: basis too large: " << e.what() << "\n";
        return kExitBasis;
    } catch (const InvalidArgument& e) {
        std::cerr << "braidmc: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "braidmc: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
