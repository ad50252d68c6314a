// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

/**
 * @file checkpoint.hpp
 * @brief Binary run state and sample files with a JSON debug mirror.
 *
 * Layout, little endian throughout:
 *   "BRMC" | u32 version | u8 payload kind | u64 fnv1a(lattice canonical name)
 *   | run parameters | payload
 * A checkpoint payload holds the RNG state, engine counters, update statistics,
 * diagnostics, tracked weight and the configuration (idle occupations, per-site
 * events, worm ends). A samples payload holds a count followed by snapshots.
 */

#pragma once

#include <braidmc/common.hpp>
#include <braidmc/engine.hpp>
#include <braidmc/lattice.hpp>
#include <braidmc/worldlines.hpp>

#include <json.hpp>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace braidmc {

inline constexpr std::uint32_t kFileVersion = 1;

enum class PayloadKind : std::uint8_t { checkpoint = 1, samples = 2 };

namespace detail {

class ByteWriter {
 public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int k = 0; k < 4; ++k) u8(static_cast<std::uint8_t>(v >> (8 * k)));
    }
    void u64(std::uint64_t v) {
        for (int k = 0; k < 8; ++k) u8(static_cast<std::uint8_t>(v >> (8 * k)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u64(s.size());
        buf_.append(s);
    }
    [[nodiscard]] const std::string& bytes() const { return buf_; }

 private:
    std::string buf_;
};

class ByteReader {
 public:
    explicit ByteReader(std::string data) : data_(std::move(data)) {}
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(data_[pos_++]);
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(u8()) << (8 * k);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(u8()) << (8 * k);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const auto n = u64();
        need(n);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    [[nodiscard]] bool done() const { return pos_ == data_.size(); }

 private:
    void need(std::uint64_t n) const {
        if (n > data_.size() - pos_) throw InvalidArgument("checkpoint: truncated file");
    }
    std::string data_;
    std::size_t pos_ = 0;
};

inline void write_params(ByteWriter& w, const RunParams& p) {
    w.u8(static_cast<std::uint8_t>(p.lattice.kind));
    w.i32(p.lattice.L);
    w.i32(p.lattice.Ly);
    w.u8(static_cast<std::uint8_t>(p.model.kind));
    w.f64(p.model.t);
    w.f64(p.model.V);
    w.f64(p.model.mu);
    w.f64(p.model.beta);
    w.f64(p.model.cutoff);
    w.i64(p.model.filling.num);
    w.i64(p.model.filling.den);
    w.u64(p.thermalization_sweeps);
    w.u64(p.target_samples);
    w.u64(p.measure_interval);
    w.u64(p.seed);
    w.u64(p.replica);
    w.f64(p.sampler.worm_fugacity);
    w.f64(p.sampler.probs.shift_end);
    w.f64(p.sampler.probs.insert_kink);
    w.f64(p.sampler.probs.remove_kink);
    w.f64(p.sampler.probs.remove_worm);
    w.u8(p.sampler.translations ? 1 : 0);
    w.u8(p.validate ? 1 : 0);
    w.u64(p.stall_sweeps);
}

inline RunParams read_params(ByteReader& r) {
    RunParams p;
    const auto lk = r.u8();
    if (lk > static_cast<std::uint8_t>(LatticeKind::chain)) throw InvalidArgument("checkpoint: bad lattice kind");
    p.lattice.kind = static_cast<LatticeKind>(lk);
    p.lattice.L = r.i32();
    p.lattice.Ly = r.i32();
    const auto mk = r.u8();
    if (mk > static_cast<std::uint8_t>(ModelKind::nn_chain)) throw InvalidArgument("checkpoint: bad model kind");
    p.model.kind = static_cast<ModelKind>(mk);
    p.model.t = r.f64();
    p.model.V = r.f64();
    p.model.mu = r.f64();
    p.model.beta = r.f64();
    p.model.cutoff = r.f64();
    const auto num = r.i64();
    const auto den = r.i64();
    if (den <= 0) throw InvalidArgument("checkpoint: bad filling");
    p.model.filling = Rational(num, den);
    p.thermalization_sweeps = r.u64();
    p.target_samples = r.u64();
    p.measure_interval = r.u64();
    p.seed = r.u64();
    p.replica = r.u64();
    p.sampler.worm_fugacity = r.f64();
    p.sampler.probs.shift_end = r.f64();
    p.sampler.probs.insert_kink = r.f64();
    p.sampler.probs.remove_kink = r.f64();
    p.sampler.probs.remove_worm = r.f64();
    p.sampler.translations = r.u8() != 0;
    p.validate = r.u8() != 0;
    p.stall_sweeps = r.u64();
    return p;
}

inline void write_header(ByteWriter& w, PayloadKind kind, const RunParams& p) {
    for (char c : std::string("BRMC")) w.u8(static_cast<std::uint8_t>(c));
    w.u32(kFileVersion);
    w.u8(static_cast<std::uint8_t>(kind));
    w.u64(fnv1a(p.lattice.canonical()));
    write_params(w, p);
}

inline RunParams read_header(ByteReader& r, PayloadKind expected) {
    std::string magic;
    for (int k = 0; k < 4; ++k) magic += static_cast<char>(r.u8());
    if (magic != "BRMC") throw InvalidArgument("checkpoint: bad magic");
    const auto version = r.u32();
    if (version != kFileVersion) throw InvalidArgument("checkpoint: unsupported version " + std::to_string(version));
    const auto kind = static_cast<PayloadKind>(r.u8());
    if (kind != expected) throw InvalidArgument("checkpoint: unexpected payload kind");
    const auto hash = r.u64();
    RunParams p = read_params(r);
    if (hash != fnv1a(p.lattice.canonical())) throw InvalidArgument("checkpoint: lattice hash mismatch");
    return p;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes through a temporary file and a rename so readers never see a partial file.
inline void write_file(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidArgument("cannot write " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw InvalidArgument("write failed for " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw InvalidArgument("cannot rename " + tmp + ": " + ec.message());
}

}  // namespace detail

/// Everything needed to continue a run exactly where it stopped.
struct Checkpoint {
    RunParams params;
    std::string rng_state;
    EngineCounters counters;
    UpdateStats stats;
    RunDiagnostics diagnostics;
    std::pair<double, double> tracked{0.0, 0.0};
    double beta = 0;
    std::vector<std::uint8_t> idle;
    std::vector<std::vector<Event>> events;
    std::optional<std::array<WormEnd, 2>> worm;
};

inline Checkpoint capture(const Simulation& sim) {
    Checkpoint c;
    c.params = sim.params();
    c.rng_state = sim.rng().state();
    c.counters = sim.counters();
    c.stats = sim.stats();
    c.diagnostics = sim.diagnostics();
    c.tracked = sim.sampler().tracked_parts();
    const auto& cfg = sim.sampler().config();
    c.beta = cfg.beta();
    c.idle = cfg.idle_occupations();
    for (std::size_t s = 0; s < cfg.site_count(); ++s) c.events.push_back(cfg.events(static_cast<Site>(s)));
    if (cfg.has_worm()) c.worm = cfg.worm();
    return c;
}

inline std::string serialize(const Checkpoint& c) {
    detail::ByteWriter w;
    detail::write_header(w, PayloadKind::checkpoint, c.params);
    w.str(c.rng_state);
    const auto& k = c.counters;
    for (auto v : {k.thermal_done, k.kink_sum, k.kink_obs, k.steps_per_sweep, k.sweeps, k.samples, k.since_valid}) w.u64(v);
    for (const auto& m : c.stats.moves) {
        w.u64(m.proposed);
        w.u64(m.accepted);
    }
    const auto& d = c.diagnostics;
    for (auto v : {d.invariant_violations, d.checks, d.attempts, d.closed_attempts, d.valid_attempts}) w.u64(v);
    w.f64(d.max_weight_drift);
    w.str(d.first_violation);
    w.f64(c.tracked.first);
    w.f64(c.tracked.second);
    w.f64(c.beta);
    w.u64(c.idle.size());
    for (std::size_t s = 0; s < c.idle.size(); ++s) {
        w.u8(c.idle[s]);
        w.u64(c.events[s].size());
        for (const auto& e : c.events[s]) {
            w.f64(e.time);
            w.i32(e.partner);
            w.i32(e.bond);
            w.u8(e.occ_after);
        }
    }
    w.u8(c.worm ? 1 : 0);
    if (c.worm)
        for (const auto& e : *c.worm) {
            w.i32(e.site);
            w.f64(e.time);
        }
    return w.bytes();
}

inline Checkpoint deserialize(const std::string& bytes) {
    detail::ByteReader r(bytes);
    Checkpoint c;
    c.params = detail::read_header(r, PayloadKind::checkpoint);
    c.rng_state = r.str();
    auto& k = c.counters;
    for (auto* v : {&k.thermal_done, &k.kink_sum, &k.kink_obs, &k.steps_per_sweep, &k.sweeps, &k.samples, &k.since_valid})
        *v = r.u64();
    for (auto& m : c.stats.moves) {
        m.proposed = r.u64();
        m.accepted = r.u64();
    }
    auto& d = c.diagnostics;
    for (auto* v : {&d.invariant_violations, &d.checks, &d.attempts, &d.closed_attempts, &d.valid_attempts}) *v = r.u64();
    d.max_weight_drift = r.f64();
    d.first_violation = r.str();
    c.tracked.first = r.f64();
    c.tracked.second = r.f64();
    c.beta = r.f64();
    const auto m = r.u64();
    const auto expected_sites = build_lattice(c.params.lattice).site_count();
    if (m != expected_sites) throw InvalidArgument("checkpoint: site count does not match the lattice");
    c.idle.resize(m);
    c.events.resize(m);
    for (std::size_t s = 0; s < m; ++s) {
        c.idle[s] = r.u8();
        const auto n = r.u64();
        if (n > bytes.size()) throw InvalidArgument("checkpoint: corrupt event count");
        c.events[s].resize(n);
        for (auto& e : c.events[s]) {
            e.time = r.f64();
            e.partner = r.i32();
            e.bond = r.i32();
            e.occ_after = r.u8();
        }
    }
    if (r.u8()) {
        std::array<WormEnd, 2> w;
        for (auto& e : w) {
            e.site = r.i32();
            e.time = r.f64();
        }
        c.worm = w;
    }
    if (!r.done()) throw InvalidArgument("checkpoint: trailing bytes");
    return c;
}

inline void write_checkpoint(const std::string& path, const Simulation& sim) {
    detail::write_file(path, serialize(capture(sim)));
}

/// Throws MetadataMismatch when a checkpoint belongs to a different run.
inline void check_same_run(const RunParams& stored, const RunParams& requested) {
    auto differ = [](const char* what) { throw MetadataMismatch(std::string("checkpoint: ") + what + " differs from the requested run"); };
    if (!(stored.lattice == requested.lattice)) differ("lattice");
    const auto& a = stored.model;
    const auto& b = requested.model;
    if (a.kind != b.kind || a.t != b.t || a.V != b.V || a.mu != b.mu || a.beta != b.beta || a.cutoff != b.cutoff ||
        !(a.filling == b.filling))
        differ("model");
    if (stored.seed != requested.seed || stored.replica != requested.replica) differ("seed");
    if (stored.measure_interval != requested.measure_interval ||
        stored.thermalization_sweeps != requested.thermalization_sweeps)
        differ("schedule");
}

inline Checkpoint read_checkpoint(const std::string& path) { return deserialize(detail::read_file(path)); }

/// Rebuilds a simulation in the captured state; `params` may extend target_samples.
inline Simulation resume(const Checkpoint& c, std::optional<std::size_t> target_samples = std::nullopt) {
    RunParams p = c.params;
    if (target_samples) p.target_samples = *target_samples;
    Simulation sim(p);
    Rng rng;
    rng.set_state(c.rng_state);
    auto cfg = Configuration::from_parts(sim.lattice(), c.beta, c.events, c.idle, c.worm);
    sim.restore(std::move(cfg), rng, c.counters, c.stats, c.diagnostics, c.tracked);
    return sim;
}

inline nlohmann::json to_json(const Checkpoint& c) {
    nlohmann::json j;
    j["version"] = kFileVersion;
    j["lattice"] = c.params.lattice.canonical();
    j["lattice_hash"] = fnv1a(c.params.lattice.canonical());
    j["model"] = {{"kind", to_string(c.params.model.kind)}, {"t", c.params.model.t},     {"V", c.params.model.V},
                  {"mu", c.params.model.mu},                {"beta", c.params.model.beta}, {"cutoff", c.params.model.cutoff},
                  {"filling", c.params.model.filling.str()}};
    j["seed"] = c.params.seed;
    j["replica"] = c.params.replica;
    j["rng_fingerprint"] = fnv1a(c.rng_state);
    j["counters"] = {{"thermal_done", c.counters.thermal_done}, {"steps_per_sweep", c.counters.steps_per_sweep},
                     {"sweeps", c.counters.sweeps},             {"samples", c.counters.samples},
                     {"since_valid", c.counters.since_valid}};
    j["updates"] = c.stats.to_json();
    j["tracked_log_weight"] = c.tracked.first + c.tracked.second;
    auto& sites = j["sites"] = nlohmann::json::array();
    for (std::size_t s = 0; s < c.idle.size(); ++s) {
        nlohmann::json ev = nlohmann::json::array();
        for (const auto& e : c.events[s])
            ev.push_back({{"u", e.time}, {"partner", e.partner}, {"bond", e.bond}, {"occ_after", e.occ_after}});
        sites.push_back({{"idle", c.idle[s]}, {"events", ev}});
    }
    if (c.worm)
        j["worm"] = {{{"site", (*c.worm)[0].site}, {"u", (*c.worm)[0].time}},
                     {{"site", (*c.worm)[1].site}, {"u", (*c.worm)[1].time}}};
    return j;
}

// -----------------------------------------------------------------------------
// Sample files
// -----------------------------------------------------------------------------

inline std::string serialize_samples(const RunParams& params, const std::vector<Snapshot>& samples) {
    detail::ByteWriter w;
    detail::write_header(w, PayloadKind::samples, params);
    w.u64(samples.size());
    for (const auto& s : samples) {
        w.u32(static_cast<std::uint32_t>(s.cycles.counts.size()));
        for (int c : s.cycles.counts) w.i32(c);
        w.u32(static_cast<std::uint32_t>(s.fock0.size()));
        for (auto v : s.fock0) w.u8(v);
        w.f64(s.diag_energy);
        w.u32(s.kinks);
    }
    return w.bytes();
}

struct SampleFile {
    RunParams params;
    std::vector<Snapshot> samples;
};

inline SampleFile deserialize_samples(const std::string& bytes) {
    detail::ByteReader r(bytes);
    SampleFile f;
    f.params = detail::read_header(r, PayloadKind::samples);
    const auto n = r.u64();
    if (n > bytes.size()) throw InvalidArgument("samples: corrupt count");
    f.samples.resize(n);
    for (auto& s : f.samples) {
        s.cycles.counts.resize(r.u32());
        for (auto& c : s.cycles.counts) c = r.i32();
        s.fock0.resize(r.u32());
        for (auto& v : s.fock0) v = r.u8();
        s.diag_energy = r.f64();
        s.kinks = r.u32();
    }
    if (!r.done()) throw InvalidArgument("samples: trailing bytes");
    return f;
}

inline void write_samples(const std::string& path, const RunParams& params, const std::vector<Snapshot>& samples) {
    detail::write_file(path, serialize_samples(params, samples));
}

inline SampleFile read_samples(const std::string& path) { return deserialize_samples(detail::read_file(path)); }

}  // namespace braidmc
