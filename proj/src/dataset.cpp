#include "fnolab/dataset.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace fnolab {

using nlohmann::json;

ChannelStack stack_channels(const PdeCoefficients& coeffs, const RealField& source) {
    ChannelStack st(source.h, source.w, kNumChannels);
    const std::size_t p = st.plane();
    std::copy(source.values.begin(), source.values.end(), st.channel(0));
    const double consts[6] = {coeffs.k.k11, coeffs.k.k22, coeffs.k.k12,
                              coeffs.v1,    coeffs.v2,    coeffs.omega};
    for (int ch = 0; ch < 6; ++ch)
        std::fill_n(st.channel(ch + 1), p, consts[ch]);
    return st;
}

std::uint64_t instance_seed(const DatasetSpec& spec, int split, int index) {
    return derive_seed(spec.master_seed, static_cast<std::uint64_t>(split),
                       static_cast<std::uint64_t>(index));
}

PdeInstance generate_instance(const DatasetSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    for (int attempt = 0; attempt < 64; ++attempt) {
        RealField f = sample_source(rng, spec.source, spec.h, spec.w);
        CoefficientSample cs = sample_coefficients(rng, spec.system, spec.ranges);

        if (spec.system != PdeSystem::helmholtz) {
            // D(0)=0: project the source onto zero mean so the solve is well posed.
            double mean = 0.0;
            for (double v : f.values) mean += v;
            mean /= static_cast<double>(f.size());
            for (double& v : f.values) v -= mean;
        }
        if (l2_norm(f) < 1e-12) continue;  // all bumps zeroed out; resample

        PdeInstance inst;
        inst.seed = seed;
        if (spec.system == PdeSystem::adv_diff) {
            CalibrationResult cal = calibrate_advection(cs.coeffs, f, cs.psi_target);
            if (!cal.ok) continue;  // bracket/bisection failed; resample
            inst.coeffs = cs.coeffs;
            inst.coeffs.v1 *= cal.speed;
            inst.coeffs.v2 *= cal.speed;
            inst.solution = std::move(cal.solution);
            inst.psi = cal.psi;
            inst.psi_target = cs.psi_target;
        } else {
            inst.coeffs = cs.coeffs;
            inst.solution = solve_spectral(cs.coeffs, f);
        }
        inst.source = std::move(f);
        return inst;
    }
    throw NumericError("degenerate instance: 64 sampling attempts failed for seed " +
                       std::to_string(seed));
}

namespace {

SplitData generate_split(const DatasetSpec& spec, int split, int count) {
    SplitData out;
    out.n = count;
    out.plane = static_cast<std::size_t>(spec.h) * spec.w;
    out.data.resize(out.record_floats() * count);
    out.psi.resize(count, 0.0);
    out.psi_target.resize(count, 0.0);
    for (int i = 0; i < count; ++i) {
        const PdeInstance inst = generate_instance(spec, instance_seed(spec, split, i));
        const ChannelStack st = stack_channels(inst.coeffs, inst.source);
        float* rec = out.input(i);
        for (std::size_t k = 0; k < st.values.size(); ++k)
            rec[k] = static_cast<float>(st.values[k]);
        float* tgt = rec + kNumChannels * out.plane;
        for (std::size_t k = 0; k < out.plane; ++k)
            tgt[k] = static_cast<float>(inst.solution.values[k]);
        out.psi[i] = inst.psi;
        out.psi_target[i] = inst.psi_target;
    }
    return out;
}

json interval_json(const Interval& iv) { return json::array({iv.lo, iv.hi}); }
Interval interval_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

void write_split_bin(const std::filesystem::path& path, const SplitData& s) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os.write(reinterpret_cast<const char*>(s.data.data()),
             static_cast<std::streamsize>(s.data.size() * sizeof(float)));
    if (!os) throw IoError("short write to " + path.string());
}

SplitData read_split_bin(const std::filesystem::path& path, int n, std::size_t plane) {
    SplitData s;
    s.n = n;
    s.plane = plane;
    s.data.resize(s.record_floats() * n);
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    is.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::uint64_t>(is.tellg());
    const auto expect = static_cast<std::uint64_t>(s.data.size()) * sizeof(float);
    if (bytes != expect)
        throw IoError(path.string() + ": size " + std::to_string(bytes) + " != expected " +
                      std::to_string(expect));
    is.seekg(0);
    is.read(reinterpret_cast<char*>(s.data.data()), static_cast<std::streamsize>(expect));
    if (!is) throw IoError("short read from " + path.string());
    s.psi.assign(n, 0.0);
    s.psi_target.assign(n, 0.0);
    return s;
}

}  // namespace

Dataset generate_dataset(const DatasetSpec& spec) {
    validate_grid(spec.h, spec.w);
    if (spec.counts.train < 0 || spec.counts.val < 0 || spec.counts.test < 0)
        throw ConfigError("split counts must be non-negative");
    Dataset ds;
    ds.spec = spec;
    ds.train = generate_split(spec, 0, spec.counts.train);
    ds.val = generate_split(spec, 1, spec.counts.val);
    ds.test = generate_split(spec, 2, spec.counts.test);
    return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json m;
    m["format_version"] = kDatasetFormatVersion;
    m["channel_layout_version"] = kChannelLayoutVersion;
    m["channels"] = {"f", "k11", "k22", "k12", "v1", "v2", "omega"};
    m["name"] = ds.spec.name;
    m["system"] = system_name(ds.spec.system);
    m["h"] = ds.spec.h;
    m["w"] = ds.spec.w;
    m["counts"] = {{"train", ds.spec.counts.train},
                   {"val", ds.spec.counts.val},
                   {"test", ds.spec.counts.test}};
    m["ranges"] = {{"e", interval_json(ds.spec.ranges.e)},
                   {"psi", interval_json(ds.spec.ranges.psi)},
                   {"omega", interval_json(ds.spec.ranges.omega)}};
    m["source"] = {{"sigma", ds.spec.source.sigma},
                   {"sparsity", json::array({ds.spec.source.sparsity_lo, ds.spec.source.sparsity_hi})}};
    m["master_seed"] = ds.spec.master_seed;
    m["psi"] = {{"train", ds.train.psi}, {"val", ds.val.psi}, {"test", ds.test.psi}};
    m["psi_target"] = {{"train", ds.train.psi_target},
                       {"val", ds.val.psi_target},
                       {"test", ds.test.psi_target}};

    std::ofstream os(dir / "manifest.json");
    if (!os) throw IoError("cannot write " + (dir / "manifest.json").string());
    os << m.dump(2) << "\n";
    os.close();

    write_split_bin(dir / "train.bin", ds.train);
    write_split_bin(dir / "val.bin", ds.val);
    write_split_bin(dir / "test.bin", ds.test);
}

Dataset load_dataset(const std::filesystem::path& dir) {
    std::ifstream is(dir / "manifest.json");
    if (!is) throw IoError("cannot open " + (dir / "manifest.json").string());
    json m;
    try {
        is >> m;
    } catch (const json::exception& e) {
        throw IoError("bad manifest " + (dir / "manifest.json").string() + ": " + e.what());
    }

    Dataset ds;
    try {
        if (m.at("format_version").get<int>() != kDatasetFormatVersion)
            throw IoError("unsupported dataset format_version");
        if (m.at("channel_layout_version").get<int>() != kChannelLayoutVersion)
            throw IoError("unsupported channel_layout_version");
        ds.spec.name = m.at("name").get<std::string>();
        ds.spec.system = system_from_name(m.at("system").get<std::string>());
        ds.spec.h = m.at("h").get<int>();
        ds.spec.w = m.at("w").get<int>();
        ds.spec.counts.train = m.at("counts").at("train").get<int>();
        ds.spec.counts.val = m.at("counts").at("val").get<int>();
        ds.spec.counts.test = m.at("counts").at("test").get<int>();
        ds.spec.ranges.e = interval_from(m.at("ranges").at("e"));
        ds.spec.ranges.psi = interval_from(m.at("ranges").at("psi"));
        ds.spec.ranges.omega = interval_from(m.at("ranges").at("omega"));
        ds.spec.source.sigma = m.at("source").at("sigma").get<double>();
        ds.spec.source.sparsity_lo = m.at("source").at("sparsity").at(0).get<double>();
        ds.spec.source.sparsity_hi = m.at("source").at("sparsity").at(1).get<double>();
        ds.spec.master_seed = m.at("master_seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw IoError("manifest missing field: " + std::string(e.what()));
    }

    const std::size_t plane = static_cast<std::size_t>(ds.spec.h) * ds.spec.w;
    ds.train = read_split_bin(dir / "train.bin", ds.spec.counts.train, plane);
    ds.val = read_split_bin(dir / "val.bin", ds.spec.counts.val, plane);
    ds.test = read_split_bin(dir / "test.bin", ds.spec.counts.test, plane);

    if (m.contains("psi")) {
        ds.train.psi = m.at("psi").at("train").get<std::vector<double>>();
        ds.val.psi = m.at("psi").at("val").get<std::vector<double>>();
        ds.test.psi = m.at("psi").at("test").get<std::vector<double>>();
    }
    if (m.contains("psi_target")) {
        ds.train.psi_target = m.at("psi_target").at("train").get<std::vector<double>>();
        ds.val.psi_target = m.at("psi_target").at("val").get<std::vector<double>>();
        ds.test.psi_target = m.at("psi_target").at("test").get<std::vector<double>>();
    }
    return ds;
}

}  // namespace fnolab
