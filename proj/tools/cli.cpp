#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "randent/randent.hpp"

namespace randent::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

std::string num(double x) {
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    if (std::isnan(x))
        return "nan";
    return fmt::format("{:.17g}", x);
}

// Collects data files written by one command so the manifest can digest them.
class Sink {
  public:
    explicit Sink(std::ostream &out) : out_(out) {}

    void emit(const std::string &path, const std::string &data) {
        if (path.empty() || path == "-") {
            out_ << data;
            return;
        }
        const fs::path p(path);
        if (p.has_parent_path())
            fs::create_directories(p.parent_path());
        std::ofstream f(p, std::ios::binary);
        if (!f)
            throw IoError(fmt::format("cannot write '{}'", path));
        f << data;
        if (!f)
            throw IoError(fmt::format("write to '{}' failed", path));
        files_.emplace_back(path, sha256_hex(data));
    }

    [[nodiscard]] const std::vector<std::pair<std::string, std::string>> &files() const { return files_; }

  private:
    std::ostream &out_;
    std::vector<std::pair<std::string, std::string>> files_;
};

std::string read_file(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError(fmt::format("cannot read '{}'", path));
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        parts.push_back(cur);
    return parts;
}

// Numeric columns of a headed CSV file; lines starting with '#' are skipped.
std::map<std::string, std::vector<double>> read_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    std::map<std::string, std::vector<double>> cols;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        const auto cells = split(line, ',');
        if (header.empty()) {
            header = cells;
            continue;
        }
        if (cells.size() != header.size())
            throw IoError(fmt::format("CSV row has {} cells, header has {}", cells.size(), header.size()));
        for (std::size_t k = 0; k < cells.size(); ++k)
            cols[header[k]].push_back(std::stod(cells[k]));
    }
    return cols;
}

chain::PairKernel chain_kernel(const std::string &gate) {
    return chain::kernel_for(gates::parse_gate_spec(gate));
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    int n = 8;
    std::string gate = "cnot";
    std::string coupling = "random";
    int steps = 50;
    int replicas = 1000;
    std::uint64_t seed = 1;
    std::uint64_t first_stream = 0;
    std::vector<std::string> measures = {"purity", "entropy"};
    std::vector<int> cut;
    int record_every = 1;
    std::string format = "csv";
    std::string out;
};

std::string trace_csv(const protocol::EnsembleTrace &tr) {
    std::string s = "t,purity_mean,purity_se,entropy_mean,entropy_se";
    for (int k = 1; k <= tr.schmidt_count; ++k)
        s += fmt::format(",mu2_{}", k);
    s += '\n';
    for (std::size_t r = 0; r < tr.rows(); ++r) {
        s += fmt::format("{},{},{}", tr.times[r], num(tr.purity_mean(r)), num(tr.purity_se(r)));
        if (tr.measures.entropy)
            s += fmt::format(",{},{}", num(tr.entropy_mean(r)), num(tr.entropy_se(r)));
        else
            s += ",nan,nan";
        for (int k = 0; k < tr.schmidt_count; ++k)
            s += "," + num(tr.mu2_mean(r, k));
        s += '\n';
    }
    return s;
}

std::string trace_json(const protocol::EnsembleTrace &tr) {
    json j;
    j["n"] = tr.n;
    j["replicas"] = tr.replicas;
    j["times"] = tr.times;
    j["purity_mean"] = tr.purity_means();
    j["purity_se"] = tr.purity_ses();
    if (tr.measures.entropy) {
        j["entropy_mean"] = tr.entropy_means();
        j["entropy_se"] = tr.entropy_ses();
    }
    if (tr.schmidt_count > 0) {
        json rows = json::array();
        for (std::size_t r = 0; r < tr.rows(); ++r)
            rows.push_back(tr.mu2_means(r));
        j["mu2_mean"] = rows;
    }
    return j.dump(2) + "\n";
}

void cmd_simulate(const SimulateArgs &a, int threads, Sink &sink) {
    protocol::ProtocolConfig cfg;
    cfg.n = a.n;
    cfg.gate = gates::parse_gate_spec(a.gate);
    cfg.coupling = chain::parse_coupling(a.coupling);
    cfg.steps = a.steps;
    cfg.replicas = a.replicas;
    cfg.seed = a.seed;
    cfg.first_stream = a.first_stream;
    cfg.measures = {false, false, false};
    for (const auto &m : a.measures) {
        if (m == "purity")
            cfg.measures.purity = true;
        else if (m == "entropy")
            cfg.measures.entropy = true;
        else if (m == "schmidt")
            cfg.measures.schmidt = true;
        else
            throw DomainError(fmt::format("unknown measure '{}'", m));
    }
    // Purity is always reported; the CSV schema starts with it.
    cfg.measures.purity = true;
    cfg.cut = a.cut;
    cfg.record_every = a.record_every;
    cfg.threads = threads;
    const auto tr = protocol::run_protocol(cfg);
    sink.emit(a.out, a.format == "json" ? trace_json(tr) : trace_csv(tr));
}

// ---------------------------------------------------------------- gap

struct GapArgs {
    std::string gate = "cnot";
    std::string coupling = "random";
    std::string n_range = "4:10";
    std::string mode = "auto";
    int topk = 4;
    double tol = 1e-10;
    bool dump_kernel = false;
    std::string out;
};

std::pair<int, int> parse_range(const std::string &text) {
    const auto parts = split(text, ':');
    try {
        if (parts.size() == 1)
            return {std::stoi(parts[0]), std::stoi(parts[0])};
        if (parts.size() == 2)
            return {std::stoi(parts[0]), std::stoi(parts[1])};
    } catch (const std::logic_error &) {
    }
    throw DomainError(fmt::format("bad range '{}', expected a:b", text));
}

json cplx_json(qsim::cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json kernel_json(const chain::PairKernel &k) {
    json j;
    j["label"] = k.label();
    json rows = json::array();
    for (int r = 0; r < 16; ++r) {
        std::vector<double> row(16);
        for (int c = 0; c < 16; ++c)
            row[static_cast<std::size_t>(c)] = k.matrix()(r, c);
        rows.push_back(row);
    }
    j["matrix"] = rows;
    j["matrix_layout"] = "row = output pair index, column = input pair index";
    if (k.structure() == chain::PairKernel::Structure::CliffordMix)
        j["perm"] = k.perm();
    const auto rep = chain::lump(k);
    json lumped = json::array();
    for (int r = 0; r < 4; ++r)
        lumped.push_back(std::vector<double>{rep.kernel(r, 0), rep.kernel(r, 1), rep.kernel(r, 2), rep.kernel(r, 3)});
    const std::array<const char *, 4> classes = {"none", "i", "j", "ij"};
    json report = json::array();
    for (std::size_t c = 0; c < 4; ++c)
        report.push_back(json{{"class", classes[c]},
                              {"size", chain::kClassSizes[c]},
                              {"lumpable", rep.lumpable[c]},
                              {"max_deviation", rep.max_deviation[c]}});
    j["lumpability"] = json{{"kernel", lumped},
                            {"classes", report},
                            {"strongly_lumpable", rep.strongly_lumpable()},
                            {"tolerance", chain::kLumpTolerance}};
    return j;
}

void cmd_gap(const GapArgs &a, Sink &sink) {
    const auto kernel = chain_kernel(a.gate);
    const auto coupling = chain::parse_coupling(a.coupling);
    const auto [lo, hi] = parse_range(a.n_range);
    if (lo < 2 || hi < lo)
        throw DomainError(fmt::format("n range {}:{} is empty or below 2", lo, hi));
    if (a.mode != "auto" && a.mode != "full" && a.mode != "lumped")
        throw DomainError(fmt::format("unknown mode '{}'", a.mode));
    spectral::ArnoldiOptions opts;
    opts.tol = a.tol;
    json results = json::array();
    for (int n = lo; n <= hi; ++n) {
        const bool full = a.mode == "full" || (a.mode == "auto" && n <= 10);
        spectral::SpectrumResult s;
        if (full)
            s = spectral::top_eigenvalues(chain::ChainOperator(kernel, n, coupling), a.topk, opts);
        else
            s = spectral::top_eigenvalues(chain::LumpedChain(kernel, n, coupling), a.topk, opts);
        json e;
        e["n"] = n;
        e["mode"] = full ? "full" : "lumped";
        e["dim"] = s.dim;
        e["method"] = s.method;
        e["unit_multiplicity"] = s.unit_multiplicity;
        e["gap"] = s.gap ? json(*s.gap) : json(nullptr);
        json vals = json::array();
        for (const auto &ev : s.eigenvalues) {
            json v = cplx_json(ev.value);
            v["multiplicity"] = ev.multiplicity;
            vals.push_back(v);
        }
        e["eigenvalues"] = vals;
        json prof = json::array();
        for (const auto &ev : spectral::degeneracy_profile(s)) {
            json v = cplx_json(ev.value);
            v["multiplicity"] = ev.multiplicity;
            prof.push_back(v);
        }
        e["degeneracy_profile"] = prof;
        results.push_back(e);
    }
    json j{{"gate", a.gate}, {"coupling", chain::to_string(coupling)}, {"topk", a.topk}, {"results", results}};
    if (a.dump_kernel)
        j["kernel"] = kernel_json(kernel);
    sink.emit(a.out, j.dump(2) + "\n");
}

// ---------------------------------------------------------------- evolve

struct EvolveArgs {
    int n = 8;
    std::string gate = "cnot";
    std::string coupling = "random";
    int steps = 50;
    std::string out;
};

void cmd_evolve(const EvolveArgs &a, Sink &sink) {
    const chain::ChainOperator op(chain_kernel(a.gate), a.n, chain::parse_coupling(a.coupling));
    if (a.steps < 0)
        throw DomainError("steps must be nonnegative");
    const auto purity = chain::evolve(op, chain::initial_dist_product_state(a.n), a.steps);
    std::string s = "t,purity\n";
    for (std::size_t t = 0; t < purity.size(); ++t)
        s += fmt::format("{},{}\n", t, num(purity[t]));
    sink.emit(a.out, s);
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    int n = 8;
    std::string coupling = "random";
    double grid_step = 0.1;
    int steps = 30;
    int replicas = 1000;
    std::uint64_t seed = 1;
    std::string out;
};

void cmd_sweep(const SweepArgs &a, int threads, Sink &sink, std::ostream &out, std::ostream &err) {
    protocol::ProtocolConfig base;
    base.n = a.n;
    base.coupling = chain::parse_coupling(a.coupling);
    base.seed = a.seed;
    base.threads = threads;
    const auto grid = analysis::sweep_canonical(base, a.grid_step, a.steps, a.replicas);
    std::string s = "ax,ay,az,kappa,kappa_se\n";
    for (const auto &p : grid.points)
        s += fmt::format("{},{},{},{},{}\n", num(p.params[0]), num(p.params[1]), num(p.params[2]), num(p.kappa),
                         num(p.kappa_se));
    sink.emit(a.out, s);
    const auto &best = grid.points[grid.argmax];
    const bool to_stdout = a.out.empty() || a.out == "-";
    (to_stdout ? err : out) << fmt::format("argmax ax={} ay={} az={} kappa={} kappa_se={}\n", best.params[0],
                                           best.params[1], best.params[2], num(best.kappa), num(best.kappa_se));
}

// ---------------------------------------------------------------- fit

struct FitArgs {
    std::string model;
    std::string input;
    int n = 0;
    double i_inf = -1.0;
    double tau = 0.0;
    double t_min = 3.0;
    double t_max = -1.0;
    double se_factor = 5.0;
    std::string out;
};

analysis::Series series_from(const std::string &text, int &n) {
    analysis::Series s;
    if (!text.empty() && text.find_first_not_of(" \t\r\n") != std::string::npos &&
        text[text.find_first_not_of(" \t\r\n")] == '{') {
        const json j = json::parse(text);
        if (n == 0 && j.contains("n"))
            n = j.at("n").get<int>();
        for (int t : j.at("times").get<std::vector<int>>())
            s.t.push_back(t);
        s.value = j.at("purity_mean").get<std::vector<double>>();
        s.se = j.at("purity_se").get<std::vector<double>>();
        return s;
    }
    auto cols = read_csv(text);
    if (!cols.count("t"))
        throw IoError("trace input needs a 't' column");
    s.t = cols["t"];
    if (cols.count("purity_mean")) {
        s.value = cols["purity_mean"];
        s.se = cols.count("purity_se") ? cols["purity_se"] : std::vector<double>(s.t.size(), 0.0);
    } else if (cols.count("purity")) {
        s.value = cols["purity"];
        s.se.assign(s.t.size(), 0.0);
    } else {
        throw IoError("trace input needs a 'purity_mean' or 'purity' column");
    }
    return s;
}

std::vector<std::pair<int, double>> gaps_from(const std::string &text) {
    std::vector<std::pair<int, double>> pts;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        const json doc = json::parse(text);
        for (const auto &e : doc.at("results"))
            if (!e.at("gap").is_null())
                pts.emplace_back(e.at("n").get<int>(), e.at("gap").get<double>());
        return pts;
    }
    auto cols = read_csv(text);
    if (!cols.count("n") || !cols.count("gap"))
        throw IoError("gap input needs 'n' and 'gap' columns");
    for (std::size_t k = 0; k < cols["n"].size(); ++k)
        pts.emplace_back(static_cast<int>(cols["n"][k]), cols["gap"][k]);
    return pts;
}

json fit_json(const analysis::FitResult &f) {
    json params = json::array();
    for (const auto &p : f.params)
        params.push_back(json{{"name", p.name}, {"value", p.value}, {"error", p.error}});
    return json{{"model", analysis::to_string(f.model)},
                {"params", params},
                {"residual_norm", f.residual_norm},
                {"reduced_chi2", f.reduced_chi2},
                {"window", {f.x_lo, f.x_hi}},
                {"points", f.points},
                {"weighted", f.weighted}};
}

void cmd_fit(const FitArgs &a, Sink &sink) {
    const auto model = analysis::parse_fit_model(a.model);
    const std::string text = read_file(a.input);
    analysis::FitResult r;
    if (model == analysis::FitModel::GapLinear || model == analysis::FitModel::GapLog) {
        r = analysis::fit_gap_scaling(gaps_from(text), model == analysis::FitModel::GapLinear
                                                           ? analysis::GapModel::Linear
                                                           : analysis::GapModel::Log);
    } else {
        int n = a.n;
        const auto s = series_from(text, n);
        double i_inf = a.i_inf;
        if (i_inf < 0.0) {
            if (n <= 0)
                throw DomainError("decay fits need --n (or --i-inf) to fix the asymptotic purity");
            i_inf = ent::asymptotic_purity(n);
        }
        analysis::FitWindow w{a.t_min, a.t_max, a.se_factor};
        if (model == analysis::FitModel::Kappa) {
            if (n <= 0)
                throw DomainError("the kappa fit needs --n");
            r = analysis::fit_kappa(s, n, i_inf, w);
        } else if (model == analysis::FitModel::Tau) {
            r = analysis::fit_tau(s, i_inf, w);
        } else {
            r = analysis::fit_degenerate_decay(s, i_inf, a.tau, w);
        }
    }
    sink.emit(a.out, fit_json(r).dump(2) + "\n");
}

// ---------------------------------------------------------------- reference

struct ReferenceArgs {
    int n = 8;
    std::string out;
};

void cmd_reference(const ReferenceArgs &a, Sink &sink) {
    const json j{{"n", a.n},
                 {"purity_inf", ent::asymptotic_purity(a.n)},
                 {"entropy_inf", ent::asymptotic_entropy(a.n)},
                 {"mu2", ent::random_schmidt_reference_squares(a.n)}};
    sink.emit(a.out, j.dump(2) + "\n");
}

// ---------------------------------------------------------------- replay

struct ReplayArgs {
    std::string manifest;
    std::string out_dir;
};

int cmd_replay(const ReplayArgs &a, std::ostream &out, std::ostream &err) {
    const json m = json::parse(read_file(a.manifest));
    const std::string command = m.at("command").get<std::string>();
    const fs::path dir = a.out_dir.empty() ? fs::path(a.manifest).parent_path() / "replay" : fs::path(a.out_dir);
    fs::create_directories(dir);
    const fs::path config = dir / (command + ".replay.toml");
    {
        std::ofstream f(config);
        f << m.at("config").get<std::string>();
        if (!f)
            throw IoError(fmt::format("cannot write '{}'", config.string()));
    }
    const auto &outputs = m.at("outputs");
    if (outputs.size() != 1)
        throw IoError("manifest must list exactly one output");
    const fs::path target = dir / fs::path(outputs[0].at("path").get<std::string>()).filename();
    std::ostringstream sink_out;
    const int rc = run({"--config", config.string(), command, "--out", target.string(), "--no-manifest"}, sink_out, err);
    if (rc != kOk)
        return rc;
    const std::string want = outputs[0].at("sha256").get<std::string>();
    const std::string got = sha256_hex(read_file(target.string()));
    out << fmt::format("{} {} {}\n", got == want ? "match" : "MISMATCH", target.string(), got);
    return got == want ? kOk : kNumeric;
}

// ---------------------------------------------------------------- manifest

std::string toml_string(const std::string &s) { return json(s).dump(); }

// TOML section for the invoked subcommand: given values verbatim, defaults otherwise.
std::string resolved_config(const CLI::App &sub) {
    std::string toml = fmt::format("[{}]\n", sub.get_name());
    for (const CLI::Option *opt : sub.get_options()) {
        if (opt->get_lnames().empty() || opt->get_lnames().front() == "help")
            continue;
        const std::string key = opt->get_lnames().front();
        if (opt->get_type_size() == 0) {
            toml += fmt::format("{} = {}\n", key, opt->count() > 0 ? "true" : "false");
            continue;
        }
        std::vector<std::string> values;
        if (opt->count() > 0) {
            values = opt->results();
        } else {
            std::string d = opt->get_default_str();
            if (d.size() >= 2 && d.front() == '[' && d.back() == ']')
                d = d.substr(1, d.size() - 2);
            if (d.empty())
                continue;
            values = opt->get_delimiter() != '\0' ? split(d, ',') : std::vector<std::string>{d};
        }
        if (values.size() == 1 && opt->get_expected_max() <= 1) {
            toml += fmt::format("{} = {}\n", key, toml_string(values[0]));
        } else {
            std::string list;
            for (const auto &v : values)
                list += (list.empty() ? "" : ", ") + toml_string(v);
            toml += fmt::format("{} = [{}]\n", key, list);
        }
    }
    return toml;
}

void write_manifest(const CLI::App &app, const std::string &command, const std::vector<std::string> &args,
                    std::optional<std::uint64_t> seed, int threads, double wall,
                    const std::vector<std::pair<std::string, std::string>> &files) {
    if (files.empty())
        return;
    json outputs = json::array();
    for (const auto &[path, digest] : files)
        outputs.push_back(json{{"path", path}, {"sha256", digest}});
    json m{{"tool", "randent"},
           {"version", std::string(kVersion)},
           {"command", command},
           {"argv", args},
           {"config", resolved_config(*app.get_subcommand(command))},
           {"seed", seed ? json(*seed) : json(nullptr)},
           {"threads", threads},
           {"wall_time_s", wall},
           {"outputs", outputs}};
    const std::string path = files.front().first + ".manifest.json";
    std::ofstream f(path);
    f << m.dump(2) << "\n";
    if (!f)
        throw IoError(fmt::format("cannot write '{}'", path));
}

} // namespace

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    std::string hex;
    for (unsigned int k = 0; k < len; ++k)
        hex += fmt::format("{:02x}", md[k]);
    return hex;
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Random two-qubit-gate entanglement protocols: simulation, Markov-chain spectra and fits", "randent"};
    app.set_config("--config", "", "TOML file with option values; command-line flags take precedence");
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.fallthrough();
    int threads = 0;
    bool no_manifest = false;
    app.add_option("--threads", threads, "Worker threads (0: all cores); results do not depend on it")
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--no-manifest", no_manifest, "Do not write a run manifest next to output files");

    const std::vector<std::string> couplings = {"random", "nnpbc", "nnobc"};

    SimulateArgs sim;
    auto *simulate = app.add_subcommand("simulate", "Monte Carlo ensemble of protocol runs");
    simulate->add_option("--n", sim.n, "Qubits")->capture_default_str();
    simulate->add_option("--gate", sim.gate, "cnot, xy, dcnot, swap, identity, u4 or canonical:ax,ay,az")
        ->capture_default_str();
    simulate->add_option("--coupling", sim.coupling)->check(CLI::IsMember(couplings))->capture_default_str();
    simulate->add_option("--steps", sim.steps)->check(CLI::NonNegativeNumber)->capture_default_str();
    simulate->add_option("--replicas", sim.replicas)->check(CLI::PositiveNumber)->capture_default_str();
    simulate->add_option("--seed", sim.seed)->capture_default_str();
    simulate->add_option("--first-stream", sim.first_stream, "Stream of replica 0")->capture_default_str();
    simulate->add_option("--measures", sim.measures, "purity, entropy, schmidt")
        ->delimiter(',')
        ->capture_default_str();
    simulate->add_option("--cut", sim.cut, "Qubits of subsystem A (default: first half)")->delimiter(',');
    simulate->add_option("--record-every", sim.record_every)->check(CLI::PositiveNumber)->capture_default_str();
    simulate->add_option("--format", sim.format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    simulate->add_option("--out", sim.out, "Output file (default: stdout)");

    GapArgs gp;
    auto *gap = app.add_subcommand("gap", "Top of the Markov-chain spectrum and its gap");
    gap->add_option("--gate", gp.gate, "cnot, xy, u4 or another Clifford gate")->capture_default_str();
    gap->add_option("--coupling", gp.coupling)->check(CLI::IsMember(couplings))->capture_default_str();
    gap->add_option("--n-range", gp.n_range, "a:b")->capture_default_str();
    gap->add_option("--mode", gp.mode)->check(CLI::IsMember({"auto", "full", "lumped"}))->capture_default_str();
    gap->add_option("--topk", gp.topk)->check(CLI::Range(1, spectral::kMaxTopK))->capture_default_str();
    gap->add_option("--tol", gp.tol, "Arnoldi tolerance")->capture_default_str();
    gap->add_flag("--dump-kernel", gp.dump_kernel, "Include the pair kernel and lumpability report");
    gap->add_option("--out", gp.out);

    EvolveArgs ev;
    auto *evolve = app.add_subcommand("evolve", "Exact ensemble purity from the Pauli chain");
    evolve->add_option("--n", ev.n)->capture_default_str();
    evolve->add_option("--gate", ev.gate)->capture_default_str();
    evolve->add_option("--coupling", ev.coupling)->check(CLI::IsMember(couplings))->capture_default_str();
    evolve->add_option("--steps", ev.steps)->capture_default_str();
    evolve->add_option("--out", ev.out);

    SweepArgs sw;
    auto *sweep = app.add_subcommand("sweep", "Decay rate over the canonical-gate parameter domain");
    sweep->add_option("--n", sw.n)->capture_default_str();
    sweep->add_option("--coupling", sw.coupling)->check(CLI::IsMember(couplings))->capture_default_str();
    sweep->add_option("--grid-step", sw.grid_step)->capture_default_str();
    sweep->add_option("--T,--steps", sw.steps, "Time at which purity is read")->capture_default_str();
    sweep->add_option("--replicas", sw.replicas)->check(CLI::PositiveNumber)->capture_default_str();
    sweep->add_option("--seed", sw.seed)->capture_default_str();
    sweep->add_option("--out", sw.out);

    FitArgs ft;
    auto *fit = app.add_subcommand("fit", "Fit decay or gap-scaling models");
    fit->add_option("--model", ft.model)
        ->check(CLI::IsMember({"kappa", "tau", "degenerate", "gap-linear", "gap-log"}))
        ->required();
    fit->add_option("--input", ft.input, "Trace CSV/JSON or gap JSON/CSV")->required();
    fit->add_option("--n", ft.n, "Qubits (fixes I_inf)")->capture_default_str();
    fit->add_option("--i-inf", ft.i_inf, "Asymptotic purity override");
    fit->add_option("--tau", ft.tau, "Fixed decay time for the degenerate model");
    fit->add_option("--t-min", ft.t_min)->capture_default_str();
    fit->add_option("--t-max", ft.t_max, "Negative: no bound")->capture_default_str();
    fit->add_option("--se-factor", ft.se_factor)->capture_default_str();
    fit->add_option("--out", ft.out);

    ReferenceArgs rf;
    auto *reference = app.add_subcommand("reference", "Random-state reference values");
    reference->add_option("--n", rf.n)->capture_default_str();
    reference->add_option("--out", rf.out);

    ReplayArgs rp;
    auto *replay = app.add_subcommand("replay", "Re-run a manifest and compare output digests");
    replay->add_option("manifest", rp.manifest)->required();
    replay->add_option("--out-dir", rp.out_dir, "Directory for replayed outputs (default: <manifest dir>/replay)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kOk : kUsage;
    }

    Sink sink(out);
    const auto t0 = std::chrono::steady_clock::now();
    std::string command;
    std::optional<std::uint64_t> seed;
    try {
        if (*simulate) {
            command = "simulate";
            seed = sim.seed;
            cmd_simulate(sim, threads, sink);
        } else if (*gap) {
            command = "gap";
            cmd_gap(gp, sink);
        } else if (*evolve) {
            command = "evolve";
            cmd_evolve(ev, sink);
        } else if (*sweep) {
            command = "sweep";
            seed = sw.seed;
            cmd_sweep(sw, threads, sink, out, err);
        } else if (*fit) {
            command = "fit";
            cmd_fit(ft, sink);
        } else if (*reference) {
            command = "reference";
            cmd_reference(rf, sink);
        } else if (*replay) {
            return cmd_replay(rp, out, err);
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!no_manifest)
            write_manifest(app, command, args, seed, threads, wall, sink.files());
    } catch (const CapacityError &e) {
        err << "capacity error: " << e.what() << "\n";
        return kCapacity;
    } catch (const std::bad_alloc &) {
        err << "capacity error: out of memory\n";
        return kCapacity;
    } catch (const NumericError &e) {
        err << "numeric error: " << e.what() << "\n";
        return kNumeric;
    } catch (const UnsupportedError &e) {
        err << "unsupported: " << e.what() << "\n";
        return kUsage;
    } catch (const std::logic_error &e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const IoError &e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const json::exception &e) {
        err << "error: malformed input: " << e.what() << "\n";
        return kUsage;
    }
    return kOk;
}

} // namespace randent::cli
