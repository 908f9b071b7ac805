#include "randent/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "randent/errors.hpp"

namespace randent::protocol {

namespace {

double se_from_sums(double sum, double sumsq, std::size_t r) {
    if (r < 2)
        return 0.0;
    const double rd = static_cast<double>(r);
    const double spread = sumsq - sum * sum / rd;
    if (spread <= 4.0 * std::sqrt(rd) * std::numeric_limits<double>::epsilon() * sumsq)
        return 0.0;
    return std::sqrt(spread / (rd - 1.0) / rd);
}

qsim::Matrix4c kron(const qsim::Matrix2c &a, const qsim::Matrix2c &b) {
    qsim::Matrix4c out;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            out.block<2, 2>(2 * r, 2 * c) = a(r, c) * b;
    return out;
}

// Flat per-row record: purity, purity^2, entropy, entropy^2, then mu2_1..K.
struct Layout {
    std::size_t rows;
    std::size_t width;
};

using Partial = std::vector<double>;

void add_into(Partial &a, const Partial &b) {
    for (std::size_t k = 0; k < a.size(); ++k)
        a[k] += b[k];
}

struct Runner {
    const ProtocolConfig &cfg;
    const ent::Bipartition &cut;
    std::optional<qsim::Matrix4c> gate;
    chain::PairList pairs;
    std::vector<int> times;
    Layout layout;
    int schmidt_count;

    void record(const qsim::PureState &s, double *row) const {
        if (cfg.measures.entropy || cfg.measures.schmidt) {
            ent::Measures m = ent::measure(s, cut, cfg.measures.schmidt);
            row[0] = m.purity;
            row[1] = m.purity * m.purity;
            row[2] = m.entropy;
            row[3] = m.entropy * m.entropy;
            for (int k = 0; k < schmidt_count && static_cast<std::size_t>(k) < m.mu2.size(); ++k)
                row[4 + k] = m.mu2[static_cast<std::size_t>(k)];
        } else {
            const double p = ent::fast_purity(s, cut);
            row[0] = p;
            row[1] = p * p;
        }
    }

    Partial replica(std::uint64_t r) const {
        Partial out(layout.rows * layout.width, 0.0);
        qsim::RngStream rng(cfg.seed, cfg.first_stream + r);
        qsim::PureState s = qsim::PureState::basis(cfg.n, 0);
        std::size_t row = 0;
        record(s, out.data());
        ++row;
        for (int t = 1; t <= cfg.steps; ++t) {
            protocol_step(s, gate, pairs, rng);
            if (row < times.size() && times[row] == t) {
                record(s, out.data() + row * layout.width);
                ++row;
            }
        }
        return out;
    }

    // Pairwise sum over replicas [lo, hi), splitting at the midpoint.
    Partial node(std::uint64_t lo, std::uint64_t hi) const {
        if (hi - lo == 1)
            return replica(lo);
        const std::uint64_t mid = lo + (hi - lo) / 2;
        Partial a = node(lo, mid);
        add_into(a, node(mid, hi));
        return a;
    }
};

void collect(std::uint64_t lo, std::uint64_t hi, int depth, std::vector<std::pair<std::uint64_t, std::uint64_t>> &out) {
    if (depth == 0 || hi - lo == 1) {
        out.emplace_back(lo, hi);
        return;
    }
    const std::uint64_t mid = lo + (hi - lo) / 2;
    collect(lo, mid, depth - 1, out);
    collect(mid, hi, depth - 1, out);
}

Partial combine(std::uint64_t lo, std::uint64_t hi, int depth, std::map<std::uint64_t, Partial> &done) {
    if (depth == 0 || hi - lo == 1)
        return std::move(done.at(lo));
    const std::uint64_t mid = lo + (hi - lo) / 2;
    Partial a = combine(lo, mid, depth - 1, done);
    add_into(a, combine(mid, hi, depth - 1, done));
    return a;
}

} // namespace

double EnsembleTrace::purity_mean(std::size_t row) const { return purity_sum.at(row) / static_cast<double>(replicas); }
double EnsembleTrace::purity_se(std::size_t row) const {
    return se_from_sums(purity_sum.at(row), purity_sumsq.at(row), replicas);
}
double EnsembleTrace::entropy_mean(std::size_t row) const {
    return entropy_sum.at(row) / static_cast<double>(replicas);
}
double EnsembleTrace::entropy_se(std::size_t row) const {
    return se_from_sums(entropy_sum.at(row), entropy_sumsq.at(row), replicas);
}
double EnsembleTrace::mu2_mean(std::size_t row, int k) const {
    if (k < 0 || k >= schmidt_count)
        throw DomainError("Schmidt index out of range");
    return mu2_sum.at(row * static_cast<std::size_t>(schmidt_count) + static_cast<std::size_t>(k)) /
           static_cast<double>(replicas);
}
std::vector<double> EnsembleTrace::mu2_means(std::size_t row) const {
    std::vector<double> out(static_cast<std::size_t>(schmidt_count));
    for (int k = 0; k < schmidt_count; ++k)
        out[static_cast<std::size_t>(k)] = mu2_mean(row, k);
    return out;
}

std::vector<double> EnsembleTrace::purity_means() const {
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r)
        out[r] = purity_mean(r);
    return out;
}
std::vector<double> EnsembleTrace::purity_ses() const {
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r)
        out[r] = purity_se(r);
    return out;
}
std::vector<double> EnsembleTrace::entropy_means() const {
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r)
        out[r] = entropy_mean(r);
    return out;
}
std::vector<double> EnsembleTrace::entropy_ses() const {
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r)
        out[r] = entropy_se(r);
    return out;
}

EnsembleTrace merge(const EnsembleTrace &a, const EnsembleTrace &b) {
    if (a.n != b.n || a.times != b.times || a.schmidt_count != b.schmidt_count ||
        a.measures.entropy != b.measures.entropy || a.measures.schmidt != b.measures.schmidt)
        throw DomainError("traces with different shapes cannot be merged");
    EnsembleTrace out = a;
    out.replicas += b.replicas;
    auto add = [](std::vector<double> &x, const std::vector<double> &y) {
        for (std::size_t k = 0; k < x.size(); ++k)
            x[k] += y[k];
    };
    add(out.purity_sum, b.purity_sum);
    add(out.purity_sumsq, b.purity_sumsq);
    add(out.entropy_sum, b.entropy_sum);
    add(out.entropy_sumsq, b.entropy_sumsq);
    add(out.mu2_sum, b.mu2_sum);
    return out;
}

std::pair<int, int> choose_pair(chain::Coupling coupling, int n, qsim::RngStream &rng) {
    const chain::PairList pairs = chain::coupling_pairs(coupling, n);
    return pairs[rng.index(pairs.size())];
}

void protocol_step(qsim::PureState &state, const std::optional<qsim::Matrix4c> &gate, const chain::PairList &pairs,
                   qsim::RngStream &rng) {
    const auto [i, j] = pairs[rng.index(pairs.size())];
    if (!gate) {
        state.apply_two_qubit(i, j, qsim::haar_u4(rng));
        return;
    }
    const qsim::Matrix2c vi = qsim::haar_u2(rng);
    const qsim::Matrix2c vj = qsim::haar_u2(rng);
    state.apply_two_qubit(i, j, kron(vi, vj) * *gate);
}

void protocol_step(qsim::PureState &state, const gates::GateSpec &spec, chain::Coupling coupling,
                   qsim::RngStream &rng) {
    std::optional<qsim::Matrix4c> gate;
    if (spec.kind != gates::GateSpec::Kind::HaarU4)
        gate = spec.gate().matrix;
    protocol_step(state, gate, chain::coupling_pairs(coupling, state.qubits()), rng);
}

std::vector<int> record_times(int steps, int record_every) {
    if (steps < 0)
        throw DomainError("step count must be nonnegative");
    if (record_every < 1)
        throw DomainError("record interval must be at least 1");
    std::vector<int> times;
    for (int t = 0; t <= steps; t += record_every)
        times.push_back(t);
    if (times.back() != steps)
        times.push_back(steps);
    return times;
}

EnsembleTrace run_protocol(const ProtocolConfig &cfg) {
    if (cfg.n < 2)
        throw DomainError(fmt::format("the protocol needs at least 2 qubits, got {}", cfg.n));
    if (cfg.n > qsim::kMaxQubits)
        throw CapacityError(fmt::format("statevector simulation is limited to {} qubits, got {}", qsim::kMaxQubits, cfg.n));
    if (cfg.replicas < 1)
        throw DomainError("replica count must be at least 1");
    if (!cfg.measures.purity && !cfg.measures.entropy && !cfg.measures.schmidt)
        throw DomainError("at least one measure must be requested");

    const ent::Bipartition cut = cfg.cut.empty() ? ent::Bipartition::symmetric(cfg.n) : ent::Bipartition::of(cfg.n, cfg.cut);
    Runner runner{cfg, cut, std::nullopt, chain::coupling_pairs(cfg.coupling, cfg.n), record_times(cfg.steps, cfg.record_every),
                  {}, 0};
    if (cfg.gate.kind != gates::GateSpec::Kind::HaarU4)
        runner.gate = cfg.gate.gate().matrix;
    if (cfg.measures.schmidt)
        runner.schmidt_count = 1 << std::min(cut.size_a(), cut.size_b());
    runner.layout = {runner.times.size(), 4 + static_cast<std::size_t>(runner.schmidt_count)};

    const auto r_total = static_cast<std::uint64_t>(cfg.replicas);
    const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
    const unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : hw;
    // Subtrees handed to workers are nodes of the same summation tree, so the
    // result is independent of how many there are.
    int depth = 0;
    while ((1U << depth) < 4 * workers && depth < 20)
        ++depth;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> tasks;
    collect(0, r_total, depth, tasks);

    std::vector<Partial> results(tasks.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= tasks.size())
                return;
            try {
                results[k] = runner.node(tasks[k].first, tasks[k].second);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next = tasks.size();
            }
        }
    };
    const unsigned spawn = std::min<unsigned>(workers, static_cast<unsigned>(tasks.size()));
    if (spawn <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < spawn; ++w)
            pool.emplace_back(work);
        for (auto &th : pool)
            th.join();
    }
    if (error)
        std::rethrow_exception(error);

    std::map<std::uint64_t, Partial> done;
    for (std::size_t k = 0; k < tasks.size(); ++k)
        done.emplace(tasks[k].first, std::move(results[k]));
    const Partial total = combine(0, r_total, depth, done);

    EnsembleTrace trace;
    trace.n = cfg.n;
    trace.replicas = r_total;
    trace.measures = cfg.measures;
    trace.measures.purity = true;
    trace.schmidt_count = runner.schmidt_count;
    trace.times = runner.times;
    const std::size_t rows = runner.layout.rows, width = runner.layout.width;
    trace.purity_sum.resize(rows);
    trace.purity_sumsq.resize(rows);
    trace.entropy_sum.resize(rows);
    trace.entropy_sumsq.resize(rows);
    trace.mu2_sum.resize(rows * static_cast<std::size_t>(runner.schmidt_count));
    for (std::size_t r = 0; r < rows; ++r) {
        const double *row = total.data() + r * width;
        trace.purity_sum[r] = row[0];
        trace.purity_sumsq[r] = row[1];
        trace.entropy_sum[r] = row[2];
        trace.entropy_sumsq[r] = row[3];
        for (int k = 0; k < runner.schmidt_count; ++k)
            trace.mu2_sum[r * static_cast<std::size_t>(runner.schmidt_count) + static_cast<std::size_t>(k)] = row[4 + k];
    }
    return trace;
}

} // namespace randent::protocol
