#include "nqs/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "nqs/ansatz.hpp"
#include "nqs/flops.hpp"
#include "nqs/oracle.hpp"
#include "nqs/pauli.hpp"
#include "nqs/runio.hpp"
#include "nqs/scaling.hpp"
#include "nqs/vmc.hpp"

namespace nqs::cli {

namespace {

std::string sanitize(std::string s) {
    std::replace(s.begin(), s.end(), ',', '_');
    return s;
}

struct RunSpec {
    std::string hamiltonian_path;
    ansatz::AnsatzConfig acfg;
    vmc::TrainConfig tcfg;
    std::string molecule;
    int n_qubits = 0;
    int n_electrons = -1;
    int multiplicity = 1;
};

std::string canonical_key(const RunSpec& s) {
    std::ostringstream os;
    os << sanitize(s.molecule) << '|' << s.n_qubits << '|' << s.n_electrons << '|'
       << s.multiplicity << '|' << ansatz::architecture_name(s.acfg.architecture) << '|'
       << s.acfg.d_model << '|' << s.acfg.n_blocks << '|' << s.acfg.n_heads << '|';
    for (long h : s.acfg.made_hidden_dims) os << h << ';';
    os << '|';
    for (long h : s.acfg.phase_hidden_dims) os << h << ';';
    os << '|' << s.tcfg.steps << '|' << s.tcfg.max_unique << '|' << s.tcfg.draw_start << '|'
       << s.tcfg.draw_end << '|' << s.tcfg.lr_peak << '|' << s.tcfg.lr_floor << '|'
       << s.tcfg.warmup_fraction << '|' << s.tcfg.recompute_stride << '|' << s.tcfg.seed;
    return os.str();
}

ansatz::AnsatzConfig ansatz_config_from(const runio::ConfigFile& cfg, int n_qubits,
                                        uint64_t default_seed) {
    ansatz::AnsatzConfig a;
    a.architecture = ansatz::parse_architecture(cfg.get_string("ansatz", "architecture"));
    a.n_qubits = n_qubits;
    a.d_model = cfg.get_long_or("ansatz", "d_model", 16);
    a.n_blocks = cfg.get_long_or("ansatz", "n_blocks", 1);
    a.n_heads = cfg.get_long_or("ansatz", "n_heads", a.d_model / 8);
    if (cfg.has("ansatz", "made_hidden")) a.made_hidden_dims = cfg.get_long_list("ansatz", "made_hidden");
    if (cfg.has("ansatz", "phase_hidden"))
        a.phase_hidden_dims = cfg.get_long_list("ansatz", "phase_hidden");
    a.seed = static_cast<uint64_t>(cfg.get_long_or("ansatz", "seed", static_cast<long>(default_seed)));
    return a;
}

vmc::TrainConfig train_config_from(const runio::ConfigFile& cfg) {
    vmc::TrainConfig t;
    t.steps = cfg.get_long("train", "steps");
    t.max_unique = cfg.get_long("train", "max_unique");
    t.draw_start = cfg.get_double_or("train", "draw_start", t.draw_start);
    t.draw_end = cfg.get_double_or("train", "draw_end", t.draw_end);
    t.lr_peak = cfg.get_double_or("train", "lr_peak", t.lr_peak);
    t.lr_floor = cfg.get_double_or("train", "lr_floor", t.lr_floor);
    t.warmup_fraction = cfg.get_double_or("train", "warmup", t.warmup_fraction);
    t.recompute_stride = cfg.get_long_or("train", "stride", t.recompute_stride);
    t.seed = static_cast<uint64_t>(cfg.get_long_or("train", "seed", 1));
    return t;
}

runio::ResultRow execute_run(const RunSpec& spec) {
    runio::ResultRow row;
    row.config_hash = runio::hash_hex(runio::fnv1a(canonical_key(spec)));
    row.ansatz = ansatz::architecture_name(spec.acfg.architecture);
    row.molecule = sanitize(spec.molecule);
    row.n_qubits = spec.n_qubits;
    row.n_electrons = spec.n_electrons;
    row.t_steps = spec.tcfg.steps;
    row.max_unique = spec.tcfg.max_unique;
    row.seed = spec.tcfg.seed;
    row.timestamp = runio::iso_timestamp();
    try {
        const pauli::Hamiltonian ham = pauli::load_hamiltonian(spec.hamiltonian_path);
        ansatz::Ansatz a(spec.acfg);
        row.n_raw = a.params().total_scalars();
        row.n_k = static_cast<double>(row.n_raw) / 1000.0;
        const vmc::RunRecord rec = vmc::train(a, ham, spec.tcfg);
        row.b_mean = rec.b_mean;
        row.sf = rec.scale_factor;
        row.d_prime = rec.d_prime;
        row.energy = rec.energy;
        row.variance = rec.variance;
        row.vscore = rec.vscore;
        row.abs_error = rec.abs_error;
        row.flops_table1 = rec.flops_table1;
        row.flops_simplified = rec.flops_simplified;
        row.status = rec.status;
    } catch (const std::exception& e) {
        row.status = "failed";
        std::cerr << "run " << row.config_hash << " failed: " << e.what() << "\n";
    }
    return row;
}

int cmd_run(const std::string& config_path, const std::string& out_override, long seed_override) {
    const runio::ConfigFile cfg = runio::parse_config_file(config_path);
    RunSpec spec;
    spec.hamiltonian_path = cfg.get_string("run", "hamiltonian");
    const pauli::Hamiltonian ham = pauli::load_hamiltonian(spec.hamiltonian_path);
    spec.molecule = ham.name;
    spec.n_qubits = ham.n_qubits;
    spec.n_electrons = ham.n_electrons;
    spec.multiplicity = ham.multiplicity;
    spec.tcfg = train_config_from(cfg);
    if (seed_override >= 0) spec.tcfg.seed = static_cast<uint64_t>(seed_override);
    spec.acfg = ansatz_config_from(cfg, ham.n_qubits, spec.tcfg.seed);

    const std::string out = !out_override.empty() ? out_override : cfg.get_string("run", "out");

    ansatz::Ansatz a(spec.acfg);
    const vmc::RunRecord rec = vmc::train(a, ham, spec.tcfg);

    runio::ResultRow row;
    row.config_hash = runio::hash_hex(runio::fnv1a(canonical_key(spec)));
    row.ansatz = ansatz::architecture_name(spec.acfg.architecture);
    row.molecule = sanitize(ham.name);
    row.n_qubits = ham.n_qubits;
    row.n_electrons = ham.n_electrons;
    row.n_raw = rec.n_raw;
    row.n_k = rec.n_thousand;
    row.t_steps = rec.steps;
    row.max_unique = rec.max_unique;
    row.b_mean = rec.b_mean;
    row.sf = rec.scale_factor;
    row.d_prime = rec.d_prime;
    row.energy = rec.energy;
    row.variance = rec.variance;
    row.vscore = rec.vscore;
    row.abs_error = rec.abs_error;
    row.flops_table1 = rec.flops_table1;
    row.flops_simplified = rec.flops_simplified;
    row.status = rec.status;
    row.seed = rec.seed;
    row.timestamp = runio::iso_timestamp();
    runio::append_results(out, {row});

    if (cfg.has("run", "checkpoint")) a.params().save(cfg.get_string("run", "checkpoint"));

    std::cout << "run " << row.config_hash << " status=" << row.status << " energy=" << row.energy;
    if (row.abs_error) std::cout << " abs_error=" << *row.abs_error;
    if (row.vscore) std::cout << " vscore=" << *row.vscore;
    std::cout << " -> " << out << "\n";
    return row.status == "ok" ? 0 : 2;
}

std::vector<RunSpec> sweep_grid(const runio::ConfigFile& cfg) {
    const auto hams = cfg.get_list("sweep", "hamiltonians");
    const auto archs = cfg.get_list("sweep", "architectures");
    const std::vector<long> d_models =
        cfg.has("sweep", "d_model") ? cfg.get_long_list("sweep", "d_model") : std::vector<long>{16};
    const std::vector<long> made_hidden = cfg.has("sweep", "made_hidden")
                                              ? cfg.get_long_list("sweep", "made_hidden")
                                              : std::vector<long>{64};
    const std::vector<long> blocks =
        cfg.has("sweep", "n_blocks") ? cfg.get_long_list("sweep", "n_blocks") : std::vector<long>{1};
    const long phase_hidden = cfg.get_long_or("sweep", "phase_hidden", 64);
    const auto steps = cfg.get_long_list("sweep", "steps");
    const auto max_unique = cfg.get_long_list("sweep", "max_unique");
    const auto seeds = cfg.get_long_list("sweep", "seeds");

    vmc::TrainConfig base;
    base.draw_start = cfg.get_double_or("sweep", "draw_start", base.draw_start);
    base.draw_end = cfg.get_double_or("sweep", "draw_end", base.draw_end);
    base.lr_peak = cfg.get_double_or("sweep", "lr_peak", base.lr_peak);
    base.lr_floor = cfg.get_double_or("sweep", "lr_floor", base.lr_floor);

    std::vector<RunSpec> grid;
    for (const std::string& hp : hams) {
        const pauli::Hamiltonian ham = pauli::load_hamiltonian(hp);
        for (const std::string& an : archs) {
            const ansatz::Architecture arch = ansatz::parse_architecture(an);
            const bool is_made = arch == ansatz::Architecture::made;
            const std::vector<long> sizes = is_made ? made_hidden : d_models;
            const std::vector<long> blk = is_made ? std::vector<long>{1} : blocks;
            for (long size : sizes)
                for (long nb : blk)
                    for (long t : steps)
                        for (long mu : max_unique)
                            for (long sd : seeds) {
                                RunSpec s;
                                s.hamiltonian_path = hp;
                                s.molecule = ham.name;
                                s.n_qubits = ham.n_qubits;
                                s.n_electrons = ham.n_electrons;
                                s.multiplicity = ham.multiplicity;
                                s.acfg.architecture = arch;
                                s.acfg.n_qubits = ham.n_qubits;
                                if (is_made) {
                                    s.acfg.made_hidden_dims = {size};
                                } else {
                                    s.acfg.d_model = size;
                                    s.acfg.n_heads = size / 8;
                                    s.acfg.n_blocks = nb;
                                }
                                s.acfg.phase_hidden_dims = {phase_hidden};
                                s.acfg.seed = static_cast<uint64_t>(sd);
                                s.tcfg = base;
                                s.tcfg.steps = t;
                                s.tcfg.max_unique = mu;
                                s.tcfg.seed = static_cast<uint64_t>(sd);
                                grid.push_back(std::move(s));
                            }
        }
    }
    return grid;
}

int cmd_sweep(const std::string& config_path, bool resume, int workers,
              const std::string& out_override) {
    const runio::ConfigFile cfg = runio::parse_config_file(config_path);
    const std::string out = !out_override.empty() ? out_override : cfg.get_string("sweep", "out");
    if (workers < 1) throw std::invalid_argument("workers must be at least 1");

    const std::vector<RunSpec> grid = sweep_grid(cfg);

    std::set<std::string> done;
    if (std::ifstream(out)) {
        for (const runio::ResultRow& r : runio::read_results_csv(out)) done.insert(r.config_hash);
    }
    auto staging_path = [&](int w) { return out + ".w" + std::to_string(w) + ".part"; };
    if (resume) {
        // Harvest rows left behind by an interrupted sweep before skipping.
        for (int w = 0; w < workers; ++w) {
            std::ifstream probe(staging_path(w));
            if (!probe) continue;
            std::vector<runio::ResultRow> fresh;
            for (const runio::ResultRow& r : runio::read_results_csv(staging_path(w)))
                if (!done.count(r.config_hash)) {
                    fresh.push_back(r);
                    done.insert(r.config_hash);
                }
            runio::append_results(out, fresh);
            std::remove(staging_path(w).c_str());
        }
    }

    std::vector<const RunSpec*> pending;
    std::vector<std::string> pending_hash;
    for (const RunSpec& s : grid) {
        const std::string h = runio::hash_hex(runio::fnv1a(canonical_key(s)));
        if (resume && done.count(h)) continue;
        pending.push_back(&s);
        pending_hash.push_back(h);
    }
    std::cout << "sweep: " << grid.size() << " grid points, " << pending.size() << " to run\n";

    std::map<std::string, runio::ResultRow> produced;
    for (size_t i = 0; i < pending.size(); ++i) {
        runio::ResultRow row = execute_run(*pending[i]);
        std::cout << "[" << (i + 1) << "/" << pending.size() << "] " << row.config_hash
                  << " status=" << row.status << "\n";
        runio::append_results(staging_path(static_cast<int>(i) % workers), {row});
        produced[row.config_hash] = row;
    }

    // Merge staging output into the main file in grid order, then clean up.
    std::vector<runio::ResultRow> merged;
    for (const std::string& h : pending_hash)
        if (produced.count(h)) merged.push_back(produced.at(h));
    runio::append_results(out, merged);
    for (int w = 0; w < workers; ++w) std::remove(staging_path(w).c_str());
    std::cout << "sweep complete -> " << out << "\n";
    return 0;
}

double metric_of(const runio::ResultRow& r, const std::string& metric, bool& present) {
    if (metric == "vscore") {
        present = r.vscore.has_value();
        return present ? *r.vscore : 0.0;
    }
    present = r.abs_error.has_value();
    return present ? *r.abs_error : 0.0;
}

std::string canonical_metric(const std::string& m) {
    if (m == "vscore") return "vscore";
    if (m == "abserr" || m == "abs_error") return "abs_error";
    throw std::invalid_argument("metric must be vscore or abserr");
}

int cmd_fit(const std::string& results_path, const std::string& metric_flag,
            const std::string& ansatz_filter, const std::string& out_doc, long seed) {
    const std::string metric = canonical_metric(metric_flag);
    const std::vector<runio::ResultRow> rows = runio::read_results_csv(results_path);
    std::vector<scaling::DataPoint> points;
    long skipped = 0;
    for (const runio::ResultRow& r : rows) {
        if (r.status != "ok" || r.ansatz != ansatz_filter) continue;
        bool present = false;
        const double value = metric_of(r, metric, present);
        if (!present) {
            ++skipped;
            continue;
        }
        points.push_back({r.n_k, r.d_prime, value});
    }
    if (skipped > 0) std::cout << "skipped " << skipped << " rows without a defined " << metric << "\n";
    if (points.size() < 10)
        throw std::invalid_argument("insufficient data: need at least 10 usable rows, found " +
                                    std::to_string(points.size()));

    scaling::FitOptions opt;
    if (seed >= 0) opt.seed = static_cast<uint64_t>(seed);
    std::vector<std::string> warnings;
    const scaling::ScalingCurve curve = scaling::fit_curve(points, metric, ansatz_filter, opt, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";

    std::cout << "ansatz    metric     A0           A1           alpha1    A2           alpha2    "
                 "log-R2\n";
    char line[256];
    std::snprintf(line, sizeof(line), "%-9s %-10s %-12.5g %-12.5g %-9.4g %-12.5g %-9.4g %.5g\n",
                  curve.ansatz_name.c_str(), curve.metric.c_str(), curve.a0, curve.a1, curve.alpha1,
                  curve.a2, curve.alpha2, curve.r2_log);
    std::cout << line;
    std::cout << "objective " << curve.objective << " over " << points.size() << " points\n";
    if (!out_doc.empty()) {
        runio::write_curve_document(out_doc, curve);
        std::cout << "curve -> " << out_doc << "\n";
    }
    return 0;
}

int cmd_frontier(const std::string& curve_path, double budget, double k) {
    const scaling::ScalingCurve curve = runio::read_curve_document(curve_path);
    const scaling::FrontierResult f = scaling::efficient_frontier(curve);
    char line[128];
    std::snprintf(line, sizeof(line), "frontier: D' = %.6g * N^%.6g\n", f.a, f.b);
    std::cout << line;
    if (budget > 0.0) {
        if (k <= 0.0) throw std::invalid_argument("--budget requires --k");
        const scaling::Allocation alloc = scaling::optimal_allocation(curve, budget, k);
        std::snprintf(line, sizeof(line), "optimal: N* = %.6g (thousand), D'* = %.6g, k N* D'* = %.6g\n",
                      alloc.n_star, alloc.d_prime_star, k * alloc.n_star * alloc.d_prime_star);
        std::cout << line;
    }
    return 0;
}

int cmd_heatmap(const std::string& results_path, const std::string& metric_flag,
                const std::string& out_path) {
    const std::string metric = canonical_metric(metric_flag);
    const double floor_value = metric == "vscore" ? 1e-8 : 1e-5;
    const std::vector<runio::ResultRow> rows = runio::read_results_csv(results_path);

    std::map<std::pair<long, long>, std::vector<double>> bins;
    const double width = 0.25;
    for (const runio::ResultRow& r : rows) {
        if (r.status != "ok" || r.n_k <= 0.0 || r.d_prime <= 0.0) continue;
        bool present = false;
        double value = metric_of(r, metric, present);
        if (!present) continue;
        value = std::max(value, floor_value);
        const long bn = static_cast<long>(std::floor(std::log10(r.n_k) / width));
        const long bd = static_cast<long>(std::floor(std::log10(r.d_prime) / width));
        bins[{bn, bd}].push_back(std::log10(value));
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write heatmap file: " + out_path);
    out << "log10_N_k,log10_D_prime," << metric << "\n";
    out << std::setprecision(10);
    for (const auto& [key, values] : bins) {
        double mean_log = 0.0;
        for (double v : values) mean_log += v;
        mean_log /= static_cast<double>(values.size());
        const double cn = (static_cast<double>(key.first) + 0.5) * width;
        const double cd = (static_cast<double>(key.second) + 0.5) * width;
        out << cn << ',' << cd << ',' << std::pow(10.0, mean_log) << "\n";
    }
    std::cout << "heatmap: " << bins.size() << " cells -> " << out_path << "\n";
    return 0;
}

int cmd_exact(const std::string& ham_path, long seed, bool no_write) {
    pauli::Hamiltonian ham = pauli::load_hamiltonian(ham_path);
    const int limit = ham.constrained() ? 24 : 14;
    if (ham.n_qubits > limit) {
        std::cerr << "exact diagonalization supports at most " << limit << " qubits ("
                  << (ham.constrained() ? "sector-restricted" : "unconstrained") << "); '"
                  << ham.name << "' has " << ham.n_qubits << "\n";
        return 1;
    }
    const oracle::SparseOperator op = oracle::build_operator(ham, ham.constrained());
    const oracle::GroundState gs =
        oracle::ground_state(op, seed >= 0 ? static_cast<uint64_t>(seed) : 1);
    std::cout << "molecule " << ham.name << ": dim " << op.dim << ", ground energy "
              << std::setprecision(12) << gs.energy << ", residual " << gs.residual << "\n";
    if (ham.fci)
        std::cout << "stored fci " << *ham.fci << ", difference " << std::abs(*ham.fci - gs.energy)
                  << "\n";
    if (!no_write) {
        ham.fci = gs.energy;
        std::ofstream out(ham_path);
        if (!out) throw std::runtime_error("cannot rewrite hamiltonian file: " + ham_path);
        out << pauli::serialize_hamiltonian(ham);
        std::cout << "fci written back to " << ham_path << "\n";
    }
    return 0;
}

int cmd_flops(const std::string& arch_name, double n, double b, double t, double m, double n_mod,
              double n_ph, double blocks, double d_model, double space, double d_prime,
              double n_raw) {
    const ansatz::Architecture arch = ansatz::parse_architecture(arch_name);
    flops::FlopInputs in;
    in.n_qubits = n;
    in.b_mean = b;
    in.t_steps = t;
    in.m_groups = m;
    in.n_mod = n_mod;
    in.n_ph = n_ph;
    in.n_blocks = blocks;
    in.d_model = d_model;
    std::cout << std::setprecision(10) << "training_flops = " << flops::training_flops(arch, in)
              << "\n";
    if (arch != ansatz::Architecture::transformer) {
        const double f_mod = flops::per_token_modulus_flops(arch, n_mod, n, blocks, d_model);
        std::cout << "sampling_flops = " << flops::sampling_flops(f_mod, t, b, n) << "\n"
                  << "loss_flops = " << flops::loss_flops(f_mod, 2.0 * n_ph, b, t, m, n) << "\n";
    } else {
        std::cout << "sampling_flops = "
                  << flops::transformer_sampling_flops(t, b, n, n_mod, blocks, d_model) << "\n";
    }
    if (space > 0.0 && d_prime > 0.0 && n_raw > 0.0)
        std::cout << "simplified_flops = "
                  << flops::simplified_flops(arch, m, n, d_model, space, d_prime, n_raw) << "\n";
    return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"variational training laboratory for autoregressive quantum-state ansatze"};
    app.require_subcommand(1);

    std::string config_path, out_path, results_path, curve_path, ham_path, metric = "vscore";
    std::string ansatz_name;
    long seed = -1;
    int workers = 1;
    bool resume = false, no_write = false;
    double budget = 0.0, kconst = 0.0;
    double fn = 4, fb = 1, ft = 1, fm = 0, fnmod = 0, fnph = 0, fblocks = 1, fdm = 8;
    double fspace = 0, fdprime = 0, fnraw = 0;

    CLI::App* run = app.add_subcommand("run", "train one configuration and append a results row");
    run->add_option("--config", config_path, "run config file")->required();
    run->add_option("--out", out_path, "override the results CSV path");
    run->add_option("--seed", seed, "override the training seed");

    CLI::App* sweep = app.add_subcommand("sweep", "run an ablation grid");
    sweep->add_option("--config", config_path, "sweep config file")->required();
    sweep->add_option("--out", out_path, "override the results CSV path");
    sweep->add_flag("--resume", resume, "skip grid points already in the results file");
    sweep->add_option("--workers", workers, "staging-file slots for grid points");

    CLI::App* fit = app.add_subcommand("fit", "fit a scaling curve to a results CSV");
    fit->add_option("--results", results_path, "results CSV")->required();
    fit->add_option("--metric", metric, "vscore or abserr");
    fit->add_option("--ansatz", ansatz_name, "made, transformer, or retnet")->required();
    fit->add_option("--out", out_path, "write the fitted curve document here");
    fit->add_option("--seed", seed, "fit seed");

    CLI::App* frontier = app.add_subcommand("frontier", "efficient frontier of a fitted curve");
    frontier->add_option("--curve", curve_path, "curve document from fit")->required();
    frontier->add_option("--budget", budget, "compute budget C");
    frontier->add_option("--k", kconst, "compute constant in C = k N D'");

    CLI::App* heatmap = app.add_subcommand("heatmap", "binned metric grid from a results CSV");
    heatmap->add_option("--results", results_path, "results CSV")->required();
    heatmap->add_option("--metric", metric, "vscore or abserr");
    heatmap->add_option("--out", out_path, "output grid CSV")->required();

    CLI::App* exact = app.add_subcommand("exact", "exact ground energy of a hamiltonian file");
    exact->add_option("--ham", ham_path, "hamiltonian file")->required();
    exact->add_option("--seed", seed, "eigensolver seed");
    exact->add_flag("--no-write", no_write, "do not write the energy back as %fci");

    CLI::App* fl = app.add_subcommand("flops", "evaluate the FLOP estimators directly");
    fl->add_option("--ansatz", ansatz_name, "made, transformer, or retnet")->required();
    fl->add_option("--n", fn, "qubit count");
    fl->add_option("--b", fb, "mean unique batch size");
    fl->add_option("--t", ft, "training steps");
    fl->add_option("--m", fm, "off-diagonal flip groups");
    fl->add_option("--n-mod", fnmod, "modulus parameter count");
    fl->add_option("--n-ph", fnph, "phase parameter count");
    fl->add_option("--blocks", fblocks, "decoder blocks");
    fl->add_option("--d-model", fdm, "model width");
    fl->add_option("--space", fspace, "search space size (for the simplified form)");
    fl->add_option("--d-prime", fdprime, "scaled iterations (for the simplified form)");
    fl->add_option("--n-raw", fnraw, "raw parameter count (for the simplified form)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, out_path, seed);
        if (sweep->parsed()) return cmd_sweep(config_path, resume, workers, out_path);
        if (fit->parsed()) return cmd_fit(results_path, metric, ansatz_name, out_path, seed);
        if (frontier->parsed()) return cmd_frontier(curve_path, budget, kconst);
        if (heatmap->parsed()) return cmd_heatmap(results_path, metric, out_path);
        if (exact->parsed()) return cmd_exact(ham_path, seed, no_write);
        if (fl->parsed())
            return cmd_flops(ansatz_name, fn, fb, ft, fm, fnmod, fnph, fblocks, fdm, fspace,
                             fdprime, fnraw);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace nqs::cli
