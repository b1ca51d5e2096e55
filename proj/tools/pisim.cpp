#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "pisim/evolve.hpp"
#include "pisim/fuzz.hpp"
#include "pisim/oracle.hpp"
#include "pisim/pparticle.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitResource = 3;
constexpr int kExitSchema = 4;

using namespace pisim;
namespace fs = std::filesystem;

json index_manifest(const CommutantIndex& index) {
    json out;
    out["N"] = index.N();
    out["d"] = index.d();
    out["dimension"] = static_cast<std::uint64_t>(index.dim());
    json parts = json::array();
    for (std::size_t nu = 0; nu < index.num_partitions(); ++nu) {
        json p;
        p["nu"] = index.partition(nu).parts();
        p["label"] = index.partition(nu).label();
        p["f"] = pisim::to_string(index.f(nu));
        p["fd"] = index.fd(nu);
        p["offset"] = static_cast<std::uint64_t>(index.block_offset(nu));
        json swts = json::array();
        for (const GTPattern& w : index.swts(nu)) swts.push_back(w.flat());
        p["swt_rows_flat"] = std::move(swts);
        parts.push_back(std::move(p));
    }
    out["partitions"] = std::move(parts);
    return out;
}

json components_json(const PIOperator& op) {
    const auto& index = *op.index();
    json entries = json::array();
    for (std::size_t nu = 0; nu < index.num_partitions(); ++nu)
        for (int w = 0; w < index.fd(nu); ++w)
            for (int wp = 0; wp < index.fd(nu); ++wp) {
                const cdouble v = op(static_cast<int>(nu), w, wp);
                if (v == cdouble{0.0, 0.0}) continue;
                entries.push_back(json{{"nu", index.partition(nu).parts()},
                                       {"w", w},
                                       {"wp", wp},
                                       {"value", {v.real(), v.imag()}}});
            }
    return entries;
}

int cmd_run(const std::string& model_path, const std::string& out_dir,
            const std::string& dump_liouvillian, std::size_t max_dim) {
    const ModelSpec spec = load_and_validate(model_path);
    const IndexPtr index = CommutantIndex::build(spec.N, spec.d, max_dim);
    const LiouvillianMatrix L = assemble_model(spec, index);
    const PIOperator rho0 = build_initial_state(spec, index);
    const Trajectory traj = integrate(L, rho0, spec.grid);

    std::vector<std::pair<std::string, PIOperator>> obs;
    for (const Observable& o : spec.observables)
        obs.emplace_back(o.name, collective_components(o.local, index));
    const ObservableTable table = record_observables(traj, obs);

    fs::create_directories(out_dir);
    {
        std::ofstream csv(fs::path(out_dir) / "trajectory.csv");
        write_csv(csv, table, *index);
    }
    {
        json manifest;
        manifest["model"] = model_path;
        manifest["index"] = index_manifest(*index);
        json cols = json::array();
        cols.push_back(json{{"name", "t"}, {"kind", "time"}});
        for (const std::string& n : table.names) {
            cols.push_back(json{{"name", "Re(" + n + ")"}, {"kind", "observable_re"}});
            cols.push_back(json{{"name", "Im(" + n + ")"}, {"kind", "observable_im"}});
        }
        cols.push_back(json{{"name", "purity"}, {"kind", "purity"}});
        for (std::size_t nu = 0; nu < index->num_partitions(); ++nu)
            cols.push_back(json{{"name", "w[" + index->partition(nu).label() + "]"},
                                {"kind", "block_weight"},
                                {"nu", index->partition(nu).parts()}});
        manifest["columns"] = std::move(cols);
        std::ofstream mf(fs::path(out_dir) / "manifest.json");
        mf << manifest.dump(2) << "\n";
    }
    {
        json fstate;
        fstate["index"] = index_manifest(*index);
        fstate["t"] = traj.snapshot_times.back();
        fstate["components"] = components_json(PIOperator(index, traj.snapshots.back()));
        std::ofstream sf(fs::path(out_dir) / "final_state.json");
        sf << fstate.dump(2) << "\n";
    }
    if (!dump_liouvillian.empty()) {
        std::ofstream lf(dump_liouvillian);
        lf << std::setprecision(17) << "row,col,re,im\n";
        for (const auto& [r, c, v] : L.coo(spec.grid.t0))
            lf << r << "," << c << "," << v.real() << "," << v.imag() << "\n";
    }
    std::cout << "run: " << traj.times.size() << " recorded times, final trace "
              << traj.trace.back() << ", output in " << out_dir << "\n";
    return kExitOk;
}

int cmd_validate(const std::string& model_path, double tol, int fuzz, std::uint64_t seed,
                 std::size_t full_cap, int jobs) {
    const ModelSpec base = load_and_validate(model_path);
    std::vector<ModelSpec> models;
    if (fuzz > 0) {
        std::mt19937_64 rng(seed);
        for (int k = 0; k < fuzz; ++k) models.push_back(make_fuzz_model(base.N, base.d, rng, k));
    } else {
        models.push_back(base);
    }

    // comparisons are independent; run them in a worker pool
    std::vector<oracle::CompareReport> reports(models.size());
    std::vector<std::string> failures(models.size());
    std::atomic<std::size_t> next{0};
    const int nthreads =
        std::max(1, std::min<int>(jobs > 0 ? jobs : std::thread::hardware_concurrency(),
                                  static_cast<int>(models.size())));
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&]() {
            for (std::size_t k = next.fetch_add(1); k < models.size(); k = next.fetch_add(1)) {
                try {
                    reports[k] = oracle::full_evolve_compare(models[k], full_cap);
                } catch (const std::exception& e) {
                    failures[k] = e.what();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();

    double worst = 0.0;
    bool errored = false;
    for (std::size_t k = 0; k < models.size(); ++k) {
        if (!failures[k].empty()) {
            std::cout << "model " << k << ": error: " << failures[k] << "\n";
            errored = true;
            continue;
        }
        const oracle::CompareReport& report = reports[k];
        std::cout << "model " << k << ": trace dev " << report.trace_dev << ", purity dev "
                  << report.purity_dev;
        for (std::size_t o = 0; o < report.names.size(); ++o)
            std::cout << ", |" << report.names[o] << "| dev " << report.max_dev[o];
        std::cout << (report.worst() <= tol ? "  [ok]" : "  [FAIL]") << "\n";
        worst = std::max(worst, report.worst());
    }
    std::cout << "worst deviation " << worst << " (tolerance " << tol << ")\n";
    return (!errored && worst <= tol) ? kExitOk : kExitValidation;
}

int cmd_bench(int d, int n_max, std::size_t max_dim) {
    using clock = std::chrono::steady_clock;
    std::cout << "N,d,commutant_dim,full_liouville_dim,assemble_ms,step_ms\n";
    for (int N = 2; N <= n_max; ++N) {
        const uint128 dim = commutant_dim(N, d);
        if (dim > static_cast<uint128>(max_dim)) {
            std::cout << N << "," << d << "," << pisim::to_string(dim) << ",skipped (cap)\n";
            continue;
        }
        ModelSpec spec;
        spec.N = N;
        spec.d = d;
        Channel decay;
        decay.scope = Channel::Scope::Collective;
        decay.jump = Eigen::MatrixXcd::Zero(d, d);
        for (int k = 1; k < d; ++k) decay.jump(k - 1, k) = 1.0; // lowering operator
        decay.rate = Schedule::constant(1.0);
        spec.channels.push_back(std::move(decay));

        const auto t0 = clock::now();
        const IndexPtr index = CommutantIndex::build(N, d, max_dim);
        const LiouvillianMatrix L = assemble_model(spec, index);
        const auto t1 = clock::now();

        PIOperator rho = maximally_mixed_state(index);
        Eigen::VectorXcd out;
        L.apply_into(rho.components(), 0.0, out);
        const auto t2 = clock::now();

        const double full_dim = std::pow(static_cast<double>(d), 2 * N);
        std::cout << N << "," << d << "," << pisim::to_string(dim) << "," << std::setprecision(6)
                  << full_dim << ","
                  << std::chrono::duration<double, std::milli>(t1 - t0).count() << ","
                  << std::chrono::duration<double, std::milli>(t2 - t1).count() << "\n";
    }
    return kExitOk;
}

int cmd_tables(int N, int d, bool with_cgc, const std::string& out_path) {
    json out;
    out["N"] = N;
    out["d"] = d;
    json parts = json::array();
    for (const Partition& nu : partitions_of(N, d)) {
        json p;
        p["nu"] = nu.parts();
        p["label"] = nu.label();
        p["f"] = pisim::to_string(syt_count(nu));
        p["fd"] = pisim::to_string(weyl_dim(nu, d));
        json swts = json::array();
        for (const GTPattern& w : swt_enumerate(nu, d)) {
            json e;
            e["rows_flat"] = w.flat();
            e["content"] = w.content();
            swts.push_back(std::move(e));
        }
        p["swt"] = std::move(swts);
        if (with_cgc) {
            json cg = json::array();
            const CgcTable table(nu, d);
            for (const auto& entry : table.entries()) {
                json e;
                e["mu"] = table.minus_shapes()[entry.mu_index].parts();
                e["w_mu_rows_flat"] = table.mu_swts(entry.mu_index)[entry.w_mu].flat();
                e["j"] = entry.j;
                e["w_lambda_rows_flat"] = table.lambda_swts()[entry.w_lambda].flat();
                std::ostringstream val;
                val << std::setprecision(17) << entry.value;
                e["value"] = val.str();
                cg.push_back(std::move(e));
            }
            p["cgc"] = std::move(cg);
        }
        parts.push_back(std::move(p));
    }
    out["partitions"] = std::move(parts);
    out["commutant_dim"] = pisim::to_string(commutant_dim(N, d));

    if (out_path.empty()) {
        std::cout << out.dump(2) << "\n";
    } else {
        std::ofstream f(out_path);
        f << out.dump(2) << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact simulator for permutationally invariant open N-qudit dynamics in the "
                 "commutant basis"};
    app.require_subcommand(1);

    std::string model_path, out_dir = "out", dump_liouvillian, tables_out;
    double tol = 1e-8;
    int fuzz = 0;
    std::uint64_t seed = 12345;
    std::size_t max_dim = 8'000'000, full_cap = 4096;
    int bench_d = 2, n_max = 20, tab_N = 4, tab_d = 2, jobs = 0;
    bool with_cgc = false;

    CLI::App* run = app.add_subcommand("run", "integrate a model and write trajectory CSV");
    run->add_option("-m,--model", model_path, "model JSON file")->required();
    run->add_option("-o,--out", out_dir, "output directory");
    run->add_option("--dump-liouvillian", dump_liouvillian,
                    "write the assembled matrix at t0 as coordinate-list CSV");
    run->add_option("--max-dim", max_dim, "commutant dimension cap");

    CLI::App* val = app.add_subcommand("validate", "compare against the full-space oracle");
    val->add_option("-m,--model", model_path, "model JSON file")->required();
    val->add_option("--tol", tol, "acceptance threshold");
    val->add_option("--fuzz", fuzz, "validate k random models at the file's (N,d) instead");
    val->add_option("--seed", seed, "fuzz RNG seed");
    val->add_option("--full-cap", full_cap, "full-space dimension cap");
    val->add_option("-j,--jobs", jobs, "worker threads for --fuzz (default: hardware)");

    CLI::App* bench = app.add_subcommand("bench", "dimension/assembly/step timing table");
    bench->add_option("--d", bench_d, "local dimension");
    bench->add_option("--n-max", n_max, "largest N");
    bench->add_option("--max-dim", max_dim, "commutant dimension cap");

    CLI::App* tables = app.add_subcommand("tables", "dump partitions, dimensions, GT patterns");
    tables->add_option("--N", tab_N, "number of qudits")->required();
    tables->add_option("--d", tab_d, "local dimension")->required();
    tables->add_flag("--cgc", with_cgc, "include Clebsch-Gordan tables");
    tables->add_option("-o,--out", tables_out, "output file (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(model_path, out_dir, dump_liouvillian, max_dim);
        if (val->parsed()) return cmd_validate(model_path, tol, fuzz, seed, full_cap, jobs);
        if (bench->parsed()) return cmd_bench(bench_d, n_max, max_dim);
        if (tables->parsed()) return cmd_tables(tab_N, tab_d, with_cgc, tables_out);
    } catch (const model_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const std::string& v : e.violations()) std::cerr << "  - " << v << "\n";
        return kExitSchema;
    } catch (const resource_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitResource;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
