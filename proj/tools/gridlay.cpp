// Batch layout runner: lays out graph files (or generated random graphs) in
// one or more modes and writes SVG drawings, metric reports and a CSV summary.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gridlay/generate.hpp"
#include "gridlay/metrics.hpp"
#include "gridlay/pipeline.hpp"
#include "gridlay/svg.hpp"

namespace fs = std::filesystem;
using namespace gridlay;

namespace {

struct Job {
    std::size_t graph;
    Mode mode;
};

struct Outcome {
    bool ok = false;
    std::string error;
    std::string csv;
    std::vector<fs::path> files;
};

void write_file(const fs::path& path, const std::string& text, std::vector<fs::path>& written) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    written.push_back(path);
    out << text;
    if (!out.flush()) throw Error("cannot write '" + path.string() + "'");
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
    std::vector<fs::path> files;
    for (const auto& in : inputs) {
        fs::path p(in);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& entry : fs::directory_iterator(p))
                if (entry.is_regular_file() && entry.path().extension() == ".json") found.push_back(entry.path());
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.push_back(p);
        }
    }
    return files;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid-like graph layout: batch runner"};
    std::vector<std::string> inputs;
    std::vector<std::string> mode_names{"FD"};
    PipelineOptions base;
    std::string aca_cost = "ds", aca_bend = "deg2";
    std::string out_dir = ".";
    std::string csv_path;
    std::size_t gen_random = 0;
    std::size_t gen_min = 10, gen_max = 244;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    bool grid_lines = false;

    app.add_option("inputs", inputs, "Graph JSON files or directories of them");
    app.add_option("--mode", mode_names, "Layout modes: FD NS GS NS_GS ACA ACA_GS (comma separated or repeated)")
        ->delimiter(',');
    app.add_option("--tau", base.tau, "Grid size")->check(CLI::PositiveNumber);
    app.add_option("--ideal-edge", base.ideal_edge, "Ideal edge length")->check(CLI::PositiveNumber);
    app.add_option("--seed", base.seed, "Seed for initial positions and generated graphs");
    app.add_option("--aca-cost", aca_cost, "ACA cost basis")->check(CLI::IsMember({"ds", "ob"}));
    app.add_option("--aca-bend", aca_bend, "ACA bend rule")->check(CLI::IsMember({"deg2", "nonleaf2"}));
    app.add_option("--k-ns", base.k_ns, "Node-snap weight");
    app.add_option("--k-gs", base.k_gs, "Grid-snap weight");
    app.add_option("--k-en", base.k_en, "Edge/node separation weight");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--csv", csv_path, "Aggregate CSV path (default <out>/summary.csv)");
    app.add_option("--gen-random", gen_random, "Also lay out N seeded random graphs");
    app.add_option("--gen-min", gen_min, "Smallest generated graph")->check(CLI::PositiveNumber);
    app.add_option("--gen-max", gen_max, "Largest generated graph")->check(CLI::PositiveNumber);
    app.add_option("-j,--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--grid-lines", grid_lines, "Draw grid lines in every SVG");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage errors share one exit status
    }

    std::vector<Mode> modes;
    for (const auto& name : mode_names) {
        auto m = parse_mode(name);
        if (!m) {
            std::cerr << "unknown mode '" << name << "'\n" << app.help();
            return 2;
        }
        modes.push_back(*m);
    }
    if (gen_min > gen_max) {
        std::cerr << "--gen-min exceeds --gen-max\n";
        return 2;
    }
    if (inputs.empty() && gen_random == 0) {
        std::cerr << "nothing to do: give graph files or --gen-random N\n" << app.help();
        return 2;
    }
    base.aca.basis = aca_cost == "ob" ? CostBasis::Obliqueness : CostBasis::StressChange;
    base.aca.bend = aca_bend == "nonleaf2" ? BendRule::NonLeafDegree2 : BendRule::Degree2;

    std::vector<NamedGraph> graphs;
    int status = 0;
    for (const auto& path : expand_inputs(inputs)) {
        try {
            graphs.push_back({path.stem().string(), load_graph_file(path.string())});
        } catch (const std::exception& e) {
            std::cerr << path.string() << ": " << e.what() << '\n';
            status = 1;
        }
    }
    if (gen_random > 0) {
        auto generated = random_corpus(gen_random, base.seed, gen_min, gen_max);
        std::move(generated.begin(), generated.end(), std::back_inserter(graphs));
    }

    const fs::path out(out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) {
        std::cerr << "cannot create '" << out.string() << "': " << ec.message() << '\n';
        return 1;
    }

    std::vector<Job> work;
    for (std::size_t g = 0; g < graphs.size(); ++g)
        for (Mode m : modes) work.push_back({g, m});
    std::vector<Outcome> outcomes(work.size());
    std::atomic<std::size_t> next{0};
    std::mutex log;

    auto worker = [&] {
        for (std::size_t i; (i = next++) < work.size();) {
            const NamedGraph& ng = graphs[work[i].graph];
            PipelineOptions opts = base;
            opts.mode = work[i].mode;
            Outcome& o = outcomes[i];
            const std::string stem = ng.name + "." + to_string(opts.mode);
            try {
                PipelineResult r = run_pipeline(ng.graph, opts);
                std::optional<GridSpec> grid;
                if (uses_grid(opts.mode)) grid = GridSpec(opts.tau);
                MetricsReport m = measure(ng.graph, r.layout, opts.effective_ideal_edge(), grid);
                m.wall_times = r.timings;
                SvgOptions so;
                if (grid_lines || grid) so.grid = GridSpec(opts.tau);
                write_file(out / (stem + ".svg"), emit_svg(ng.graph, r.layout, r.constraints, so), o.files);
                write_file(out / (stem + ".metrics.json"), to_json(m) + "\n", o.files);
                write_file(out / (stem + ".layout.json"), serialize_positions(ng.graph, r.layout) + "\n", o.files);
                o.csv = csv_row(ng.name, to_string(opts.mode), m);
                o.ok = true;
            } catch (const std::exception& e) {
                o.error = e.what();
                for (const auto& f : o.files) fs::remove(f, ec);
                o.files.clear();
                std::lock_guard lock(log);
                std::cerr << stem << ": " << e.what() << '\n';
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned threads = std::min<std::size_t>(jobs, std::max<std::size_t>(1, work.size()));
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    const fs::path csv_file = csv_path.empty() ? out / "summary.csv" : fs::path(csv_path);
    const bool all_ok = std::all_of(outcomes.begin(), outcomes.end(), [](const Outcome& o) { return o.ok; });
    if (!all_ok) status = 1;
    if (status != 0) {
        // The summary only exists for runs where every graph completed.
        fs::remove(csv_file, ec);
        return status;
    }
    std::ofstream csv(csv_file);
    csv << csv_header() << '\n';
    for (const auto& o : outcomes) csv << o.csv << '\n';
    if (!csv.flush()) {
        std::cerr << "cannot write '" << csv_file.string() << "'\n";
        fs::remove(csv_file, ec);
        return 1;
    }
    std::cout << work.size() << " layouts written to " << out.string() << '\n';
    return 0;
}
