#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agb/basis.hpp"
#include "agb/errors.hpp"
#include "agb/experiments.hpp"
#include "agb/greedy.hpp"
#include "agb/io.hpp"
#include "agb/norms.hpp"

using namespace agb;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitResource = 3;

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        io::write_text(path, text);
    }
}

io::Json plan_info(const BlockPlan& plan) {
    io::Json blocks = io::Json::array();
    for (std::size_t k = 1; k <= plan.horizon(); ++k) {
        blocks.push_back({{"k", k},
                          {"g", plan.exponent(k)},
                          {"N", plan.block_size(k).str()},
                          {"F", plan.offset(k).str()}});
    }
    io::Json j{{"plan", plan.label()},
               {"blocks", blocks},
               {"democracy_condition", plan.democracy_condition()},
               {"lambda_separation", plan.lambda_separation()}};
    if (auto total = plan.total_size()) j["total_size"] = *total;
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Uniformly bounded almost-greedy basis toolkit"};
    app.require_subcommand(1);

    auto* basis = app.add_subcommand("basis", "Inspect block plans and basis elements");
    basis->require_subcommand(1);
    std::string plan_ref = "desk";
    std::string out_path;
    std::uint64_t cap = kDefaultMaterializationCap;

    auto* info = basis->add_subcommand("info", "Print N_k, F_k and schedule flags");
    info->add_option("--plan", plan_ref, "plan file or preset (desk, paper)");

    auto* element = basis->add_subcommand("element", "Write the Walsh spectrum of one basis element");
    std::size_t block = 1;
    std::uint64_t row = 1;
    element->add_option("--plan", plan_ref, "plan file or preset");
    element->add_option("-k", block, "block")->required();
    element->add_option("-i", row, "row within the block")->required();
    element->add_option("--out", out_path, "output spectrum JSON (default stdout)");
    element->add_option("--cap", cap, "largest block that may be materialized");

    auto* norm = app.add_subcommand("norm", "Estimate ||f||_p of a spectrum");
    double p = 2.0;
    std::string engine = "auto";
    NormOptions norm_options;
    std::string in_path;
    norm->add_option("--p", p, "exponent")->required();
    norm->add_option("--engine", engine, "dense, even, mc or auto");
    norm->add_option("--samples", norm_options.samples, "Monte Carlo samples");
    norm->add_option("--seed", norm_options.seed, "Monte Carlo seed");
    norm->add_option("--threads", norm_options.threads, "Monte Carlo threads (0 = all cores)");
    norm->add_option("--in", in_path, "spectrum JSON")->required();

    auto* greedy = app.add_subcommand("greedy", "Greedy approximation");
    greedy->require_subcommand(1);
    auto* run = greedy->add_subcommand("run", "Trace G_m for a coefficient file");
    std::size_t m_max = 0;
    std::vector<double> ps;
    run->add_option("--plan", plan_ref, "plan file or preset");
    run->add_option("--in", in_path, "coefficient JSON")->required();
    run->add_option("--m-max", m_max, "last m to trace")->required();
    run->add_option("--p", ps, "norm exponents (repeatable)");
    run->add_option("--engine", engine, "dense, even, mc or auto");
    run->add_option("--samples", norm_options.samples, "Monte Carlo samples");
    run->add_option("--seed", norm_options.seed, "Monte Carlo seed");
    run->add_option("--out", out_path, "trace CSV (default stdout)");

    auto* experiment = app.add_subcommand("experiment", "Run an experiment from a config file");
    std::string kind;
    std::string config_path;
    unsigned threads = 0;
    bool threads_given = false;
    experiment->add_option("kind", kind, "democracy, quasigreedy, partialsum, khintchine, almostgreedy, walsh-baseline")
        ->required();
    experiment->add_option("--config", config_path, "config JSON")->required();
    experiment->add_option("--out", out_path, "results CSV (default stdout)");
    auto* threads_opt = experiment->add_option("--threads", threads, "override the config's thread count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*info) {
            std::cout << plan_info(io::load_plan(plan_ref)).dump(2) << '\n';
        } else if (*element) {
            const BlockPlan plan = io::load_plan(plan_ref);
            emit(out_path, io::spectrum_to_json(psi_spectrum(plan, block, row, cap)).dump(2) + "\n");
        } else if (*norm) {
            norm_options.engine = io::parse_engine(engine);
            const WalshSpectrum f = io::spectrum_from_json(io::load_json(in_path));
            std::cout << io::estimate_to_json(lp_norm(f, p, norm_options)).dump(2) << '\n';
        } else if (*run) {
            norm_options.engine = io::parse_engine(engine);
            const BlockPlan plan = io::load_plan(plan_ref);
            const CoefficientList coeffs = io::coefficients_from_json(io::load_json(in_path));
            const auto result = greedy_expansion(coeffs, plan, m_max, ps, norm_options);
            std::ostringstream csv;
            io::write_trace_csv(csv, result.trace, ps);
            emit(out_path, csv.str());
        } else if (*experiment) {
            threads_given = threads_opt->count() > 0;
            ExperimentConfig cfg = io::load_config(config_path);
            if (threads_given) cfg.threads = threads;
            const auto rows = run_experiment(parse_experiment_kind(kind), cfg);
            std::ostringstream csv;
            io::write_results_csv(csv, rows);
            emit(out_path, csv.str());
        }
    } catch (const ResourceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitResource;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return 0;
}
