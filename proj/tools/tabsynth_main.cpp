// tabsynth CLI: train / synthesize / evaluate / plot.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tabsynth/checkpoint.hpp"
#include "tabsynth/csv.hpp"
#include "tabsynth/metrics.hpp"
#include "tabsynth/svgplot.hpp"
#include "tabsynth/trainer.hpp"

using namespace tabsynth;

int main(int argc, char** argv) {
    CLI::App app{"Privacy-aware tabular data synthesis with an evolving population of conditional "
                 "generators"};
    app.require_subcommand(1);

    // --- train ------------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "Train a generator population on a CSV table");
    std::string train_data, train_config, train_out, train_schema;
    train_cmd->add_option("--data", train_data, "input CSV (header row required)")->required();
    train_cmd->add_option("--config", train_config, "training config JSON")->required();
    train_cmd->add_option("--out", train_out, "output run directory")->required();
    train_cmd->add_option("--schema", train_schema, "optional schema JSON (else inferred)");

    // --- synthesize ---------------------------------------------------------
    auto* synth_cmd = app.add_subcommand("synthesize", "Generate rows from a trained checkpoint");
    std::string synth_ckpt, synth_out, synth_policy = "improvement";
    std::size_t synth_rows = 0;
    std::uint64_t synth_seed = 1;
    synth_cmd->add_option("--checkpoint", synth_ckpt, "checkpoint file")->required();
    synth_cmd->add_option("--rows", synth_rows, "number of rows to generate")->required();
    synth_cmd->add_option("--selection", synth_policy,
                          "generator selection policy: improvement | max_utility | <index k>");
    synth_cmd->add_option("--seed", synth_seed, "generation seed");
    synth_cmd->add_option("--out", synth_out, "output CSV path")->required();

    // --- evaluate -----------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a synthetic/original table pair");
    std::string eval_orig, eval_synth, eval_spec, eval_out, eval_schema;
    eval_cmd->add_option("--original", eval_orig, "original CSV")->required();
    eval_cmd->add_option("--synthetic", eval_synth, "synthetic CSV")->required();
    eval_cmd->add_option("--spec", eval_spec, "metric spec JSON (or a training config)")->required();
    eval_cmd->add_option("--out", eval_out, "output report JSON")->required();
    eval_cmd->add_option("--schema", eval_schema, "optional schema JSON applied to both tables");

    // --- plot ----------------------------------------------------------------
    auto* plot_cmd = app.add_subcommand("plot", "Emit SVG plots for a finished run directory");
    std::string plot_run;
    plot_cmd->add_option("--run", plot_run, "run directory containing curves.csv/population.json")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) {
            std::optional<TableSchema> schema;
            if (!train_schema.empty()) schema = load_schema_json(train_schema);
            const Table table = load_csv(train_data, schema);
            const TrainConfig cfg = TrainConfig::from_json_file(train_config);
            const RunState state = train(table, cfg, train_out);
            std::cout << "trained " << cfg.epochs << " epochs; population " << state.population.size();
            if (state.incumbent)
                std::cout << "; incumbent epoch " << state.incumbent->epoch << " (f_u="
                          << state.incumbent->f_u << ", f_r=" << state.incumbent->f_r << ")";
            std::cout << "\nrun artifacts in " << train_out << "\n";
        } else if (*synth_cmd) {
            const LoadedCheckpoint ckpt = load_checkpoint(synth_ckpt);
            SynthesisRequest req;
            req.rows = synth_rows;
            req.seed = synth_seed;
            if (synth_policy == "improvement") {
                req.policy = SelectionPolicy::improvement;
            } else if (synth_policy == "max_utility") {
                req.policy = SelectionPolicy::max_utility;
            } else {
                req.policy = SelectionPolicy::index;
                try {
                    req.index = std::stoul(synth_policy);
                } catch (const std::exception&) {
                    std::cerr << "unknown selection policy '" << synth_policy << "'\n";
                    return 1;
                }
            }
            write_csv(ckpt.synthesize(req), synth_out);
            std::cout << "wrote " << synth_rows << " rows to " << synth_out << "\n";
        } else if (*eval_cmd) {
            std::optional<TableSchema> schema;
            if (!eval_schema.empty()) schema = load_schema_json(eval_schema);
            const Table original = load_csv(eval_orig, schema);
            const Table synthetic = load_csv(eval_synth, original.schema);
            // Accept either a bare MetricSpec JSON or a full training config.
            std::ifstream spec_in(eval_spec);
            if (!spec_in) throw ParseError("cannot open '" + eval_spec + "'");
            std::stringstream ss;
            ss << spec_in.rdbuf();
            TrainConfig cfg_like = TrainConfig::from_json("{\"metrics\":" + ss.str() + "}");
            if (cfg_like.metrics.roc_columns.empty())
                cfg_like = TrainConfig::from_json(ss.str());
            const EvaluationReport report = evaluate_tables(original, synthetic, cfg_like.metrics);
            std::ofstream out(eval_out);
            if (!out) throw ParseError("cannot open '" + eval_out + "' for writing");
            out << report.to_json();
            std::cout << "utility=" << report.utility << " (cio=" << report.cio
                      << ", roc=" << report.roc << "), risk=" << report.risk << "\nreport written to "
                      << eval_out << "\n";
        } else if (*plot_cmd) {
            emit_run_plots(plot_run);
            std::cout << "wrote curves.svg and population.svg in " << plot_run << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
