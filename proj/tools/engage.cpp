#include "engage/error.hpp"
#include "engage/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace engage;

namespace {

struct Options {
    std::string config;
    std::string output;
    std::string input;
    std::optional<std::uint64_t> seed;
    std::optional<double> tau;
    std::optional<std::int64_t> min_any;
    std::optional<std::string> quantile_scale;
    std::optional<int> k;
    std::optional<std::size_t> n;
    std::vector<std::string> plants;
    std::optional<double> comment_noise;
};

void add_common(CLI::App* cmd, Options& o, bool config_required)
{
    auto* c = cmd->add_option("--config", o.config, "JSON config file");
    if (config_required) c->required();
    cmd->add_option("--output", o.output, "output directory")->capture_default_str();
    cmd->add_option("--input", o.input, "line-delimited corpus (overrides the config)");
    cmd->add_option("--seed", o.seed, "seed for cross-validation and synthesis");
    cmd->add_option("--tau", o.tau, "baseline quantile");
    cmd->add_option("--min-any", o.min_any, "keep records whose largest count reaches this");
    cmd->add_option("--quantile-scale", o.quantile_scale, "raw or log1p");
}

RunConfig build_config(const Options& o)
{
    RunConfig cfg = o.config.empty() ? default_run_config() : load_run_config(o.config);
    if (!o.input.empty()) cfg.input = o.input;
    if (o.seed) {
        cfg.pipeline.cv_seed = *o.seed;
        cfg.synth.rng_seed = *o.seed;
    }
    if (o.tau) cfg.pipeline.tau = *o.tau;
    if (o.min_any) cfg.pipeline.filter.min_any_engagement = *o.min_any;
    if (o.quantile_scale) cfg.pipeline.quantile_scale = parse_quantile_scale(*o.quantile_scale);
    if (o.k) cfg.pipeline.cv_k = *o.k;
    if (o.n) cfg.synth.n = *o.n;
    for (const auto& p : o.plants) cfg.synth.planted_effects.push_back(parse_planted_effect(p));
    if (o.comment_noise) cfg.comment_noise_scale = *o.comment_noise;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Engagement unexpectedness analytics"};
    app.require_subcommand(1);
    Options o;
    o.output = "out";

    std::vector<std::pair<std::string, CLI::App*>> stage_cmds;
    const std::array<std::pair<std::string_view, const char*>, 6> stages = {{
        {"ingest", "parse and filter the corpus"},
        {"featurize", "compute text, topic and author features"},
        {"score", "fit quantile baselines and compute quotients"},
        {"analyze", "distribution tests and determinant regressions"},
        {"cv", "k-fold coefficient stability"},
        {"report", "write report.txt from the stage outputs"},
    }};
    for (const auto& [name, help] : stages) {
        auto* cmd = app.add_subcommand(std::string(name), help);
        add_common(cmd, o, false);
        if (name == "cv") cmd->add_option("--k", o.k, "number of folds");
        stage_cmds.emplace_back(std::string(name), cmd);
    }

    auto* run = app.add_subcommand("run", "every stage in order");
    add_common(run, o, true);

    auto* synth = app.add_subcommand("synth", "write a synthetic corpus");
    std::string synth_out = "synthetic.jsonl";
    synth->add_option("--config", o.config, "JSON config file");
    synth->add_option("--output", synth_out, "corpus file to write")->capture_default_str();
    synth->add_option("--seed", o.seed, "generator seed");
    synth->add_option("--n", o.n, "record count");
    synth->add_option("--plant", o.plants, "planted effect feature:target:effect (repeatable)");
    synth->add_option("--comment-noise", o.comment_noise, "scale on the comment-specific noise");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        auto cfg = build_config(o);
        if (synth->parsed()) {
            auto n = write_synthetic_corpus(cfg, synth_out);
            std::cout << "wrote " << n << " records to " << synth_out << '\n';
            return 0;
        }
        RunManifest m;
        if (run->parsed()) {
            m = run_pipeline(cfg, o.output);
        } else {
            for (const auto& [name, cmd] : stage_cmds) {
                if (cmd->parsed()) m = run_stage(name, cfg, o.output);
            }
        }
        std::cout << o.output << ": " << m.outputs.size() << " output files, manifest " << kManifestName << '\n';
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
