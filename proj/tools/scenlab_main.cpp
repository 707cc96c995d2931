#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "scenlab/config.hpp"
#include "scenlab/runner.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string format;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 0;
};

int run_kind(const std::string& kind, const CommonOpts& opts) {
    std::ifstream in(opts.config_path, std::ios::binary);
    if (!in) {
        std::cerr << "config error: cannot read " << opts.config_path << "\n";
        return 2;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    scenlab::ConfigParse parsed = scenlab::parse_config(buf.str());
    scenlab::ExperimentConfig& cfg = parsed.config;
    std::vector<std::string> errors = parsed.errors;

    if (!cfg.kind.empty() && cfg.kind != kind)
        errors.push_back("config kind '" + cfg.kind + "' does not match subcommand '" + kind +
                         "'");
    cfg.kind = kind;
    if (opts.seed_given) {
        cfg.seed = opts.seed;
        cfg.seed_set = true;
    }
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (!opts.format.empty()) cfg.format = opts.format;
    if (opts.threads > 0) cfg.threads = opts.threads;

    for (const std::string& e : scenlab::validate_for_kind(cfg, kind)) errors.push_back(e);
    if (errors.empty()) {
        // building the systems is part of config validation: contraction and
        // stochasticity violations are config mistakes, not runtime failures
        try {
            scenlab::build_system(cfg.system, cfg.weights);
            if (cfg.system2.present) scenlab::build_system(cfg.system2, cfg.weights2);
            if (!cfg.h_map.kind.empty()) scenlab::build_h(cfg.h_map);
        } catch (const scenlab::Error& e) {
            errors.push_back(e.what());
        }
    }
    if (!errors.empty()) {
        for (const std::string& e : errors) std::cerr << "config error: " << e << "\n";
        return 2;
    }

    const scenlab::ExperimentReport rep = scenlab::run_experiment(cfg);
    scenlab::write_report(rep, cfg.out_dir);
    for (const std::string& n : rep.notes) std::cerr << n << "\n";
    if (!rep.ok()) std::cerr << "refused: " << rep.error << "\n";

    if (cfg.format == "structured") {
        std::cout << rep.document.dump(2) << "\n";
    } else {
        std::cout << "config_hash " << rep.document["config_hash"].get<std::string>() << "\n";
        std::cout << "wrote " << cfg.out_dir << "/report.json\n";
        for (const scenlab::RowFile& f : rep.files)
            std::cout << "wrote " << cfg.out_dir << "/" << f.name << " (" << f.rows.size()
                      << " rows)\n";
    }
    return rep.ok() ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for scaling limits of stationary fractal measures"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> kinds = {
        {"discretize", "grid measure of a system (cached)"},
        {"scenery", "magnification frames along a dyadic track"},
        {"uniform-scaling", "pairwise scenery distance over growing windows"},
        {"prop31", "entropy certificate for a tangent-measure mixture"},
        {"dissonance", "dimension of a convolution against the sum prediction"},
        {"normality", "orbit discrepancy of sampled points under a base"},
        {"projection", "projected dimensions and strip factorization"},
        {"gap", "spectral independence gap of a system"},
    };

    std::vector<CommonOpts> opt_store(kinds.size());
    int rc = 0;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        CLI::App* sub = app.add_subcommand(kinds[i].first, kinds[i].second);
        CommonOpts& o = opt_store[i];
        sub->add_option("--config", o.config_path, "experiment config file")->required();
        sub->add_option("--out", o.out_dir, "output directory (overrides config)");
        sub->add_option("--seed", o.seed, "seed (overrides config)")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--format", o.format, "stdout format: rows | structured")
            ->check(CLI::IsMember({"rows", "structured"}));
        sub->add_option("--threads", o.threads, "worker threads (reserved; runs are canonical single-thread)")
            ->check(CLI::PositiveNumber);
        const std::string kind = kinds[i].first;
        sub->callback([&rc, &o, kind] { rc = run_kind(kind, o); });
        sub->get_option("--seed")->each([&o](const std::string&) { o.seed_given = true; });
    }

    CLI11_PARSE(app, argc, argv);
    return rc;
}
