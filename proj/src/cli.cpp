#include "tvrise/cli.hpp"

#include "tvrise/error.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace tvrise::cli {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

std::string sci(double v) {
    std::ostringstream os;
    os << std::setprecision(4) << std::scientific << v;
    return os.str();
}

void print_checks(std::ostream& out, const std::vector<CheckOutcome>& checks) {
    std::size_t width = 0;
    for (const CheckOutcome& c : checks) {
        width = std::max(width, c.name.size());
    }
    for (const CheckOutcome& c : checks) {
        out << "  " << (c.pass ? "PASS" : "FAIL") << "  " << std::left << std::setw(static_cast<int>(width)) << c.name
            << "  " << c.detail << '\n';
    }
}

std::vector<std::string> failed_certificates(const VerificationReport& report) {
    std::vector<std::string> failed;
    if (!report.gain.met) failed.emplace_back("gain condition");
    if (!report.lyapunov.lambda3_positive) failed.emplace_back("lambda3 > 0 (K > 1/2)");
    if (!report.lyapunov.P_nonnegative) failed.emplace_back("P >= 0");
    if (!report.projection.ball_ok) failed.emplace_back("projection ball");
    if (!report.projection.tangency_ok) failed.emplace_back("projection tangency");
    if (!report.update_rate.pass) failed.emplace_back("update-rate bound");
    return failed;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        out += (i == 0 ? "" : ", ") + items[i];
    }
    return out;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw InputError("cannot create output directory " + dir);
    }
}

struct ControllerRun {
    Scenario scenario;
    TrajectoryRecord record;
    std::optional<VerificationReport> report;
};

ControllerRun run_controller(Scenario scenario) {
    ControllerRun out{std::move(scenario), {}, std::nullopt};
    out.record = run(out.scenario);
    if (out.scenario.controller == ControllerKind::Rise) {
        out.report = verify_run(out.record, out.scenario);
    }
    return out;
}

/// Maps exceptions escaping a command to exit statuses.
template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const DivergenceError& ex) {
        err << "error: " << ex.what() << "; last finite state at t = " << ex.last_good_state().t << '\n';
        return kDiverged;
    } catch (const ConfigError& ex) {
        err << "config error: " << ex.what() << '\n';
        return kConfigFailure;
    } catch (const IdentifierError& ex) {
        err << "error: " << ex.what() << '\n';
        return kConfigFailure;
    } catch (const InputError& ex) {
        err << "error: " << ex.what() << '\n';
        return kConfigFailure;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kConfigFailure;
    }
}

std::string python_string(const std::string& s) { return ordered_json(s).dump(); }

std::string python_list(const std::vector<double>& v) {
    std::ostringstream os;
    os << std::setprecision(17) << '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        os << (i == 0 ? "" : ", ") << v[i];
    }
    os << ']';
    return os.str();
}

} // namespace

Scenario load_scenario(const RunConfig& config) {
    ordered_json doc = config.config_path.empty() ? builtin_config(config.scenario) : read_config_file(config.config_path);
    if (config.dt) {
        doc["horizon"]["dt"] = *config.dt;
    }
    if (config.t_end) {
        doc["horizon"]["t_end"] = *config.t_end;
    }
    for (const std::string& o : config.overrides) {
        apply_override(doc, o);
    }
    return scenario_from_json(doc);
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() {
        if (config.controllers.empty()) {
            throw ConfigError("--controllers: at least one controller is required");
        }
        const Scenario base = load_scenario(config);
        std::vector<ControllerKind> kinds;
        for (const std::string& name : config.controllers) {
            kinds.push_back(parse_controller_kind(name));
        }
        ensure_dir(config.output_dir);
        write_json_file((fs::path(config.output_dir) / "scenario.json").string(), scenario_to_json(base));

        // Independent runs; each task owns its scenario copy and record.
        std::vector<std::future<ControllerRun>> tasks;
        for (ControllerKind kind : kinds) {
            Scenario s = base;
            s.controller = kind;
            tasks.push_back(std::async(std::launch::async, run_controller, std::move(s)));
        }
        std::vector<ControllerRun> runs;
        for (auto& task : tasks) {
            runs.push_back(task.get());
        }

        int status = kOk;
        ordered_json compare;
        compare["scenario"] = base.name;
        compare["controllers"] = ordered_json::object();
        out << "scenario " << base.name << " (t_end = " << base.horizon.t_end << ", dt = " << base.horizon.dt << ")\n";
        for (const ControllerRun& r : runs) {
            const std::string name = to_string(r.scenario.controller);
            const fs::path csv_path = fs::path(config.output_dir) / (name + ".csv");
            std::ofstream csv(csv_path, std::ios::binary);
            if (!csv) {
                throw InputError("cannot write " + csv_path.string());
            }
            write_csv(csv, r.record);
            write_json_file((fs::path(config.output_dir) / (name + ".summary.json")).string(),
                            run_summary(r.record, r.scenario, r.report ? &*r.report : nullptr));

            const RunMetrics m = run_metrics(r.record);
            compare["controllers"][name] = {{"final_window_rms", m.final_window_rms},
                                            {"final_window_max", m.final_window_max},
                                            {"sup_u", m.sup_u},
                                            {"min_P", r.report ? ordered_json(m.min_P) : ordered_json(nullptr)}};
            out << "  " << std::left << std::setw(10) << name << " final-window rms |e| = " << sci(m.final_window_rms)
                << "  max |e| = " << sci(m.final_window_max) << "  sup |u| = " << sci(m.sup_u);
            if (r.report) {
                out << "  min P = " << sci(m.min_P);
            }
            out << '\n';
            if (r.report) {
                print_checks(out, r.report->checks);
                if (!r.report->certified()) {
                    err << name << ": certificate failed: " << join(failed_certificates(*r.report)) << '\n';
                    status = kCertificateFailure;
                }
            }
        }
        if (runs.size() > 1) {
            write_json_file((fs::path(config.output_dir) / "compare.json").string(), compare);
        }
        return status;
    });
}

int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() {
        Scenario s = load_scenario(config);
        s.controller = ControllerKind::Rise;
        const TrajectoryRecord record = run(s);
        const VerificationReport report = verify_run(record, s);
        const InverseBoundSweep inverse_bound = inverse_bound_randomized(config.seed);

        std::vector<CheckOutcome> checks = report.checks;
        checks.push_back({"inverse_bound_randomized", inverse_bound.pass,
                          std::to_string(inverse_bound.failures) + "/" + std::to_string(inverse_bound.draws) +
                              " violations, worst ratio = " + sci(inverse_bound.worst_ratio) +
                              ", tight gap = " + sci(inverse_bound.tight_gap) + " (seed " + std::to_string(config.seed) +
                              ")"});
        out << "verify " << s.name << " (beta = " << s.gains.beta << ", required > " << report.bounds.beta_required
            << ")\n";
        print_checks(out, checks);
        const bool ok = std::all_of(checks.begin(), checks.end(), [](const CheckOutcome& c) { return c.pass; });
        out << (ok ? "all checks passed" : "verification FAILED") << '\n';
        if (!config.output_dir.empty() && config.output_dir != "-") {
            ensure_dir(config.output_dir);
            ordered_json doc = run_summary(record, s, &report);
            doc["inverse_bound_randomized"] = {{"seed", config.seed},
                                        {"draws", inverse_bound.draws},
                                        {"failures", inverse_bound.failures},
                                        {"worst_ratio", inverse_bound.worst_ratio},
                                        {"tight_gap", inverse_bound.tight_gap},
                                        {"pass", inverse_bound.pass}};
            write_json_file((fs::path(config.output_dir) / "verify.json").string(), doc);
        }
        if (!ok) {
            const std::vector<std::string> failed = failed_certificates(report);
            err << "verification failed" << (failed.empty() ? "" : ": " + join(failed)) << '\n';
            return static_cast<int>(kCertificateFailure);
        }
        return static_cast<int>(kOk);
    });
}

std::string plot_script(const std::vector<PlotSource>& sources) {
    std::ostringstream py;
    py << "#!/usr/bin/env python3\n"
          "\"\"\"Plots tracking error, parameter error, control, P, V_L and projection switches.\"\"\"\n"
          "import csv\n"
          "import math\n"
          "\n"
          "import matplotlib\n"
          "matplotlib.use(\"Agg\")\n"
          "import matplotlib.pyplot as plt\n"
          "\n"
          "\n"
          "def load(path):\n"
          "    with open(path, newline=\"\") as f:\n"
          "        rows = list(csv.DictReader(f))\n"
          "    cols = rows[0].keys() if rows else []\n"
          "    def group(stem):\n"
          "        names = [c for c in cols if c.startswith(stem) and c[len(stem):].isdigit()]\n"
          "        return [[float(r[c]) for r in rows] for c in names]\n"
          "    data = {\n"
          "        \"t\": [float(r[\"t\"]) for r in rows],\n"
          "        \"e\": group(\"e\"),\n"
          "        \"u\": group(\"u\"),\n"
          "        \"P\": [float(r[\"P\"]) for r in rows],\n"
          "        \"V_L\": [float(r[\"V_L\"]) for r in rows],\n"
          "        \"boundary\": [1.0 if r[\"branch\"] == \"boundary\" else 0.0 for r in rows],\n"
          "    }\n"
          "    tilde = group(\"theta_tilde\")\n"
          "    data[\"theta_tilde_norm\"] = [math.sqrt(sum(c[k] ** 2 for c in tilde)) for k in range(len(rows))]\n"
          "    return data\n"
          "\n"
          "\n"
          "SOURCES = [\n";
    for (const PlotSource& s : sources) {
        py << "    (" << python_string(s.label) << ", " << python_string(s.path) << "),\n";
    }
    py << "]\n\n";

    bool any_switch = false;
    for (const PlotSource& s : sources) {
        any_switch = any_switch || !s.switches.empty();
    }
    if (any_switch) {
        py << "SWITCHES = {\n";
        for (const PlotSource& s : sources) {
            if (!s.switches.empty()) {
                py << "    " << python_string(s.label) << ": " << python_list(s.switches) << ",\n";
            }
        }
        py << "}\n\n";
    }

    py << "fig, axes = plt.subplots(6, 1, sharex=True, figsize=(9, 14))\n"
          "ax_e, ax_tilde, ax_u, ax_P, ax_V, ax_branch = axes\n"
          "for label, path in SOURCES:\n"
          "    d = load(path)\n"
          "    for i, e in enumerate(d[\"e\"]):\n"
          "        ax_e.plot(d[\"t\"], e, label=f\"{label} e{i + 1}\")\n"
          "    ax_tilde.plot(d[\"t\"], d[\"theta_tilde_norm\"], label=label)\n"
          "    for i, u in enumerate(d[\"u\"]):\n"
          "        ax_u.plot(d[\"t\"], u, label=f\"{label} u{i + 1}\")\n"
          "    ax_P.plot(d[\"t\"], d[\"P\"], label=label)\n"
          "    ax_V.plot(d[\"t\"], d[\"V_L\"], label=label)\n"
          "    ax_branch.step(d[\"t\"], d[\"boundary\"], where=\"post\", label=label)\n";
    if (any_switch) {
        py << "    for ts in SWITCHES.get(label, []):\n"
              "        ax_branch.axvline(ts, color=\"red\", alpha=0.3, linewidth=0.5)\n";
    }
    py << "ax_e.set_ylabel(\"e(t)\")\n"
          "ax_tilde.set_ylabel(\"||theta_tilde(t)||\")\n"
          "ax_u.set_ylabel(\"u(t)\")\n"
          "ax_P.set_ylabel(\"P(t)\")\n"
          "ax_V.set_ylabel(\"V_L(t)\")\n"
          "ax_branch.set_ylabel(\"boundary branch\")\n"
          "ax_branch.set_xlabel(\"t [s]\")\n"
          "for ax in axes:\n"
          "    ax.grid(True, alpha=0.3)\n"
          "    ax.legend(loc=\"upper right\", fontsize=\"small\")\n"
          "fig.tight_layout()\n"
          "fig.savefig(__file__.rsplit(\".\", 1)[0] + \".png\", dpi=120)\n";
    return py.str();
}

int cmd_plot(const std::vector<std::string>& csv_paths, const std::string& output_dir, std::ostream& out,
             std::ostream& err) {
    return guarded(err, [&]() {
        if (csv_paths.empty()) {
            throw InputError("plot: at least one CSV is required");
        }
        std::vector<PlotSource> sources;
        for (const std::string& path : csv_paths) {
            std::ifstream in(path, std::ios::binary);
            if (!in) {
                throw InputError(path + ": cannot open CSV");
            }
            CsvTable table;
            try {
                table = read_csv(in);
                if (table.rows.empty()) {
                    throw InputError("no samples");
                }
                const std::vector<double> t = table.numeric("t");
                for (const char* col : {"e1", "u1", "theta_tilde1", "P", "V_L"}) {
                    (void)table.numeric(col);
                }
                const std::size_t branch = table.column("branch");
                const std::vector<double> switching = table.numeric("switching");
                PlotSource src{fs::absolute(path).string(), fs::path(path).stem().string(), {}};
                for (std::size_t k = 0; k < table.rows.size(); ++k) {
                    const std::string& b = table.rows[k][branch];
                    if (b != "interior" && b != "boundary") {
                        throw InputError("row " + std::to_string(k + 1) + ": unknown branch '" + b + "'");
                    }
                    if (switching[k] != 0.0) {
                        src.switches.push_back(t[k]);
                    }
                }
                sources.push_back(std::move(src));
            } catch (const InputError& ex) {
                throw InputError(path + ": " + ex.what());
            }
        }
        const std::string dir = output_dir.empty() ? fs::path(csv_paths.front()).parent_path().string() : output_dir;
        if (!dir.empty()) {
            ensure_dir(dir);
        }
        const std::string stem = sources.size() == 1 ? "plot_" + sources.front().label : std::string("plot_compare");
        const fs::path script = fs::path(dir) / (stem + ".py");
        std::ofstream py(script, std::ios::binary);
        if (!py) {
            throw InputError("cannot write " + script.string());
        }
        py << plot_script(sources);
        out << "wrote " << script.string() << '\n';
        return static_cast<int>(kOk);
    });
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Adaptive RISE-like tracking control for systems with time-varying parameters"};
    app.require_subcommand(1);

    RunConfig run_cfg;
    std::string controllers = "rise";
    const auto add_common = [&](CLI::App* sub) {
        auto* scen = sub->add_option("--scenario", run_cfg.scenario, "built-in scenario name")
                         ->capture_default_str();
        sub->add_option("--config", run_cfg.config_path, "JSON scenario config file")
            ->check(CLI::ExistingFile)
            ->excludes(scen);
        sub->add_option("--override", run_cfg.overrides, "KEY=VAL override (repeatable)")->take_all();
        sub->add_option("--seed", run_cfg.seed, "seed for randomized checks")->capture_default_str();
        sub->add_option("--dt", run_cfg.dt, "integration step");
        sub->add_option("--t-end", run_cfg.t_end, "horizon length");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "simulate one or more controllers and write CSV/JSON artifacts");
    add_common(run_cmd);
    run_cmd->add_option("--controllers", controllers, "comma-separated: rise,sigma_mod,robust,gradient")
        ->capture_default_str();
    run_cmd->add_option("--out", run_cfg.output_dir, "output directory")->capture_default_str();

    std::string verify_out;
    CLI::App* verify_cmd = app.add_subcommand("verify", "run the invariant suite on a scenario");
    add_common(verify_cmd);
    verify_cmd->add_option("--out", verify_out, "optional directory for verify.json");

    std::vector<std::string> csvs;
    std::string plot_out;
    CLI::App* plot_cmd = app.add_subcommand("plot", "emit a matplotlib script for trajectory CSVs");
    plot_cmd->add_option("csv", csvs, "trajectory CSV files")->required();
    plot_cmd->add_option("--out", plot_out, "directory for the script (default: next to the first CSV)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& ex) {
        err << "usage error: " << ex.what() << '\n';
        return kConfigFailure;
    }

    if (run_cmd->parsed()) {
        run_cfg.controllers = split_list(controllers);
        return cmd_run(run_cfg, out, err);
    }
    if (verify_cmd->parsed()) {
        run_cfg.output_dir = verify_out;
        return cmd_verify(run_cfg, out, err);
    }
    return cmd_plot(csvs, plot_out, out, err);
}

} // namespace tvrise::cli
