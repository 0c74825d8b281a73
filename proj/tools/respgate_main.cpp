#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "respgate/directionality.hpp"
#include "respgate/evaluation.hpp"
#include "respgate/heartbeat.hpp"
#include "respgate/phantom.hpp"
#include "respgate/stack_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace respgate;

namespace {

constexpr const char* kVersion = "0.1.0";

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

json ledger_json(const SignLedger& ledger) {
    json j;
    j["pairwise_r"] = ledger.pairwise_r;
    j["zmc_s"] = ledger.zmc_s;
    std::vector<int> flips(ledger.applied_flips.begin(), ledger.applied_flips.end());
    j["applied_flips"] = flips;
    j["global_sign"] = ledger.global_sign;
    j["consensus_score"] = ledger.consensus_score;
    j["excluded_slices"] = ledger.excluded_slices;
    return j;
}

// Minimal static plot: one polyline per slice, vertically stacked, with
// PE/PI heartbeat windows marked when available.
void write_report_svg(const fs::path& path,
                      const std::vector<RespSignal>& signals,
                      const std::vector<std::pair<int, int>>& pe_windows,
                      const std::vector<std::pair<int, int>>& pi_windows) {
    const int lane_h = 60, pad = 10, width = 800;
    const int j_count = static_cast<int>(signals.size());
    const int height = j_count * lane_h + 2 * pad;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
        << "' height='" << height << "'>\n";
    for (int j = 0; j < j_count; ++j) {
        const auto& v = signals[j].values;
        const int n = static_cast<int>(v.size());
        double lo = v[0], hi = v[0];
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        if (hi == lo) hi = lo + 1.0;
        const double y0 = pad + j * lane_h;
        auto px = [&](int i) { return pad + (width - 2.0 * pad) * i / (n - 1); };
        auto py = [&](double val) {
            return y0 + 5 + (lane_h - 10) * (hi - val) / (hi - lo);
        };
        out << "<polyline fill='none' stroke='#336' stroke-width='1' points='";
        for (int i = 0; i < n; ++i) out << px(i) << "," << py(v[i]) << " ";
        out << "'/>\n";
        auto mark = [&](const std::pair<int, int>& w, const char* color) {
            if (w.first < 0) return;
            out << "<rect x='" << px(w.first) << "' y='" << y0 + 2 << "' width='"
                << px(w.second) - px(w.first) << "' height='" << lane_h - 4
                << "' fill='" << color << "' fill-opacity='0.25'/>\n";
        };
        if (j < static_cast<int>(pe_windows.size())) mark(pe_windows[j], "#2a2");
        if (j < static_cast<int>(pi_windows.size())) mark(pi_windows[j], "#a22");
        out << "<text x='" << pad + 2 << "' y='" << y0 + 12
            << "' font-size='10'>slice " << signals[j].slice_index
            << "</text>\n";
    }
    out << "</svg>\n";
}

struct ExtractArtifacts {
    json summary;
};

// Runs resolve + heartbeat selection on a stack and writes every artifact
// into `out_dir`. Shared by `extract` and the `eval --split` path.
ExtractArtifacts run_extract(const CineStack& stack, const ResolveOptions& opts,
                             BeatScore score, const fs::path& out_dir) {
    const double fs_hz = 1.0 / stack.frame_period_s();
    const auto kernel = design_lowpass(fs_hz, opts.cutoff_hz);
    const auto res = resolve(stack, kernel, opts);

    fs::create_directories(out_dir);
    write_json(out_dir / "ledger.json", ledger_json(res.ledger));

    json beats = json::array();
    std::vector<std::pair<int, int>> pe_windows, pi_windows;
    for (int j = 0; j < stack.slice_count(); ++j) {
        pe_windows.emplace_back(-1, -1);
        pi_windows.emplace_back(-1, -1);
        const auto& rw = stack.slices[j].rwave_times_s;
        if (rw.size() < 2) continue;
        json entry;
        entry["slice"] = j;
        try {
            const auto windows = segment_heartbeats(rw, stack.frame_period_s(),
                                                    stack.frames());
            const auto kept = reject_arrhythmic(windows);
            const auto sel = select_pe_pi(kept, res.signals[j], score);
            entry["windows"] = json::array();
            for (std::size_t k = 0; k < windows.size(); ++k) {
                const auto& w = windows[k];
                const bool accepted =
                    std::any_of(kept.begin(), kept.end(), [&](const auto& kw) {
                        return kw.start_frame == w.start_frame;
                    });
                json jw;
                jw["start_frame"] = w.start_frame;
                jw["end_frame"] = w.end_frame;
                jw["rr_s"] = w.rr_s;
                jw["accepted"] = accepted;
                std::string designation;
                if (w.start_frame == sel.pe.start_frame) designation += "PE";
                if (w.start_frame == sel.pi.start_frame)
                    designation += designation.empty() ? "PI" : "+PI";
                jw["designation"] = designation;
                entry["windows"].push_back(jw);
            }
            if (sel.degenerate)
                std::cerr << "warning: slice " << j
                          << ": single heartbeat serves both PE and PI\n";
            pe_windows[j] = {sel.pe.start_frame, sel.pe.end_frame};
            pi_windows[j] = {sel.pi.start_frame, sel.pi.end_frame};
        } catch (const HeartbeatError& e) {
            entry["error"] = e.what();
        }
        beats.push_back(entry);
    }
    write_json(out_dir / "beats.json", beats);

    json summary;
    summary["slices"] = stack.slice_count();
    summary["frames"] = stack.frames();
    summary["frame_period_s"] = stack.frame_period_s();
    summary["eigenvalues"] = res.eigenvalues;
    summary["global_sign"] = res.ledger.global_sign;
    summary["consensus_score"] = res.ledger.consensus_score;
    summary["sd_convention"] = "sample (N-1)";
    save_signals(out_dir, res.signals, res.zmc, summary.dump(2));
    write_report_svg(out_dir / "report.svg", res.signals, pe_windows, pi_windows);
    return ExtractArtifacts{summary};
}

json eval_stack_against_truth(const std::vector<std::vector<double>>& columns,
                              const PhantomTruth& truth) {
    std::vector<RespSignal> signals;
    for (std::size_t j = 0; j < columns.size(); ++j)
        signals.push_back({columns[j], SignState::GloballyCorrected,
                           static_cast<int>(j)});
    const auto corr = correlate_with_reference(signals, truth.resp_signal);
    const auto stats = summarize(corr);
    json j;
    j["per_slice_r"] = corr;
    j["sign_accuracy"] = sign_accuracy(corr);
    j["mean"] = stats.mean;
    j["sd"] = stats.sd;
    j["median"] = stats.median;
    j["min"] = stats.min;
    j["max"] = stats.max;
    j["sd_convention"] = "sample (N-1)";
    return j;
}

void print_eval_table(const json& j, const std::string& label) {
    std::printf("%-12s mean±SD %.3f±%.3f  median %.3f  range %.3f–%.3f  "
                "sign_accuracy %.2f\n",
                label.c_str(), j["mean"].get<double>(), j["sd"].get<double>(),
                j["median"].get<double>(), j["min"].get<double>(),
                j["max"].get<double>(), j["sign_accuracy"].get<double>());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Respiratory signal extraction and directionality resolution "
                 "for multi-slice real-time cine stacks"};
    app.require_subcommand(1);

    // ---- phantom ----
    auto* cmd_phantom = app.add_subcommand(
        "phantom", "Generate a synthetic cine stack with known ground truth");
    PhantomConfig cfg;
    std::string resp_pattern = "periodic", orientation = "aligned";
    std::string phantom_out = "phantom";
    cmd_phantom->add_option("--slices", cfg.slices, "Number of slices");
    cmd_phantom->add_option("--rows", cfg.rows, "Vertical pixels");
    cmd_phantom->add_option("--cols", cfg.cols, "Horizontal pixels");
    cmd_phantom->add_option("--frames", cfg.frames, "Frames per slice");
    cmd_phantom->add_option("--dt", cfg.frame_period_s, "Frame period [s]");
    cmd_phantom->add_option("--resp-pattern", resp_pattern,
                            "periodic|long-cycle|irregular|with-drift");
    cmd_phantom->add_option("--resp-period", cfg.resp_period_s,
                            "Respiratory period [s]");
    cmd_phantom->add_option("--resp-amp", cfg.resp_amp_px,
                            "Respiratory amplitude [px]");
    cmd_phantom->add_option("--cardiac-rate", cfg.cardiac_rate_hz,
                            "Cardiac rate [Hz]");
    cmd_phantom->add_option("--cardiac-amp", cfg.cardiac_amp_px,
                            "Cardiac amplitude [px]");
    cmd_phantom->add_option("--noise", cfg.noise_sigma, "Noise sigma");
    cmd_phantom->add_option("--orientation", orientation,
                            "aligned|transposed|flipped|oblique");
    cmd_phantom->add_option("--seed", cfg.seed, "PRNG seed");
    cmd_phantom->add_option("--out", phantom_out, "Output directory");

    // ---- extract ----
    auto* cmd_extract = app.add_subcommand(
        "extract", "Extract sign-resolved respiratory signals from a stack");
    std::string stack_dir, extract_out = "extract";
    ResolveOptions opts;
    std::string score_name = "mean";
    cmd_extract->add_option("stack", stack_dir, "Stack directory")->required();
    cmd_extract->add_option("--cutoff-hz", opts.cutoff_hz,
                            "Low-pass cutoff [Hz]");
    cmd_extract->add_option("--tau", opts.tau, "ZMC consensus threshold");
    cmd_extract->add_flag("--zmc-unfiltered", opts.zmc_unfiltered,
                          "Compute ZMC on the unfiltered series");
    cmd_extract->add_option("--score", score_name,
                            "Heartbeat scoring: mean|first-frame");
    cmd_extract->add_option("--out", extract_out, "Output directory");

    // ---- eval ----
    auto* cmd_eval = app.add_subcommand(
        "eval", "Score extracted signals against phantom ground truth");
    std::string eval_signals, eval_truth, eval_stack, eval_out;
    int split_parts = 1;
    double eval_cutoff = 0.8, eval_tau = 0.7;
    cmd_eval->add_option("signals", eval_signals,
                         "Extraction output directory")->required();
    cmd_eval->add_option("truth", eval_truth, "truth.json path")->required();
    cmd_eval->add_option("--stack", eval_stack,
                         "Stack directory (required for --split)");
    cmd_eval->add_option("--split", split_parts,
                         "Split each series into this many parts and "
                         "re-evaluate per part");
    cmd_eval->add_option("--cutoff-hz", eval_cutoff, "Cutoff for --split runs");
    cmd_eval->add_option("--tau", eval_tau, "Threshold for --split runs");
    cmd_eval->add_option("--out", eval_out,
                         "Output directory (default: signals dir)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_phantom) {
            cfg.resp_pattern = resp_pattern_from_string(resp_pattern);
            cfg.orientation = orientation_from_string(orientation);
            cfg.validate();
            const auto result = generate(cfg);
            const fs::path out = phantom_out;
            save_stack(result.stack, out);
            save_truth(result.truth, out / "truth.json");
            json run;
            run["command"] = "phantom";
            run["version"] = kVersion;
            run["slices"] = cfg.slices;
            run["rows"] = cfg.rows;
            run["cols"] = cfg.cols;
            run["frames"] = cfg.frames;
            run["dt"] = cfg.frame_period_s;
            run["resp_pattern"] = to_string(cfg.resp_pattern);
            run["resp_period_s"] = cfg.resp_period_s;
            run["resp_amp_px"] = cfg.resp_amp_px;
            run["cardiac_rate_hz"] = cfg.cardiac_rate_hz;
            run["cardiac_amp_px"] = cfg.cardiac_amp_px;
            run["noise_sigma"] = cfg.noise_sigma;
            run["orientation"] = to_string(cfg.orientation);
            run["seed"] = cfg.seed;
            write_json(out / "run.json", run);
            std::cout << "phantom written to " << out.string() << "\n";
        } else if (*cmd_extract) {
            const BeatScore score = score_name == "first-frame"
                                        ? BeatScore::FirstFrame
                                        : BeatScore::MeanSignal;
            if (score_name != "mean" && score_name != "first-frame")
                throw IoError("unknown --score '" + score_name + "'");
            const auto stack = load_stack(stack_dir);
            const fs::path out = extract_out;
            try {
                run_extract(stack, opts, score, out);
            } catch (const UndeterminedDirectionality& e) {
                fs::create_directories(out);
                write_json(out / "ledger.json", ledger_json(e.ledger));
                std::cerr << "error: " << e.what() << " (ledger dumped to "
                          << (out / "ledger.json").string() << ")\n";
                return 2;
            }
            json run;
            run["command"] = "extract";
            run["version"] = kVersion;
            run["stack"] = stack_dir;
            run["cutoff_hz"] = opts.cutoff_hz;
            run["tau"] = opts.tau;
            run["zmc_unfiltered"] = opts.zmc_unfiltered;
            run["score"] = score_name;
            write_json(out / "run.json", run);
            std::cout << "extraction written to " << out.string() << "\n";
        } else if (*cmd_eval) {
            const auto truth = load_truth(eval_truth);
            const fs::path out = eval_out.empty() ? fs::path(eval_signals)
                                                  : fs::path(eval_out);
            fs::create_directories(out);
            json report;
            const auto columns =
                load_signal_columns(fs::path(eval_signals) / "signals.csv");
            report["full"] = eval_stack_against_truth(columns, truth);
            print_eval_table(report["full"], "full series");

            if (split_parts > 1) {
                if (eval_stack.empty())
                    throw IoError("--split requires --stack");
                const auto stack = load_stack(eval_stack);
                const auto parts = split_series(stack, split_parts);
                const auto truths =
                    split_truth(truth, stack.frames(), split_parts);
                report["parts"] = json::array();
                for (int p = 0; p < split_parts; ++p) {
                    const fs::path part_dir =
                        out / ("part_" + std::to_string(p));
                    json entry;
                    entry["part"] = p;
                    try {
                        ResolveOptions part_opts;
                        part_opts.cutoff_hz = eval_cutoff;
                        part_opts.tau = eval_tau;
                        run_extract(parts[p], part_opts, BeatScore::MeanSignal,
                                    part_dir);
                        const auto part_cols =
                            load_signal_columns(part_dir / "signals.csv");
                        entry["result"] =
                            eval_stack_against_truth(part_cols, truths[p]);
                        print_eval_table(entry["result"],
                                         "part " + std::to_string(p));
                    } catch (const UndeterminedDirectionality& e) {
                        entry["undetermined"] = true;
                        entry["ledger"] = ledger_json(e.ledger);
                        std::printf("part %-7d directionality undetermined\n", p);
                    }
                    report["parts"].push_back(entry);
                }
            }
            write_json(out / "summary.json", report);
            json run;
            run["command"] = "eval";
            run["version"] = kVersion;
            run["signals"] = eval_signals;
            run["truth"] = eval_truth;
            run["split"] = split_parts;
            run["cutoff_hz"] = eval_cutoff;
            run["tau"] = eval_tau;
            write_json(out / "run.json", run);
        }
    } catch (const UndeterminedDirectionality& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
